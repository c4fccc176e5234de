// Dirac matrices, projections Pi_pm, Riesz transforms and the half-wave group.
#pragma once

#include <array>

#include "csd/fourier.hpp"

namespace csd {

enum class Sign : int { plus = 1, minus = -1 };

inline int sgn(Sign s) { return static_cast<int>(s); }
inline Sign flip(Sign s) { return s == Sign::plus ? Sign::minus : Sign::plus; }
inline constexpr std::array<Sign, 2> both_signs{Sign::plus, Sign::minus};
inline int sign_index(Sign s) { return s == Sign::plus ? 0 : 1; }

struct Mat2 {
    std::array<cplx, 4> a{};  // row-major

    cplx& operator()(int r, int c) { return a[2 * r + c]; }
    const cplx& operator()(int r, int c) const { return a[2 * r + c]; }

    static Mat2 identity();
    Mat2 dagger() const;
    double max_abs() const;
};

Mat2 operator+(const Mat2& x, const Mat2& y);
Mat2 operator-(const Mat2& x, const Mat2& y);
Mat2 operator*(const Mat2& x, const Mat2& y);
Mat2 operator*(cplx c, const Mat2& x);
std::array<cplx, 2> operator*(const Mat2& x, const std::array<cplx, 2>& v);

Mat2 alpha(int mu);
Mat2 beta();
int levi_civita(int mu, int nu, int lam);

// Pi_s(xi) = (I + s xi_j alpha^j/|xi|)/2; throws for xi = 0.
Mat2 projection(const Vec2& xi, Sign s);
// Same with the zero-mode policy Pi_s(0) = I/2.
Mat2 projection_policy(const Vec2& xi, Sign s);
// Symbol of R^mu_s: -1 for mu = 0, -s xi_j/|xi| for mu = j (0 at xi = 0).
double riesz_symbol(int mu, Sign s, const Vec2& xi);

// Matrix-valued Fourier multiplier on a spinor.
SpinorField apply_matrix_symbol(const SpinorField& psi, const std::function<Mat2(const Vec2&)>& m);

SpinorField project_spinor(const SpinorField& psi, Sign s);
ScalarField riesz(int mu, Sign s, const ScalarField& f);
ScalarField halfwave(const ScalarField& f, double t, Sign s);
SpinorField halfwave(const SpinorField& f, double t, Sign s);

// alpha^mu Pi_s - Pi_{-s} alpha^mu Pi_s + r^mu_s Pi_s; identically zero.
Mat2 commutation_defect(const Vec2& xi, int mu, Sign s);

}  // namespace csd
