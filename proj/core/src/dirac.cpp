#include "csd/dirac.hpp"

#include <cmath>
#include <stdexcept>

namespace csd {

Mat2 Mat2::identity() {
    Mat2 m;
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    return m;
}

Mat2 Mat2::dagger() const {
    Mat2 m;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m(r, c) = std::conj((*this)(c, r));
    return m;
}

double Mat2::max_abs() const {
    double x = 0.0;
    for (const auto& z : a) x = std::max(x, std::abs(z));
    return x;
}

Mat2 operator+(const Mat2& x, const Mat2& y) {
    Mat2 m;
    for (int i = 0; i < 4; ++i) m.a[i] = x.a[i] + y.a[i];
    return m;
}

Mat2 operator-(const Mat2& x, const Mat2& y) {
    Mat2 m;
    for (int i = 0; i < 4; ++i) m.a[i] = x.a[i] - y.a[i];
    return m;
}

Mat2 operator*(const Mat2& x, const Mat2& y) {
    Mat2 m;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m(r, c) = x(r, 0) * y(0, c) + x(r, 1) * y(1, c);
    return m;
}

Mat2 operator*(cplx c, const Mat2& x) {
    Mat2 m;
    for (int i = 0; i < 4; ++i) m.a[i] = c * x.a[i];
    return m;
}

std::array<cplx, 2> operator*(const Mat2& x, const std::array<cplx, 2>& v) {
    return {x(0, 0) * v[0] + x(0, 1) * v[1], x(1, 0) * v[0] + x(1, 1) * v[1]};
}

Mat2 alpha(int mu) {
    Mat2 m;
    switch (mu) {
        case 0:
            return Mat2::identity();
        case 1:
            m(0, 1) = 1.0;
            m(1, 0) = 1.0;
            return m;
        case 2:
            m(0, 1) = cplx(0.0, -1.0);
            m(1, 0) = cplx(0.0, 1.0);
            return m;
        default:
            throw std::out_of_range("alpha index must be 0, 1 or 2");
    }
}

Mat2 beta() {
    Mat2 m;
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

int levi_civita(int mu, int nu, int lam) {
    for (int i : {mu, nu, lam})
        if (i < 0 || i > 2) throw std::out_of_range("Levi-Civita index must be 0, 1 or 2");
    return (mu - nu) * (nu - lam) * (lam - mu) / 2;
}

Mat2 projection(const Vec2& xi, Sign s) {
    const double r = std::hypot(xi[0], xi[1]);
    if (r == 0.0) throw std::invalid_argument("projection undefined at xi = 0");
    const double c1 = sgn(s) * xi[0] / r;
    const double c2 = sgn(s) * xi[1] / r;
    Mat2 m;
    m(0, 0) = 0.5;
    m(1, 1) = 0.5;
    m(0, 1) = 0.5 * cplx(c1, -c2);
    m(1, 0) = 0.5 * cplx(c1, c2);
    return m;
}

Mat2 projection_policy(const Vec2& xi, Sign s) {
    if (xi[0] == 0.0 && xi[1] == 0.0) return cplx(0.5) * Mat2::identity();
    return projection(xi, s);
}

double riesz_symbol(int mu, Sign s, const Vec2& xi) {
    if (mu == 0) return -1.0;
    if (mu != 1 && mu != 2) throw std::out_of_range("Riesz index must be 0, 1 or 2");
    const double r = std::hypot(xi[0], xi[1]);
    if (r == 0.0) return 0.0;
    return -sgn(s) * xi[mu - 1] / r;
}

SpinorField apply_matrix_symbol(const SpinorField& psi, const std::function<Mat2(const Vec2&)>& m) {
    SpinorField out = to_fourier(psi);
    const Grid2D& g = out.grid();
    for (int i1 = 0; i1 < g.n(); ++i1) {
        for (int i2 = 0; i2 < g.n(); ++i2) {
            const Mat2 p = m(g.xi(i1, i2));
            const std::array<cplx, 2> r = p * std::array<cplx, 2>{out.up.at(i1, i2), out.down.at(i1, i2)};
            out.up.at(i1, i2) = r[0];
            out.down.at(i1, i2) = r[1];
        }
    }
    return out;
}

SpinorField project_spinor(const SpinorField& psi, Sign s) {
    return apply_matrix_symbol(psi, [s](const Vec2& xi) { return projection_policy(xi, s); });
}

ScalarField riesz(int mu, Sign s, const ScalarField& f) {
    if (mu < 0 || mu > 2) throw std::out_of_range("Riesz index must be 0, 1 or 2");
    return multiplier(f, [mu, s](const Vec2& xi) { return cplx(riesz_symbol(mu, s, xi)); });
}

ScalarField halfwave(const ScalarField& f, double t, Sign s) {
    const double ph = -sgn(s) * t;
    return multiplier(f, [ph](const Vec2& xi) { return std::polar(1.0, ph * std::hypot(xi[0], xi[1])); });
}

SpinorField halfwave(const SpinorField& f, double t, Sign s) {
    return SpinorField(halfwave(f.up, t, s), halfwave(f.down, t, s));
}

Mat2 commutation_defect(const Vec2& xi, int mu, Sign s) {
    const Mat2 p = projection(xi, s);
    const Mat2 q = projection(xi, flip(s));
    const Mat2 a = alpha(mu);
    return a * p - q * a * p + cplx(riesz_symbol(mu, s, xi)) * p;
}

}  // namespace csd
