// Rectangle data families, the phase multipliers m123 and m12345, and the
// scaling sweeps for the second and third flow derivatives at t = eps lambda^{-1/2}.
//
// All frequency integrals here are continuum integrals (no periodic grid) with
// the (2 pi)^{-2} per-product Plancherel convention.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "csd/dirac.hpp"
#include "csd/fourier.hpp"

namespace csd {

enum class Rect { W, Wstar, Wtilde, Wstarstar };

struct RectSpec {
    Rect variant = Rect::W;
    double lambda = 64.0;
};

// Axis-aligned box [lo1, hi1] x [lo2, hi2].
struct Box {
    double lo1 = 0.0, hi1 = 0.0, lo2 = 0.0, hi2 = 0.0;

    bool empty() const { return !(hi1 > lo1) || !(hi2 > lo2); }
    double area() const { return empty() ? 0.0 : (hi1 - lo1) * (hi2 - lo2); }
    bool contains(const Vec2& x) const { return x[0] >= lo1 && x[0] <= hi1 && x[1] >= lo2 && x[1] <= hi2; }
};

Box intersect(const Box& a, const Box& b);
Box shift(const Box& a, const Vec2& v);
Box negate(const Box& a);
// Minkowski sum a + b.
Box minkowski(const Box& a, const Box& b);

// Wstar constants: {3 xi1^2 <= xi2^2} and |xi| <= 2 lambda^{1/2}, |xi2| in [lambda^{1/2}/2, lambda^{1/2}].
inline constexpr double kWstarC1 = 2.0;
inline constexpr double kWstarC2 = 0.5;
inline constexpr double kWstarC3 = 1.0;

void validate(const RectSpec& spec);
// Exact region for W, Wtilde, Wstarstar; bounding box for Wstar.
Box rect_box(const RectSpec& spec);
bool rect_indicator(const RectSpec& spec, const Vec2& xi);
// phi^ = chi on the lattice (Fourier representation); throws if the grid does not resolve the region.
ScalarField rect_data(const RectSpec& spec, const Grid2D& g);
// (phi, -phi)^T / sqrt 2.
SpinorField rect_spinor(const RectSpec& spec, const Grid2D& g);

// lambda_k = 4 k^2 pi^2 / eps^2, so that eps lambda^{1/2} = 2 pi k.
double lambda_of_k(int k, double eps);
// Family member nearest to target (k >= 1).
int snap_k(double target, double eps);

// (e^z - 1)/z for z = i x, cancellation-free.
cplx phi1_imag(double x);
cplx m123(double t, double omega);
// s1 |xi| + s2 |xi - eta| - s3 |eta|
double omega123(const Vec2& xi, const Vec2& eta, const std::array<Sign, 3>& s);
// s1 |xi| - s2 |xi - eta| - s3 |eta|
double omega123_tilde(const Vec2& xi, const Vec2& eta, const std::array<Sign, 3>& s);

// Divided difference exp[a, b, c] (Hermite-Genocchi: the simplex integral).
cplx exp_divdiff(cplx a, cplx b, cplx c);

struct Omega5 {
    double w0 = 0.0, w1 = 0.0, w2 = 0.0;
};

Omega5 omegas5(const Vec2& xi, const Vec2& eta, const Vec2& zeta, const std::array<Sign, 5>& s);
cplx m12345(double t, const Vec2& xi, const Vec2& eta, const Vec2& zeta, const std::array<Sign, 5>& s);

struct OracleResult {
    cplx value;
    bool converged = false;
    int panels = 0;
};

// Composite Gauss-Legendre on the nested time integral, panels doubled until
// successive levels agree to tol * t^2.
OracleResult m12345_oracle(double t, const Vec2& xi, const Vec2& eta, const Vec2& zeta,
                           const std::array<Sign, 5>& s, double tol = 1e-10);

// Nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

struct QuadratureOptions {
    int q0 = 8;           // midpoint points per axis at the first level
    double rtol = 1e-6;
    int max_levels = 6;
};

// F2^(t, xi) = (2pi)^{-2} sum e^{-i s1 t|xi|} (-1 - s1 xi1/|xi|) \int_{W cap (W + xi)} m123 d eta.
// per_triple, if given, receives the eight summands in the order of sign_triples().
cplx f2_hat(double t, const Vec2& xi, double lambda, const QuadratureOptions& q = {},
            std::array<cplx, 8>* per_triple = nullptr, bool* converged = nullptr);
std::array<std::array<Sign, 3>, 8> sign_triples();

// Fourier transform of sum \int_0^t U_{s1}(t-t') Pi_{s1}(A^hom_{mu,s2} alpha^mu U_{s3} psi0) dt'
// with a0^ = chi_Wtilde and psi0 = (phi, -phi)/sqrt 2, phi^ = chi_W.
std::array<cplx, 2> aflow_hat(double t, const Vec2& xi, double lambda, const QuadratureOptions& q = {},
                              bool* converged = nullptr);

// Integrand of the first spinor component of the cubic term at (eta, zeta), summed over
// the 32 sign tuples and split into the M1, M2, M3 pieces; (2pi)^{-4} included.
std::array<cplx, 3> cubic_integrand(double t, const Vec2& xi, const Vec2& eta, const Vec2& zeta);

struct McEstimate {
    cplx value;
    std::array<cplx, 3> parts{};
    double variance = 0.0;  // of the estimator of value
    long samples = 0;
};

// eta stratified over (xi - W) cap (W - W) (strata x strata cells, two samples each),
// zeta uniform in W cap (W + eta).
McEstimate cubic_hat_mc(double t, const Vec2& xi, double lambda, int strata, std::uint64_t seed);

// (2pi)^{-2} \int_box (1 + |xi|)^{2s} d xi by tensor Gauss-Legendre.
double weighted_box_mass(const Box& b, double s, int panels = 8, int order = 16);

struct SweepPoint {
    int k = 0;
    double lambda = 0.0;
    double t = 0.0;
    double term = 0.0;      // H^s norm of the flow-derivative term
    double data = 0.0;      // matching power/product of data norms
    double ratio = 0.0;
    double rel_error = 0.0; // quadrature or Monte-Carlo relative error
    bool flagged = false;   // excluded from the fit
    std::vector<double> parts;  // cubic: norms of the M1, M2, M3 pieces
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<double> residuals;
};

// Least squares of log(y) on log(x).
LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingReport {
    std::string kind;
    double s = 0.0;
    double eps = 0.0;
    std::vector<SweepPoint> points;
    LineFit term_fit, data_fit, ratio_fit;
    double predicted_term = 0.0, predicted_data = 0.0, predicted_ratio = 0.0;
};

struct SweepOptions {
    double eps = 0.05;
    std::vector<int> ks{1, 2, 3, 4};
    int cells = 48;          // xi cells per axis
    QuadratureOptions quad{};
    int strata = 32;         // cubic: eta strata per axis (two samples each)
    std::uint64_t seed = 1;
    double max_mc_error = 0.2;
};

// One report per s; the spectra are computed once per lambda.
std::vector<ScalingReport> f2_sweep(const std::vector<double>& s_values, const SweepOptions& opt);
std::vector<ScalingReport> aflow_sweep(const std::vector<double>& s_values, const SweepOptions& opt);
std::vector<ScalingReport> cubic_sweep(const std::vector<double>& s_values, const SweepOptions& opt);

}  // namespace csd
