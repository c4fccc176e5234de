// Interaction geometry, angular Whitney sectors, null forms and the
// measurement harnesses for the bilinear and null-form estimates.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "csd/besov.hpp"
#include "csd/dirac.hpp"
#include "csd/fourier.hpp"

namespace csd {

struct STPoint {
    double tau = 0.0;
    Vec2 xi{0.0, 0.0};
};

enum class Relation { sum, difference };  // X0 = X1 + X2 or X0 = X1 - X2

struct Interaction {
    STPoint X0, X1, X2;
    std::array<Sign, 3> signs{Sign::plus, Sign::plus, Sign::plus};
    Relation relation = Relation::difference;
};

Interaction make_interaction(const STPoint& X1, const STPoint& X2, const std::array<Sign, 3>& signs,
                             Relation relation);

// Angle in [0, pi] between two nonzero vectors.
double angle(const Vec2& a, const Vec2& b);
// angle(s1 xi1, s2 xi2); throws for a zero vector.
double theta(const Vec2& xi1, const Vec2& xi2, Sign s1, Sign s2);
// h_j = tau_j + s_j |xi_j|.
std::array<double, 3> modulations(const Interaction& x);

// h0 - h1 + h2 for X0 = X1 - X2; depends only on (xi1, xi2, signs) and is computed
// without cancellation from s0|xi0|^2 - p^2 = 4 s1 s2 |xi1||xi2| sin^2(theta12/2).
double modulation_defect(const Vec2& xi1, const Vec2& xi2, const std::array<Sign, 3>& signs);

// inf over a lattice of interactions of max|h_j| / (min(|xi1|,|xi2|) theta12^2),
// minimized over tau analytically (the optimal tau gives |h0 -+ h1 +- h2| / 3).
double interaction_ratio_infimum(int radial = 241, int angular = 721);
// Interaction constant c = margin * infimum.
double calibrate_interaction_constant(double margin = 0.9);
// Constant of theta12 <= C_p (max|h| / min|xi|)^p, 0 <= p <= 1/2.
double interpolation_constant(double c, double p);

struct InteractionCheck {
    long samples = 0;
    long violations = 0;
    std::array<long, 3> interpolation_violations{0, 0, 0};  // p = 0, 1/4, 1/2
    double min_ratio = 0.0;
};

InteractionCheck interaction_inequality_check(long samples, double c, std::uint64_t seed);

// Uniform angular lattice of floor(2 pi / gamma) unit vectors.
std::vector<Vec2> omega_set(double gamma);
bool in_sector(const Vec2& xi, const Vec2& omega, double gamma);
bool in_strip(const Vec2& xi, const Vec2& omega, double r);

// Sharp cutoffs; sector_project keeps s xi in Gamma_gamma(omega) (never xi = 0).
ScalarField sector_project(const ScalarField& f, const Vec2& omega, double gamma, Sign s);
SpaceTimeField sector_project(const SpaceTimeField& u, const Vec2& omega, double gamma, Sign s);
ScalarField strip_project(const ScalarField& f, const Vec2& omega, double r);
SpaceTimeField strip_project(const SpaceTimeField& u, const Vec2& omega, double r);

bool whitney_covered(const Vec2& xi1, const Vec2& xi2, double gamma, int k, const std::vector<Vec2>& omegas);

struct WhitneyCheck {
    long samples = 0;
    long violations = 0;
};

// Pairs with angle <= k gamma, including exact-boundary pairs every tenth sample.
WhitneyCheck whitney_cover_check(double gamma, int k, long samples, std::uint64_t seed);

// F B(X0) = sum_{X0 = X1 + X2} angle(s1 xi1, s2 xi2) u1~(X1) u2~(X2), normalized so
// that a constant weight 1 gives the product u1 u2.  The angle is 0 when either
// frequency vanishes.  Throws std::overflow_error if the sum leaves the lattice.
SpaceTimeField nullform_B(const SpaceTimeField& u1, const SpaceTimeField& u2, Sign s1, Sign s2);
// u1 conj(u2) (X0 = X1 - X2) by transforms of the exact lattice product; same overflow rule.
SpaceTimeField product_conj(const SpaceTimeField& u1, const SpaceTimeField& u2);

ScalarField qform(int mu, int nu, Sign s1, Sign s2, const ScalarField& phi1, const ScalarField& phi2);
ScalarField q0form(Sign s1, Sign s2, const ScalarField& phi1, const ScalarField& phi2);

// Symbols on single modes xi1, xi2.
double q_symbol(int mu, int nu, Sign s1, Sign s2, const Vec2& xi1, const Vec2& xi2);
double q0_symbol(Sign s1, Sign s2, const Vec2& xi1, const Vec2& xi2);
// Operator norm of Pi_{s1}(xi1) Pi_{-s2}(xi2) alpha^mu Pi_{s2}(xi2).
double sandwich_symbol(int mu, Sign s1, Sign s2, const Vec2& xi1, const Vec2& xi2);

struct SymbolConstants {
    double q = 1.0;
    double q0 = 0.0;
    double sandwich = 0.0;
};

// Dense direction-grid suprema of |symbol| / theta (theta^2 for Q0), times margin.
SymbolConstants calibrate_symbol_constants(int directions = 2048, double margin = 1.01);

struct SymbolCheck {
    long samples = 0;
    long q_violations = 0;
    long q0_violations = 0;
    long sandwich_violations = 0;
};

SymbolCheck symbol_bound_checks(long samples, const SymbolConstants& c, std::uint64_t seed);

struct DivCurl {
    ScalarField df1, df2, cf1, cf2;
};

DivCurl divcurl_split(const ScalarField& A1, const ScalarField& A2);
// B_s = R_{s,1} A_2 - R_{s,2} A_1 with R_{s,j} = -R^j_s.
ScalarField bfield(const ScalarField& A1, const ScalarField& A2, Sign s);

// Lattice used by the bilinear sweeps: 64^2 with dxi = 1, 256 times with dtau = 1/2.
struct BilinearLattice {
    int n = 64;
    int m = 256;
    double dtau = 0.5;

    Grid2D grid() const;
    TimeAxis axis() const;
};

// Complex Gaussian spectrum on the block's lattice points, unit L^2 norm.
SpaceTimeField random_block_field(const Grid2D& g, const TimeAxis& a, const DyadicBlock& block,
                                  std::uint64_t seed);

struct BilinearConstants {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
    double min() const;
};

BilinearConstants bilinear_constants(const DyadicBlock& b0, const DyadicBlock& b1, const DyadicBlock& b2);

struct ProductMeasure {
    DyadicBlock b0, b1, b2;
    double measured = 0.0;  // ||P_K0(u1 conj u2)|| / (||u1|| ||u2||)
    BilinearConstants C;
};

// All nonempty output blocks K0 (both signs) from a single product.
std::vector<ProductMeasure> bilinear_constant_measure(const SpaceTimeField& u1, const DyadicBlock& b1,
                                                      const SpaceTimeField& u2, const DyadicBlock& b2);

// ||B(P_{T_r(omega)} u1, u2)|| / ((r L1 L2)^{1/2} ||P u1|| ||u2||); 0 if P u1 = 0.
double nullform_strip_measure(const SpaceTimeField& u1, const DyadicBlock& b1, const SpaceTimeField& u2,
                              const DyadicBlock& b2, const Vec2& omega, double r);

struct SweepRow {
    std::vector<double> params;  // dyadic parameters, named by SweepResult::names
    std::array<int, 3> signs{1, 1, 1};
    double measured = 0.0;
    double bound = 0.0;
    double ratio = 0.0;
};

struct SweepResult {
    std::vector<std::string> names;
    std::vector<SweepRow> rows;
    double max_ratio = 0.0;
    std::vector<double> slopes;          // marginal d log2(ratio) / d log2(param), per name
    std::vector<double> partial_slopes;  // joint regression on all parameters (diagnostic)
    double intercept = 0.0;              // of the joint regression
    std::vector<std::string> skipped;  // empty blocks and pairs that leave the lattice
};

// Least-squares fits of log2(ratio) on log2(params) over rows with ratio > 0: one
// single-parameter fit per name (slopes) and the joint fit (partial_slopes).  The
// output frequency is tied to the inputs by N0 <= 2 max(N1, N2), so the joint
// coefficients of N0, N1, N2 are not separately meaningful.
void fit_trend(SweepResult& r);

SweepResult product_sweep(const std::vector<int>& Ns, const std::vector<int>& Ls, std::uint64_t seed);
SweepResult nullform_sweep(const std::vector<int>& Ns, const std::vector<int>& Ls, const std::vector<int>& rs,
                           std::uint64_t seed, double omega_angle = 0.3);

}  // namespace csd
