// Picard iteration for the coupled Dirac and Chern-Simons equations,
//   (-i alpha^mu d_mu + M beta) psi = A_mu alpha^mu psi,
//   box A_nu = d^mu(-2 eps_{mu nu lam} psi^dag alpha^lam psi),
// in half-wave form on a periodic grid.  All frames are kept in Fourier form.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "csd/dirac.hpp"
#include "csd/fourier.hpp"

namespace csd {

struct CauchyData {
    ScalarField a0, a1, a2;
    SpinorField psi0;
    double mass = 0.0;

    explicit CauchyData(const Grid2D& g) : a0(g), a1(g), a2(g), psi0(g) {}
    const Grid2D& grid() const { return a0.grid; }
    const ScalarField& a(int nu) const;
    // Throws if a_nu is not real to 1e-12 or the grids disagree.
    void validate() const;
};

// Symmetric time grid t_k = (k - K) dt, k = 0..2K; index K is t = 0.
struct TimeGrid {
    double dt = 0.0;
    int K = 0;

    int size() const { return 2 * K + 1; }
    double t(int k) const { return (k - K) * dt; }
    TimeAxis axis() const { return TimeAxis{-K * dt, dt, size()}; }
};

// dt = T / ceil(T / dt_max) so that T is a grid point; K covers t_ext.
TimeGrid make_time_grid(double T, double t_ext, double dt_max);
// Largest dt with max|xi| dt <= cfl over the dealiased lattice.
double cfl_dt(const Grid2D& g, double cfl);

using Frames = std::vector<ScalarField>;
using SpinorFrames = std::vector<SpinorField>;

enum class HomMode { full, simplified, as_printed };

SpinorFrames homogeneous_spinor(const CauchyData& data, Sign s, const TimeGrid& tg);
// Warnings about nonzero means fed to 1/iD are appended to warnings when given.
Frames homogeneous_potential(const CauchyData& data, int nu, Sign s, const TimeGrid& tg,
                             HomMode mode = HomMode::full, std::vector<std::string>* warnings = nullptr);

// psi1^dag alpha^lam psi2, dealiased, Fourier form.
ScalarField current(const SpinorField& psi1, const SpinorField& psi2, int lam);

ScalarField nonlin_N(const SpinorField& psi1, const SpinorField& psi2, Sign s1, Sign s2, int mu, int nu);
Frames nonlin_N(const SpinorFrames& psi1, const SpinorFrames& psi2, Sign s1, Sign s2, int mu, int nu);
// -A_mu Pi_{-s1} alpha^mu psi + A_mu R^mu_{s1} psi for psi = psi_{s1} and A = A_{., s2}.
SpinorField nonlin_M(const SpinorField& psi, const std::array<ScalarField, 3>& A, Sign s1);
SpinorFrames nonlin_M(const SpinorFrames& psi, const std::array<Frames, 3>& A, Sign s1);

// v(t_k) = \int_0^{t_k} U_s(t_k - t') F(t') dt' by the composite trapezoid rule.
Frames duhamel(const Frames& F, Sign s, const TimeGrid& tg);
SpinorFrames duhamel(const SpinorFrames& F, Sign s, const TimeGrid& tg);

struct IterationState {
    TimeGrid tg;
    std::array<SpinorFrames, 2> psi;                 // [sign_index]
    std::array<std::array<Frames, 3>, 2> A;          // [sign_index][nu]
    int n = 0;

    SpinorField psi_total(int k) const;
    ScalarField A_total(int nu, int k) const;
};

IterationState initial_state(const CauchyData& data, const TimeGrid& tg, HomMode mode = HomMode::full,
                             std::vector<std::string>* warnings = nullptr);
// Needs the homogeneous parts again; pass the initial state.
IterationState picard_iterate(const IterationState& state, const IterationState& hom, const CauchyData& data);

// max_t sqrt(sum_s ||psi_s - psi'_s||^2) and likewise for A.
double psi_distance(const IterationState& a, const IterationState& b);
double potential_distance(const IterationState& a, const IterationState& b);

std::vector<double> charge(const IterationState& state);
std::vector<double> charge(const SpinorFrames& psi);

struct Residuals {
    double dirac = 0.0;
    double wave = 0.0;
    double gauge = 0.0;
    double imag_A = 0.0;  // max |Im A_nu| relative to max |A_nu| (diagnostic)
};

// Central differences in time over the interior frames, spectral in space.
Residuals residual(const IterationState& state, const CauchyData& data);

struct PicardOptions {
    double T = 0.25;
    double t_ext = 0.5;  // frames cover [-t_ext, t_ext]
    double cfl = 0.5;
    double dt = 0.0;     // 0 selects the CFL step
    int max_iterations = 8;
    int min_iterations = 0;
    double tolerance = 1e-13;
    HomMode mode = HomMode::full;
};

struct PicardRun {
    IterationState state;
    std::vector<double> distances;          // d_n = ||psi^{(n+1)} - psi^{(n)}||
    std::vector<double> potential_distances;
    bool converged = false;
    std::vector<std::string> warnings;
};

PicardRun run_picard(const CauchyData& data, const Grid2D& g, const PicardOptions& opt);

}  // namespace csd
