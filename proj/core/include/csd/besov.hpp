// Dyadic blocks K^s_{N,L} = {N <= max(1,|xi|) < 2N, L <= max(1,|tau + s|xi||) < 2L},
// the Besov-type norms B^{s,b;q}_s built from their L^2 masses, spatial
// Littlewood-Paley norms, and the energy-estimate report.
#pragma once

#include <cstdint>
#include <vector>

#include "csd/dirac.hpp"
#include "csd/fourier.hpp"
#include "csd/picard.hpp"

namespace csd {

struct DyadicBlock {
    int N = 1;
    int L = 1;
    Sign sign = Sign::plus;

    bool operator==(const DyadicBlock& o) const { return N == o.N && L == o.L && sign == o.sign; }
};

// Dyadic shell of x >= 0: the power of two N with N <= max(1, x) < 2N.
int dyadic_shell(double x);
bool is_dyadic(int N);

enum class Summation { l1, linf };

struct NormSpec {
    double s = 0.0;
    double b = 0.0;
    Summation q = Summation::l1;
    Sign sign = Sign::plus;
};

struct BlockMass {
    DyadicBlock block;
    double mass = 0.0;
};

struct BlockDecomposition {
    std::vector<BlockMass> blocks;  // nonempty blocks, sorted by (N, L)
    int Nmax = 1;
    int Lmax = 1;

    double total_mass_squared() const;
};

BlockDecomposition decompose(const SpaceTimeField& u, Sign sign);
SpaceTimeField dyadic_project(const SpaceTimeField& u, const DyadicBlock& block);

double besov_norm(const BlockDecomposition& d, double s, double b, Summation q);
double besov_norm(const SpaceTimeField& u, const NormSpec& spec);

// Spatial shells P_N, N <= max(1,|xi|) < 2N.
std::vector<std::pair<int, double>> shell_masses(const ScalarField& f);
std::vector<std::pair<int, double>> shell_masses(const SpinorField& f);
double spatial_besov(const ScalarField& f, double s);
double spatial_besov(const SpinorField& f, double s);
double sobolev(const ScalarField& f, double s);
double sobolev(const SpinorField& f, double s);
// ||(1+|xi|)^s f^|| with the grid Plancherel constant.
double sobolev_exact(const ScalarField& f, double s);
double sobolev_exact(const SpinorField& f, double s);

struct Extremizer {
    SpaceTimeField v;
    double ratio = 0.0;
};

// v~ = sum_K N^s L^b u~ chi_K / ||P_K u||; ||v||_{B^{-s,-b;inf}} = 1 by construction.
Extremizer duality_extremizer(const SpaceTimeField& u, const NormSpec& spec);

// ||rho u|| in the given norm; an upper bound for the time-slab norm on (-T, T).
double restriction_norm(const SpaceTimeField& u, const NormSpec& spec);

struct EnergyReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double c_emp = 0.0;
    bool flagged = false;  // rhs = 0 while lhs != 0
};

// v = U_sign(t) f + \int_0^t U_sign(t - t') F(t') dt' on the time grid, which
// must cover (-2T, 2T).
EnergyReport energy_report(const ScalarField& f, const Frames& F, double s, Sign sign, double T,
                           const TimeGrid& tg);

struct EnergyStudy {
    int n = 0;
    double T = 0.0;
    double dt = 0.0;
    std::vector<double> c_emp;
    double max_c_emp = 0.0;
};

// Random band-limited samples (|k_i| <= band on a 2 pi periodic grid), the
// same for every n: one third free data only, one third forcing only, the
// rest both.
EnergyStudy energy_study(int n, double T, double dt, int samples, double s, std::uint64_t seed, int band = 4);

}  // namespace csd
