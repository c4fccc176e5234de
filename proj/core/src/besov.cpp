#include "csd/besov.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace csd {

int dyadic_shell(double x) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("dyadic_shell expects a finite x >= 0");
    if (x < 2.0) return 1;
    int e = 0;
    std::frexp(x, &e);  // x = m 2^e, m in [0.5, 1)
    return 1 << (e - 1);
}

bool is_dyadic(int N) { return N >= 1 && (N & (N - 1)) == 0; }

double BlockDecomposition::total_mass_squared() const {
    double s = 0.0;
    for (const auto& b : blocks) s += b.mass * b.mass;
    return s;
}

namespace {

template <class Visit>
void for_lattice(const SpaceTimeField& u, Visit&& visit) {
    const Grid2D& g = u.grid;
    const std::size_t n2 = g.size();
    for (int l = 0; l < u.axis.m; ++l) {
        const double tau = u.axis.tau(l);
        for (int i1 = 0; i1 < g.n(); ++i1) {
            for (int i2 = 0; i2 < g.n(); ++i2) {
                const Vec2 xi = g.xi(i1, i2);
                visit(static_cast<std::size_t>(l) * n2 + g.index(i1, i2), tau, std::hypot(xi[0], xi[1]));
            }
        }
    }
}

void require_spectrum(const SpaceTimeField& u) {
    if (!u.has_spectrum()) throw std::invalid_argument("spectrum not populated");
}

}  // namespace

BlockDecomposition decompose(const SpaceTimeField& u, Sign sign) {
    require_spectrum(u);
    std::map<std::pair<int, int>, double> acc;
    BlockDecomposition d;
    const double s = sgn(sign);
    for_lattice(u, [&](std::size_t idx, double tau, double r) {
        const int N = dyadic_shell(r);
        const int L = dyadic_shell(std::abs(tau + s * r));
        d.Nmax = std::max(d.Nmax, N);
        d.Lmax = std::max(d.Lmax, L);
        double m2 = 0.0;
        for (const auto& c : u.spec) m2 += std::norm(c[idx]);
        if (m2 > 0.0) acc[{N, L}] += m2;
    });
    for (const auto& [key, m2] : acc) d.blocks.push_back({{key.first, key.second, sign}, std::sqrt(u.weight() * m2)});
    return d;
}

SpaceTimeField dyadic_project(const SpaceTimeField& u, const DyadicBlock& block) {
    require_spectrum(u);
    if (!is_dyadic(block.N) || !is_dyadic(block.L)) throw std::invalid_argument("block scales must be powers of two");
    SpaceTimeField out = spectrum_field(u.grid, u.axis, u.components());
    out.T = u.T;
    const double s = sgn(block.sign);
    for_lattice(u, [&](std::size_t idx, double tau, double r) {
        if (dyadic_shell(r) == block.N && dyadic_shell(std::abs(tau + s * r)) == block.L) {
            for (std::size_t c = 0; c < u.spec.size(); ++c) out.spec[c][idx] = u.spec[c][idx];
        }
    });
    return out;
}

double besov_norm(const BlockDecomposition& d, double s, double b, Summation q) {
    double acc = 0.0;
    for (const auto& bm : d.blocks) {
        const double w = std::pow(static_cast<double>(bm.block.N), s) * std::pow(static_cast<double>(bm.block.L), b);
        acc = q == Summation::l1 ? acc + w * bm.mass : std::max(acc, w * bm.mass);
    }
    return acc;
}

double besov_norm(const SpaceTimeField& u, const NormSpec& spec) {
    return besov_norm(decompose(u, spec.sign), spec.s, spec.b, spec.q);
}

std::vector<std::pair<int, double>> shell_masses(const ScalarField& f) {
    const ScalarField fh = to_fourier(f);
    const Grid2D& g = fh.grid;
    std::map<int, double> acc;
    for (int i1 = 0; i1 < g.n(); ++i1) {
        for (int i2 = 0; i2 < g.n(); ++i2) {
            const Vec2 xi = g.xi(i1, i2);
            acc[dyadic_shell(std::hypot(xi[0], xi[1]))] += std::norm(fh.at(i1, i2));
        }
    }
    std::vector<std::pair<int, double>> out;
    const double c = g.c_grid();
    for (const auto& [N, m2] : acc) out.emplace_back(N, c * std::sqrt(m2));
    return out;
}

std::vector<std::pair<int, double>> shell_masses(const SpinorField& f) {
    const auto a = shell_masses(f.up);
    const auto b = shell_masses(f.down);
    std::vector<std::pair<int, double>> out;
    for (std::size_t i = 0; i < a.size(); ++i) out.emplace_back(a[i].first, std::hypot(a[i].second, b[i].second));
    return out;
}

namespace {

template <class F>
double besov_from_shells(const F& f, double s) {
    double acc = 0.0;
    for (const auto& [N, m] : shell_masses(f)) acc += std::pow(static_cast<double>(N), s) * m;
    return acc;
}

template <class F>
double sobolev_from_shells(const F& f, double s) {
    double acc = 0.0;
    for (const auto& [N, m] : shell_masses(f)) acc += std::pow(static_cast<double>(N), 2.0 * s) * m * m;
    return std::sqrt(acc);
}

double sobolev_exact_sq(const ScalarField& f, double s) {
    const ScalarField fh = to_fourier(f);
    const Grid2D& g = fh.grid;
    double acc = 0.0;
    for (int i1 = 0; i1 < g.n(); ++i1) {
        for (int i2 = 0; i2 < g.n(); ++i2) {
            const Vec2 xi = g.xi(i1, i2);
            acc += std::pow(1.0 + std::hypot(xi[0], xi[1]), 2.0 * s) * std::norm(fh.at(i1, i2));
        }
    }
    return g.c_grid() * g.c_grid() * acc;
}

}  // namespace

double spatial_besov(const ScalarField& f, double s) { return besov_from_shells(f, s); }
double spatial_besov(const SpinorField& f, double s) { return besov_from_shells(f, s); }
double sobolev(const ScalarField& f, double s) { return sobolev_from_shells(f, s); }
double sobolev(const SpinorField& f, double s) { return sobolev_from_shells(f, s); }
double sobolev_exact(const ScalarField& f, double s) { return std::sqrt(sobolev_exact_sq(f, s)); }
double sobolev_exact(const SpinorField& f, double s) {
    return std::sqrt(sobolev_exact_sq(f.up, s) + sobolev_exact_sq(f.down, s));
}

Extremizer duality_extremizer(const SpaceTimeField& u, const NormSpec& spec) {
    require_spectrum(u);
    const BlockDecomposition d = decompose(u, spec.sign);
    if (d.blocks.empty()) throw std::invalid_argument("duality extremizer of the zero field");
    std::map<std::pair<int, int>, double> factor;
    for (const auto& bm : d.blocks) {
        const double w = std::pow(static_cast<double>(bm.block.N), spec.s) *
                         std::pow(static_cast<double>(bm.block.L), spec.b);
        factor[{bm.block.N, bm.block.L}] = w / bm.mass;
    }
    Extremizer e{spectrum_field(u.grid, u.axis, u.components()), 0.0};
    e.v.T = u.T;
    const double sg = sgn(spec.sign);
    for_lattice(u, [&](std::size_t idx, double tau, double r) {
        const auto it = factor.find({dyadic_shell(r), dyadic_shell(std::abs(tau + sg * r))});
        if (it == factor.end()) return;
        for (std::size_t c = 0; c < u.spec.size(); ++c) e.v.spec[c][idx] = it->second * u.spec[c][idx];
    });
    e.ratio = std::abs(inner_product(u, e.v)) / besov_norm(d, spec.s, spec.b, Summation::l1);
    return e;
}

double restriction_norm(const SpaceTimeField& u, const NormSpec& spec) {
    if (u.frames.empty() || !(u.T > 0.0)) throw std::invalid_argument("restriction norm needs windowed frames");
    return besov_norm(with_spectrum(u), spec);
}

EnergyReport energy_report(const ScalarField& f, const Frames& F, double s, Sign sign, double T,
                           const TimeGrid& tg) {
    if (!(T > 0.0) || T > 1.0) throw std::invalid_argument("energy estimate requires 0 < T <= 1");
    if (static_cast<int>(F.size()) != tg.size()) throw std::invalid_argument("forcing not sampled on the time grid");
    const Frames duh = duhamel(F, sign, tg);
    const ScalarField fh = to_fourier(f);
    Frames v;
    v.reserve(tg.size());
    for (int k = 0; k < tg.size(); ++k) v.push_back(halfwave(fh, tg.t(k), sign) + duh[k]);

    EnergyReport r;
    r.lhs = restriction_norm(make_spacetime(v, tg.axis(), T), {s, 0.5, Summation::l1, sign});
    r.rhs = spatial_besov(f, s) + restriction_norm(make_spacetime(F, tg.axis(), T), {s, -0.5, Summation::l1, sign});
    if (r.rhs > 0.0) {
        r.c_emp = r.lhs / r.rhs;
    } else {
        r.flagged = r.lhs != 0.0;
    }
    return r;
}

EnergyStudy energy_study(int n, double T, double dt, int samples, double s, std::uint64_t seed, int band) {
    const double len = 2.0 * M_PI;
    const Grid2D g(n, len);
    if (band > g.dealias_cutoff()) throw std::invalid_argument("band exceeds the resolved lattice");
    const TimeGrid tg = make_time_grid(T, 2.0 * T, dt);
    EnergyStudy st{n, T, tg.dt, {}, 0.0};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int side = 2 * band + 1;
    for (int i = 0; i < samples; ++i) {
        const bool with_f = i % 3 != 1;
        const bool with_F = i % 3 != 0;
        // Draw every coefficient regardless of the case so all n see the same stream.
        std::vector<cplx> a(side * side), c(side * side);
        std::vector<double> om(side * side), ph(side * side);
        for (int j = 0; j < side * side; ++j) {
            a[j] = cplx(gauss(rng), gauss(rng));
            c[j] = cplx(gauss(rng), gauss(rng));
            om[j] = 6.0 * unif(rng);
            ph[j] = 2.0 * M_PI * unif(rng);
        }
        ScalarField f(g, Rep::fourier);
        Frames F(tg.size(), ScalarField(g, Rep::fourier));
        const double amp = len * len;  // Fourier coefficient of e^{i k.x}
        for (int k1 = -band; k1 <= band; ++k1) {
            for (int k2 = -band; k2 <= band; ++k2) {
                const int j = (k1 + band) * side + (k2 + band);
                const int i1 = g.unwave(k1);
                const int i2 = g.unwave(k2);
                if (with_f) f.at(i1, i2) = amp * a[j];
                if (with_F) {
                    for (int k = 0; k < tg.size(); ++k) F[k].at(i1, i2) = amp * c[j] * std::cos(om[j] * tg.t(k) + ph[j]);
                }
            }
        }
        const EnergyReport r = energy_report(f, F, s, (i % 2) ? Sign::minus : Sign::plus, T, tg);
        if (r.flagged) throw std::runtime_error("energy report: zero right-hand side with nonzero left-hand side");
        st.c_emp.push_back(r.c_emp);
        st.max_c_emp = std::max(st.max_c_emp, r.c_emp);
    }
    return st;
}

}  // namespace csd
