#include "csd/nullforms.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "csd/rng.hpp"

namespace csd {

namespace {

constexpr double pi = std::numbers::pi;

double norm2(const Vec2& v) { return std::hypot(v[0], v[1]); }
Vec2 scaled(const Vec2& v, double c) { return {c * v[0], c * v[1]}; }

}  // namespace

Interaction make_interaction(const STPoint& X1, const STPoint& X2, const std::array<Sign, 3>& signs,
                             Relation relation) {
    const double c = relation == Relation::sum ? 1.0 : -1.0;
    Interaction x;
    x.X1 = X1;
    x.X2 = X2;
    x.X0 = {X1.tau + c * X2.tau, {X1.xi[0] + c * X2.xi[0], X1.xi[1] + c * X2.xi[1]}};
    x.signs = signs;
    x.relation = relation;
    return x;
}

double angle(const Vec2& a, const Vec2& b) {
    if (norm2(a) == 0.0 || norm2(b) == 0.0) throw std::invalid_argument("angle with a zero vector");
    const double cross = a[0] * b[1] - a[1] * b[0];
    const double dot = a[0] * b[0] + a[1] * b[1];
    return std::atan2(std::abs(cross), dot);
}

double theta(const Vec2& xi1, const Vec2& xi2, Sign s1, Sign s2) {
    return angle(scaled(xi1, sgn(s1)), scaled(xi2, sgn(s2)));
}

std::array<double, 3> modulations(const Interaction& x) {
    const std::array<const STPoint*, 3> X{&x.X0, &x.X1, &x.X2};
    std::array<double, 3> h{};
    for (int j = 0; j < 3; ++j) {
        const double r = norm2(X[j]->xi);
        if (r == 0.0) throw std::invalid_argument("modulation at zero frequency");
        h[j] = X[j]->tau + sgn(x.signs[j]) * r;
    }
    return h;
}

double modulation_defect(const Vec2& xi1, const Vec2& xi2, const std::array<Sign, 3>& signs) {
    const double r1 = norm2(xi1), r2 = norm2(xi2);
    const double rho0 = std::hypot(xi1[0] - xi2[0], xi1[1] - xi2[1]);
    const double s0 = sgn(signs[0]), s1 = sgn(signs[1]), s2 = sgn(signs[2]);
    const double p = -s1 * r1 + s2 * r2;
    const double direct = s0 * rho0 + p;
    const double conj = s0 * rho0 - p;
    if (std::abs(conj) <= std::abs(direct) || r1 == 0.0 || r2 == 0.0) return direct;
    const double sh = std::sin(0.5 * theta(xi1, xi2, signs[1], signs[2]));
    return 4.0 * s1 * s2 * r1 * r2 * sh * sh / conj;
}

double interaction_ratio_infimum(int radial, int angular) {
    if (radial < 2 || angular < 2) throw std::invalid_argument("lattice too small");
    double best = std::numeric_limits<double>::infinity();
    const Vec2 xi1{1.0, 0.0};
    for (int a = 0; a < radial; ++a) {
        const double rho = std::pow(10.0, -3.0 + 6.0 * a / (radial - 1));
        for (int b = 0; b < angular; ++b) {
            const double phi = pi * b / (angular - 1);
            const Vec2 xi2{rho * std::cos(phi), rho * std::sin(phi)};
            for (Sign s0 : both_signs)
                for (Sign s1 : both_signs)
                    for (Sign s2 : both_signs) {
                        const double th = theta(xi1, xi2, s1, s2);
                        if (th < 1e-9) continue;
                        // h0 - h1 + h2 does not depend on tau
                        const double delta = modulation_defect(xi1, xi2, {s0, s1, s2});
                        best = std::min(best, std::abs(delta) / (3.0 * std::min(1.0, rho) * th * th));
                    }
        }
    }
    return best;
}

double calibrate_interaction_constant(double margin) { return margin * interaction_ratio_infimum(); }

double interpolation_constant(double c, double p) {
    if (!(c > 0.0) || p < 0.0 || p > 0.5) throw std::invalid_argument("interpolation needs c > 0, 0 <= p <= 1/2");
    return std::pow(pi, 1.0 - 2.0 * p) * std::pow(c, -p);
}

InteractionCheck interaction_inequality_check(long samples, double c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    InteractionCheck out;
    out.min_ratio = std::numeric_limits<double>::infinity();
    const std::array<double, 3> ps{0.0, 0.25, 0.5};
    std::array<double, 3> Cp{};
    for (int i = 0; i < 3; ++i) Cp[i] = interpolation_constant(c, ps[i]);
    auto rand_sign = [&] { return u(rng) < 0.5 ? Sign::plus : Sign::minus; };
    for (long i = 0; i < samples; ++i) {
        const double r1 = std::pow(10.0, -2.0 + 4.0 * u(rng));
        const double r2 = std::pow(10.0, -2.0 + 4.0 * u(rng));
        const double p1 = 2.0 * pi * u(rng);
        // concentrate near-collinear configurations, where the bound is tight
        const double dp = (u(rng) < 0.5 ? 1.0 : -1.0) * pi * std::pow(u(rng), 3.0);
        const Vec2 xi1{r1 * std::cos(p1), r1 * std::sin(p1)};
        const Vec2 xi2{r2 * std::cos(p1 + dp), r2 * std::sin(p1 + dp)};
        const std::array<Sign, 3> sg{rand_sign(), rand_sign(), rand_sign()};
        const Vec2 xi0{xi1[0] - xi2[0], xi1[1] - xi2[1]};
        if (norm2(xi0) == 0.0) continue;
        double h1 = 0.0, h2 = 0.0;
        const double mn = std::min(r1, r2);
        const double delta = modulation_defect(xi1, xi2, sg);
        if (i % 3 == 0) {
            // tau at the minimax point
            h1 = -delta / 3.0;
            h2 = delta / 3.0;
        } else {
            h1 = (u(rng) - 0.5) * mn * std::pow(10.0, -4.0 + 4.5 * u(rng));
            h2 = (u(rng) - 0.5) * mn * std::pow(10.0, -4.0 + 4.5 * u(rng));
        }
        // h0 from the defect identity: tau0 + s0|xi0| cancels catastrophically near theta = 0.
        const std::array<double, 3> h{h1 - h2 + delta, h1, h2};
        const double hmax = std::max({std::abs(h[0]), std::abs(h[1]), std::abs(h[2])});
        const double th = theta(xi1, xi2, sg[1], sg[2]);
        ++out.samples;
        if (th > 0.0) {
            out.min_ratio = std::min(out.min_ratio, hmax / (mn * th * th));
            if (hmax < c * mn * th * th) ++out.violations;
        }
        for (int k = 0; k < 3; ++k) {
            if (th > Cp[k] * std::pow(hmax / mn, ps[k]) * (1.0 + 1e-12)) ++out.interpolation_violations[k];
        }
    }
    return out;
}

std::vector<Vec2> omega_set(double gamma) {
    if (!(gamma > 0.0) || gamma > pi) throw std::invalid_argument("gamma must lie in (0, pi]");
    const int M = static_cast<int>(std::floor(2.0 * pi / gamma + 1e-12));
    std::vector<Vec2> out;
    out.reserve(M);
    for (int i = 0; i < M; ++i) {
        const double a = 2.0 * pi * i / M;
        out.push_back({std::cos(a), std::sin(a)});
    }
    return out;
}

bool in_sector(const Vec2& xi, const Vec2& omega, double gamma) {
    if (norm2(xi) == 0.0) return false;
    return angle(xi, omega) <= gamma;
}

bool in_strip(const Vec2& xi, const Vec2& omega, double r) {
    return std::abs(xi[0] * omega[1] - xi[1] * omega[0]) <= r;
}

namespace {

template <class Keep>
SpaceTimeField spectral_cut(const SpaceTimeField& u, Keep&& keep) {
    if (!u.has_spectrum()) throw std::invalid_argument("spectrum not populated");
    SpaceTimeField out = spectrum_field(u.grid, u.axis, u.components());
    out.T = u.T;
    const Grid2D& g = u.grid;
    const std::size_t n2 = g.size();
    for (int i1 = 0; i1 < g.n(); ++i1) {
        for (int i2 = 0; i2 < g.n(); ++i2) {
            if (!keep(g.xi(i1, i2))) continue;
            const std::size_t k = g.index(i1, i2);
            for (std::size_t c = 0; c < u.spec.size(); ++c)
                for (int l = 0; l < u.axis.m; ++l) out.spec[c][l * n2 + k] = u.spec[c][l * n2 + k];
        }
    }
    return out;
}

}  // namespace

ScalarField sector_project(const ScalarField& f, const Vec2& omega, double gamma, Sign s) {
    return multiplier(f, [&](const Vec2& xi) { return cplx(in_sector(scaled(xi, sgn(s)), omega, gamma) ? 1.0 : 0.0); });
}

SpaceTimeField sector_project(const SpaceTimeField& u, const Vec2& omega, double gamma, Sign s) {
    return spectral_cut(u, [&](const Vec2& xi) { return in_sector(scaled(xi, sgn(s)), omega, gamma); });
}

ScalarField strip_project(const ScalarField& f, const Vec2& omega, double r) {
    return multiplier(f, [&](const Vec2& xi) { return cplx(in_strip(xi, omega, r) ? 1.0 : 0.0); });
}

SpaceTimeField strip_project(const SpaceTimeField& u, const Vec2& omega, double r) {
    return spectral_cut(u, [&](const Vec2& xi) { return in_strip(xi, omega, r); });
}

bool whitney_covered(const Vec2& xi1, const Vec2& xi2, double gamma, int k, const std::vector<Vec2>& omegas) {
    const double tol = 1e-12;
    std::vector<char> c1(omegas.size()), c2(omegas.size());
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        c1[i] = angle(xi1, omegas[i]) <= gamma + tol;
        c2[i] = angle(xi2, omegas[i]) <= gamma + tol;
    }
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        if (!c1[i]) continue;
        for (std::size_t j = 0; j < omegas.size(); ++j) {
            if (c2[j] && angle(omegas[i], omegas[j]) <= (k + 2) * gamma + tol) return true;
        }
    }
    return false;
}

WhitneyCheck whitney_cover_check(double gamma, int k, long samples, std::uint64_t seed) {
    if (!(gamma > 0.0) || !(gamma < 1.0) || k < 1) throw std::invalid_argument("need 0 < gamma < 1 and k >= 1");
    const auto omegas = omega_set(gamma);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    WhitneyCheck out;
    for (long i = 0; i < samples; ++i) {
        const double p1 = 2.0 * pi * u(rng);
        double d = k * gamma * (2.0 * u(rng) - 1.0);
        if (i % 10 == 9) d = d < 0.0 ? -k * gamma : k * gamma;
        const double r1 = std::pow(10.0, 3.0 * u(rng) - 1.0);
        const double r2 = std::pow(10.0, 3.0 * u(rng) - 1.0);
        const Vec2 xi1{r1 * std::cos(p1), r1 * std::sin(p1)};
        const Vec2 xi2{r2 * std::cos(p1 + d), r2 * std::sin(p1 + d)};
        ++out.samples;
        if (!whitney_covered(xi1, xi2, gamma, k, omegas)) ++out.violations;
    }
    return out;
}

namespace {

void require_scalar_spectrum(const SpaceTimeField& u) {
    if (!u.has_spectrum()) throw std::invalid_argument("spectrum not populated");
    if (u.components() != 1) throw std::invalid_argument("bilinear forms act on scalar space-time fields");
}

void require_same_lattice(const SpaceTimeField& a, const SpaceTimeField& b) {
    if (a.grid != b.grid || a.axis.m != b.axis.m || a.axis.dt != b.axis.dt || a.axis.t0 != b.axis.t0) {
        throw std::invalid_argument("space-time lattice mismatch");
    }
}

// Largest |lattice integer| carrying a nonzero entry, per axis (tau, k1, k2).
std::array<int, 3> support_extent(const SpaceTimeField& u) {
    std::array<int, 3> e{0, 0, 0};
    const Grid2D& g = u.grid;
    const std::size_t n2 = g.size();
    for (int l = 0; l < u.axis.m; ++l) {
        for (std::size_t k = 0; k < n2; ++k) {
            bool nz = false;
            for (const auto& c : u.spec) nz = nz || c[l * n2 + k] != cplx(0.0);
            if (!nz) continue;
            e[0] = std::max(e[0], std::abs(u.axis.wave(l)));
            e[1] = std::max(e[1], std::abs(g.wave(static_cast<int>(k) / g.n())));
            e[2] = std::max(e[2], std::abs(g.wave(static_cast<int>(k) % g.n())));
        }
    }
    return e;
}

void check_no_wrap(const SpaceTimeField& a, const SpaceTimeField& b) {
    const auto ea = support_extent(a);
    const auto eb = support_extent(b);
    if (ea[0] + eb[0] > a.axis.m / 2 - 1 || ea[1] + eb[1] > a.grid.n() / 2 - 1 ||
        ea[2] + eb[2] > a.grid.n() / 2 - 1) {
        throw std::overflow_error("bilinear interaction leaves the space-time lattice");
    }
}

}  // namespace

namespace {

// Spatial frequencies carrying a nonzero entry and their time rows f^(t_j, xi).
struct TimeRows {
    std::vector<int> idx;
    std::vector<cplx> rows;  // [a * m + j]
    std::array<int, 3> extent{0, 0, 0};
};

TimeRows gather_rows(const SpaceTimeField& u) {
    const Grid2D& g = u.grid;
    const int m = u.axis.m;
    const std::size_t n2 = g.size();
    TimeRows r;
    r.extent = support_extent(u);
    for (std::size_t k = 0; k < n2; ++k) {
        for (int l = 0; l < m; ++l) {
            if (u.spec[0][l * n2 + k] != cplx(0.0)) {
                r.idx.push_back(static_cast<int>(k));
                break;
            }
        }
    }
    const std::vector<cplx> t = spectrum_to_time(u, 0);
    r.rows.resize(r.idx.size() * m);
    for (std::size_t a = 0; a < r.idx.size(); ++a)
        for (int j = 0; j < m; ++j) r.rows[a * m + j] = t[j * n2 + r.idx[a]];
    return r;
}

SpaceTimeField nullform_rows(const Grid2D& g, const TimeAxis& axis, const TimeRows& u1, const TimeRows& u2, Sign s1,
                             Sign s2) {
    if (u1.extent[0] + u2.extent[0] > axis.m / 2 - 1 || u1.extent[1] + u2.extent[1] > g.n() / 2 - 1 ||
        u1.extent[2] + u2.extent[2] > g.n() / 2 - 1) {
        throw std::overflow_error("bilinear interaction leaves the space-time lattice");
    }
    const int m = axis.m;
    const std::size_t n2 = g.size();
    std::vector<cplx> acc(n2 * m, cplx(0.0));  // [k0][j]
    const double scale = 1.0 / (g.length() * g.length());
    for (std::size_t a = 0; a < u1.idx.size(); ++a) {
        const int a1 = u1.idx[a] / g.n(), a2 = u1.idx[a] % g.n();
        const Vec2 xa = g.xi(a1, a2);
        if (norm2(xa) == 0.0) continue;
        for (std::size_t b = 0; b < u2.idx.size(); ++b) {
            const int b1 = u2.idx[b] / g.n(), b2 = u2.idx[b] % g.n();
            const Vec2 xb = g.xi(b1, b2);
            if (norm2(xb) == 0.0) continue;
            const double w = scale * theta(xa, xb, s1, s2);
            if (w == 0.0) continue;
            const std::size_t k0 =
                g.index(g.unwave(g.wave(a1) + g.wave(b1)), g.unwave(g.wave(a2) + g.wave(b2)));
            cplx* out = &acc[k0 * m];
            const cplx* pa = &u1.rows[a * m];
            const cplx* pb = &u2.rows[b * m];
            for (int j = 0; j < m; ++j) out[j] += w * pa[j] * pb[j];
        }
    }
    std::vector<cplx> t(n2 * m);
    for (std::size_t k = 0; k < n2; ++k)
        for (int j = 0; j < m; ++j) t[j * n2 + k] = acc[k * m + j];
    SpaceTimeField out = spectrum_field(g, axis, 1);
    out.spec[0] = time_to_spectrum(g, axis, std::move(t));
    return out;
}

}  // namespace

SpaceTimeField nullform_B(const SpaceTimeField& u1, const SpaceTimeField& u2, Sign s1, Sign s2) {
    require_scalar_spectrum(u1);
    require_scalar_spectrum(u2);
    require_same_lattice(u1, u2);
    return nullform_rows(u1.grid, u1.axis, gather_rows(u1), gather_rows(u2), s1, s2);
}

SpaceTimeField product_conj(const SpaceTimeField& u1, const SpaceTimeField& u2) {
    require_scalar_spectrum(u1);
    require_scalar_spectrum(u2);
    require_same_lattice(u1, u2);
    check_no_wrap(u1, u2);
    std::vector<cplx> a = spectrum_to_samples(u1, 0);
    const std::vector<cplx> b = spectrum_to_samples(u2, 0);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= std::conj(b[i]);
    SpaceTimeField out = spectrum_field(u1.grid, u1.axis, 1);
    out.spec[0] = samples_to_spectrum(u1.grid, u1.axis, std::move(a));
    return out;
}

ScalarField qform(int mu, int nu, Sign s1, Sign s2, const ScalarField& phi1, const ScalarField& phi2) {
    const ScalarField a = product(riesz(mu, s1, phi1), riesz(nu, s2, phi2));
    const ScalarField b = product(riesz(nu, s1, phi1), riesz(mu, s2, phi2));
    return a - b;
}

ScalarField q0form(Sign s1, Sign s2, const ScalarField& phi1, const ScalarField& phi2) {
    ScalarField out = product(riesz(0, s1, phi1), riesz(0, s2, phi2));
    for (int j = 1; j <= 2; ++j) out = out - product(riesz(j, s1, phi1), riesz(j, s2, phi2));
    return out;
}

double q_symbol(int mu, int nu, Sign s1, Sign s2, const Vec2& xi1, const Vec2& xi2) {
    return riesz_symbol(mu, s1, xi1) * riesz_symbol(nu, s2, xi2) - riesz_symbol(nu, s1, xi1) * riesz_symbol(mu, s2, xi2);
}

double q0_symbol(Sign s1, Sign s2, const Vec2& xi1, const Vec2& xi2) {
    double v = riesz_symbol(0, s1, xi1) * riesz_symbol(0, s2, xi2);
    for (int j = 1; j <= 2; ++j) v -= riesz_symbol(j, s1, xi1) * riesz_symbol(j, s2, xi2);
    return v;
}

double sandwich_symbol(int mu, Sign s1, Sign s2, const Vec2& xi1, const Vec2& xi2) {
    const Mat2 M = projection(xi1, s1) * projection(xi2, flip(s2)) * alpha(mu) * projection(xi2, s2);
    double fro = 0.0;
    for (const auto& z : M.a) fro += std::norm(z);
    const double det = std::abs(M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0));
    const double disc = std::max(0.0, fro * fro - 4.0 * det * det);
    return std::sqrt(0.5 * (fro + std::sqrt(disc)));
}

SymbolConstants calibrate_symbol_constants(int directions, double margin) {
    SymbolConstants c;
    double q0 = 0.0, sw = 0.0;
    for (int a = 0; a < directions; ++a) {
        const double pa = 2.0 * pi * a / directions;
        const Vec2 xi1{std::cos(pa), std::sin(pa)};
        for (int b = 0; b < directions; ++b) {
            const double pb = 2.0 * pi * b / directions;
            const Vec2 xi2{std::cos(pb), std::sin(pb)};
            for (Sign s1 : both_signs)
                for (Sign s2 : both_signs) {
                    const double th = theta(xi1, xi2, s1, s2);
                    if (th < 1e-9) continue;
                    q0 = std::max(q0, std::abs(q0_symbol(s1, s2, xi1, xi2)) / (th * th));
                    for (int mu = 0; mu < 3; ++mu) sw = std::max(sw, sandwich_symbol(mu, s1, s2, xi1, xi2) / th);
                }
        }
    }
    c.q0 = margin * q0;
    c.sandwich = margin * sw;
    return c;
}

SymbolCheck symbol_bound_checks(long samples, const SymbolConstants& c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SymbolCheck out;
    const double eps = 1e-14;
    for (long i = 0; i < samples; ++i) {
        const double p1 = 2.0 * pi * u(rng);
        const double dp = (u(rng) < 0.5 ? 1.0 : -1.0) * pi * std::pow(u(rng), 2.0);
        const double r1 = std::pow(10.0, 4.0 * u(rng) - 2.0);
        const double r2 = std::pow(10.0, 4.0 * u(rng) - 2.0);
        const Vec2 xi1{r1 * std::cos(p1), r1 * std::sin(p1)};
        const Vec2 xi2{r2 * std::cos(p1 + dp), r2 * std::sin(p1 + dp)};
        const Sign s1 = u(rng) < 0.5 ? Sign::plus : Sign::minus;
        const Sign s2 = u(rng) < 0.5 ? Sign::plus : Sign::minus;
        const double th = theta(xi1, xi2, s1, s2);
        ++out.samples;
        bool qv = false, sv = false;
        for (int mu = 0; mu < 3; ++mu) {
            for (int nu = 0; nu < 3; ++nu) {
                if (std::abs(q_symbol(mu, nu, s1, s2, xi1, xi2)) > c.q * th * (1.0 + 1e-12) + eps) qv = true;
            }
            if (sandwich_symbol(mu, s1, s2, xi1, xi2) > c.sandwich * th + eps) sv = true;
        }
        if (qv) ++out.q_violations;
        if (sv) ++out.sandwich_violations;
        if (std::abs(q0_symbol(s1, s2, xi1, xi2)) > c.q0 * th * th + eps) ++out.q0_violations;
    }
    return out;
}

DivCurl divcurl_split(const ScalarField& A1, const ScalarField& A2) {
    if (A1.grid != A2.grid) throw std::invalid_argument("grid mismatch");
    const ScalarField a1 = to_fourier(A1);
    const ScalarField a2 = to_fourier(A2);
    const Grid2D& g = a1.grid;
    DivCurl d{ScalarField(g, Rep::fourier), ScalarField(g, Rep::fourier), ScalarField(g, Rep::fourier),
              ScalarField(g, Rep::fourier)};
    for (int i1 = 0; i1 < g.n(); ++i1) {
        for (int i2 = 0; i2 < g.n(); ++i2) {
            const Vec2 xi = g.xi(i1, i2);
            const double r2 = xi[0] * xi[0] + xi[1] * xi[1];
            const cplx v1 = a1.at(i1, i2), v2 = a2.at(i1, i2);
            if (r2 == 0.0) {
                d.cf1.at(i1, i2) = v1;
                d.cf2.at(i1, i2) = v2;
                continue;
            }
            // projections onto xi^perp and xi
            const cplx c = (xi[0] * v2 - xi[1] * v1) / r2;
            const cplx dv = (xi[0] * v1 + xi[1] * v2) / r2;
            d.df1.at(i1, i2) = -xi[1] * c;
            d.df2.at(i1, i2) = xi[0] * c;
            d.cf1.at(i1, i2) = xi[0] * dv;
            d.cf2.at(i1, i2) = xi[1] * dv;
        }
    }
    return d;
}

ScalarField bfield(const ScalarField& A1, const ScalarField& A2, Sign s) {
    return cplx(-1.0) * riesz(1, s, A2) + riesz(2, s, A1);
}

Grid2D BilinearLattice::grid() const { return Grid2D(n, 2.0 * pi); }
TimeAxis BilinearLattice::axis() const { return TimeAxis{0.0, 2.0 * pi / (m * dtau), m}; }

SpaceTimeField random_block_field(const Grid2D& g, const TimeAxis& a, const DyadicBlock& block, std::uint64_t seed) {
    if (!is_dyadic(block.N) || !is_dyadic(block.L)) throw std::invalid_argument("block scales must be powers of two");
    SpaceTimeField u = spectrum_field(g, a, 1);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const std::size_t n2 = g.size();
    const double s = sgn(block.sign);
    bool any = false;
    for (int l = 0; l < a.m; ++l) {
        const double tau = a.tau(l);
        for (int i1 = 0; i1 < g.n(); ++i1) {
            for (int i2 = 0; i2 < g.n(); ++i2) {
                const Vec2 xi = g.xi(i1, i2);
                const double r = norm2(xi);
                if (dyadic_shell(r) != block.N || dyadic_shell(std::abs(tau + s * r)) != block.L) continue;
                const double re = gauss(rng);
                const double im = gauss(rng);
                u.spec[0][l * n2 + g.index(i1, i2)] = cplx(re, im);
                any = true;
            }
        }
    }
    if (!any) throw std::invalid_argument("dyadic block has no lattice points");
    const double nrm = l2_norm(u);
    for (auto& z : u.spec[0]) z /= nrm;
    return u;
}

double BilinearConstants::min() const { return std::min({c1, c2, c3}); }

BilinearConstants bilinear_constants(const DyadicBlock& b0, const DyadicBlock& b1, const DyadicBlock& b2) {
    const double N0 = b0.N, N1 = b1.N, N2 = b2.N;
    const double L0 = b0.L, L1 = b1.L, L2 = b2.L;
    const double n012 = std::min({N0, N1, N2});
    BilinearConstants c;
    c.c1 = std::sqrt(n012 * std::min(L1, L2)) * std::pow(std::min(N1, N2) * std::max(L1, L2), 0.25);
    const double c21 = std::sqrt(n012 * std::min(L0, L1)) * std::pow(std::min(N0, N1) * std::max(L0, L1), 0.25);
    const double c22 = std::sqrt(n012 * std::min(L0, L2)) * std::pow(std::min(N0, N2) * std::max(L0, L2), 0.25);
    c.c2 = std::min(c21, c22);
    c.c3 = std::sqrt(n012 * n012 * std::min({L0, L1, L2}));
    return c;
}

namespace {

// Relative to unit inputs, block masses below this are transform round-off.
constexpr double kMassFloor = 1e-9;

}  // namespace

std::vector<ProductMeasure> bilinear_constant_measure(const SpaceTimeField& u1, const DyadicBlock& b1,
                                                      const SpaceTimeField& u2, const DyadicBlock& b2) {
    const double n1 = l2_norm(u1), n2 = l2_norm(u2);
    if (n1 == 0.0 || n2 == 0.0) throw std::invalid_argument("empty block field");
    const SpaceTimeField p = product_conj(u1, u2);
    std::vector<ProductMeasure> out;
    for (Sign s0 : both_signs) {
        for (const auto& bm : decompose(p, s0).blocks) {
            const double r = bm.mass / (n1 * n2);
            if (r < kMassFloor) continue;
            out.push_back({bm.block, b1, b2, r, bilinear_constants(bm.block, b1, b2)});
        }
    }
    return out;
}

double nullform_strip_measure(const SpaceTimeField& u1, const DyadicBlock& b1, const SpaceTimeField& u2,
                              const DyadicBlock& b2, const Vec2& omega, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("strip radius must be positive");
    const SpaceTimeField p1 = strip_project(u1, omega, r);
    const double n1 = l2_norm(p1), n2 = l2_norm(u2);
    if (n1 == 0.0 || n2 == 0.0) return 0.0;
    const SpaceTimeField B = nullform_B(p1, u2, b1.sign, b2.sign);
    return l2_norm(B) / (std::sqrt(r * b1.L * b2.L) * n1 * n2);
}

void fit_trend(SweepResult& r) {
    const std::size_t p = r.names.size();
    std::vector<const SweepRow*> use;
    for (const auto& row : r.rows)
        if (row.ratio > 0.0) use.push_back(&row);
    r.slopes.assign(p, 0.0);
    r.partial_slopes.assign(p, 0.0);
    r.intercept = 0.0;
    if (use.size() < 2) return;
    for (std::size_t j = 0; j < p; ++j) {
        double mx = 0.0, my = 0.0;
        for (const SweepRow* row : use) {
            mx += std::log2(row->params[j]);
            my += std::log2(row->ratio);
        }
        mx /= use.size();
        my /= use.size();
        double sxy = 0.0, sxx = 0.0;
        for (const SweepRow* row : use) {
            const double dx = std::log2(row->params[j]) - mx;
            sxx += dx * dx;
            sxy += dx * (std::log2(row->ratio) - my);
        }
        r.slopes[j] = sxx > 0.0 ? sxy / sxx : 0.0;
    }
    if (use.size() < p + 1) return;
    Eigen::MatrixXd X(use.size(), p + 1);
    Eigen::VectorXd y(use.size());
    for (std::size_t i = 0; i < use.size(); ++i) {
        X(i, 0) = 1.0;
        for (std::size_t j = 0; j < p; ++j) X(i, j + 1) = std::log2(use[i]->params[j]);
        y(i) = std::log2(use[i]->ratio);
    }
    const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    r.intercept = beta(0);
    for (std::size_t j = 0; j < p; ++j) r.partial_slopes[j] = beta(j + 1);
}

namespace {

struct BlockFieldCache {
    std::vector<DyadicBlock> blocks;
    std::vector<SpaceTimeField> fields;
};

std::string describe(const DyadicBlock& b) {
    return "(N=" + std::to_string(b.N) + ", L=" + std::to_string(b.L) + ", sign=" + (b.sign == Sign::plus ? "+" : "-") +
           ")";
}

BlockFieldCache make_fields(const std::vector<int>& Ns, const std::vector<int>& Ls, std::uint64_t seed,
                            std::vector<std::string>& skipped) {
    const BilinearLattice lat;
    const Grid2D g = lat.grid();
    const TimeAxis a = lat.axis();
    BlockFieldCache c;
    std::uint64_t index = 0;
    for (int N : Ns)
        for (int L : Ls)
            for (Sign s : both_signs) {
                const DyadicBlock b{N, L, s};
                const std::uint64_t sd = derive_seed(seed, index++);
                try {
                    c.fields.push_back(random_block_field(g, a, b, sd));
                    c.blocks.push_back(b);
                } catch (const std::invalid_argument&) {
                    skipped.push_back("block " + describe(b) + " has no lattice points");
                }
            }
    return c;
}

}  // namespace

SweepResult product_sweep(const std::vector<int>& Ns, const std::vector<int>& Ls, std::uint64_t seed) {
    SweepResult res;
    res.names = {"N0", "N1", "N2", "L0", "L1", "L2"};
    const BlockFieldCache c = make_fields(Ns, Ls, seed, res.skipped);
    const BilinearLattice lat;
    const Grid2D g = lat.grid();
    const TimeAxis a = lat.axis();
    std::vector<std::vector<cplx>> samples;
    samples.reserve(c.fields.size());
    for (const auto& f : c.fields) samples.push_back(spectrum_to_samples(f, 0));
    for (std::size_t i = 0; i < c.fields.size(); ++i) {
        for (std::size_t j = 0; j < c.fields.size(); ++j) {
            try {
                check_no_wrap(c.fields[i], c.fields[j]);
            } catch (const std::overflow_error&) {
                res.skipped.push_back("pair " + describe(c.blocks[i]) + " x " + describe(c.blocks[j]) +
                                      " leaves the lattice");
                continue;
            }
            std::vector<cplx> prod = samples[i];
            for (std::size_t k = 0; k < prod.size(); ++k) prod[k] *= std::conj(samples[j][k]);
            SpaceTimeField p = spectrum_field(g, a, 1);
            p.spec[0] = samples_to_spectrum(g, a, std::move(prod));
            const DyadicBlock& b1 = c.blocks[i];
            const DyadicBlock& b2 = c.blocks[j];
            for (Sign s0 : both_signs) {
                for (const auto& bm : decompose(p, s0).blocks) {
                    if (bm.mass < kMassFloor) continue;
                    const BilinearConstants C = bilinear_constants(bm.block, b1, b2);
                    SweepRow row;
                    row.params = {double(bm.block.N), double(b1.N), double(b2.N),
                                  double(bm.block.L), double(b1.L), double(b2.L)};
                    row.signs = {sgn(s0), sgn(b1.sign), sgn(b2.sign)};
                    row.measured = bm.mass;
                    row.bound = C.min();
                    row.ratio = row.measured / row.bound;
                    res.max_ratio = std::max(res.max_ratio, row.ratio);
                    res.rows.push_back(std::move(row));
                }
            }
        }
    }
    fit_trend(res);
    return res;
}

SweepResult nullform_sweep(const std::vector<int>& Ns, const std::vector<int>& Ls, const std::vector<int>& rs,
                           std::uint64_t seed, double omega_angle) {
    SweepResult res;
    res.names = {"N1", "N2", "L1", "L2", "r"};
    const BlockFieldCache c = make_fields(Ns, Ls, seed, res.skipped);
    const Vec2 omega{std::cos(omega_angle), std::sin(omega_angle)};
    const BilinearLattice lat;
    std::vector<TimeRows> rows;
    rows.reserve(c.fields.size());
    for (const auto& f : c.fields) rows.push_back(gather_rows(f));
    for (std::size_t i = 0; i < c.fields.size(); ++i) {
        for (int r : rs) {
            const SpaceTimeField p1 = strip_project(c.fields[i], omega, r);
            const double n1 = l2_norm(p1);
            if (n1 == 0.0) continue;
            const TimeRows r1 = gather_rows(p1);
            for (std::size_t j = 0; j < c.fields.size(); ++j) {
                const DyadicBlock& b1 = c.blocks[i];
                const DyadicBlock& b2 = c.blocks[j];
                SpaceTimeField B(lat.grid(), lat.axis());
                try {
                    B = nullform_rows(lat.grid(), lat.axis(), r1, rows[j], b1.sign, b2.sign);
                } catch (const std::overflow_error&) {
                    if (r == rs.front()) {
                        res.skipped.push_back("pair " + describe(b1) + " x " + describe(b2) + " leaves the lattice");
                    }
                    continue;
                }
                SweepRow row;
                row.params = {double(b1.N), double(b2.N), double(b1.L), double(b2.L), double(r)};
                row.signs = {0, sgn(b1.sign), sgn(b2.sign)};
                row.measured = l2_norm(B) / (n1 * l2_norm(c.fields[j]));
                row.bound = std::sqrt(double(r) * b1.L * b2.L);
                row.ratio = row.measured / row.bound;
                res.max_ratio = std::max(res.max_ratio, row.ratio);
                res.rows.push_back(std::move(row));
            }
        }
    }
    fit_trend(res);
    return res;
}

}  // namespace csd
