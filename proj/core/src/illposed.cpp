#include "csd/illposed.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "csd/rng.hpp"

namespace csd {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
const double kInvTwoPi2 = 1.0 / (kTwoPi * kTwoPi);

double norm2(const Vec2& v) { return std::hypot(v[0], v[1]); }
Vec2 sub(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }

// e^z - 1 without cancellation.
cplx expm1c(cplx z) {
    const double x = z.real();
    const double y = z.imag();
    const double sh = std::sin(0.5 * y);
    return {std::expm1(x) * std::cos(y) - 2.0 * sh * sh, std::exp(x) * std::sin(y)};
}

// (e^z - 1)/z.
cplx phi1(cplx z) {
    if (std::abs(z) < 1e-4) return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
    return expm1c(z) / z;
}

// exp[x, y]
cplx divdiff2(cplx x, cplx y) { return std::exp(x) * phi1(y - x); }

}  // namespace

Box intersect(const Box& a, const Box& b) {
    return {std::max(a.lo1, b.lo1), std::min(a.hi1, b.hi1), std::max(a.lo2, b.lo2), std::min(a.hi2, b.hi2)};
}

Box shift(const Box& a, const Vec2& v) { return {a.lo1 + v[0], a.hi1 + v[0], a.lo2 + v[1], a.hi2 + v[1]}; }

Box negate(const Box& a) { return {-a.hi1, -a.lo1, -a.hi2, -a.lo2}; }

Box minkowski(const Box& a, const Box& b) { return {a.lo1 + b.lo1, a.hi1 + b.hi1, a.lo2 + b.lo2, a.hi2 + b.hi2}; }

void validate(const RectSpec& spec) {
    if (!(spec.lambda >= 64.0) || !std::isfinite(spec.lambda)) {
        throw std::invalid_argument("rectangle families need lambda >= 64");
    }
}

Box rect_box(const RectSpec& spec) {
    validate(spec);
    const double l = spec.lambda;
    const double r = std::sqrt(l);
    switch (spec.variant) {
        case Rect::W: return {l - r, l + r, -r, r};
        case Rect::Wtilde: {
            const double q = std::sqrt(r);
            return {l - q, l + q, -q, q};
        }
        case Rect::Wstarstar: return {2.0 * l - r / 10.0, 2.0 * l + r / 10.0, -r / 10.0, r / 10.0};
        case Rect::Wstar: {
            const double a = kWstarC1 * r;
            return {-a, a, -std::min(a, kWstarC3 * r), std::min(a, kWstarC3 * r)};
        }
    }
    throw std::invalid_argument("unknown rectangle variant");
}

bool rect_indicator(const RectSpec& spec, const Vec2& xi) {
    if (spec.variant != Rect::Wstar) return rect_box(spec).contains(xi);
    validate(spec);
    const double r = std::sqrt(spec.lambda);
    const double a2 = std::abs(xi[1]);
    return 3.0 * xi[0] * xi[0] <= xi[1] * xi[1] && norm2(xi) <= kWstarC1 * r && a2 >= kWstarC2 * r &&
           a2 <= kWstarC3 * r;
}

ScalarField rect_data(const RectSpec& spec, const Grid2D& g) {
    const Box b = rect_box(spec);
    const double need_dxi = std::sqrt(spec.lambda) / 8.0;
    const double reach = std::max({std::abs(b.lo1), std::abs(b.hi1), std::abs(b.lo2), std::abs(b.hi2)});
    if (g.dxi() > need_dxi || g.ximax() <= reach) {
        const int n = 2 * static_cast<int>(std::ceil(reach / std::min(g.dxi(), need_dxi))) + 2;
        std::ostringstream os;
        os << "grid does not resolve the rectangle: need dxi <= " << need_dxi << " and at least n = " << n
           << " points at that spacing";
        throw std::invalid_argument(os.str());
    }
    ScalarField f(g, Rep::fourier);
    for (int i1 = 0; i1 < g.n(); ++i1) {
        for (int i2 = 0; i2 < g.n(); ++i2) {
            if (rect_indicator(spec, g.xi(i1, i2))) f.at(i1, i2) = 1.0;
        }
    }
    return f;
}

SpinorField rect_spinor(const RectSpec& spec, const Grid2D& g) {
    const ScalarField phi = rect_data(spec, g);
    const double c = 1.0 / std::sqrt(2.0);
    return SpinorField(cplx(c) * phi, cplx(-c) * phi);
}

double lambda_of_k(int k, double eps) {
    if (k < 1 || !(eps > 0.0)) throw std::invalid_argument("lambda family needs k >= 1 and eps > 0");
    return 4.0 * k * k * M_PI * M_PI / (eps * eps);
}

int snap_k(double target, double eps) {
    if (!(target > 0.0) || !(eps > 0.0)) throw std::invalid_argument("snap_k needs positive target and eps");
    const double kr = eps * std::sqrt(target) / kTwoPi;
    const int lo = std::max(1, static_cast<int>(std::floor(kr)));
    const int hi = lo + 1;
    return std::abs(lambda_of_k(lo, eps) - target) <= std::abs(lambda_of_k(hi, eps) - target) ? lo : hi;
}

cplx phi1_imag(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return {1.0 - x2 / 6.0, x / 2.0 - x2 * x / 24.0};
    }
    const double sh = std::sin(0.5 * x);
    return {std::sin(x) / x, 2.0 * sh * sh / x};
}

cplx m123(double t, double omega) { return t * phi1_imag(t * omega); }

double omega123(const Vec2& xi, const Vec2& eta, const std::array<Sign, 3>& s) {
    return sgn(s[0]) * norm2(xi) + sgn(s[1]) * norm2(sub(xi, eta)) - sgn(s[2]) * norm2(eta);
}

double omega123_tilde(const Vec2& xi, const Vec2& eta, const std::array<Sign, 3>& s) {
    return sgn(s[0]) * norm2(xi) - sgn(s[1]) * norm2(sub(xi, eta)) - sgn(s[2]) * norm2(eta);
}

cplx exp_divdiff(cplx a, cplx b, cplx c) {
    const double dab = std::abs(a - b), dbc = std::abs(b - c), dac = std::abs(a - c);
    const double d = std::max({dab, dbc, dac});
    if (d < 0.1) {
        // e^mu sum_k h_k(a-mu, b-mu, c-mu)/(k+2)!, h_k complete homogeneous.
        const cplx mu = (a + b + c) / 3.0;
        const cplx x = a - mu, y = b - mu, z = c - mu;
        cplx hx = 1.0, hxy = 1.0, hxyz = 1.0;
        cplx sum = 0.5;
        double fact = 2.0;
        // |x|, |y|, |z| < 0.1, so 24 terms are far below round-off.  h_1 = 0 here,
        // hence no early exit on a small term.
        for (int k = 1; k < 24; ++k) {
            hx *= x;
            hxy = y * hxy + hx;
            hxyz = z * hxyz + hxy;
            fact *= (k + 2);
            sum += hxyz / fact;
        }
        return std::exp(mu) * sum;
    }
    // Put the farthest pair at the ends.
    if (dab == d) std::swap(b, c);
    else if (dbc == d) std::swap(a, b);
    return (divdiff2(b, c) - divdiff2(a, b)) / (c - a);
}

Omega5 omegas5(const Vec2& xi, const Vec2& eta, const Vec2& zeta, const std::array<Sign, 5>& s) {
    const double axi = norm2(xi), aeta = norm2(eta), azeta = norm2(zeta);
    const double aez = norm2(sub(eta, zeta)), axe = norm2(sub(xi, eta));
    const int s1 = sgn(s[0]), s2 = sgn(s[1]), s3 = sgn(s[2]), s4 = sgn(s[3]), s5 = sgn(s[4]);
    Omega5 w;
    w.w0 = s2 * aeta + s3 * aez - s4 * azeta;
    w.w1 = s1 * axi - s5 * axe + s3 * aez - s4 * azeta;
    w.w2 = s1 * axi - s2 * aeta - s5 * axe;
    return w;
}

cplx m12345(double t, const Vec2& xi, const Vec2& eta, const Vec2& zeta, const std::array<Sign, 5>& s) {
    const Omega5 w = omegas5(xi, eta, zeta, s);
    const cplx outer = std::polar(1.0, -sgn(s[0]) * t * norm2(xi));
    return outer * t * t * exp_divdiff(0.0, cplx(0.0, t * w.w2), cplx(0.0, t * w.w1));
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be positive");
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

OracleResult m12345_oracle(double t, const Vec2& xi, const Vec2& eta, const Vec2& zeta,
                           const std::array<Sign, 5>& s, double tol) {
    OracleResult r;
    if (t == 0.0) {
        r.converged = true;
        return r;
    }
    const double axi = norm2(xi), aeta = norm2(eta), azeta = norm2(zeta);
    const double aze = norm2(sub(zeta, eta)), axe = norm2(sub(xi, eta));
    const int s1 = sgn(s[0]), s2 = sgn(s[1]), s3 = sgn(s[2]), s4 = sgn(s[3]), s5 = sgn(s[4]);
    // The integrand exactly as written in the two time variables.
    auto phase = [&](double tp, double tpp) {
        return -s1 * (t - tp) * axi - s2 * (tp - tpp) * aeta + s3 * tpp * aze - s4 * tpp * azeta - s5 * tp * axe;
    };
    std::vector<double> gx, gw;
    gauss_legendre(12, gx, gw);
    auto level = [&](int panels) {
        cplx total = 0.0;
        const double hp = t / panels;
        for (int p = 0; p < panels; ++p) {
            for (std::size_t a = 0; a < gx.size(); ++a) {
                const double tp = hp * (p + 0.5 * (gx[a] + 1.0));
                cplx inner = 0.0;
                const double hq = tp / panels;
                for (int q = 0; q < panels; ++q) {
                    for (std::size_t b = 0; b < gx.size(); ++b) {
                        const double tpp = hq * (q + 0.5 * (gx[b] + 1.0));
                        inner += 0.5 * hq * gw[b] * std::polar(1.0, phase(tp, tpp));
                    }
                }
                total += 0.5 * hp * gw[a] * inner;
            }
        }
        return total;
    };
    cplx prev = level(1);
    for (int panels = 2; panels <= 256; panels *= 2) {
        const cplx cur = level(panels);
        r.value = cur;
        r.panels = panels;
        if (std::abs(cur - prev) <= tol * t * t) {
            r.converged = true;
            return r;
        }
        prev = cur;
    }
    return r;
}

std::array<std::array<Sign, 3>, 8> sign_triples() {
    std::array<std::array<Sign, 3>, 8> out{};
    int i = 0;
    for (Sign a : both_signs)
        for (Sign b : both_signs)
            for (Sign c : both_signs) out[i++] = {a, b, c};
    return out;
}

namespace {

// Midpoint rule on a box with q x q points; f(eta, accumulate-weight) is called per point.
template <class F>
void midpoint(const Box& b, int q, F&& f) {
    const double h1 = (b.hi1 - b.lo1) / q;
    const double h2 = (b.hi2 - b.lo2) / q;
    const double wgt = h1 * h2;
    for (int i = 0; i < q; ++i) {
        for (int j = 0; j < q; ++j) f(Vec2{b.lo1 + (i + 0.5) * h1, b.lo2 + (j + 0.5) * h2}, wgt);
    }
}

// Refines q -> 2q until successive levels of eval(q) agree to rtol (relative to
// the larger of |value| and floor).
template <class Eval>
auto refine(const QuadratureOptions& opt, double floor, bool* converged, Eval&& eval) {
    auto prev = eval(opt.q0);
    int q = opt.q0;
    for (int lvl = 1; lvl < opt.max_levels; ++lvl) {
        q *= 2;
        auto cur = eval(q);
        double diff = 0.0, mag = 0.0;
        for (std::size_t i = 0; i < cur.size(); ++i) {
            diff = std::max(diff, std::abs(cur[i] - prev[i]));
            mag = std::max(mag, std::abs(cur[i]));
        }
        if (diff <= opt.rtol * std::max(mag, floor)) {
            if (converged) *converged = true;
            return cur;
        }
        prev = cur;
    }
    if (converged) *converged = false;
    return prev;
}

}  // namespace

cplx f2_hat(double t, const Vec2& xi, double lambda, const QuadratureOptions& q, std::array<cplx, 8>* per_triple,
            bool* converged) {
    const Box W = rect_box({Rect::W, lambda});
    const Box O = intersect(W, shift(W, xi));
    const auto triples = sign_triples();
    if (O.empty()) {
        if (per_triple) per_triple->fill(0.0);
        if (converged) *converged = true;
        return 0.0;
    }
    const double axi = norm2(xi);
    std::array<cplx, 8> pref{};
    for (int i = 0; i < 8; ++i) {
        const Sign s1 = triples[i][0];
        const double weight = riesz_symbol(0, s1, xi) + riesz_symbol(1, s1, xi);
        pref[i] = kInvTwoPi2 * std::polar(1.0, -sgn(s1) * t * axi) * weight;
    }
    auto eval = [&](int n) {
        std::array<cplx, 8> acc{};
        midpoint(O, n, [&](const Vec2& eta, double w) {
            const double a = norm2(sub(xi, eta)), b = norm2(eta);
            for (int i = 0; i < 8; ++i) {
                const double om = sgn(triples[i][0]) * axi + sgn(triples[i][1]) * a - sgn(triples[i][2]) * b;
                acc[i] += w * m123(t, om);
            }
        });
        for (int i = 0; i < 8; ++i) acc[i] *= pref[i];
        return acc;
    };
    const auto parts = refine(q, kInvTwoPi2 * t * O.area(), converged, eval);
    if (per_triple) *per_triple = parts;
    cplx total = 0.0;
    for (const cplx& p : parts) total += p;
    return total;
}

std::array<cplx, 2> aflow_hat(double t, const Vec2& xi, double lambda, const QuadratureOptions& q,
                              bool* converged) {
    const Box W = rect_box({Rect::W, lambda});
    const Box Wt = rect_box({Rect::Wtilde, lambda});
    const Box O = intersect(W, shift(negate(Wt), xi));
    if (O.empty()) {
        if (converged) *converged = true;
        return {0.0, 0.0};
    }
    const double axi = norm2(xi);
    const double c = 1.0 / std::sqrt(2.0);
    const std::array<cplx, 2> u{c, -c};
    // Components: [s1][spinor component], flattened.
    auto eval = [&](int n) {
        std::array<cplx, 4> acc{};
        midpoint(O, n, [&](const Vec2& eta, double w) {
            const Vec2 zeta = sub(xi, eta);
            for (Sign s2 : both_signs) {
                const auto v = projection(zeta, flip(s2)) * u;
                for (Sign s1 : both_signs) {
                    for (Sign s3 : both_signs) {
                        const double om = omega123_tilde(xi, eta, {s1, s2, s3});
                        const cplx m = w * m123(t, om);
                        const int k = 2 * sign_index(s1);
                        acc[k] += m * v[0];
                        acc[k + 1] += m * v[1];
                    }
                }
            }
        });
        return acc;
    };
    const auto acc = refine(q, t * O.area(), converged, eval);
    std::array<cplx, 2> out{0.0, 0.0};
    for (Sign s1 : both_signs) {
        const int k = 2 * sign_index(s1);
        const auto v = projection(xi, s1) * std::array<cplx, 2>{acc[k], acc[k + 1]};
        const cplx ph = kInvTwoPi2 * std::polar(1.0, -sgn(s1) * t * axi);
        out[0] += ph * v[0];
        out[1] += ph * v[1];
    }
    return out;
}

std::array<cplx, 3> cubic_integrand(double t, const Vec2& xi, const Vec2& eta, const Vec2& zeta) {
    const double axi = norm2(xi), aeta = norm2(eta);
    const double x1 = axi > 0.0 ? xi[0] / axi : 0.0;
    const double x2 = axi > 0.0 ? xi[1] / axi : 0.0;
    const double e1 = aeta > 0.0 ? eta[0] / aeta : 0.0;
    const double k = 1.0 / (2.0 * std::sqrt(2.0));
    const cplx I(0.0, 1.0);
    std::array<cplx, 3> out{};
    for (int bits = 0; bits < 32; ++bits) {
        std::array<Sign, 5> s{};
        for (int j = 0; j < 5; ++j) s[j] = (bits >> j) & 1 ? Sign::minus : Sign::plus;
        const double p1 = sgn(s[0]), p2 = sgn(s[1]);
        const cplx m = m12345(t, xi, eta, zeta, s);
        out[0] += -I * k * (1.0 + p1 * x1) * m;
        out[1] += I * k * (p1 * x2) * (1.0 - p2 * e1) * m;
        out[2] += k * (1.0 - p1 * x1) * (-p2 * e1) * m;
    }
    const double c = kInvTwoPi2 * kInvTwoPi2;
    for (auto& v : out) v *= c;
    return out;
}

McEstimate cubic_hat_mc(double t, const Vec2& xi, double lambda, int strata, std::uint64_t seed) {
    if (strata < 1) throw std::invalid_argument("need at least one stratum");
    const Box W = rect_box({Rect::W, lambda});
    const Box R = intersect(shift(negate(W), xi), minkowski(W, negate(W)));
    McEstimate est;
    if (R.empty()) return est;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double h1 = (R.hi1 - R.lo1) / strata;
    const double h2 = (R.hi2 - R.lo2) / strata;
    const double cell = h1 * h2;
    for (int i = 0; i < strata; ++i) {
        for (int j = 0; j < strata; ++j) {
            std::array<cplx, 2> f{};
            for (int r = 0; r < 2; ++r) {
                const Vec2 eta{R.lo1 + (i + u01(rng)) * h1, R.lo2 + (j + u01(rng)) * h2};
                const Box Z = intersect(W, shift(W, eta));
                // Draw zeta even for empty Z so the stream does not depend on geometry.
                const Vec2 zeta{Z.lo1 + u01(rng) * (Z.hi1 - Z.lo1), Z.lo2 + u01(rng) * (Z.hi2 - Z.lo2)};
                if (Z.empty()) continue;
                const auto g = cubic_integrand(t, xi, eta, zeta);
                const double a = Z.area() * cell * 0.5;
                for (int p = 0; p < 3; ++p) est.parts[p] += a * g[p];
                f[r] = Z.area() * (g[0] + g[1] + g[2]);
            }
            est.value += 0.5 * cell * (f[0] + f[1]);
            est.variance += cell * cell * std::norm(f[0] - f[1]) / 4.0;
            est.samples += 2;
        }
    }
    return est;
}

double weighted_box_mass(const Box& b, double s, int panels, int order) {
    if (b.empty()) return 0.0;
    std::vector<double> gx, gw;
    gauss_legendre(order, gx, gw);
    const double h1 = (b.hi1 - b.lo1) / panels, h2 = (b.hi2 - b.lo2) / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        for (int q = 0; q < panels; ++q) {
            for (int a = 0; a < order; ++a) {
                const double x = b.lo1 + h1 * (p + 0.5 * (gx[a] + 1.0));
                for (int c = 0; c < order; ++c) {
                    const double y = b.lo2 + h2 * (q + 0.5 * (gx[c] + 1.0));
                    acc += 0.25 * h1 * h2 * gw[a] * gw[c] * std::pow(1.0 + std::hypot(x, y), 2.0 * s);
                }
            }
        }
    }
    return kInvTwoPi2 * acc;
}

LineFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("degenerate fit: need two or more points");
    const std::size_t n = x.size();
    std::vector<double> lx(n), ly(n);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("degenerate fit: nonpositive value");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("degenerate fit: repeated abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < n; ++i) f.residuals.push_back(ly[i] - (f.intercept + f.slope * lx[i]));
    return f;
}

namespace {

// Midpoints of a cells x cells lattice on b.
template <class F>
void cell_midpoints(const Box& b, int cells, F&& f) {
    const double h1 = (b.hi1 - b.lo1) / cells, h2 = (b.hi2 - b.lo2) / cells;
    for (int i = 0; i < cells; ++i) {
        for (int j = 0; j < cells; ++j) f(i * cells + j, Vec2{b.lo1 + (i + 0.5) * h1, b.lo2 + (j + 0.5) * h2}, h1 * h2);
    }
}

void finish(ScalingReport& r) {
    std::vector<double> lam, term, data, ratio;
    for (const auto& p : r.points) {
        if (p.flagged) continue;
        lam.push_back(p.lambda);
        term.push_back(p.term);
        data.push_back(p.data);
        ratio.push_back(p.ratio);
    }
    r.term_fit = loglog_fit(lam, term);
    r.data_fit = loglog_fit(lam, data);
    r.ratio_fit = loglog_fit(lam, ratio);
}

void check_options(const SweepOptions& opt) {
    if (!(opt.eps > 0.0) || opt.eps > 0.1) throw std::invalid_argument("sweeps need 0 < eps <= 0.1");
    if (opt.ks.size() < 4) throw std::invalid_argument("sweeps need at least four lambda values");
    const auto [lo, hi] = std::minmax_element(opt.ks.begin(), opt.ks.end());
    // lambda ~ k^2, so two octaves in lambda is a factor 2 in k.
    if (*lo < 1 || *hi < 2 * *lo) throw std::invalid_argument("sweep lambdas must span at least two octaves");
    if (opt.cells < 2) throw std::invalid_argument("need at least two cells per axis");
}

}  // namespace

std::vector<ScalingReport> f2_sweep(const std::vector<double>& s_values, const SweepOptions& opt) {
    check_options(opt);
    std::vector<ScalingReport> reports;
    for (double s : s_values) {
        ScalingReport r;
        r.kind = "f2";
        r.s = s;
        r.eps = opt.eps;
        r.predicted_term = s / 2.0 + 1.0;
        r.predicted_data = 2.0 * s + 1.0;
        r.predicted_ratio = -1.5 * s;
        reports.push_back(r);
    }
    for (int k : opt.ks) {
        const double lam = lambda_of_k(k, opt.eps);
        const double t = opt.eps / std::sqrt(lam);
        const Box W = rect_box({Rect::W, lam});
        const Box support = minkowski(W, negate(W));
        std::vector<double> acc(s_values.size(), 0.0);
        long unconverged = 0;
        cell_midpoints(support, opt.cells, [&](int, const Vec2& xi, double area) {
            bool ok = true;
            const double v = std::norm(f2_hat(t, xi, lam, opt.quad, nullptr, &ok));
            if (!ok) ++unconverged;
            for (std::size_t i = 0; i < s_values.size(); ++i) {
                acc[i] += kInvTwoPi2 * area * std::pow(1.0 + norm2(xi), 2.0 * s_values[i]) * v;
            }
        });
        for (std::size_t i = 0; i < s_values.size(); ++i) {
            SweepPoint p;
            p.k = k;
            p.lambda = lam;
            p.t = t;
            p.term = std::sqrt(acc[i]);
            p.data = weighted_box_mass(W, s_values[i]);
            p.ratio = p.term / p.data;
            p.rel_error = static_cast<double>(unconverged) / (opt.cells * opt.cells);
            p.flagged = unconverged > 0;
            reports[i].points.push_back(p);
        }
    }
    for (auto& r : reports) finish(r);
    return reports;
}

std::vector<ScalingReport> aflow_sweep(const std::vector<double>& s_values, const SweepOptions& opt) {
    check_options(opt);
    std::vector<ScalingReport> reports;
    for (double s : s_values) {
        ScalingReport r;
        r.kind = "aflow";
        r.s = s;
        r.eps = opt.eps;
        r.predicted_term = s + 1.0;
        r.predicted_data = 2.0 * s + 0.75;
        r.predicted_ratio = 0.25 - s;
        reports.push_back(r);
    }
    for (int k : opt.ks) {
        const double lam = lambda_of_k(k, opt.eps);
        const double t = opt.eps / std::sqrt(lam);
        const Box W = rect_box({Rect::W, lam});
        const Box Wt = rect_box({Rect::Wtilde, lam});
        const Box support = minkowski(W, Wt);
        std::vector<double> acc(s_values.size(), 0.0);
        long unconverged = 0;
        cell_midpoints(support, opt.cells, [&](int, const Vec2& xi, double area) {
            bool ok = true;
            const auto v = aflow_hat(t, xi, lam, opt.quad, &ok);
            if (!ok) ++unconverged;
            const double m2 = std::norm(v[0]) + std::norm(v[1]);
            for (std::size_t i = 0; i < s_values.size(); ++i) {
                acc[i] += kInvTwoPi2 * area * std::pow(1.0 + norm2(xi), 2.0 * s_values[i]) * m2;
            }
        });
        for (std::size_t i = 0; i < s_values.size(); ++i) {
            SweepPoint p;
            p.k = k;
            p.lambda = lam;
            p.t = t;
            p.term = std::sqrt(acc[i]);
            p.data = std::sqrt(weighted_box_mass(Wt, s_values[i]) * weighted_box_mass(W, s_values[i]));
            p.ratio = p.term / p.data;
            p.rel_error = static_cast<double>(unconverged) / (opt.cells * opt.cells);
            p.flagged = unconverged > 0;
            reports[i].points.push_back(p);
        }
    }
    for (auto& r : reports) finish(r);
    return reports;
}

std::vector<ScalingReport> cubic_sweep(const std::vector<double>& s_values, const SweepOptions& opt) {
    check_options(opt);
    std::vector<ScalingReport> reports;
    for (double s : s_values) {
        ScalingReport r;
        r.kind = "cubic";
        r.s = s;
        r.eps = opt.eps;
        r.predicted_term = 1.5 + s;
        r.predicted_data = 3.0 * s + 1.5;
        r.predicted_ratio = -2.0 * s;
        reports.push_back(r);
    }
    for (int k : opt.ks) {
        const double lam = lambda_of_k(k, opt.eps);
        const double t = opt.eps / std::sqrt(lam);
        const double r3 = 3.0 * std::sqrt(lam);
        const Box W = rect_box({Rect::W, lam});
        const Box support{lam - r3, lam + r3, -r3, r3};
        const std::size_t ns = s_values.size();
        std::vector<double> mass(ns, 0.0), var(ns, 0.0);
        std::vector<std::array<double, 3>> parts(ns, {0.0, 0.0, 0.0});
        cell_midpoints(support, opt.cells, [&](int idx, const Vec2& xi, double area) {
            const McEstimate e = cubic_hat_mc(t, xi, lam, opt.strata,
                                              derive_seed(opt.seed, static_cast<std::uint64_t>(k) << 32 | idx));
            const double v2 = std::norm(e.value);
            for (std::size_t i = 0; i < ns; ++i) {
                const double w = kInvTwoPi2 * area * std::pow(1.0 + norm2(xi), 2.0 * s_values[i]);
                mass[i] += w * (v2 - e.variance);
                var[i] += w * w * 4.0 * v2 * e.variance;
                for (int p = 0; p < 3; ++p) parts[i][p] += w * std::norm(e.parts[p]);
            }
        });
        for (std::size_t i = 0; i < ns; ++i) {
            SweepPoint p;
            p.k = k;
            p.lambda = lam;
            p.t = t;
            p.term = std::sqrt(std::max(mass[i], 0.0));
            p.data = std::pow(weighted_box_mass(W, s_values[i]), 1.5);
            p.ratio = p.term / p.data;
            p.rel_error = mass[i] > 0.0 ? std::sqrt(var[i]) / (2.0 * mass[i]) : 1.0;
            p.flagged = !(p.rel_error <= opt.max_mc_error) || !(p.term > 0.0);
            for (int q = 0; q < 3; ++q) p.parts.push_back(std::sqrt(parts[i][q]));
            reports[i].points.push_back(p);
        }
    }
    for (auto& r : reports) finish(r);
    return reports;
}

}  // namespace csd
