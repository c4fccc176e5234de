#include "csd/picard.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace csd {

namespace {

const cplx I(0.0, 1.0);

ScalarField zeros_fourier(const Grid2D& g) { return ScalarField(g, Rep::fourier); }

// Symbol 1/(i|xi|) with value 0 at the zero mode.
ScalarField inv_iD(const ScalarField& f, const char* what, std::vector<std::string>* warnings) {
    ScalarField fh = to_fourier(f);
    const double mean = std::abs(fh.v[0]);
    double scale = 0.0;
    for (const auto& z : fh.v) scale = std::max(scale, std::abs(z));
    if (warnings && mean > 1e-12 * std::max(scale, 1e-300) && mean > 1e-300) {
        std::ostringstream os;
        os << "nonzero mean in " << what << " fed to 1/iD; zero mode dropped";
        warnings->push_back(os.str());
    }
    return multiplier(fh, [](const Vec2& xi) { return 1.0 / (I * std::hypot(xi[0], xi[1])); }, cplx(0.0));
}

ScalarField d_dx(const ScalarField& f, int j) {
    return multiplier(f, [j](const Vec2& xi) { return I * xi[j - 1]; });
}

// alpha^mu applied pointwise to a spinor (either representation).
SpinorField apply_alpha(int mu, const SpinorField& psi) {
    switch (mu) {
        case 0: return psi;
        case 1: return SpinorField(psi.down, psi.up);
        case 2: return SpinorField(cplx(0.0, -1.0) * psi.down, cplx(0.0, 1.0) * psi.up);
        default: throw std::out_of_range("alpha index");
    }
}

SpinorField riesz_spinor(int mu, Sign s, const SpinorField& psi) {
    return SpinorField(riesz(mu, s, psi.up), riesz(mu, s, psi.down));
}

// Pi_{-s} alpha^lam psi - R^lam_s psi, the alpha^lam psi_s split of the
// commutation identity.
// The identity needs Pi_{-s} Pi_s = 0, which the zero-mode policy breaks, so
// the zero mode is alpha^lam psi^(0) directly.
SpinorField split_alpha(int lam, Sign s, const SpinorField& psi) {
    const Mat2 a = alpha(lam);
    const SpinorField ph = to_fourier(psi);
    SpinorField p = apply_matrix_symbol(ph, [&](const Vec2& xi) { return projection_policy(xi, flip(s)) * a; });
    p = to_fourier(p - riesz_spinor(lam, s, ph));
    const std::array<cplx, 2> z = a * std::array<cplx, 2>{ph.up.v[0], ph.down.v[0]};
    p.up.v[0] = z[0];
    p.down.v[0] = z[1];
    return p;
}

// sum_c conj(a_c) b_c in physical space (no dealiasing).
void accumulate_dagger(std::vector<cplx>& acc, const SpinorField& a, const SpinorField& b) {
    for (std::size_t i = 0; i < acc.size(); ++i) {
        acc[i] += std::conj(a.up.v[i]) * b.up.v[i] + std::conj(a.down.v[i]) * b.down.v[i];
    }
}

ScalarField dealiased_from(const Grid2D& g, std::vector<cplx> values) {
    ScalarField f(g, Rep::physical);
    f.v = std::move(values);
    return dealias(f);
}

SpinorField scalar_times_spinor(const ScalarField& a, const SpinorField& psi) {
    return SpinorField(product(a, psi.up), product(a, psi.down));
}

}  // namespace

const ScalarField& CauchyData::a(int nu) const {
    switch (nu) {
        case 0: return a0;
        case 1: return a1;
        case 2: return a2;
        default: throw std::out_of_range("potential index must be 0, 1 or 2");
    }
}

void CauchyData::validate() const {
    for (int nu = 0; nu < 3; ++nu) {
        if (a(nu).grid != grid()) throw std::invalid_argument("Cauchy data on different grids");
        const ScalarField p = to_physical(a(nu));
        double re = 0.0;
        double im = 0.0;
        for (const auto& z : p.v) {
            re = std::max(re, std::abs(z.real()));
            im = std::max(im, std::abs(z.imag()));
        }
        if (im > 1e-12 * std::max(1.0, re)) throw std::invalid_argument("potential data must be real-valued");
    }
    if (psi0.grid() != grid()) throw std::invalid_argument("Cauchy data on different grids");
    if (!(mass >= 0.0) || !std::isfinite(mass)) throw std::invalid_argument("mass must be non-negative");
}

TimeGrid make_time_grid(double T, double t_ext, double dt_max) {
    if (!(T > 0.0) || !(dt_max > 0.0) || !(t_ext >= T)) throw std::invalid_argument("invalid time grid request");
    TimeGrid tg;
    const double steps = std::ceil(T / dt_max - 1e-12);
    tg.dt = T / steps;
    tg.K = static_cast<int>(std::ceil(t_ext / tg.dt - 1e-9));
    return tg;
}

double cfl_dt(const Grid2D& g, double cfl) {
    const double kmax = g.dxi() * g.dealias_cutoff() * std::sqrt(2.0);
    return cfl / kmax;
}

SpinorFrames homogeneous_spinor(const CauchyData& data, Sign s, const TimeGrid& tg) {
    const SpinorField p = project_spinor(to_fourier(data.psi0), s);
    SpinorFrames out;
    out.reserve(tg.size());
    for (int k = 0; k < tg.size(); ++k) out.push_back(halfwave(p, tg.t(k), s));
    return out;
}

Frames homogeneous_potential(const CauchyData& data, int nu, Sign s, const TimeGrid& tg, HomMode mode,
                             std::vector<std::string>* warnings) {
    if (nu < 0 || nu > 2) throw std::out_of_range("potential index must be 0, 1 or 2");
    const Grid2D& g = data.grid();
    const SpinorField psi = to_fourier(data.psi0);
    const ScalarField u0 = to_fourier(data.a(nu));
    ScalarField corr = zeros_fourier(g);  // the argument of 1/iD

    if (mode == HomMode::simplified) {
        if (nu == 0) {
            // (d^j / iD) a_j with d^j = -d_j
            for (int j = 1; j <= 2; ++j) corr = corr - d_dx(to_fourier(data.a(j)), j);
        } else {
            corr = cplx(-1.0) * d_dx(to_fourier(data.a0), nu);
        }
    } else {
        const double eps_factor = mode == HomMode::full ? -2.0 : -1.0;
        ScalarField f0 = zeros_fourier(g);
        for (int lam = 0; lam < 3; ++lam) {
            const int e = levi_civita(0, nu, lam);
            if (e != 0) f0 = f0 + cplx(eps_factor * e) * current(psi, psi, lam);
        }
        // d_0 A_nu(0) from the initial conditions
        ScalarField dt_a = zeros_fourier(g);
        if (nu == 0) {
            for (int j = 1; j <= 2; ++j) dt_a = dt_a + d_dx(to_fourier(data.a(j)), j);
        } else {
            dt_a = d_dx(to_fourier(data.a0), nu);
            for (int k = 1; k <= 2; ++k) {
                const int e = levi_civita(0, nu, k);
                if (e != 0) dt_a = dt_a - cplx(2.0 * e) * current(psi, psi, k);
            }
        }
        corr = f0 - dt_a;
    }

    const ScalarField base = cplx(0.5) * (u0 + cplx(sgn(s)) * inv_iD(corr, "homogeneous potential data", warnings));
    Frames out;
    out.reserve(tg.size());
    for (int k = 0; k < tg.size(); ++k) out.push_back(halfwave(base, tg.t(k), s));
    return out;
}

ScalarField current(const SpinorField& psi1, const SpinorField& psi2, int lam) {
    if (psi1.grid() != psi2.grid()) throw std::invalid_argument("grid mismatch");
    const SpinorField a = to_physical(psi1);
    const SpinorField b = to_physical(apply_alpha(lam, to_physical(psi2)));
    std::vector<cplx> acc(a.grid().size(), cplx(0.0));
    accumulate_dagger(acc, a, b);
    return dealiased_from(a.grid(), std::move(acc));
}

ScalarField nonlin_N(const SpinorField& psi1, const SpinorField& psi2, Sign /*s1*/, Sign s2, int mu, int nu) {
    const Grid2D& g = psi1.grid();
    const SpinorField a = to_physical(psi1);
    std::vector<cplx> acc(g.size(), cplx(0.0));
    bool any = false;
    for (int lam = 0; lam < 3; ++lam) {
        const int e = levi_civita(mu, nu, lam);
        if (e == 0) continue;
        any = true;
        const SpinorField b = to_physical(cplx(e) * split_alpha(lam, s2, to_fourier(psi2)));
        accumulate_dagger(acc, a, b);
    }
    if (!any) return zeros_fourier(g);
    return dealiased_from(g, std::move(acc));
}

Frames nonlin_N(const SpinorFrames& psi1, const SpinorFrames& psi2, Sign s1, Sign s2, int mu, int nu) {
    if (psi1.size() != psi2.size()) throw std::invalid_argument("frame count mismatch");
    Frames out;
    out.reserve(psi1.size());
    for (std::size_t k = 0; k < psi1.size(); ++k) out.push_back(nonlin_N(psi1[k], psi2[k], s1, s2, mu, nu));
    return out;
}

SpinorField nonlin_M(const SpinorField& psi, const std::array<ScalarField, 3>& A, Sign s1) {
    const Grid2D& g = psi.grid();
    SpinorField out(g, Rep::fourier);
    const SpinorField ph = to_fourier(psi);
    for (int mu = 0; mu < 3; ++mu) {
        // -Pi_{-s1} alpha^mu psi + R^mu_{s1} psi
        const SpinorField h = cplx(-1.0) * split_alpha(mu, s1, ph);
        out = out + scalar_times_spinor(A[mu], h);
    }
    return out;
}

SpinorFrames nonlin_M(const SpinorFrames& psi, const std::array<Frames, 3>& A, Sign s1) {
    SpinorFrames out;
    out.reserve(psi.size());
    for (std::size_t k = 0; k < psi.size(); ++k) out.push_back(nonlin_M(psi[k], {A[0][k], A[1][k], A[2][k]}, s1));
    return out;
}

Frames duhamel(const Frames& F, Sign s, const TimeGrid& tg) {
    if (F.empty() || tg.size() == 0) throw std::invalid_argument("duhamel on an empty grid");
    if (static_cast<int>(F.size()) != tg.size()) throw std::invalid_argument("forcing not sampled on the time grid");
    const Grid2D& g = F.front().grid;
    const int K = tg.K;
    // G_j = U_s(-t_j) F_j, accumulated outward from t = 0.
    Frames G;
    G.reserve(F.size());
    for (int k = 0; k < tg.size(); ++k) G.push_back(halfwave(to_fourier(F[k]), -tg.t(k), s));
    Frames out(tg.size(), zeros_fourier(g));
    ScalarField c = zeros_fourier(g);
    const double h = 0.5 * tg.dt;
    for (int k = K + 1; k < tg.size(); ++k) {
        for (std::size_t i = 0; i < c.v.size(); ++i) c.v[i] += h * (G[k - 1].v[i] + G[k].v[i]);
        out[k] = halfwave(c, tg.t(k), s);
    }
    c = zeros_fourier(g);
    for (int k = K - 1; k >= 0; --k) {
        for (std::size_t i = 0; i < c.v.size(); ++i) c.v[i] -= h * (G[k + 1].v[i] + G[k].v[i]);
        out[k] = halfwave(c, tg.t(k), s);
    }
    return out;
}

SpinorFrames duhamel(const SpinorFrames& F, Sign s, const TimeGrid& tg) {
    Frames up, down;
    up.reserve(F.size());
    down.reserve(F.size());
    for (const auto& f : F) {
        up.push_back(f.up);
        down.push_back(f.down);
    }
    Frames vu = duhamel(up, s, tg);
    Frames vd = duhamel(down, s, tg);
    SpinorFrames out;
    out.reserve(F.size());
    for (std::size_t k = 0; k < F.size(); ++k) out.emplace_back(std::move(vu[k]), std::move(vd[k]));
    return out;
}

SpinorField IterationState::psi_total(int k) const { return psi[0][k] + psi[1][k]; }
ScalarField IterationState::A_total(int nu, int k) const { return A[0][nu][k] + A[1][nu][k]; }

IterationState initial_state(const CauchyData& data, const TimeGrid& tg, HomMode mode,
                             std::vector<std::string>* warnings) {
    data.validate();
    IterationState st;
    st.tg = tg;
    for (Sign s : both_signs) {
        st.psi[sign_index(s)] = homogeneous_spinor(data, s, tg);
        for (int nu = 0; nu < 3; ++nu) st.A[sign_index(s)][nu] = homogeneous_potential(data, nu, s, tg, mode, warnings);
    }
    return st;
}

namespace {

struct FrameSources {
    std::array<std::array<ScalarField, 3>, 2> a;  // sum_mu R^mu_s N_{mu nu}, [sign][nu]
    std::array<SpinorField, 2> psi;               // M beta psi_{-s} + Pi_s sum M(psi, A), [sign]
};

// All four sign pairs are formed explicitly; sums are taken in physical space
// before the single dealiasing transform per output component.
FrameSources frame_sources(const IterationState& st, int k, double mass) {
    const Grid2D& g = st.psi[0][k].grid();
    std::array<SpinorField, 2> psi_phys{to_physical(st.psi[0][k]), to_physical(st.psi[1][k])};

    std::array<ScalarField, 3> J{zeros_fourier(g), zeros_fourier(g), zeros_fourier(g)};
    for (int lam = 0; lam < 3; ++lam) {
        std::vector<cplx> acc(g.size(), cplx(0.0));
        for (Sign s2 : both_signs) {
            const SpinorField b = to_physical(split_alpha(lam, s2, st.psi[sign_index(s2)][k]));
            for (Sign s1 : both_signs) accumulate_dagger(acc, psi_phys[sign_index(s1)], b);
        }
        J[lam] = dealiased_from(g, std::move(acc));
    }

    FrameSources out{{{{zeros_fourier(g), zeros_fourier(g), zeros_fourier(g)},
                       {zeros_fourier(g), zeros_fourier(g), zeros_fourier(g)}}},
                     {SpinorField(g, Rep::fourier), SpinorField(g, Rep::fourier)}};
    for (Sign s : both_signs) {
        for (int nu = 0; nu < 3; ++nu) {
            ScalarField acc = zeros_fourier(g);
            for (int mu = 0; mu < 3; ++mu) {
                for (int lam = 0; lam < 3; ++lam) {
                    const int e = levi_civita(mu, nu, lam);
                    if (e != 0) acc = acc + cplx(e) * riesz(mu, s, J[lam]);
                }
            }
            out.a[sign_index(s)][nu] = acc;
        }
    }

    std::array<ScalarField, 3> A_phys{to_physical(st.A_total(0, k)), to_physical(st.A_total(1, k)),
                                      to_physical(st.A_total(2, k))};
    std::vector<cplx> mu_up(g.size(), cplx(0.0));
    std::vector<cplx> mu_dn(g.size(), cplx(0.0));
    for (Sign s1 : both_signs) {
        const SpinorField& p = st.psi[sign_index(s1)][k];
        for (int mu = 0; mu < 3; ++mu) {
            const SpinorField h = to_physical(cplx(-1.0) * split_alpha(mu, s1, p));
            for (std::size_t i = 0; i < g.size(); ++i) {
                mu_up[i] += A_phys[mu].v[i] * h.up.v[i];
                mu_dn[i] += A_phys[mu].v[i] * h.down.v[i];
            }
        }
    }
    const SpinorField Msum(dealiased_from(g, std::move(mu_up)), dealiased_from(g, std::move(mu_dn)));
    for (Sign s : both_signs) {
        SpinorField src = project_spinor(Msum, s);
        if (mass != 0.0) {
            const SpinorField& q = st.psi[sign_index(flip(s))][k];
            src = src + SpinorField(cplx(mass) * q.up, cplx(-mass) * q.down);
        }
        out.psi[sign_index(s)] = src;
    }
    return out;
}

}  // namespace

IterationState picard_iterate(const IterationState& state, const IterationState& hom, const CauchyData& data) {
    const TimeGrid& tg = state.tg;
    std::array<std::array<Frames, 3>, 2> asrc;
    std::array<SpinorFrames, 2> psrc;
    for (int k = 0; k < tg.size(); ++k) {
        FrameSources fs = frame_sources(state, k, data.mass);
        for (int si = 0; si < 2; ++si) {
            for (int nu = 0; nu < 3; ++nu) asrc[si][nu].push_back(std::move(fs.a[si][nu]));
            psrc[si].push_back(std::move(fs.psi[si]));
        }
    }
    IterationState next;
    next.tg = tg;
    next.n = state.n + 1;
    for (Sign s : both_signs) {
        const int si = sign_index(s);
        for (int nu = 0; nu < 3; ++nu) {
            const Frames d = duhamel(asrc[si][nu], s, tg);
            Frames a;
            a.reserve(tg.size());
            for (int k = 0; k < tg.size(); ++k) a.push_back(hom.A[si][nu][k] + d[k]);
            next.A[si][nu] = std::move(a);
        }
        const SpinorFrames d = duhamel(psrc[si], s, tg);
        SpinorFrames p;
        p.reserve(tg.size());
        for (int k = 0; k < tg.size(); ++k) p.push_back(hom.psi[si][k] + cplx(0.0, -1.0) * d[k]);
        next.psi[si] = std::move(p);
    }
    return next;
}

double psi_distance(const IterationState& a, const IterationState& b) {
    double d = 0.0;
    for (int k = 0; k < a.tg.size(); ++k) {
        double s = 0.0;
        for (int si = 0; si < 2; ++si) {
            const double x = l2_norm(a.psi[si][k] - b.psi[si][k]);
            s += x * x;
        }
        d = std::max(d, std::sqrt(s));
    }
    return d;
}

double potential_distance(const IterationState& a, const IterationState& b) {
    double d = 0.0;
    for (int k = 0; k < a.tg.size(); ++k) {
        double s = 0.0;
        for (int si = 0; si < 2; ++si)
            for (int nu = 0; nu < 3; ++nu) {
                const double x = l2_norm(a.A[si][nu][k] - b.A[si][nu][k]);
                s += x * x;
            }
        d = std::max(d, std::sqrt(s));
    }
    return d;
}

std::vector<double> charge(const SpinorFrames& psi) {
    std::vector<double> q;
    q.reserve(psi.size());
    for (const auto& p : psi) {
        const double x = l2_norm(p);
        q.push_back(x * x);
    }
    return q;
}

std::vector<double> charge(const IterationState& state) {
    SpinorFrames tot;
    tot.reserve(state.tg.size());
    for (int k = 0; k < state.tg.size(); ++k) tot.push_back(state.psi_total(k));
    return charge(tot);
}

Residuals residual(const IterationState& state, const CauchyData& data) {
    const TimeGrid& tg = state.tg;
    Residuals r;
    if (tg.size() < 3) return r;
    const double dt = tg.dt;
    const int m = tg.size();

    SpinorFrames psi;
    std::array<Frames, 3> A;
    std::array<Frames, 3> J;
    for (int k = 0; k < m; ++k) {
        psi.push_back(to_fourier(state.psi_total(k)));
        for (int nu = 0; nu < 3; ++nu) A[nu].push_back(to_fourier(state.A_total(nu, k)));
        for (int lam = 0; lam < 3; ++lam) J[lam].push_back(current(psi[k], psi[k], lam));
    }

    double dirac_num = 0.0, dirac_den = 0.0;
    double wave_num = 0.0, wave_den = 0.0;
    double gauge_num = 0.0, gauge_den = 0.0;
    double a_max = 0.0, a_imag = 0.0;
    const Mat2 b = beta();
    for (int k = 1; k + 1 < m; ++k) {
        const SpinorField dpsi = cplx(0.5 / dt) * (psi[k + 1] - psi[k - 1]);
        // -i d_t psi - i alpha^j d_j psi + M beta psi - A_mu alpha^mu psi
        SpinorField res = cplx(0.0, -1.0) * dpsi;
        res = res + apply_matrix_symbol(psi[k], [](const Vec2& xi) {
                  return cplx(xi[0]) * alpha(1) + cplx(xi[1]) * alpha(2);
              });
        if (data.mass != 0.0) res = res + apply_matrix_symbol(psi[k], [&](const Vec2&) { return cplx(data.mass) * b; });
        for (int mu = 0; mu < 3; ++mu) res = res - scalar_times_spinor(A[mu][k], apply_alpha(mu, to_physical(psi[k])));
        dirac_num = std::max(dirac_num, l2_norm(res));
        dirac_den = std::max(dirac_den, l2_norm(dpsi));

        double wn = 0.0, wd = 0.0;
        for (int nu = 0; nu < 3; ++nu) {
            ScalarField box = cplx(1.0 / (dt * dt)) * (A[nu][k + 1] - cplx(2.0) * A[nu][k] + A[nu][k - 1]);
            const ScalarField lap = multiplier(A[nu][k], [](const Vec2& xi) { return cplx(xi[0] * xi[0] + xi[1] * xi[1]); });
            box = box + lap;
            // d^mu F_mu = d_t F_0 - d_j F_j with F_mu = -2 eps_{mu nu lam} J^lam
            ScalarField src = zeros_fourier(data.grid());
            for (int lam = 0; lam < 3; ++lam) {
                const int e0 = levi_civita(0, nu, lam);
                if (e0 != 0) src = src + cplx(-2.0 * e0 * 0.5 / dt) * (J[lam][k + 1] - J[lam][k - 1]);
                for (int j = 1; j <= 2; ++j) {
                    const int ej = levi_civita(j, nu, lam);
                    if (ej != 0) src = src - cplx(-2.0 * ej) * d_dx(J[lam][k], j);
                }
            }
            const double x = l2_norm(box - src);
            wn += x * x;
            wd += l2_norm(lap) * l2_norm(lap);
        }
        wave_num = std::max(wave_num, std::sqrt(wn));
        wave_den = std::max(wave_den, std::sqrt(wd));

        const ScalarField dA0 = cplx(0.5 / dt) * (A[0][k + 1] - A[0][k - 1]);
        ScalarField gauge = dA0;
        double gd = l2_norm(dA0);
        for (int j = 1; j <= 2; ++j) {
            const ScalarField dj = d_dx(A[j][k], j);
            gauge = gauge - dj;
            gd += l2_norm(dj);
        }
        gauge_num = std::max(gauge_num, l2_norm(gauge));
        gauge_den = std::max(gauge_den, gd);

        for (int nu = 0; nu < 3; ++nu) {
            const ScalarField p = to_physical(A[nu][k]);
            for (const auto& z : p.v) {
                a_max = std::max(a_max, std::abs(z));
                a_imag = std::max(a_imag, std::abs(z.imag()));
            }
        }
    }
    r.dirac = dirac_den > 0.0 ? dirac_num / dirac_den : 0.0;
    r.wave = wave_den > 0.0 ? wave_num / wave_den : 0.0;
    r.gauge = gauge_den > 0.0 ? gauge_num / gauge_den : 0.0;
    r.imag_A = a_max > 0.0 ? a_imag / a_max : 0.0;
    return r;
}

PicardRun run_picard(const CauchyData& data, const Grid2D& g, const PicardOptions& opt) {
    if (data.grid() != g) throw std::invalid_argument("data grid does not match the run grid");
    if (!(opt.T > 0.0) || !(opt.t_ext >= opt.T)) throw std::invalid_argument("invalid time window");
    if (opt.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    PicardRun run;
    const double dt_cfl = cfl_dt(g, opt.cfl);
    double dt_max = dt_cfl;
    if (opt.dt > 0.0) {
        dt_max = opt.dt;
        if (opt.dt > cfl_dt(g, 0.5) * (1.0 + 1e-12)) {
            run.warnings.push_back("time step exceeds the stability guard max|xi| dt <= 0.5");
        }
    }
    const TimeGrid tg = make_time_grid(opt.T, opt.t_ext, dt_max);
    const IterationState hom = initial_state(data, tg, opt.mode, &run.warnings);
    IterationState cur = hom;
    for (int it = 0; it < opt.max_iterations; ++it) {
        IterationState next = picard_iterate(cur, hom, data);
        const double d = psi_distance(next, cur);
        run.distances.push_back(d);
        run.potential_distances.push_back(potential_distance(next, cur));
        cur = std::move(next);
        double scale = 0.0;
        for (int k = 0; k < tg.size(); ++k) scale = std::max(scale, l2_norm(cur.psi_total(k)));
        if (it + 1 >= opt.min_iterations && d <= opt.tolerance * std::max(scale, 1e-300)) {
            run.converged = true;
            break;
        }
        if (scale == 0.0 && d == 0.0) {
            run.converged = true;
            break;
        }
    }
    run.state = std::move(cur);
    return run;
}

}  // namespace csd
