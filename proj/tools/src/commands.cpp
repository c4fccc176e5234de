#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "csd/besov.hpp"
#include "csd/calibration.hpp"
#include "csd/dirac.hpp"
#include "csd/nullforms.hpp"
#include "csd/rng.hpp"
#include "csd_cli/cli.hpp"

namespace csd::cli {

namespace {

using Clock = std::chrono::steady_clock;

json load_config(const Invocation& inv) {
    if (!inv.config) return json();
    const std::string text = read_text(*inv.config);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + inv.config->string() + " is not valid JSON: " + e.what());
    }
}

json report_header(const std::string& command, const json& config) {
    json r;
    r["schema_version"] = kSchemaVersion;
    r["command"] = command;
    r["input_hash"] = git_blob_sha1(config.dump());
    r["config"] = config;
    return r;
}

void write_timing(const Invocation& inv, const std::string& what, Clock::time_point t0) {
    const double s = std::chrono::duration<double>(Clock::now() - t0).count();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", s);
    write_text(inv.out / "timing.txt", what + " wall_clock_seconds " + buf + "\n");
}

HomMode parse_mode(const std::string& m) {
    if (m == "simplified") return HomMode::simplified;
    if (m == "as_printed") return HomMode::as_printed;
    return HomMode::full;
}

Summation parse_q(const std::string& q) { return q == "linf" ? Summation::linf : Summation::l1; }

}  // namespace

// ---- simulate ---------------------------------------------------------------

int cmd_simulate(const Invocation& inv, std::ostream& log) {
    const auto t0 = Clock::now();
    const SimulateConfig cfg = parse_simulate(load_config(inv), inv.quick);
    const json cj = to_json(cfg);
    CauchyData data = build_data(cfg);
    const Grid2D g = data.grid();
    try {
        data.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("initial data: ") + e.what());
    }

    PicardOptions opt;
    opt.T = cfg.T;
    opt.t_ext = cfg.t_ext;
    opt.cfl = cfg.cfl;
    opt.dt = cfg.dt;
    opt.max_iterations = cfg.max_iterations;
    opt.min_iterations = cfg.min_iterations;
    opt.tolerance = cfg.tolerance;
    opt.mode = parse_mode(cfg.mode);
    PicardRun run;
    try {
        run = run_picard(data, g, opt);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
    const IterationState& st = run.state;
    const TimeGrid& tg = st.tg;
    for (const auto& w : run.warnings) log << "warning: " << w << "\n";

    SolutionArchive arc;
    arc.n = g.n();
    arc.length = g.length();
    arc.dt = tg.dt;
    arc.t0 = tg.t(0);
    for (int k = 0; k < tg.size(); ++k) {
        const SpinorField p = st.psi_total(k);
        arc.frames.push_back({p.up, p.down, st.A_total(0, k), st.A_total(1, k), st.A_total(2, k)});
    }
    write_archive(inv.out / "solution.bin", arc);

    const std::vector<double> q = charge(st);
    const double q0 = q[tg.K];
    double drift = 0.0;
    CsvWriter csv({"k", "t", "charge"});
    for (int k = 0; k < tg.size(); ++k) {
        csv.row({std::to_string(k - tg.K), format_double(tg.t(k)), format_double(q[k])});
        drift = std::max(drift, std::abs(q[k] - q0));
    }
    if (q0 > 0.0) drift /= q0;
    write_text(inv.out / "charge.csv", csv.str());

    const Residuals res = residual(st, data);
    // Window half-width chosen so that (-2 Tw, 2 Tw) lies inside the frames.
    const double Tw = tg.K * tg.dt / 2.0;
    json norms;
    norms["window_half_width"] = Tw;
    norms["s"] = cfg.norm_s;
    norms["b"] = cfg.norm_b;
    norms["q"] = cfg.norm_q;
    for (Sign s : both_signs) {
        const std::string key = s == Sign::plus ? "psi_plus" : "psi_minus";
        if (tg.K < 1) {
            norms[key] = nullptr;
            continue;
        }
        const SpaceTimeField u = make_spacetime(st.psi[sign_index(s)], tg.axis(), Tw);
        norms[key] = besov_norm(with_spectrum(u), NormSpec{cfg.norm_s, cfg.norm_b, parse_q(cfg.norm_q), s});
    }
    norms["psi0_sobolev"] = sobolev_exact(data.psi0, cfg.norm_s);
    norms["psi0_spatial_besov"] = spatial_besov(data.psi0, cfg.norm_s);

    json r = report_header("simulate", cj);
    json res_j;
    res_j["converged"] = run.converged;
    res_j["iterations"] = static_cast<int>(run.distances.size());
    res_j["dt"] = tg.dt;
    res_j["frames"] = tg.size();
    res_j["cfl_dt"] = cfl_dt(g, 0.5);
    res_j["distances"] = run.distances;
    res_j["potential_distances"] = run.potential_distances;
    json ratios = json::array();
    for (std::size_t i = 1; i < run.distances.size(); ++i) {
        ratios.push_back(run.distances[i - 1] > 0.0 ? run.distances[i] / run.distances[i - 1] : 0.0);
    }
    res_j["distance_ratios"] = ratios;
    res_j["charge_initial"] = q0;
    res_j["charge_drift"] = drift;
    res_j["residual"] = {{"dirac", res.dirac}, {"wave", res.wave}, {"gauge", res.gauge}, {"imag_A", res.imag_A}};
    res_j["norms"] = norms;
    r["results"] = res_j;
    r["warnings"] = run.warnings;
    r["artifacts"] = {"solution.bin", "charge.csv", "report.json"};
    write_text(inv.out / "report.json", dump_json(r));
    write_timing(inv, "simulate", t0);

    log << "simulate: " << run.distances.size() << " iterations, converged=" << (run.converged ? "yes" : "no")
        << ", charge drift " << format_double(drift) << "\n";
    return run.converged ? Exit::ok : Exit::nonconvergence;
}

// ---- verify -----------------------------------------------------------------

namespace {

struct Suite {
    std::string name;
    long samples = 0;
    long violations = 0;
    json detail = json::object();
};

class Counterexamples {
public:
    void add(const std::string& s) {
        if (list_.size() < 10) list_.push_back(s);
    }
    const std::vector<std::string>& list() const { return list_; }

private:
    std::vector<std::string> list_;
};

std::string vec_text(const Vec2& v) { return "(" + format_double(v[0]) + ", " + format_double(v[1]) + ")"; }

Suite dirac_suite(const VerifyConfig& c, Counterexamples& ce) {
    Suite s{"dirac_algebra"};
    std::mt19937_64 rng(derive_seed(c.seed, 1));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const bool fault = c.fault == "flip_riesz_sign";
    double worst = 0.0;
    for (long i = 0; i < c.dirac_samples; ++i) {
        const double r = std::pow(10.0, -3.0 + 6.0 * u(rng));
        const double a = 2.0 * M_PI * u(rng);
        const Vec2 xi{r * std::cos(a), r * std::sin(a)};
        const int mu = static_cast<int>(3.0 * u(rng)) % 3;
        const Sign sg = u(rng) < 0.5 ? Sign::plus : Sign::minus;
        const Mat2 P = projection(xi, sg), Q = projection(xi, flip(sg));
        const double idem = (P * P - P).max_abs();
        const double comp = (P + Q - Mat2::identity()).max_abs();
        const double orth = (P * Q).max_abs();
        double ident = 0.0;
        if (fault) {
            const Mat2 d = alpha(mu) * P - Q * alpha(mu) * P + riesz_symbol(mu, flip(sg), xi) * P;
            ident = d.max_abs();
        } else {
            ident = commutation_defect(xi, mu, sg).max_abs();
        }
        const double m = std::max({idem, comp, orth, ident});
        worst = std::max(worst, m);
        ++s.samples;
        if (m > 1e-12) {
            ++s.violations;
            ce.add("dirac_algebra: xi=" + vec_text(xi) + " mu=" + std::to_string(mu) + " s=" +
                   (sg == Sign::plus ? "+" : "-") + " defect=" + format_double(m));
        }
    }
    s.detail["max_defect"] = worst;
    s.detail["tolerance"] = 1e-12;
    return s;
}

ScalarField random_band_field(const Grid2D& g, int band, bool real, std::mt19937_64& rng) {
    std::normal_distribution<double> N;
    ScalarField h(g, Rep::fourier);
    for (int k1 = -band; k1 <= band; ++k1) {
        for (int k2 = -band; k2 <= band; ++k2) {
            const cplx z(N(rng), N(rng));
            h.at(g.unwave(k1), g.unwave(k2)) += z;
            if (real) h.at(g.unwave(-k1), g.unwave(-k2)) += std::conj(z);
        }
    }
    ScalarField p = to_physical(h);
    if (real) {
        for (auto& z : p.v) z = cplx(z.real(), 0.0);
    }
    return p;
}

// Divergence-free part against the B field:
//   sum_j df_j(A) R^j_{s1} phi = -Q_{12}^{s, s1}(B_s, phi)  for each s, s1.
Suite bfield_suite(const VerifyConfig& c, Counterexamples& ce) {
    Suite s{"bfield_identity"};
    const Grid2D g(64, 2.0 * M_PI);
    const int band = g.n() / 6;  // products stay inside the dealiased band
    std::mt19937_64 rng(derive_seed(c.seed, 2));
    const bool fault = c.fault == "flip_riesz_sign";
    double worst = 0.0;
    for (int f = 0; f < c.identity_fields; ++f) {
        const ScalarField A1 = random_band_field(g, band, true, rng);
        const ScalarField A2 = random_band_field(g, band, true, rng);
        const ScalarField phi = random_band_field(g, band, false, rng);
        const DivCurl dc = divcurl_split(A1, A2);
        const double scale = std::hypot(l2_norm(A1), l2_norm(A2)) * l2_norm(phi);
        for (Sign sb : both_signs) {
            const ScalarField B = bfield(A1, A2, fault ? flip(sb) : sb);
            for (Sign s1 : both_signs) {
                const ScalarField lhs = product(dc.df1, riesz(1, s1, phi)) + product(dc.df2, riesz(2, s1, phi));
                const ScalarField rhs = cplx(-1.0) * qform(1, 2, sb, s1, B, phi);
                const double d = l2_norm(lhs - rhs) / scale;
                worst = std::max(worst, d);
                ++s.samples;
                if (d > 1e-10) {
                    ++s.violations;
                    ce.add("bfield_identity: field " + std::to_string(f) + " s=" + (sb == Sign::plus ? "+" : "-") +
                           " s1=" + (s1 == Sign::plus ? "+" : "-") + " relative defect=" + format_double(d));
                }
            }
        }
    }
    s.detail["max_relative_defect"] = worst;
    s.detail["tolerance"] = 1e-10;
    return s;
}

Suite besov_suite(const VerifyConfig& c, Counterexamples& ce) {
    Suite s{"besov_blocks"};
    const Grid2D g(16, 2.0 * M_PI);
    const TimeAxis a{0.0, 2.0 * M_PI / 32.0, 32};
    std::mt19937_64 rng(derive_seed(c.seed, 3));
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double worst_mass = 0.0, worst_ext = 0.0;
    for (int f = 0; f < c.besov_fields; ++f) {
        SpaceTimeField u = spectrum_field(g, a, 1);
        for (auto& z : u.spec[0]) z = cplx(N(rng), N(rng));
        const NormSpec spec{U(rng), U(rng), Summation::l1, f % 2 ? Sign::minus : Sign::plus};
        const BlockDecomposition d = decompose(u, spec.sign);
        const double total = l2_norm(u);
        const double mass_err = std::abs(std::sqrt(d.total_mass_squared()) - total) / total;
        const double ext_err = std::abs(duality_extremizer(u, spec).ratio - 1.0);
        worst_mass = std::max(worst_mass, mass_err);
        worst_ext = std::max(worst_ext, ext_err);
        s.samples += 2;
        if (mass_err > 1e-10) {
            ++s.violations;
            ce.add("besov_blocks: field " + std::to_string(f) + " block mass defect " + format_double(mass_err));
        }
        if (ext_err > 1e-8) {
            ++s.violations;
            ce.add("besov_blocks: field " + std::to_string(f) + " extremizer ratio defect " + format_double(ext_err));
        }
    }
    s.detail["max_mass_defect"] = worst_mass;
    s.detail["max_extremizer_defect"] = worst_ext;
    return s;
}

Suite interaction_suite(const VerifyConfig& c, Counterexamples& ce) {
    Suite s{"interaction"};
    const InteractionCheck r = interaction_inequality_check(c.interaction_samples, calibration::kInteraction,
                                                            derive_seed(c.seed, 4));
    s.samples = r.samples;
    s.violations = r.violations + r.interpolation_violations[0] + r.interpolation_violations[1] +
                   r.interpolation_violations[2];
    s.detail["constant"] = calibration::kInteraction;
    s.detail["min_ratio"] = r.min_ratio;
    s.detail["interpolation_violations"] = r.interpolation_violations;
    if (s.violations > 0) ce.add("interaction: " + std::to_string(s.violations) + " violations, min ratio " + format_double(r.min_ratio));
    return s;
}

Suite whitney_suite(const VerifyConfig& c, Counterexamples& ce) {
    Suite s{"whitney"};
    const WhitneyCheck r = whitney_cover_check(calibration::kWhitneyGamma, calibration::kWhitneyK, c.whitney_samples,
                                               derive_seed(c.seed, 5));
    s.samples = r.samples;
    s.violations = r.violations;
    s.detail["gamma"] = calibration::kWhitneyGamma;
    s.detail["k"] = calibration::kWhitneyK;
    if (r.violations > 0) ce.add("whitney: " + std::to_string(r.violations) + " uncovered pairs");
    return s;
}

Suite symbol_suite(const VerifyConfig& c, Counterexamples& ce) {
    Suite s{"symbol_bounds"};
    const SymbolCheck r = symbol_bound_checks(c.symbol_samples, calibration::kSymbols, derive_seed(c.seed, 6));
    s.samples = r.samples;
    s.violations = r.q_violations + r.q0_violations + r.sandwich_violations;
    s.detail["q_violations"] = r.q_violations;
    s.detail["q0_violations"] = r.q0_violations;
    s.detail["sandwich_violations"] = r.sandwich_violations;
    if (s.violations > 0) ce.add("symbol_bounds: " + std::to_string(s.violations) + " violations");
    return s;
}

Suite multiplier_suite(const VerifyConfig& c, Counterexamples& ce) {
    Suite s{"multipliers"};
    std::mt19937_64 rng(derive_seed(c.seed, 7));
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double seam = 0.0, worst = 0.0;
    for (double t : {0.01, 0.1, 1.0}) {
        const double w = 1e-4 / t;
        const double d = std::abs(m123(t, w * (1.0 + 1e-12)) - m123(t, w * (1.0 - 1e-12))) / t;
        seam = std::max(seam, d);
        ++s.samples;
        if (d > 1e-14) {
            ++s.violations;
            ce.add("multipliers: m123 seam jump " + format_double(d) + " at t=" + format_double(t));
        }
    }
    const double t = 0.1;
    for (long i = 0; i < c.multiplier_samples; ++i) {
        const Vec2 xi{20.0 * U(rng), 20.0 * U(rng)}, eta{20.0 * U(rng), 20.0 * U(rng)}, zeta{20.0 * U(rng), 20.0 * U(rng)};
        std::array<Sign, 5> sg{};
        for (auto& x : sg) x = U(rng) < 0.0 ? Sign::minus : Sign::plus;
        const OracleResult o = m12345_oracle(t, xi, eta, zeta, sg);
        const double d = std::abs(m12345(t, xi, eta, zeta, sg) - o.value) / (t * t);
        worst = std::max(worst, d);
        ++s.samples;
        if (d > 1e-8 || !o.converged) {
            ++s.violations;
            ce.add("multipliers: m12345 vs oracle " + format_double(d) + " t^2 at xi=" + vec_text(xi));
        }
    }
    s.detail["max_seam_jump"] = seam;
    s.detail["max_oracle_gap_over_t2"] = worst;
    return s;
}

}  // namespace

int cmd_verify(const Invocation& inv, std::ostream& log) {
    const auto t0 = Clock::now();
    const VerifyConfig cfg = parse_verify(load_config(inv), inv.quick, inv.seed);
    Counterexamples ce;
    std::vector<Suite> suites;
    suites.push_back(dirac_suite(cfg, ce));
    suites.push_back(bfield_suite(cfg, ce));
    suites.push_back(besov_suite(cfg, ce));
    suites.push_back(interaction_suite(cfg, ce));
    suites.push_back(whitney_suite(cfg, ce));
    suites.push_back(symbol_suite(cfg, ce));
    suites.push_back(multiplier_suite(cfg, ce));

    json r = report_header("verify", to_json(cfg));
    r["seed"] = cfg.seed;
    json sj = json::array();
    long total = 0;
    for (const auto& s : suites) {
        sj.push_back({{"name", s.name}, {"samples", s.samples}, {"violations", s.violations}, {"detail", s.detail}});
        total += s.violations;
        log << "verify " << s.name << ": " << s.samples << " checks, " << s.violations << " violations\n";
    }
    r["suites"] = sj;
    r["violations"] = total;
    r["counterexamples"] = ce.list();
    r["calibration"] = {{"interaction", calibration::kInteraction},
                        {"symbol_q", calibration::kSymbols.q},
                        {"symbol_q0", calibration::kSymbols.q0},
                        {"symbol_sandwich", calibration::kSymbols.sandwich}};
    write_text(inv.out / "verify_report.json", dump_json(r));
    write_timing(inv, "verify", t0);
    for (const auto& line : ce.list()) log << "  " << line << "\n";
    return total == 0 ? Exit::ok : Exit::violation;
}

// ---- illposed ---------------------------------------------------------------

int cmd_illposed(const Invocation& inv, std::ostream& log) {
    const auto t0 = Clock::now();
    const IllposedConfig cfg = parse_illposed(inv.sub, load_config(inv), inv.quick, inv.seed);
    std::vector<ScalingReport> reps;
    try {
        if (inv.sub == "f2") {
            reps = f2_sweep(cfg.s_values, cfg.sweep);
        } else if (inv.sub == "aflow") {
            reps = aflow_sweep(cfg.s_values, cfg.sweep);
        } else {
            reps = cubic_sweep(cfg.s_values, cfg.sweep);
        }
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        if (msg.rfind("degenerate fit", 0) == 0) {
            log << "illposed " << inv.sub << ": " << msg << "\n";
            write_timing(inv, "illposed " + inv.sub, t0);
            return Exit::nonconvergence;
        }
        throw ValidationError(msg);
    }

    CsvWriter csv({"lambda", "k", "s", "epsilon", "norm_value", "data_norm", "ratio", "mc_error", "predicted_exponent",
                   "flagged"});
    json r = report_header("illposed_" + inv.sub, to_json(cfg));
    r["seed"] = cfg.seed;
    json rj = json::array();
    long flagged = 0;
    bool degenerate = false;
    auto fit_json = [](const LineFit& f, double predicted) {
        return json{{"slope", f.slope}, {"intercept", f.intercept}, {"residuals", f.residuals}, {"predicted", predicted}};
    };
    for (const auto& rep : reps) {
        json pts = json::array();
        int used = 0;
        for (const auto& p : rep.points) {
            csv.row({format_double(p.lambda), std::to_string(p.k), format_double(rep.s), format_double(rep.eps),
                     format_double(p.term), format_double(p.data), format_double(p.ratio),
                     inv.sub == "cubic" ? format_double(p.rel_error) : std::string(), format_double(rep.predicted_term),
                     p.flagged ? "1" : "0"});
            json pj{{"k", p.k}, {"lambda", p.lambda}, {"t", p.t}, {"term", p.term}, {"data", p.data},
                    {"ratio", p.ratio}, {"rel_error", p.rel_error}, {"flagged", p.flagged}};
            if (!p.parts.empty()) pj["parts"] = p.parts;
            pts.push_back(pj);
            if (p.flagged) {
                ++flagged;
                log << "illposed " << inv.sub << ": point k=" << p.k << " s=" << format_double(rep.s)
                    << " flagged (relative error " << format_double(p.rel_error) << ")\n";
            } else {
                ++used;
            }
        }
        const bool finite = std::isfinite(rep.term_fit.slope) && std::isfinite(rep.ratio_fit.slope);
        if (used < 2 || !finite) degenerate = true;
        rj.push_back({{"s", rep.s},
                      {"eps", rep.eps},
                      {"term_fit", fit_json(rep.term_fit, rep.predicted_term)},
                      {"data_fit", fit_json(rep.data_fit, rep.predicted_data)},
                      {"ratio_fit", fit_json(rep.ratio_fit, rep.predicted_ratio)},
                      {"points", pts}});
        log << "illposed " << inv.sub << " s=" << format_double(rep.s) << ": term slope "
            << format_double(rep.term_fit.slope) << " (predicted " << format_double(rep.predicted_term)
            << "), ratio slope " << format_double(rep.ratio_fit.slope) << "\n";
    }
    r["reports"] = rj;
    r["flagged_points"] = flagged;
    r["calibration"] = {{"wstar_c1", kWstarC1}, {"wstar_c2", kWstarC2}, {"wstar_c3", kWstarC3},
                        {"lambda_family", "4 k^2 pi^2 / eps^2"}};
    write_text(inv.out / ("illposed_" + inv.sub + ".csv"), csv.str());
    write_text(inv.out / ("illposed_" + inv.sub + ".json"), dump_json(r));
    write_timing(inv, "illposed " + inv.sub, t0);
    return degenerate ? Exit::nonconvergence : Exit::ok;
}

// ---- bilinear ---------------------------------------------------------------

int cmd_bilinear(const Invocation& inv, std::ostream& log) {
    const auto t0 = Clock::now();
    const BilinearConfig cfg = parse_bilinear(load_config(inv), inv.quick, inv.seed);
    json r = report_header("bilinear", to_json(cfg));
    r["seed"] = cfg.seed;
    bool violated = false;
    auto summary = [](const SweepResult& s, double cemp) {
        json j{{"rows", s.rows.size()}, {"max_ratio", s.max_ratio}, {"c_emp", cemp}, {"names", s.names},
               {"slopes", s.slopes}, {"partial_slopes", s.partial_slopes}, {"skipped", s.skipped}};
        return j;
    };
    if (cfg.estimate != "nullform") {
        const SweepResult s = cfg.Ns.empty() || cfg.Ls.empty() ? SweepResult{} : product_sweep(cfg.Ns, cfg.Ls, cfg.seed);
        CsvWriter csv({"N0", "N1", "N2", "L0", "L1", "L2", "s0", "s1", "s2", "measured", "C1", "C2", "C3", "min", "ratio"});
        for (const auto& row : s.rows) {
            const auto& p = row.params;
            const DyadicBlock b0{int(p[0]), int(p[3])}, b1{int(p[1]), int(p[4])}, b2{int(p[2]), int(p[5])};
            const BilinearConstants C = bilinear_constants(b0, b1, b2);
            csv.row({std::to_string(b0.N), std::to_string(b1.N), std::to_string(b2.N), std::to_string(b0.L),
                     std::to_string(b1.L), std::to_string(b2.L), std::to_string(row.signs[0]),
                     std::to_string(row.signs[1]), std::to_string(row.signs[2]), format_double(row.measured),
                     format_double(C.c1), format_double(C.c2), format_double(C.c3), format_double(C.min()),
                     format_double(row.ratio)});
        }
        write_text(inv.out / "bilinear_product.csv", csv.str());
        r["product"] = summary(s, calibration::kProductCemp);
        for (const auto& note : s.skipped) log << "bilinear: skipped " << note << "\n";
        if (s.max_ratio > calibration::kProductCemp) violated = true;
        log << "bilinear product: " << s.rows.size() << " rows, max ratio " << format_double(s.max_ratio) << "\n";
    }
    if (cfg.estimate != "product") {
        const SweepResult s = cfg.Ns.empty() || cfg.Ls.empty() || cfg.rs.empty()
                                  ? SweepResult{}
                                  : nullform_sweep(cfg.Ns, cfg.Ls, cfg.rs, cfg.seed, cfg.omega_angle);
        CsvWriter csv({"N1", "N2", "L1", "L2", "r", "s1", "s2", "measured", "bound", "ratio"});
        for (const auto& row : s.rows) {
            const auto& p = row.params;
            csv.row({std::to_string(int(p[0])), std::to_string(int(p[1])), std::to_string(int(p[2])),
                     std::to_string(int(p[3])), std::to_string(int(p[4])), std::to_string(row.signs[1]),
                     std::to_string(row.signs[2]), format_double(row.measured), format_double(row.bound),
                     format_double(row.ratio)});
        }
        write_text(inv.out / "bilinear_nullform.csv", csv.str());
        r["nullform"] = summary(s, calibration::kNullformCemp);
        for (const auto& note : s.skipped) log << "bilinear: skipped " << note << "\n";
        if (s.max_ratio > calibration::kNullformCemp) violated = true;
        log << "bilinear nullform: " << s.rows.size() << " rows, max ratio " << format_double(s.max_ratio) << "\n";
    }
    write_text(inv.out / "bilinear_report.json", dump_json(r));
    write_timing(inv, "bilinear", t0);
    return violated ? Exit::violation : Exit::ok;
}

// ---- norm -------------------------------------------------------------------

int cmd_norm(const Invocation& inv, std::ostream& log) {
    const auto t0 = Clock::now();
    const NormConfig cfg = parse_norm(load_config(inv));
    std::filesystem::path path = cfg.archive;
    if (path.is_relative() && inv.config) path = inv.config->parent_path() / path;
    const SolutionArchive a = read_archive(path);
    const int m = static_cast<int>(a.frames.size());
    const double t_end = a.t0 + (m - 1) * a.dt;
    const double reach = std::min(-a.t0, t_end);
    if (m < 3 || !(reach > 0.0)) throw ValidationError("archive frames must straddle t = 0");
    const double Tw = cfg.window > 0.0 ? cfg.window : reach / 2.0;
    if (2.0 * Tw > reach * (1.0 + 1e-12)) {
        throw ValidationError("window " + format_double(Tw) + " needs frames on (-2 window, 2 window); archive reaches " +
                              format_double(reach));
    }
    std::vector<SpinorField> frames;
    for (const auto& f : a.frames) frames.emplace_back(f[0], f[1]);
    const SpaceTimeField u = make_spacetime(frames, TimeAxis{a.t0, a.dt, m}, Tw);
    json r = report_header("norm", to_json(cfg));
    r["input_hash"] = git_blob_sha1(to_json(cfg).dump() + read_text(path));
    json res;
    res["window_half_width"] = Tw;
    for (Sign s : both_signs) {
        res[s == Sign::plus ? "besov_plus" : "besov_minus"] = besov_norm(with_spectrum(u), NormSpec{cfg.s, cfg.b, parse_q(cfg.q), s});
    }
    const int k0 = static_cast<int>(std::lround(-a.t0 / a.dt));
    const SpinorField psi0(a.frames[k0][0], a.frames[k0][1]);
    res["sobolev_t0"] = sobolev_exact(psi0, cfg.s);
    res["spatial_besov_t0"] = spatial_besov(psi0, cfg.s);
    res["l2_t0"] = l2_norm(psi0);
    r["results"] = res;
    write_text(inv.out / "norm_report.json", dump_json(r));
    write_timing(inv, "norm", t0);
    log << "norm: B+ " << format_double(res["besov_plus"].get<double>()) << ", B- "
        << format_double(res["besov_minus"].get<double>()) << "\n";
    return Exit::ok;
}

int run(const Invocation& inv, std::ostream& log) {
    try {
        if (inv.command == "simulate") return cmd_simulate(inv, log);
        if (inv.command == "verify") return cmd_verify(inv, log);
        if (inv.command == "illposed") return cmd_illposed(inv, log);
        if (inv.command == "bilinear") return cmd_bilinear(inv, log);
        if (inv.command == "norm") return cmd_norm(inv, log);
        throw ValidationError("unknown command \"" + inv.command + "\"");
    } catch (const ValidationError& e) {
        log << "error: " << e.what() << "\n";
        return Exit::validation;
    }
}

}  // namespace csd::cli
