#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "csd_cli/cli.hpp"

namespace csd::cli {

namespace {

// Reads typed fields from a JSON object and rejects whatever is left over.
class Fields {
public:
    Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_null() && !j_.is_object()) fail("", "must be a JSON object");
    }

    bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }
    void known(const std::string& key) { used_.insert(key); }

    double num(const std::string& key, double def, double lo, double hi) {
        if (!take(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_number()) fail(key, "must be a number");
        const double x = v.get<double>();
        if (!std::isfinite(x) || x < lo || x > hi) fail(key, "must lie in " + range(lo, hi) + ", got " + format_double(x));
        return x;
    }

    long integer(const std::string& key, long def, long lo, long hi) {
        if (!take(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) fail(key, "must be an integer");
        if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(hi))
            fail(key, "must lie in " + range(lo, hi));
        const long x = v.get<long>();
        if (x < lo || x > hi) fail(key, "must lie in " + range(lo, hi) + ", got " + std::to_string(x));
        return x;
    }

    std::uint64_t seed(const std::string& key, std::uint64_t def) {
        if (!take(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            fail(key, "must be a non-negative integer");
        return v.get<std::uint64_t>();
    }

    std::string choice(const std::string& key, const std::string& def, const std::vector<std::string>& allowed) {
        if (!take(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_string()) fail(key, "must be a string");
        const std::string s = v.get<std::string>();
        if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
            std::string opts;
            for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
            fail(key, "must be one of {" + opts + "}, got \"" + s + "\"");
        }
        return s;
    }

    std::string text(const std::string& key, const std::string& def) {
        if (!take(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_string() || v.get<std::string>().empty()) fail(key, "must be a non-empty string");
        return v.get<std::string>();
    }

    std::vector<double> nums(const std::string& key, std::vector<double> def, double lo, double hi) {
        if (!take(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_array()) fail(key, "must be an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) fail(key, "must be an array of numbers");
            const double x = e.get<double>();
            if (!std::isfinite(x) || x < lo || x > hi) fail(key, "entries must lie in " + range(lo, hi) + ", got " + format_double(x));
            out.push_back(x);
        }
        return out;
    }

    std::vector<int> ints(const std::string& key, std::vector<int> def, long lo, long hi) {
        if (!take(key)) return def;
        const json& v = j_.at(key);
        if (!v.is_array()) fail(key, "must be an array of integers");
        std::vector<int> out;
        for (const auto& e : v) {
            if (!e.is_number_integer()) fail(key, "must be an array of integers");
            const long x = e.get<long>();
            if (x < lo || x > hi) fail(key, "entries must lie in " + range(lo, hi) + ", got " + std::to_string(x));
            out.push_back(static_cast<int>(x));
        }
        return out;
    }

    const json* object(const std::string& key) {
        if (!take(key)) return nullptr;
        const json& v = j_.at(key);
        if (!v.is_object()) fail(key, "must be a JSON object");
        return &v;
    }

    void finish() const {
        if (!j_.is_object()) return;
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) fail(it.key(), "is not a recognized key");
        }
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        std::string path = where_;
        if (!key.empty()) path += (path.empty() ? "" : ".") + key;
        throw ValidationError("config " + (path.empty() ? std::string("document") : "'" + path + "'") + " " + msg);
    }

private:
    bool take(const std::string& key) {
        used_.insert(key);
        return has(key);
    }

    template <class T>
    static std::string range(T lo, T hi) {
        std::ostringstream s;
        s << "[" << lo << ", " << hi << "]";
        return s.str();
    }

    const json& j_;
    std::string where_;
    std::set<std::string> used_;
};

ModeList parse_modes(const json& v, const std::string& where, int kmax) {
    if (!v.is_array()) throw ValidationError("config '" + where + "' must be an array of [k1, k2, re, im]");
    ModeList m;
    for (const auto& e : v) {
        if (!e.is_array() || e.size() != 4 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
            !e[2].is_number() || !e[3].is_number()) {
            throw ValidationError("config '" + where + "' entries must be [k1, k2, re, im] with integer k");
        }
        const long k1 = e[0].get<long>(), k2 = e[1].get<long>();
        if (std::labs(k1) > kmax || std::labs(k2) > kmax) {
            throw ValidationError("config '" + where + "' mode (" + std::to_string(k1) + ", " + std::to_string(k2) +
                                  ") exceeds the dealiased band |k| <= " + std::to_string(kmax) + "; raise n");
        }
        const double re = e[2].get<double>(), im = e[3].get<double>();
        if (!std::isfinite(re) || !std::isfinite(im) || std::abs(re) > 1e3 || std::abs(im) > 1e3) {
            throw ValidationError("config '" + where + "' coefficients must be finite with modulus <= 1e3");
        }
        m.modes.push_back({double(k1), double(k2), re, im});
    }
    return m;
}

json modes_json(const ModeList& m) {
    json a = json::array();
    for (const auto& e : m.modes) a.push_back({int(e[0]), int(e[1]), e[2], e[3]});
    return a;
}

bool is_pow2(int x) { return x >= 1 && (x & (x - 1)) == 0; }

void require_dyadic(const std::vector<int>& v, const std::string& key) {
    for (int x : v) {
        if (!is_pow2(x)) throw ValidationError("config '" + key + "' entries must be powers of two, got " + std::to_string(x));
    }
}

std::vector<double> default_s(const std::string& sub) {
    if (sub == "f2") return {-0.5, 0.0};
    if (sub == "aflow") return {0.0, 0.25};
    return {-0.25, 0.0};
}

}  // namespace

SimulateConfig parse_simulate(const json& j, bool quick) {
    Fields f(j, "");
    SimulateConfig c;
    c.n = static_cast<int>(f.integer("n", c.n, 8, 512));
    if (!is_pow2(c.n)) f.fail("n", "must be a power of two");
    c.length = f.num("length", c.length, 1e-3, 1e6);
    c.T = f.num("T", c.T, 1e-6, 100.0);
    c.t_ext = f.num("t_ext", c.T, 1e-6, 200.0);
    if (c.t_ext < c.T) f.fail("t_ext", "must be >= T");
    c.mass = f.num("mass", c.mass, 0.0, 1e6);
    c.cfl = f.num("cfl", c.cfl, 1e-3, 2.0);
    c.dt = f.num("dt", c.dt, 0.0, 10.0);
    c.max_iterations = static_cast<int>(f.integer("max_iterations", c.max_iterations, 1, 50));
    c.min_iterations = static_cast<int>(f.integer("min_iterations", c.min_iterations, 0, 50));
    if (c.min_iterations > c.max_iterations) f.fail("min_iterations", "must not exceed max_iterations");
    c.tolerance = f.num("tolerance", c.tolerance, 0.0, 1.0);
    c.mode = f.choice("mode", c.mode, {"full", "simplified", "as_printed"});
    c.norm_s = f.num("norm_s", c.norm_s, -4.0, 4.0);
    c.norm_b = f.num("norm_b", c.norm_b, -4.0, 4.0);
    c.norm_q = f.choice("norm_q", c.norm_q, {"l1", "linf"});
    if (quick) {
        c.n = std::min(c.n, 32);
        c.max_iterations = std::min(c.max_iterations, 4);
        c.min_iterations = std::min(c.min_iterations, c.max_iterations);
    }
    const int kmax = c.n / 3;
    if (const json* d = f.object("data")) {
        Fields df(*d, "data");
        for (auto [key, dst] : {std::pair<const char*, ModeList*>{"a0", &c.a0}, {"a1", &c.a1}, {"a2", &c.a2},
                                {"psi_up", &c.psi_up}, {"psi_down", &c.psi_down}}) {
            if (df.has(key)) *dst = parse_modes(d->at(key), std::string("data.") + key, kmax);
            df.known(key);
        }
        df.finish();
    }
    f.finish();
    return c;
}

VerifyConfig parse_verify(const json& j, bool quick, std::optional<std::uint64_t> seed) {
    Fields f(j, "");
    VerifyConfig c;
    c.seed = f.seed("seed", c.seed);
    c.dirac_samples = f.integer("dirac_samples", c.dirac_samples, 1, 100000000);
    c.interaction_samples = f.integer("interaction_samples", c.interaction_samples, 1, 100000000);
    c.whitney_samples = f.integer("whitney_samples", c.whitney_samples, 1, 100000000);
    c.symbol_samples = f.integer("symbol_samples", c.symbol_samples, 1, 100000000);
    c.besov_fields = static_cast<int>(f.integer("besov_fields", c.besov_fields, 1, 10000));
    c.identity_fields = static_cast<int>(f.integer("identity_fields", c.identity_fields, 1, 1000));
    c.multiplier_samples = f.integer("multiplier_samples", c.multiplier_samples, 1, 1000000);
    c.fault = f.choice("fault", c.fault, {"none", "flip_riesz_sign"});
    f.finish();
    if (seed) c.seed = *seed;
    if (quick) {
        c.dirac_samples = std::min(c.dirac_samples, 1000L);
        c.interaction_samples = std::min(c.interaction_samples, 20000L);
        c.whitney_samples = std::min(c.whitney_samples, 5000L);
        c.symbol_samples = std::min(c.symbol_samples, 5000L);
        c.besov_fields = std::min(c.besov_fields, 5);
        c.identity_fields = std::min(c.identity_fields, 2);
        c.multiplier_samples = std::min(c.multiplier_samples, 20L);
    }
    return c;
}

IllposedConfig parse_illposed(const std::string& sub, const json& j, bool quick, std::optional<std::uint64_t> seed) {
    if (sub != "f2" && sub != "aflow" && sub != "cubic") {
        throw ValidationError("illposed subcommand must be one of {f2, aflow, cubic}, got \"" + sub + "\"");
    }
    Fields f(j, "");
    IllposedConfig c;
    SweepOptions& o = c.sweep;
    const bool cubic = sub == "cubic";
    c.seed = f.seed("seed", c.seed);
    c.s_values = f.nums("s", default_s(sub), -2.0, 2.0);
    if (c.s_values.empty()) f.fail("s", "must not be empty");
    o.eps = f.num("eps", o.eps, 1e-4, 0.1);
    if (f.has("lambdas") && f.has("ks")) f.fail("lambdas", "and 'ks' are mutually exclusive");
    c.lambdas = f.nums("lambdas", {}, 64.0, 1e9);
    o.ks = f.ints("ks", {1, 2, 3, 4}, 1, 64);
    if (!c.lambdas.empty()) {
        o.ks.clear();
        for (double lam : c.lambdas) o.ks.push_back(snap_k(lam, o.eps));
    }
    {
        std::vector<int> sorted = o.ks;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            f.fail(c.lambdas.empty() ? "ks" : "lambdas",
                   "maps two points to the same family member lambda = 4 k^2 pi^2 / eps^2; choose distinct k "
                   "(for eps = " + format_double(o.eps) + " the family starts at " +
                       format_double(lambda_of_k(1, o.eps)) + ")");
        }
        if (sorted.size() < 4) f.fail(c.lambdas.empty() ? "ks" : "lambdas", "needs at least 4 sweep points");
        if (sorted.back() < 2 * sorted.front()) {
            f.fail(c.lambdas.empty() ? "ks" : "lambdas", "must span at least two octaves in lambda (max k >= 2 min k)");
        }
    }
    o.cells = static_cast<int>(f.integer("cells", cubic ? 16 : 32, 2, 512));
    o.quad.q0 = static_cast<int>(f.integer("q0", o.quad.q0, 1, 256));
    o.quad.rtol = f.num("rtol", o.quad.rtol, 1e-12, 0.1);
    o.quad.max_levels = static_cast<int>(f.integer("max_levels", o.quad.max_levels, 1, 12));
    o.strata = static_cast<int>(f.integer("strata", 16, 1, 512));
    o.max_mc_error = f.num("max_mc_error", o.max_mc_error, 1e-6, 1.0);
    f.finish();
    if (seed) c.seed = *seed;
    o.seed = c.seed;
    if (quick) {
        o.cells = std::min(o.cells, cubic ? 8 : 16);
        o.strata = std::min(o.strata, 8);
    }
    return c;
}

BilinearConfig parse_bilinear(const json& j, bool quick, std::optional<std::uint64_t> seed) {
    Fields f(j, "");
    BilinearConfig c;
    c.seed = f.seed("seed", c.seed);
    c.estimate = f.choice("estimate", c.estimate, {"product", "nullform", "both"});
    c.Ns = f.ints("N", c.Ns, 1, 1 << 20);
    c.Ls = f.ints("L", c.Ls, 1, 1 << 20);
    c.rs = f.ints("r", c.rs, 1, 1 << 20);
    require_dyadic(c.Ns, "N");
    require_dyadic(c.Ls, "L");
    require_dyadic(c.rs, "r");
    c.omega_angle = f.num("omega_angle", c.omega_angle, -10.0, 10.0);
    f.finish();
    if (seed) c.seed = *seed;
    if (quick) {
        auto cap = [](std::vector<int>& v, int m) { v.erase(std::remove_if(v.begin(), v.end(), [m](int x) { return x > m; }), v.end()); };
        cap(c.Ns, 2);
        cap(c.Ls, 2);
        cap(c.rs, 1);
    }
    return c;
}

NormConfig parse_norm(const json& j) {
    Fields f(j, "");
    NormConfig c;
    c.archive = f.text("archive", c.archive);
    c.s = f.num("s", c.s, -4.0, 4.0);
    c.b = f.num("b", c.b, -4.0, 4.0);
    c.q = f.choice("q", c.q, {"l1", "linf"});
    c.window = f.num("window", c.window, 0.0, 100.0);
    f.finish();
    return c;
}

json to_json(const SimulateConfig& c) {
    json j;
    j["n"] = c.n;
    j["length"] = c.length;
    j["T"] = c.T;
    j["t_ext"] = c.t_ext;
    j["mass"] = c.mass;
    j["cfl"] = c.cfl;
    j["dt"] = c.dt;
    j["max_iterations"] = c.max_iterations;
    j["min_iterations"] = c.min_iterations;
    j["tolerance"] = c.tolerance;
    j["mode"] = c.mode;
    j["norm_s"] = c.norm_s;
    j["norm_b"] = c.norm_b;
    j["norm_q"] = c.norm_q;
    j["data"] = {{"a0", modes_json(c.a0)},
                 {"a1", modes_json(c.a1)},
                 {"a2", modes_json(c.a2)},
                 {"psi_up", modes_json(c.psi_up)},
                 {"psi_down", modes_json(c.psi_down)}};
    return j;
}

json to_json(const VerifyConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["dirac_samples"] = c.dirac_samples;
    j["interaction_samples"] = c.interaction_samples;
    j["whitney_samples"] = c.whitney_samples;
    j["symbol_samples"] = c.symbol_samples;
    j["besov_fields"] = c.besov_fields;
    j["identity_fields"] = c.identity_fields;
    j["multiplier_samples"] = c.multiplier_samples;
    j["fault"] = c.fault;
    return j;
}

json to_json(const IllposedConfig& c) {
    const SweepOptions& o = c.sweep;
    json j;
    j["seed"] = c.seed;
    j["s"] = c.s_values;
    j["eps"] = o.eps;
    j["ks"] = o.ks;
    if (!c.lambdas.empty()) j["lambdas"] = c.lambdas;
    j["cells"] = o.cells;
    j["q0"] = o.quad.q0;
    j["rtol"] = o.quad.rtol;
    j["max_levels"] = o.quad.max_levels;
    j["strata"] = o.strata;
    j["max_mc_error"] = o.max_mc_error;
    return j;
}

json to_json(const BilinearConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["estimate"] = c.estimate;
    j["N"] = c.Ns;
    j["L"] = c.Ls;
    j["r"] = c.rs;
    j["omega_angle"] = c.omega_angle;
    return j;
}

json to_json(const NormConfig& c) {
    json j;
    j["archive"] = c.archive;
    j["s"] = c.s;
    j["b"] = c.b;
    j["q"] = c.q;
    j["window"] = c.window;
    return j;
}

CauchyData build_data(const SimulateConfig& c) {
    const Grid2D g(c.n, c.length);
    CauchyData d(g);
    d.mass = c.mass;
    auto fill = [&](const ModeList& m, bool real) {
        ScalarField h(g, Rep::fourier);
        // f = sum c_k e^{i k.x} on [0, length)^2 with k the lattice integer; f^ = length^2 c_k.
        const double scale = c.length * c.length;
        for (const auto& e : m.modes) {
            const int k1 = static_cast<int>(e[0]), k2 = static_cast<int>(e[1]);
            const cplx z(e[2], e[3]);
            h.at(g.unwave(k1), g.unwave(k2)) += scale * z;
            if (real) h.at(g.unwave(-k1), g.unwave(-k2)) += scale * std::conj(z);
        }
        ScalarField p = to_physical(h);
        if (real) {
            for (auto& z : p.v) z = cplx(z.real(), 0.0);
        }
        return p;
    };
    d.a0 = fill(c.a0, true);
    d.a1 = fill(c.a1, true);
    d.a2 = fill(c.a2, true);
    d.psi0 = SpinorField(fill(c.psi_up, false), fill(c.psi_down, false));
    return d;
}

}  // namespace csd::cli
