#include "csd/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace csd {

namespace {

constexpr double pi = std::numbers::pi;

// Plans are cached per shape; creation is serialized, execution uses the
// new-array interface and is safe from any thread.
enum class PlanKind { plane, time_many, cube };

fftw_plan cached_plan(PlanKind kind, int m, int n, int sign) {
    static std::mutex mtx;
    static std::map<std::tuple<int, int, int, int>, fftw_plan> plans;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_tuple(static_cast<int>(kind), m, n, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;

    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::size_t total = 0;
    switch (kind) {
        case PlanKind::plane: total = static_cast<std::size_t>(n) * n; break;
        case PlanKind::time_many:
        case PlanKind::cube: total = static_cast<std::size_t>(m) * n * n; break;
    }
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    fftw_plan p = nullptr;
    switch (kind) {
        case PlanKind::plane:
            p = fftw_plan_dft_2d(n, n, buf, buf, sign, flags);
            break;
        case PlanKind::time_many: {
            int len = m;
            int stride = n * n;
            p = fftw_plan_many_dft(1, &len, n * n, buf, nullptr, stride, 1, buf, nullptr, stride, 1,
                                   sign, flags);
            break;
        }
        case PlanKind::cube:
            p = fftw_plan_dft_3d(m, n, n, buf, buf, sign, flags);
            break;
    }
    fftw_free(buf);
    if (!p) throw std::runtime_error("fftw plan creation failed");
    plans.emplace(key, p);
    return p;
}

void run(fftw_plan p, std::vector<cplx>& data) {
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p, ptr, ptr);
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void require_same(const Grid2D& a, const Grid2D& b) {
    if (a != b) throw std::invalid_argument("grid mismatch");
}

}  // namespace

Grid2D::Grid2D(int n, double length) : n_(n), length_(length), dxi_(0.0) {
    if (n < 8 || !is_pow2(n)) throw std::invalid_argument("grid size must be a power of two >= 8");
    if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("grid length must be positive");
    dxi_ = 2.0 * pi / length;
}

SpinorField::SpinorField(ScalarField u, ScalarField d) : up(std::move(u)), down(std::move(d)) {
    require_same(up.grid, down.grid);
    if (up.rep != down.rep) throw std::invalid_argument("spinor components in different representations");
}

ScalarField fft_forward(const ScalarField& f) {
    if (f.rep != Rep::physical) throw std::invalid_argument("fft_forward expects a physical field");
    ScalarField out = f;
    run(cached_plan(PlanKind::plane, 0, f.grid.n(), FFTW_FORWARD), out.v);
    const double s = f.grid.h() * f.grid.h();
    for (auto& z : out.v) z *= s;
    out.rep = Rep::fourier;
    return out;
}

ScalarField fft_inverse(const ScalarField& f) {
    if (f.rep != Rep::fourier) throw std::invalid_argument("fft_inverse expects a Fourier field");
    ScalarField out = f;
    run(cached_plan(PlanKind::plane, 0, f.grid.n(), FFTW_BACKWARD), out.v);
    const double s = 1.0 / (f.grid.length() * f.grid.length());
    for (auto& z : out.v) z *= s;
    out.rep = Rep::physical;
    return out;
}

ScalarField to_fourier(const ScalarField& f) { return f.rep == Rep::fourier ? f : fft_forward(f); }
ScalarField to_physical(const ScalarField& f) { return f.rep == Rep::physical ? f : fft_inverse(f); }
SpinorField to_fourier(const SpinorField& f) { return SpinorField(to_fourier(f.up), to_fourier(f.down)); }
SpinorField to_physical(const SpinorField& f) { return SpinorField(to_physical(f.up), to_physical(f.down)); }

ScalarField multiplier(const ScalarField& f, const Symbol& m, std::optional<cplx> zero_value) {
    ScalarField out = to_fourier(f);
    const Grid2D& g = out.grid;
    for (int i1 = 0; i1 < g.n(); ++i1) {
        for (int i2 = 0; i2 < g.n(); ++i2) {
            const Vec2 xi = g.xi(i1, i2);
            cplx s = (i1 == 0 && i2 == 0 && zero_value) ? *zero_value : m(xi);
            if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
                std::ostringstream os;
                os << "non-finite symbol at xi = (" << xi[0] << ", " << xi[1] << ")";
                throw std::domain_error(os.str());
            }
            out.at(i1, i2) *= s;
        }
    }
    return out;
}

ScalarField dealias(const ScalarField& f) {
    ScalarField out = to_fourier(f);
    const Grid2D& g = out.grid;
    const int kc = g.dealias_cutoff();
    for (int i1 = 0; i1 < g.n(); ++i1) {
        const bool drop1 = std::abs(g.wave(i1)) > kc;
        for (int i2 = 0; i2 < g.n(); ++i2) {
            if (drop1 || std::abs(g.wave(i2)) > kc) out.at(i1, i2) = 0.0;
        }
    }
    return out;
}

ScalarField product(const ScalarField& a, const ScalarField& b, bool conj_a) {
    require_same(a.grid, b.grid);
    ScalarField pa = to_physical(a);
    const ScalarField pb = to_physical(b);
    for (std::size_t i = 0; i < pa.v.size(); ++i) {
        pa.v[i] = (conj_a ? std::conj(pa.v[i]) : pa.v[i]) * pb.v[i];
    }
    return dealias(pa);
}

double l2_norm(const ScalarField& f) {
    double s = 0.0;
    for (const auto& z : f.v) s += std::norm(z);
    if (f.rep == Rep::physical) return std::sqrt(s) * f.grid.h();
    return std::sqrt(s) * f.grid.c_grid();
}

double l2_norm(const SpinorField& f) {
    const double a = l2_norm(f.up);
    const double b = l2_norm(f.down);
    return std::sqrt(a * a + b * b);
}

cplx inner_product(const ScalarField& f, const ScalarField& g) {
    require_same(f.grid, g.grid);
    if (f.rep != g.rep) return inner_product(to_fourier(f), to_fourier(g));
    cplx s = 0.0;
    for (std::size_t i = 0; i < f.v.size(); ++i) s += f.v[i] * std::conj(g.v[i]);
    if (f.rep == Rep::physical) return s * (f.grid.h() * f.grid.h());
    return s * (f.grid.c_grid() * f.grid.c_grid());
}

cplx inner_product(const SpinorField& f, const SpinorField& g) {
    return inner_product(f.up, g.up) + inner_product(f.down, g.down);
}

namespace {

ScalarField combine(const ScalarField& a, const ScalarField& b, double sb) {
    require_same(a.grid, b.grid);
    if (a.rep != b.rep) return combine(to_fourier(a), to_fourier(b), sb);
    ScalarField out = a;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += sb * b.v[i];
    return out;
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) { return combine(a, b, 1.0); }
ScalarField operator-(const ScalarField& a, const ScalarField& b) { return combine(a, b, -1.0); }
ScalarField operator*(cplx c, const ScalarField& a) {
    ScalarField out = a;
    for (auto& z : out.v) z *= c;
    return out;
}
SpinorField operator+(const SpinorField& a, const SpinorField& b) { return SpinorField(a.up + b.up, a.down + b.down); }
SpinorField operator-(const SpinorField& a, const SpinorField& b) { return SpinorField(a.up - b.up, a.down - b.down); }
SpinorField operator*(cplx c, const SpinorField& a) { return SpinorField(c * a.up, c * a.down); }

double TimeAxis::dtau() const { return 2.0 * pi / (m * dt); }

double window(double t, double T) {
    const double a = std::abs(t);
    if (a <= T) return 1.0;
    if (a >= 2.0 * T) return 0.0;
    return 0.5 * (1.0 + std::cos(pi * (a - T) / T));
}

double window_hat(double tau, double T) {
    const double a = pi / T;
    auto closed = [&](double x) {
        return (std::sin(2.0 * T * x) + std::sin(T * x)) * a * a / (x * (a * a - x * x));
    };
    const double at = std::abs(tau);
    if (at < 1e-8 / T) return 3.0 * T;
    if (std::abs(at - a) < 0.25 * a) {
        // sin 2Tx + sin Tx = -2 sin(3Tx/2) sin(T(x - a)/2) removes the pole at x = a
        const double d = at - a;
        const double q = d == 0.0 ? 0.5 * T : std::sin(0.5 * T * d) / d;
        return 2.0 * std::sin(1.5 * T * at) * a * a * q / (at * (a + at));
    }
    return closed(at);
}

int SpaceTimeField::components() const {
    if (!spec.empty()) return static_cast<int>(spec.size());
    return static_cast<int>(frames.size());
}

double SpaceTimeField::weight() const {
    const double wt = axis.dtau() / (2.0 * pi);
    const double wx = grid.dxi() / (2.0 * pi);
    return wt * wx * wx;
}

namespace {

void check_axis(const TimeAxis& axis, double T, std::size_t nframes) {
    if (axis.m <= 0 || nframes != static_cast<std::size_t>(axis.m)) {
        throw std::invalid_argument("frame count does not match the time axis");
    }
    if (!(axis.dt > 0.0)) throw std::invalid_argument("time step must be positive");
    if (!(T > 0.0)) throw std::invalid_argument("window half-width must be positive");
    const double tol = 1e-9 * T;
    if (axis.t(0) > -2.0 * T + tol || axis.t(axis.m - 1) < 2.0 * T - tol) {
        throw std::invalid_argument("time samples do not cover the window support (-2T, 2T)");
    }
}

}  // namespace

SpaceTimeField make_spacetime(const std::vector<ScalarField>& frames, const TimeAxis& axis, double T) {
    if (frames.empty()) throw std::invalid_argument("no frames");
    check_axis(axis, T, frames.size());
    SpaceTimeField u(frames.front().grid, axis);
    u.T = T;
    for (const auto& f : frames) require_same(f.grid, u.grid);
    u.frames.push_back(frames);
    return u;
}

SpaceTimeField make_spacetime(const std::vector<SpinorField>& frames, const TimeAxis& axis, double T) {
    if (frames.empty()) throw std::invalid_argument("no frames");
    check_axis(axis, T, frames.size());
    SpaceTimeField u(frames.front().grid(), axis);
    u.T = T;
    u.frames.resize(2);
    for (const auto& f : frames) {
        require_same(f.grid(), u.grid);
        u.frames[0].push_back(f.up);
        u.frames[1].push_back(f.down);
    }
    return u;
}

SpaceTimeField spectrum_field(const Grid2D& g, const TimeAxis& a, int components) {
    if (a.m <= 0 || !(a.dt > 0.0)) throw std::invalid_argument("invalid time axis");
    SpaceTimeField u(g, a);
    u.spec.assign(components, std::vector<cplx>(u.lattice_size(), cplx(0.0, 0.0)));
    return u;
}

void spacetime_spectrum(SpaceTimeField& u) {
    if (u.frames.empty()) {
        if (u.has_spectrum()) return;
        throw std::invalid_argument("no frames to transform");
    }
    check_axis(u.axis, u.T, u.frames.front().size());
    const std::size_t n2 = u.grid.size();
    const int m = u.axis.m;
    fftw_plan p = cached_plan(PlanKind::time_many, m, u.grid.n(), FFTW_FORWARD);
    u.spec.clear();
    for (const auto& comp : u.frames) {
        std::vector<cplx> data(u.lattice_size());
        for (int j = 0; j < m; ++j) {
            const double r = window(u.axis.t(j), u.T);
            const ScalarField fh = to_fourier(comp[j]);
            for (std::size_t k = 0; k < n2; ++k) data[j * n2 + k] = r * fh.v[k];
        }
        run(p, data);
        for (int l = 0; l < m; ++l) {
            const cplx ph = u.axis.dt * std::exp(cplx(0.0, -u.axis.tau(l) * u.axis.t0));
            for (std::size_t k = 0; k < n2; ++k) data[l * n2 + k] *= ph;
        }
        u.spec.push_back(std::move(data));
    }
}

SpaceTimeField with_spectrum(const SpaceTimeField& u) {
    SpaceTimeField out = u;
    spacetime_spectrum(out);
    return out;
}

double l2_norm(const SpaceTimeField& u) {
    if (!u.has_spectrum()) throw std::invalid_argument("spectrum not populated");
    double s = 0.0;
    for (const auto& c : u.spec)
        for (const auto& z : c) s += std::norm(z);
    return std::sqrt(u.weight() * s);
}

cplx inner_product(const SpaceTimeField& u, const SpaceTimeField& v) {
    if (!u.has_spectrum() || !v.has_spectrum()) throw std::invalid_argument("spectrum not populated");
    require_same(u.grid, v.grid);
    if (u.axis.m != v.axis.m || u.axis.dt != v.axis.dt || u.spec.size() != v.spec.size()) {
        throw std::invalid_argument("space-time lattice mismatch");
    }
    cplx s = 0.0;
    for (std::size_t c = 0; c < u.spec.size(); ++c)
        for (std::size_t i = 0; i < u.spec[c].size(); ++i) s += u.spec[c][i] * std::conj(v.spec[c][i]);
    return s * u.weight();
}

std::vector<cplx> spectrum_to_samples(const SpaceTimeField& u, int component) {
    if (!u.has_spectrum()) throw std::invalid_argument("spectrum not populated");
    std::vector<cplx> data = u.spec.at(component);
    const std::size_t n2 = u.grid.size();
    const double s = 1.0 / (u.axis.m * u.axis.dt * u.grid.length() * u.grid.length());
    for (int l = 0; l < u.axis.m; ++l) {
        const cplx ph = s * std::exp(cplx(0.0, u.axis.tau(l) * u.axis.t0));
        for (std::size_t k = 0; k < n2; ++k) data[l * n2 + k] *= ph;
    }
    run(cached_plan(PlanKind::cube, u.axis.m, u.grid.n(), FFTW_BACKWARD), data);
    return data;
}

std::vector<cplx> samples_to_spectrum(const Grid2D& g, const TimeAxis& a, std::vector<cplx> samples) {
    if (samples.size() != static_cast<std::size_t>(a.m) * g.size()) {
        throw std::invalid_argument("sample array size mismatch");
    }
    run(cached_plan(PlanKind::cube, a.m, g.n(), FFTW_FORWARD), samples);
    const std::size_t n2 = g.size();
    const double s = a.dt * g.h() * g.h();
    for (int l = 0; l < a.m; ++l) {
        const cplx ph = s * std::exp(cplx(0.0, -a.tau(l) * a.t0));
        for (std::size_t k = 0; k < n2; ++k) samples[l * n2 + k] *= ph;
    }
    return samples;
}

std::vector<cplx> spectrum_to_time(const SpaceTimeField& u, int component) {
    if (!u.has_spectrum()) throw std::invalid_argument("spectrum not populated");
    std::vector<cplx> data = u.spec.at(component);
    const std::size_t n2 = u.grid.size();
    const double s = 1.0 / (u.axis.m * u.axis.dt);
    for (int l = 0; l < u.axis.m; ++l) {
        const cplx ph = s * std::exp(cplx(0.0, u.axis.tau(l) * u.axis.t0));
        for (std::size_t k = 0; k < n2; ++k) data[l * n2 + k] *= ph;
    }
    run(cached_plan(PlanKind::time_many, u.axis.m, u.grid.n(), FFTW_BACKWARD), data);
    return data;
}

std::vector<cplx> time_to_spectrum(const Grid2D& g, const TimeAxis& a, std::vector<cplx> data) {
    if (data.size() != static_cast<std::size_t>(a.m) * g.size()) {
        throw std::invalid_argument("sample array size mismatch");
    }
    run(cached_plan(PlanKind::time_many, a.m, g.n(), FFTW_FORWARD), data);
    const std::size_t n2 = g.size();
    for (int l = 0; l < a.m; ++l) {
        const cplx ph = a.dt * std::exp(cplx(0.0, -a.tau(l) * a.t0));
        for (std::size_t k = 0; k < n2; ++k) data[l * n2 + k] *= ph;
    }
    return data;
}

}  // namespace csd
