// Periodic 2D grids, scalar/spinor fields, FFTs, Fourier multipliers and
// windowed space-time spectra.
//
// Fourier convention: f^(xi) = \int e^{-i x.xi} f(x) dx, realized on the grid
// as f^_k = h^2 sum_x e^{-i x.xi_k} f(x) with h = length/n.  The inverse is
// f(x) = length^{-2} sum_k e^{i x.xi_k} f^_k, so that
//   ||f||_{L^2} = c_grid * ||f^||_{l^2},   c_grid = 1/length = dxi/(2 pi).
// Space-time spectra follow the same rule with the time step dt in front.
#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

namespace csd {

using cplx = std::complex<double>;
using Vec2 = std::array<double, 2>;

class Grid2D {
public:
    Grid2D(int n, double length);

    int n() const { return n_; }
    double length() const { return length_; }
    double h() const { return length_ / n_; }
    double dxi() const { return dxi_; }
    double ximax() const { return dxi_ * (n_ / 2); }
    double c_grid() const { return 1.0 / length_; }
    std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }

    // FFT-order index to signed lattice integer in [-n/2, n/2).
    int wave(int i) const { return i < n_ / 2 ? i : i - n_; }
    int unwave(int k) const { return k < 0 ? k + n_ : k; }
    std::size_t index(int i1, int i2) const { return static_cast<std::size_t>(i1) * n_ + i2; }
    Vec2 xi(int i1, int i2) const { return {dxi_ * wave(i1), dxi_ * wave(i2)}; }
    Vec2 x(int i1, int i2) const { return {h() * i1, h() * i2}; }
    // Largest lattice integer kept by the 2/3 dealiasing rule.
    int dealias_cutoff() const { return n_ / 3; }

    bool operator==(const Grid2D& o) const { return n_ == o.n_ && length_ == o.length_; }
    bool operator!=(const Grid2D& o) const { return !(*this == o); }

private:
    int n_;
    double length_;
    double dxi_;
};

enum class Rep { physical, fourier };

struct ScalarField {
    Grid2D grid;
    Rep rep;
    std::vector<cplx> v;

    explicit ScalarField(const Grid2D& g, Rep r = Rep::physical)
        : grid(g), rep(r), v(g.size(), cplx(0.0, 0.0)) {}

    cplx& at(int i1, int i2) { return v[grid.index(i1, i2)]; }
    const cplx& at(int i1, int i2) const { return v[grid.index(i1, i2)]; }
};

struct SpinorField {
    ScalarField up;
    ScalarField down;

    explicit SpinorField(const Grid2D& g, Rep r = Rep::physical) : up(g, r), down(g, r) {}
    SpinorField(ScalarField u, ScalarField d);

    const Grid2D& grid() const { return up.grid; }
    Rep rep() const { return up.rep; }
};

// Symbol evaluated at a lattice frequency.
using Symbol = std::function<cplx(const Vec2&)>;

ScalarField fft_forward(const ScalarField& f);
ScalarField fft_inverse(const ScalarField& f);
ScalarField to_fourier(const ScalarField& f);
ScalarField to_physical(const ScalarField& f);
SpinorField to_fourier(const SpinorField& f);
SpinorField to_physical(const SpinorField& f);

// zero_value, when given, replaces m(0) (homogeneous symbols).
ScalarField multiplier(const ScalarField& f, const Symbol& m,
                       std::optional<cplx> zero_value = std::nullopt);

// Zeroes lattice modes with |k_i| > n/3 (Fourier representation result).
ScalarField dealias(const ScalarField& f);
// Pointwise product (optionally conjugating a), returned dealiased in Fourier form.
ScalarField product(const ScalarField& a, const ScalarField& b, bool conj_a = false);

double l2_norm(const ScalarField& f);
double l2_norm(const SpinorField& f);
cplx inner_product(const ScalarField& f, const ScalarField& g);
cplx inner_product(const SpinorField& f, const SpinorField& g);

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(cplx c, const ScalarField& a);
SpinorField operator+(const SpinorField& a, const SpinorField& b);
SpinorField operator-(const SpinorField& a, const SpinorField& b);
SpinorField operator*(cplx c, const SpinorField& a);

// Uniform time samples t_j = t0 + j dt, j = 0..m-1.
struct TimeAxis {
    double t0 = 0.0;
    double dt = 1.0;
    int m = 0;

    double t(int j) const { return t0 + dt * j; }
    double dtau() const;
    int wave(int l) const { return l < m / 2 ? l : l - m; }
    double tau(int l) const { return dtau() * wave(l); }
};

// Raised-cosine window: 1 on [-T, T], 0 outside (-2T, 2T), C^1 taper between.
double window(double t, double T);
// Closed-form \int window(t) e^{-i tau t} dt (real, even).
double window_hat(double tau, double T);

// Time-sampled field with one or two components (scalar or spinor) and its
// spectrum on the (tau, xi) lattice.  spec[c][l*n*n + k] holds component c.
struct SpaceTimeField {
    Grid2D grid;
    TimeAxis axis;
    double T = 0.0;  // window half-width; 0 means no window (spectrum-first fields)
    std::vector<std::vector<ScalarField>> frames;  // [component][time]
    std::vector<std::vector<cplx>> spec;           // empty until populated

    SpaceTimeField(const Grid2D& g, const TimeAxis& a) : grid(g), axis(a) {}

    int components() const;
    std::size_t lattice_size() const { return static_cast<std::size_t>(axis.m) * grid.size(); }
    bool has_spectrum() const { return !spec.empty(); }
    // Parseval weight: ||u||^2_{L^2_{t,x}} = weight * sum |spec|^2.
    double weight() const;
};

SpaceTimeField make_spacetime(const std::vector<ScalarField>& frames, const TimeAxis& axis, double T);
SpaceTimeField make_spacetime(const std::vector<SpinorField>& frames, const TimeAxis& axis, double T);
// Spectrum-first field (no frames, no window).
SpaceTimeField spectrum_field(const Grid2D& g, const TimeAxis& a, int components);

// Populates u.spec from the windowed frames.
void spacetime_spectrum(SpaceTimeField& u);
SpaceTimeField with_spectrum(const SpaceTimeField& u);

double l2_norm(const SpaceTimeField& u);
cplx inner_product(const SpaceTimeField& u, const SpaceTimeField& v);

// Space-time samples (periodic) of a spectrum-first field component, and back.
std::vector<cplx> spectrum_to_samples(const SpaceTimeField& u, int component);
std::vector<cplx> samples_to_spectrum(const Grid2D& g, const TimeAxis& a, std::vector<cplx> samples);

// Same, transforming only in time: entry j*n*n + k is f^(t_j, xi_k).
std::vector<cplx> spectrum_to_time(const SpaceTimeField& u, int component);
std::vector<cplx> time_to_spectrum(const Grid2D& g, const TimeAxis& a, std::vector<cplx> data);

}  // namespace csd
