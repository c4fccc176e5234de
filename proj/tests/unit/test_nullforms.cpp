#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csd/calibration.hpp"
#include "csd/nullforms.hpp"

using namespace csd;

namespace {

const double pi = M_PI;

SpaceTimeField small_support_field(const Grid2D& g, const TimeAxis& a, int kmax, int lmax, std::uint64_t seed) {
    SpaceTimeField u = spectrum_field(g, a, 1);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N;
    for (int l = -lmax; l <= lmax; ++l)
        for (int k1 = -kmax; k1 <= kmax; ++k1)
            for (int k2 = -kmax; k2 <= kmax; ++k2) {
                const int li = l < 0 ? l + a.m : l;
                u.spec[0][li * g.size() + g.index(g.unwave(k1), g.unwave(k2))] = cplx(N(rng), N(rng));
            }
    return u;
}

// Direct lattice convolution sum_{X1 + X2 = X0} w(xi1, xi2) u1~(X1) u2~(X2).
template <class W>
std::vector<cplx> convolve(const SpaceTimeField& u1, const SpaceTimeField& u2, W&& w) {
    const Grid2D& g = u1.grid;
    const int m = u1.axis.m, n = g.n();
    std::vector<cplx> out(u1.lattice_size(), cplx(0.0));
    for (int l1 = 0; l1 < m; ++l1)
        for (std::size_t a = 0; a < g.size(); ++a) {
            const cplx x = u1.spec[0][l1 * g.size() + a];
            if (x == cplx(0.0)) continue;
            const int a1 = a / n, a2 = a % n;
            for (int l2 = 0; l2 < m; ++l2)
                for (std::size_t b = 0; b < g.size(); ++b) {
                    const cplx y = u2.spec[0][l2 * g.size() + b];
                    if (y == cplx(0.0)) continue;
                    const int b1 = b / n, b2 = b % n;
                    const int l0 = (u1.axis.wave(l1) + u1.axis.wave(l2) + m) % m;
                    const std::size_t k0 = g.index(g.unwave(g.wave(a1) + g.wave(b1)), g.unwave(g.wave(a2) + g.wave(b2)));
                    out[l0 * g.size() + k0] += w(g.xi(a1, a2), g.xi(b1, b2)) * x * y;
                }
        }
    return out;
}

}  // namespace

TEST(Geometry, AngleAndTheta) {
    EXPECT_NEAR(angle({1.0, 0.0}, {0.0, 2.0}), pi / 2, 1e-15);
    EXPECT_NEAR(angle({1.0, 0.0}, {-1.0, 1e-300}), pi, 1e-15);
    EXPECT_NEAR(theta({1.0, 0.0}, {1.0, 0.0}, Sign::plus, Sign::minus), pi, 1e-15);
    EXPECT_THROW(angle({0.0, 0.0}, {1.0, 0.0}), std::invalid_argument);
}

TEST(Geometry, ModulationDefectMatchesDirectSum) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-10.0, 10.0);
    for (int i = 0; i < 20000; ++i) {
        const Vec2 x1{U(rng), U(rng)}, x2{U(rng), U(rng)};
        for (int sg = 0; sg < 8; ++sg) {
            const std::array<Sign, 3> s{sg & 1 ? Sign::minus : Sign::plus, sg & 2 ? Sign::minus : Sign::plus,
                                        sg & 4 ? Sign::minus : Sign::plus};
            const long double r0 = std::hypot((long double)x1[0] - x2[0], (long double)x1[1] - x2[1]);
            const long double r1 = std::hypot((long double)x1[0], (long double)x1[1]);
            const long double r2 = std::hypot((long double)x2[0], (long double)x2[1]);
            const long double direct = sgn(s[0]) * r0 - sgn(s[1]) * r1 + sgn(s[2]) * r2;
            EXPECT_NEAR(modulation_defect(x1, x2, s), (double)direct, 1e-12 * (double)(r1 + r2));
        }
    }
    // exactly collinear, parallel inputs with matching signs: no defect
    EXPECT_NEAR(modulation_defect({3.0, 0.0}, {1.0, 0.0}, {Sign::plus, Sign::plus, Sign::plus}), 0.0, 1e-15);
}

TEST(Geometry, InteractionModulations) {
    const Interaction x = make_interaction({1.0, {3.0, 0.0}}, {0.5, {0.0, 4.0}}, {Sign::plus, Sign::minus, Sign::plus},
                                           Relation::difference);
    EXPECT_DOUBLE_EQ(x.X0.tau, 0.5);
    const auto h = modulations(x);
    EXPECT_NEAR(h[0], 0.5 + 5.0, 1e-14);
    EXPECT_NEAR(h[1], 1.0 - 3.0, 1e-14);
    EXPECT_NEAR(h[2], 0.5 + 4.0, 1e-14);
    EXPECT_NEAR(h[0] - h[1] + h[2], modulation_defect(x.X1.xi, x.X2.xi, x.signs), 1e-13);
}

TEST(Geometry, InteractionInequalityHoldsOnFreshSamples) {
    const InteractionCheck c = interaction_inequality_check(100000, calibration::kInteraction, 99);
    EXPECT_EQ(c.violations, 0);
    for (long v : c.interpolation_violations) EXPECT_EQ(v, 0);
    EXPECT_GE(c.min_ratio, calibration::kInteraction);
}

TEST(Whitney, SectorsAndCover) {
    const std::vector<Vec2> om = omega_set(0.1);
    EXPECT_EQ(om.size(), static_cast<std::size_t>(std::floor(2 * pi / 0.1)));
    for (const Vec2& w : om) EXPECT_NEAR(std::hypot(w[0], w[1]), 1.0, 1e-15);
    EXPECT_TRUE(in_sector({2.0, 0.05}, {1.0, 0.0}, 0.1));
    EXPECT_FALSE(in_sector({2.0, 0.5}, {1.0, 0.0}, 0.1));
    EXPECT_TRUE(in_strip({100.0, 0.4}, {1.0, 0.0}, 0.5));
    EXPECT_FALSE(in_strip({0.0, 0.6}, {1.0, 0.0}, 0.5));
    const WhitneyCheck w = whitney_cover_check(calibration::kWhitneyGamma, calibration::kWhitneyK, 20000, 77);
    EXPECT_EQ(w.violations, 0);
}

TEST(Symbols, BoundsHoldOnFreshSamples) {
    const SymbolCheck c = symbol_bound_checks(50000, calibration::kSymbols, 123);
    EXPECT_EQ(c.q_violations, 0);
    EXPECT_EQ(c.q0_violations, 0);
    EXPECT_EQ(c.sandwich_violations, 0);
}

TEST(Symbols, SandwichMatchesEigenvalueNorm) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N;
    for (int i = 0; i < 200; ++i) {
        const Vec2 a{N(rng), N(rng)}, b{N(rng), N(rng)};
        const Mat2 M = projection(a, Sign::plus) * projection(b, Sign::plus) * alpha(1) * projection(b, Sign::minus);
        const Mat2 H = M.dagger() * M;
        const double tr = (H(0, 0) + H(1, 1)).real();
        const double det = (H(0, 0) * H(1, 1) - H(0, 1) * H(1, 0)).real();
        const double top = 0.5 * (tr + std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
        EXPECT_NEAR(sandwich_symbol(1, Sign::plus, Sign::minus, a, b), std::sqrt(top), 1e-12);
    }
}

TEST(DivCurl, SplitsAndBFieldIdentity) {
    const Grid2D g(32, 2.0 * pi);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> N;
    auto band = [&](bool real) {
        ScalarField f(g, Rep::fourier);
        for (int k1 = -5; k1 <= 5; ++k1)
            for (int k2 = -5; k2 <= 5; ++k2) {
                const cplx c(N(rng), N(rng));
                f.at(g.unwave(k1), g.unwave(k2)) += c;
                if (real) f.at(g.unwave(-k1), g.unwave(-k2)) += std::conj(c);
            }
        return to_physical(f);
    };
    const ScalarField A1 = band(true), A2 = band(true), phi = band(false);
    const DivCurl d = divcurl_split(A1, A2);
    EXPECT_LT(l2_norm(d.df1 + d.cf1 - to_fourier(A1)), 1e-12 * l2_norm(A1));
    EXPECT_LT(l2_norm(d.df2 + d.cf2 - to_fourier(A2)), 1e-12 * l2_norm(A2));
    // div df = 0, curl cf = 0
    const ScalarField div = multiplier(d.df1, [](const Vec2& x) { return cplx(0, x[0]); }) +
                            multiplier(d.df2, [](const Vec2& x) { return cplx(0, x[1]); });
    const ScalarField curl = multiplier(d.cf2, [](const Vec2& x) { return cplx(0, x[0]); }) -
                             multiplier(d.cf1, [](const Vec2& x) { return cplx(0, x[1]); });
    EXPECT_LT(l2_norm(div), 1e-10);
    EXPECT_LT(l2_norm(curl), 1e-10);
    for (Sign s : both_signs)
        for (Sign s1 : both_signs) {
            const ScalarField lhs = product(d.df1, riesz(1, s1, phi)) + product(d.df2, riesz(2, s1, phi));
            const ScalarField rhs = cplx(-1.0) * qform(1, 2, s, s1, bfield(A1, A2, s), phi);
            EXPECT_LT(l2_norm(lhs - rhs), 1e-10 * l2_norm(A1) * l2_norm(phi));
        }
}

TEST(Bilinear, ProductConjMatchesDirectConvolution) {
    const Grid2D g(16, 2.0 * pi);
    const TimeAxis a{0.0, 2.0 * pi / 8.0, 16};
    const SpaceTimeField u1 = small_support_field(g, a, 2, 2, 1);
    SpaceTimeField u2 = small_support_field(g, a, 2, 2, 2);
    // conj(u2)~(X) = conj(u2~(-X))
    SpaceTimeField c2 = spectrum_field(g, a, 1);
    for (int l = 0; l < a.m; ++l)
        for (int i1 = 0; i1 < g.n(); ++i1)
            for (int i2 = 0; i2 < g.n(); ++i2) {
                const int lm = (a.m - l) % a.m, j1 = (g.n() - i1) % g.n(), j2 = (g.n() - i2) % g.n();
                c2.spec[0][l * g.size() + g.index(i1, i2)] = std::conj(u2.spec[0][lm * g.size() + g.index(j1, j2)]);
            }
    const SpaceTimeField p = product_conj(u1, u2);
    const std::vector<cplx> ref = convolve(u1, c2, [](const Vec2&, const Vec2&) { return 1.0; });
    // (fg)~ = (2 pi)^{-3} dtau dxi^2 (f~ * g~)
    const double w = u1.weight();
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        err = std::max(err, std::abs(p.spec[0][i] - w * ref[i]));
        scale = std::max(scale, std::abs(w * ref[i]));
    }
    EXPECT_LT(err, 1e-11 * scale);
    const SpaceTimeField big = small_support_field(g, a, 5, 2, 3);
    EXPECT_THROW(product_conj(big, big), std::overflow_error);
}

TEST(Bilinear, NullFormMatchesDirectConvolution) {
    const Grid2D g(16, 2.0 * pi);
    const TimeAxis a{0.0, 2.0 * pi / 8.0, 16};
    const SpaceTimeField u1 = small_support_field(g, a, 3, 2, 4);
    const SpaceTimeField u2 = small_support_field(g, a, 3, 2, 5);
    for (Sign s1 : both_signs)
        for (Sign s2 : both_signs) {
            const SpaceTimeField B = nullform_B(u1, u2, s1, s2);
            const std::vector<cplx> ref = convolve(u1, u2, [&](const Vec2& x, const Vec2& y) {
                if (std::hypot(x[0], x[1]) == 0.0 || std::hypot(y[0], y[1]) == 0.0) return 0.0;
                const double sx = sgn(s1), sy = sgn(s2);
                const double c = (sx * sy * (x[0] * y[0] + x[1] * y[1])) / (std::hypot(x[0], x[1]) * std::hypot(y[0], y[1]));
                return std::acos(std::clamp(c, -1.0, 1.0));
            });
            const double w = u1.weight();
            double err = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < ref.size(); ++i) {
                err = std::max(err, std::abs(B.spec[0][i] - w * ref[i]));
                scale = std::max(scale, std::abs(w * ref[i]));
            }
            // acos loses about 1e-8 near parallel pairs
            EXPECT_LT(err, 1e-7 * scale);
        }
}

TEST(Bilinear, RandomBlockFieldIsNormalizedAndSupported) {
    const BilinearLattice lat;
    const Grid2D g = lat.grid();
    const TimeAxis a = lat.axis();
    EXPECT_NEAR(a.dtau(), lat.dtau, 1e-14);
    const DyadicBlock b{4, 2, Sign::minus};
    SpaceTimeField u = random_block_field(g, a, b, 11);
    EXPECT_NEAR(l2_norm(u), 1.0, 1e-12);
    const BlockDecomposition d = decompose(u, Sign::minus);
    ASSERT_EQ(d.blocks.size(), 1u);
    EXPECT_EQ(d.blocks[0].block, b);
}

TEST(Trend, MarginalSlopesRecoverPowerLaws) {
    SweepResult r;
    r.names = {"N", "L"};
    for (int N : {1, 2, 4, 8})
        for (int L : {1, 2, 4, 8}) {
            SweepRow row;
            row.params = {double(N), double(L)};
            row.ratio = 0.3 * std::pow(N, 0.25) * std::pow(L, -0.5);
            r.rows.push_back(row);
        }
    fit_trend(r);
    ASSERT_EQ(r.slopes.size(), 2u);
    EXPECT_NEAR(r.slopes[0], 0.25, 1e-12);
    EXPECT_NEAR(r.slopes[1], -0.5, 1e-12);
    EXPECT_NEAR(r.partial_slopes[0], 0.25, 1e-12);
    EXPECT_NEAR(r.intercept, std::log2(0.3), 1e-12);
}

TEST(Bilinear, SmallProductSweepStaysBelowCalibratedConstant) {
    const SweepResult r = product_sweep({1, 2}, {1, 2}, 5);
    ASSERT_FALSE(r.rows.empty());
    EXPECT_LE(r.max_ratio, calibration::kProductCemp);
    for (const auto& row : r.rows) EXPECT_NEAR(row.ratio, row.measured / row.bound, 1e-12 * row.ratio + 1e-300);
}
