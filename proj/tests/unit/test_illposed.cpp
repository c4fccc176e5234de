#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csd/calibration.hpp"
#include "csd/illposed.hpp"

using namespace csd;

namespace {

const cplx I(0.0, 1.0);

// Simplex integral \int_{u,v >= 0, u+v <= 1} e^{(1-u-v) a + u b + v c} by a tensor
// Gauss-Legendre rule on the collapsed square.
cplx simplex_oracle(cplx a, cplx b, cplx c) {
    std::vector<double> x, w;
    gauss_legendre(40, x, w);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double u = 0.5 * (x[i] + 1.0);
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double v = 0.5 * (x[j] + 1.0) * (1.0 - u);
            const double jac = 0.25 * (1.0 - u) * w[i] * w[j];
            acc += jac * std::exp((1.0 - u - v) * a + u * b + v * c);
        }
    }
    return acc;
}

std::array<Sign, 5> signs_of(int bits) {
    std::array<Sign, 5> s{};
    for (int j = 0; j < 5; ++j) s[j] = (bits >> j) & 1 ? Sign::minus : Sign::plus;
    return s;
}

}  // namespace

TEST(Multipliers, Phi1MatchesDirectFormula) {
    for (double x : {-30.0, -1.0, -1e-3, 2e-4, 0.5, 7.0}) {
        const cplx direct = (std::exp(I * x) - 1.0) / (I * x);
        EXPECT_LT(std::abs(phi1_imag(x) - direct), 1e-12) << x;
    }
    // long double reference across the series seam
    for (double x : {-1.0001e-4, -0.9999e-4, 1e-6, 0.9999e-4, 1.0001e-4}) {
        const long double lx = x;
        const long double sh = std::sin(0.5L * lx);
        const std::complex<long double> ref(std::sin(lx) / lx, 2.0L * sh * sh / lx);
        EXPECT_NEAR(phi1_imag(x).real(), (double)ref.real(), 1e-15);
        EXPECT_NEAR(phi1_imag(x).imag(), (double)ref.imag(), 1e-15);
    }
    EXPECT_EQ(phi1_imag(0.0), cplx(1.0));
}

TEST(Multipliers, M123IsBoundedByT) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-1e4, 1e4);
    for (int i = 0; i < 10000; ++i) {
        const double t = 1e-3 + 0.1 * std::abs(U(rng)) / 1e4;
        EXPECT_LE(std::abs(m123(t, U(rng))), t * (1.0 + 1e-14));
    }
    EXPECT_NEAR(std::abs(m123(0.3, 0.0)), 0.3, 1e-15);
}

TEST(Multipliers, DividedDifferenceMatchesSimplexIntegral) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (double scale : {1e-6, 0.03, 0.3, 5.0}) {
        for (int i = 0; i < 20; ++i) {
            const cplx b(0.0, scale * U(rng)), c(0.0, scale * U(rng));
            EXPECT_LT(std::abs(exp_divdiff(0.0, b, c) - simplex_oracle(0.0, b, c)), 1e-13) << scale;
        }
    }
    EXPECT_LT(std::abs(exp_divdiff(0.0, 0.0, 0.0) - 0.5), 1e-16);
}

TEST(Multipliers, M12345MatchesNestedTimeIntegral) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double eps = 0.05;
    const double lam = lambda_of_k(1, eps), sq = std::sqrt(lam), t = eps / sq;
    for (int i = 0; i < 4; ++i) {
        const Vec2 xi{lam + sq * U(rng), sq * U(rng)};
        const Vec2 eta{sq * U(rng), sq * U(rng)};
        const Vec2 zeta{lam + sq * U(rng), sq * U(rng)};
        for (int bits = 0; bits < 32; ++bits) {
            const auto s = signs_of(bits);
            const OracleResult o = m12345_oracle(t, xi, eta, zeta, s);
            ASSERT_TRUE(o.converged);
            EXPECT_LT(std::abs(m12345(t, xi, eta, zeta, s) - o.value), 1e-8 * t * t);
        }
    }
}

TEST(Multipliers, M12345CollinearIsHalfTSquared) {
    // all frequencies on a ray with s = (+,+,+,+,+): both phases vanish
    const Vec2 xi{5.0, 0.0}, eta{2.0, 0.0}, zeta{3.0, 0.0};
    const auto s = signs_of(0);
    const Omega5 w = omegas5(xi, eta, zeta, s);
    EXPECT_NEAR(w.w1, 0.0, 1e-14);
    EXPECT_NEAR(w.w2, 0.0, 1e-14);
    EXPECT_NEAR(std::abs(m12345(0.2, xi, eta, zeta, s)), 0.02, 1e-15);
}

TEST(Multipliers, CalibratedM12345BoundOnFreshSamples) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double eps = 0.05;
    for (int k = 1; k <= 4; ++k) {
        const double lam = lambda_of_k(k, eps), sq = std::sqrt(lam), t = eps / sq;
        for (int i = 0; i < 2000; ++i) {
            const Vec2 xi{lam + sq * U(rng), sq * U(rng)};
            const Vec2 zeta{lam + sq * U(rng), sq * U(rng)};
            const Vec2 eta{2.0 * sq * U(rng), 2.0 * sq * U(rng)};
            for (Sign a : both_signs)
                for (Sign b : both_signs) {
                    const std::array<Sign, 5> s{a, b, flip(a), flip(a), a};
                    const double bound = calibration::kM12345 * t * t * (1.0 + t * std::hypot(eta[0], eta[1]));
                    EXPECT_LE(std::abs(m12345(t, xi, eta, zeta, s)), bound);
                }
        }
    }
}

TEST(Rectangles, AreasAndFamily) {
    const double lam = 10000.0, r = 100.0;
    EXPECT_NEAR(rect_box({Rect::W, lam}).area(), 4.0 * lam, 1e-9);
    EXPECT_NEAR(rect_box({Rect::Wtilde, lam}).area(), 4.0 * r, 1e-9);
    EXPECT_NEAR(rect_box({Rect::Wstarstar, lam}).area(), 4.0 * lam / 100.0, 1e-9);
    EXPECT_THROW(rect_box({Rect::W, 10.0}), std::invalid_argument);
    const double eps = 0.05;
    for (int k = 1; k <= 5; ++k) {
        EXPECT_NEAR(eps * std::sqrt(lambda_of_k(k, eps)), 2.0 * M_PI * k, 1e-12);
        EXPECT_EQ(snap_k(lambda_of_k(k, eps) * 1.01, eps), k);
    }
    EXPECT_EQ(snap_k(1.0, eps), 1);
    const Box a{0, 2, 0, 2}, b{1, 3, -1, 1};
    EXPECT_DOUBLE_EQ(intersect(a, b).area(), 1.0);
    EXPECT_DOUBLE_EQ(minkowski(a, negate(a)).area(), 16.0);
    EXPECT_TRUE(intersect(a, shift(a, {5.0, 0.0})).empty());
}

TEST(Rectangles, DataNormAndDisjointness) {
    const double lam = 4096.0, r = 64.0;
    // ||phi||_{L^2} = (2 pi)^{-1} |W|^{1/2} = lam^{1/2}/pi in the continuum
    EXPECT_NEAR(std::sqrt(rect_box({Rect::W, lam}).area()) / (2.0 * M_PI), std::sqrt(lam) / M_PI, 1e-12);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int i = 0; i < 100000; ++i) {
        const Vec2 xi{2.5 * r * U(rng), 2.5 * r * U(rng)};
        if (rect_indicator({Rect::Wstar, lam}, xi)) EXPECT_FALSE(rect_indicator({Rect::W, lam}, xi));
    }
    EXPECT_THROW(rect_data({Rect::W, lam}, Grid2D(64, 2.0 * M_PI)), std::invalid_argument);
}

TEST(Rectangles, LatticeDataNormOnSmallFamily) {
    const double lam = 64.0;  // W = [56, 72] x [-8, 8]
    const Grid2D g(256, 2.0 * M_PI);
    const ScalarField phi = rect_data({Rect::W, lam}, g);
    // 17 x 17 lattice points of value 1: ||phi|| = c_grid * 17
    EXPECT_NEAR(l2_norm(phi), 17.0 / (2.0 * M_PI), 1e-12);
    const SpinorField psi = rect_spinor({Rect::W, lam}, g);
    EXPECT_NEAR(l2_norm(psi), l2_norm(phi), 1e-12);
}

TEST(F2, VanishesOffSupportAndIsBoundedBelowOnWstar) {
    const double eps = 0.05;
    const double lam = lambda_of_k(1, eps), r = std::sqrt(lam), t = eps / r;
    EXPECT_EQ(f2_hat(t, {2.5 * r, 0.0}, lam), cplx(0.0));
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    int hits = 0;
    for (int i = 0; i < 400 && hits < 60; ++i) {
        const Vec2 xi{2.0 * r * U(rng), r * U(rng)};
        if (!rect_indicator({Rect::Wstar, lam}, xi)) continue;
        ++hits;
        bool conv = false;
        const double v = std::abs(f2_hat(t, xi, lam, {}, nullptr, &conv));
        EXPECT_TRUE(conv);
        EXPECT_GE(v, calibration::kF2Lower * t * lam);
    }
    EXPECT_GT(hits, 10);
}

TEST(Quadrature, GaussLegendreAndBoxMass) {
    std::vector<double> x, w;
    gauss_legendre(8, x, w);
    double s0 = 0.0, s14 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s0 += w[i];
        s14 += w[i] * std::pow(x[i], 14);
    }
    EXPECT_NEAR(s0, 2.0, 1e-14);
    EXPECT_NEAR(s14, 2.0 / 15.0, 1e-14);
    const Box b{1.0, 3.0, -1.0, 2.0};
    EXPECT_NEAR(weighted_box_mass(b, 0.0), 6.0 / (4.0 * M_PI * M_PI), 1e-13);
    // midpoint reference for s = -1/2
    double ref = 0.0;
    const int n = 2000;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double a = 1.0 + 2.0 * (i + 0.5) / n, c = -1.0 + 3.0 * (j + 0.5) / n;
            ref += 1.0 / (1.0 + std::hypot(a, c));
        }
    ref *= 6.0 / (double(n) * n) / (4.0 * M_PI * M_PI);
    EXPECT_NEAR(weighted_box_mass(b, -0.5), ref, 1e-7);
}

TEST(Fit, LogLogRecoversExponent) {
    const std::vector<double> x{1.0, 2.0, 4.0, 8.0};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * std::pow(v, -0.75));
    const LineFit f = loglog_fit(x, y);
    EXPECT_NEAR(f.slope, -0.75, 1e-12);
    EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-12);
    for (double r : f.residuals) EXPECT_NEAR(r, 0.0, 1e-12);
}

TEST(Cubic, MonteCarloIsSeededAndReportsVariance) {
    const double eps = 0.05;
    const double lam = lambda_of_k(1, eps), r = std::sqrt(lam), t = eps / r;
    const Vec2 xi{lam + 0.3 * r, 0.2 * r};
    const McEstimate a = cubic_hat_mc(t, xi, lam, 4, 9), b = cubic_hat_mc(t, xi, lam, 4, 9);
    EXPECT_EQ(a.value, b.value);
    EXPECT_GT(a.samples, 0);
    EXPECT_GE(a.variance, 0.0);
    cplx sum = a.parts[0] + a.parts[1] + a.parts[2];
    EXPECT_LT(std::abs(sum - a.value), 1e-12 * std::abs(a.value) + 1e-300);
}
