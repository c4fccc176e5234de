// Recomputes the constants frozen in csd/calibration.hpp and prints them as JSON.
//   csd_calibrate [--skip-sweeps]
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>

#include "csd/illposed.hpp"
#include "csd/nullforms.hpp"

using namespace csd;

namespace {

double m12345_scan(long samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const double eps = 0.05;
    double worst = 0.0;
    for (int k = 1; k <= 4; ++k) {
        const double lam = lambda_of_k(k, eps), sq = std::sqrt(lam), t = eps / sq;
        for (long i = 0; i < samples; ++i) {
            const Vec2 xi{lam + sq * U(rng), sq * U(rng)};
            const Vec2 zeta{lam + sq * U(rng), sq * U(rng)};
            const Vec2 eta{2.0 * sq * U(rng), 2.0 * sq * U(rng)};
            for (Sign a : both_signs)
                for (Sign b : both_signs) {
                    const Sign c = flip(a);
                    const std::array<Sign, 5> s{a, b, c, c, a};
                    const double r = std::abs(m12345(t, xi, eta, zeta, s)) / (t * t * (1.0 + t * std::hypot(eta[0], eta[1])));
                    worst = std::max(worst, r);
                }
        }
    }
    return worst;
}

double f2_lower_scan(int points) {
    const double eps = 0.05;
    double lo = INFINITY;
    for (int k = 1; k <= 3; ++k) {
        const double lam = lambda_of_k(k, eps), t = eps / std::sqrt(lam);
        const RectSpec sp{Rect::Wstar, lam};
        const Box b = rect_box(sp);
        for (int i = 0; i <= points; ++i)
            for (int j = 0; j <= points; ++j) {
                const Vec2 xi{b.lo1 + (b.hi1 - b.lo1) * i / points, b.lo2 + (b.hi2 - b.lo2) * j / points};
                if (!rect_indicator(sp, xi)) continue;
                lo = std::min(lo, std::abs(f2_hat(t, xi, lam)) / (t * lam));
            }
    }
    return lo;
}

}  // namespace

int main(int argc, char** argv) {
    const bool skip = argc > 1 && std::strcmp(argv[1], "--skip-sweeps") == 0;
    const double inf = interaction_ratio_infimum();
    const SymbolConstants sc = calibrate_symbol_constants(2048, 1.01);
    std::printf("{\n");
    std::printf("  \"interaction_infimum\": %.10g,\n", inf);
    std::printf("  \"interaction\": %.10g,\n", 0.9 * inf);
    std::printf("  \"symbol_q\": %.10g,\n  \"symbol_q0\": %.10g,\n  \"symbol_sandwich\": %.10g,\n", sc.q, sc.q0,
                sc.sandwich);
    std::printf("  \"m12345_scan_max\": %.6g,\n", m12345_scan(20000, 3));
    const double f2 = f2_lower_scan(24);
    std::printf("  \"f2_lower_scan_min\": %.6g,\n  \"f2_lower\": %.6g", f2, 0.9 * f2);
    if (!skip) {
        const SweepResult p = product_sweep({1, 2, 4, 8}, {1, 2, 4, 8}, 2);
        const SweepResult n = nullform_sweep({1, 2, 4, 8}, {1, 2, 4, 8}, {1, 2, 4}, 2);
        std::printf(",\n  \"product_max_seed2\": %.6g,\n  \"product_cemp\": %.4g", p.max_ratio, 1.25 * p.max_ratio);
        std::printf(",\n  \"nullform_max_seed2\": %.6g,\n  \"nullform_cemp\": %.4g", n.max_ratio, 1.25 * n.max_ratio);
    }
    std::printf("\n}\n");
    return 0;
}
