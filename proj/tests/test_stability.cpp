#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <complex>
#include <random>

#include "aqmflow/models.hpp"
#include "aqmflow/stability.hpp"

using namespace aqmflow;

namespace {

NetworkParams with_n(double n) {
    NetworkParams p;
    p.n_flows = n;
    return p;
}

OperatingPoint at_measured(const NetworkParams& net, ModelKind kind, double rho, double p0) {
    auto op = operating_point(net, {kind, rho});
    op.p0   = p0;
    return op;
}

// Durand-Kerner on the monic quartic; independent of the Routh conditions.
bool roots_in_left_half_plane(const std::array<double, 4>& a) {
    using C = std::complex<double>;
    auto poly = [&](C s) { return (((s + a[0]) * s + a[1]) * s + a[2]) * s + a[3]; };
    std::array<C, 4> z;
    const C seed(0.4, 0.9);
    z[0] = 1.0;
    for (int i = 1; i < 4; ++i) z[i] = z[i - 1] * seed;
    const double scale = 1.0 + std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2]), std::abs(a[3])});
    for (auto& v : z) v *= scale;
    for (int it = 0; it < 5000; ++it) {
        for (int i = 0; i < 4; ++i) {
            C den = 1.0;
            for (int j = 0; j < 4; ++j)
                if (j != i) den *= z[i] - z[j];
            z[i] -= poly(z[i]) / den;
        }
    }
    for (const auto& v : z)
        if (!(v.real() < 0.0)) return false;
    return true;
}

double rhs_at(const OperatingPoint& op, const NetworkParams& net, const ModelSpec& m, double dws, double dwsr,
              double dp, double dq) {
    const double q = op.q0 + dq;
    const StepInput in{op.ws0 + dws, op.ws0 + dwsr, op.p0 + dp, q, net.prop_delay + q / net.capacity, 1.0};
    return continuous_rhs(in, net, m);
}

}  // namespace

TEST(PiGains, IncrementalToTransferForm) {
    const auto g = pi_gains(PiConfig{});
    EXPECT_DOUBLE_EQ(g.k_p, 1.816e-5);
    EXPECT_NEAR(g.k_i, 6e-8, 1e-20);
}

TEST(Routh, TextbookQuartics) {
    // (s + 1)^4
    EXPECT_TRUE(routh_check({4.0, 6.0, 4.0, 1.0}).stable);
    // (s - 1)(s + 1)^3 = s^4 + 2 s^3 - 2 s - 1
    EXPECT_FALSE(routh_check({2.0, 0.0, -2.0, -1.0}).stable);
    // s^4 + s^3 + s^2 + s + 1 has roots on the unit circle in the right half plane
    EXPECT_FALSE(routh_check({1.0, 1.0, 1.0, 1.0}).stable);
    const auto r = routh_check({4.0, 6.0, 4.0, 1.0});
    EXPECT_DOUBLE_EQ(r.beta1, 20.0);
    EXPECT_DOUBLE_EQ(r.beta2, 64.0);
}

TEST(Routh, AgreesWithRootLocations) {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    int stable = 0;
    for (int i = 0; i < 2000; ++i) {
        std::array<double, 4> a{u(rng), u(rng), u(rng), u(rng)};
        const auto rep = routh_check(a);
        // Skip near-marginal draws where root polishing is ill-conditioned.
        if (std::abs(rep.beta1) < 1e-3 || std::abs(rep.beta2) < 1e-3 || std::abs(a[3]) < 1e-3) continue;
        EXPECT_EQ(rep.stable, roots_in_left_half_plane(a)) << a[0] << ' ' << a[1] << ' ' << a[2] << ' ' << a[3];
        stable += rep.stable;
    }
    EXPECT_GT(stable, 10);
}

TEST(Linearize, PartialsMatchFiniteDifferences) {
    const struct {
        ModelKind kind;
        double n, rho, p0;
    } cases[] = {{ModelKind::ScenarioA, 500, 3.7551, 0.2004},
                 {ModelKind::ScenarioA, 2000, 3.9516, 0.4879},
                 {ModelKind::ScenarioB, 200, 1.5318, 0.0442},
                 {ModelKind::ScenarioB, 1100, 2.9450, 0.4212}};
    for (const auto& c : cases) {
        const auto net = with_n(c.n);
        const ModelSpec m{c.kind, c.rho};
        const auto op  = at_measured(net, c.kind, c.rho, c.p0);
        const auto lin = linearize(op, c.rho, net, c.kind);
        auto central   = [&](double h, auto f) { return (f(h) - f(-h)) / (2.0 * h); };
        const double fd_ws  = central(1e-3, [&](double h) { return rhs_at(op, net, m, h, 0, 0, 0); });
        const double fd_wsr = central(1e-3, [&](double h) { return rhs_at(op, net, m, 0, h, 0, 0); });
        const double fd_pr  = central(1e-6, [&](double h) { return rhs_at(op, net, m, 0, 0, h, 0); });
        const double fd_qr  = central(1e-3, [&](double h) { return rhs_at(op, net, m, 0, 0, 0, h); });
        EXPECT_NEAR(lin.d_ws, fd_ws, 1e-6 * std::abs(fd_ws) + 1e-9);
        EXPECT_NEAR(lin.d_wsr, fd_wsr, 1e-6 * std::abs(fd_wsr) + 1e-9);
        EXPECT_NEAR(lin.d_pr, fd_pr, 1e-6 * std::abs(fd_pr));
        EXPECT_NEAR(lin.d_qr, fd_qr, 1e-6 * std::abs(fd_qr) + 1e-9);
    }
}

TEST(Linearize, ModerateScenarioAValues) {
    const auto net = with_n(500);
    const auto op  = at_measured(net, ModelKind::ScenarioA, 3.7551, 0.2004);
    const auto lin = linearize(op, 3.7551, net, ModelKind::ScenarioA);
    EXPECT_NEAR(lin.d_ws, -4.232936, 1e-5);
    EXPECT_NEAR(lin.d_pr, -28067.59, 0.05);
}

TEST(Linearize, RejectsOutOfRangeProbabilityAndMgt) {
    const auto net = with_n(2000);
    const auto op  = operating_point(net, {ModelKind::MgtTruncated, 1.0});
    EXPECT_THROW((void)linearize(op, 1.0, net, ModelKind::ScenarioA), std::invalid_argument);
    auto ok = operating_point(net, {ModelKind::ScenarioA, 1.0});
    EXPECT_THROW((void)linearize(ok, 1.0, net, ModelKind::MgtTruncated), std::invalid_argument);
}

TEST(Characteristic, RequiresPositiveIntegralGain) {
    const auto net = with_n(500);
    const auto op  = operating_point(net, {ModelKind::ScenarioB, 1.767});
    const auto lin = linearize(op, 1.767, net, ModelKind::ScenarioB);
    EXPECT_THROW((void)characteristic_coeffs(lin, op, net, PiGains{1e-5, 0.0}), std::invalid_argument);
}

// Frozen from the closed-form pipeline; every row is also PI-stable.
TEST(Characteristic, TableRows) {
    const struct {
        ModelKind kind;
        double n, rho, p0, a1, b1, b2, a4;
    } rows[] = {
        {ModelKind::ScenarioA, 500, 3.7551, 0.2004, 14.8212, 946.734, 125835, 0.047200},
        {ModelKind::ScenarioA, 800, 2.7921, 0.3504, 14.0278, 799.495, 83600.4, 0.026998},
        {ModelKind::ScenarioA, 1100, 2.8448, 0.4212, 13.6519, 732.775, 67897.5, 0.022456},
        {ModelKind::ScenarioA, 2000, 3.9516, 0.4879, 13.2995, 672.693, 55061.7, 0.019388},
        {ModelKind::ScenarioB, 200, 1.5318, 0.0442, 12.4928, 536.485, 35170.9, 0.040269},
        {ModelKind::ScenarioB, 500, 1.7670, 0.2004, 14.572, 904.72, 1.07098e5, 0.022211},
        {ModelKind::ScenarioB, 800, 2.1022, 0.3504, 15.7673, 1155.26, 174797, 0.020327},
        {ModelKind::ScenarioB, 1100, 2.9450, 0.4212, 16.9322, 1427.01, 263765, 0.023247},
    };
    const auto gains = pi_gains(PiConfig{});
    for (const auto& r : rows) {
        const auto net = with_n(r.n);
        const auto op  = at_measured(net, r.kind, r.rho, r.p0);
        const auto rep = analyze_stability(net, {r.kind, r.rho}, op, gains);
        EXPECT_NEAR(rep.alpha[0], r.a1, 1e-4 * r.a1) << r.n;
        EXPECT_NEAR(rep.beta1, r.b1, 1e-4 * r.b1) << r.n;
        EXPECT_NEAR(rep.beta2, r.b2, 1e-4 * r.b2) << r.n;
        EXPECT_NEAR(rep.alpha[3], r.a4, 1e-4 * r.a4) << r.n;
        EXPECT_TRUE(rep.stable) << r.n;
        EXPECT_TRUE(roots_in_left_half_plane(rep.alpha)) << r.n;
    }
}
