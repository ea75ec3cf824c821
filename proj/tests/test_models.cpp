#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "aqmflow/analysis.hpp"
#include "aqmflow/models.hpp"

using namespace aqmflow;

namespace {

NetworkParams with_n(double n) {
    NetworkParams p;
    p.n_flows = n;
    return p;
}

const double kR0 = 0.1 + 500.0 / 5625.0;

StepInput at(double ws, double p, double dt = 0.0005) { return StepInput{ws, ws, p, 500.0, kR0, dt}; }

}  // namespace

// ---------------------------------------------------------------------------
// Window step laws

TEST(ScenarioA, UnmarkedTrafficGrowsByArrivals) {
    const StepInput in{800.0, 700.0, 0.0, 300.0, 0.15, 0.001};
    EXPECT_DOUBLE_EQ(step_scenario_a(in, with_n(500), 2.0), 700.0 / 0.15 * 0.001);
}

TEST(ScenarioA, ZeroAtOperatingPoint) {
    const auto net = with_n(2000);
    const auto op  = operating_point(net, {ModelKind::ScenarioA, 1.0});
    EXPECT_NEAR(step_scenario_a(at(op.ws0, op.p0), net, 1.0), 0.0, 1e-12);
}

TEST(ScenarioA, RoundedSevereCongestionValues) {
    // Four-decimal inputs leave a small residual; value from an independent
    // evaluation of the closed form.
    const double d = step_scenario_a(at(1062.5, 0.4879), with_n(2000), 3.9516);
    EXPECT_NEAR(d, -5.95846e-05, 1e-9);
    EXPECT_LT(std::abs(d), 1e-4);
}

TEST(ScenarioA, RejectsNonPositiveRtt) {
    StepInput in = at(1000.0, 0.1);
    in.r_delayed = 0.0;
    EXPECT_THROW((void)step_scenario_a(in, with_n(500), 1.0), std::invalid_argument);
}

TEST(ScenarioB, ZeroAtOperatingPoint) {
    const auto net = with_n(500);
    const auto op  = operating_point(net, {ModelKind::ScenarioB, 1.767});
    EXPECT_NEAR(step_scenario_b(at(op.ws0, op.p0), net, 1.767), 0.0, 1e-12);
}

TEST(ScenarioB, UnmarkedTrafficGrowsOnePacketPerRttPerSession) {
    const auto d = step_scenario_b(at(900.0, 0.0, 0.01), with_n(500), 1.0);
    EXPECT_NEAR(d, 500.0 / kR0 * 0.01, 1e-12);
}

TEST(ScenarioB, RoundedModerateValues) {
    const double d = step_scenario_b(at(1062.5, 0.2004), with_n(500), 1.7670);
    EXPECT_NEAR(d, 1.234067e-04, 1e-9);
}

TEST(ScenarioB, FullMarkingDerivative) {
    const auto net = with_n(500);
    const ModelSpec m{ModelKind::ScenarioB, 1.0};
    // -rho W^2 / (2 N r)
    EXPECT_NEAR(continuous_rhs(at(1062.5, 1.0), net, m), -5976.5625, 1e-9);
}

TEST(ScenarioB, RejectsEmptyWindow) {
    StepInput in = at(0.0, 0.1);
    EXPECT_THROW((void)step_scenario_b(in, with_n(500), 1.0), std::invalid_argument);
}

TEST(Mgt, OnePacketPerRttWithoutMarking) {
    EXPECT_DOUBLE_EQ(step_mgt(at(1000.0, 0.0), with_n(500), true), 0.0005 / kR0);
}

TEST(Mgt, TruncationCapsProbabilityAtOne) {
    const auto net = with_n(2000);
    EXPECT_EQ(step_mgt(at(1062.5, 7.0827), net, true), step_mgt(at(1062.5, 1.0), net, true));
    EXPECT_LT(step_mgt(at(1062.5, 7.0827), net, false), step_mgt(at(1062.5, 1.0), net, false));
}

TEST(Mgt, ZeroAtOperatingPoint) {
    const auto net = with_n(200);
    const auto op  = operating_point(net, {ModelKind::MgtTruncated, 1.0});
    ASSERT_LE(op.p0, 1.0);
    EXPECT_NEAR(step_mgt(at(op.ws0, op.p0), net, true), 0.0, 1e-15);
}

TEST(Consistency, DiscreteStepIsRhsTimesDt) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ws(1.0, 5000.0), p(0.0, 1.0), r(0.01, 1.0), dt(1e-4, 0.2),
        n(1.0, 3000.0);
    for (int i = 0; i < 5000; ++i) {
        const auto net = with_n(std::floor(n(rng)));
        const StepInput in{ws(rng), ws(rng), p(rng), 100.0, r(rng), dt(rng)};
        const double rho = 1.0 + (net.n_flows - 1.0) * p(rng);
        EXPECT_EQ(step_scenario_a(in, net, rho), continuous_rhs(in, net, {ModelKind::ScenarioA, rho}) * in.dt);
        EXPECT_EQ(step_scenario_b(in, net, rho), continuous_rhs(in, net, {ModelKind::ScenarioB, rho}) * in.dt);
        for (auto kind : {ModelKind::MgtTruncated, ModelKind::MgtUntruncated}) {
            const double a = step_window(in, net, {kind, 1.0});
            const double b = continuous_rhs(in, net, {kind, 1.0}) * in.dt;
            EXPECT_NEAR(a, b, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(b));
        }
    }
}

// ---------------------------------------------------------------------------
// Queue

TEST(Queue, BalancedArrivalsKeepQueue) {
    const NetworkParams net;
    EXPECT_NEAR(step_queue(kR0 * net.capacity, 500.0, 0.3, net, 0.0005), 0.0, 1e-12);
}

TEST(Queue, EcnOffBalanceIncludesDrops) {
    NetworkParams net;
    net.ecn_on      = false;
    const double p0 = 0.2146;
    const double ws = kR0 * net.capacity / (1.0 - p0);
    EXPECT_NEAR(step_queue(ws, 500.0, p0, net, 0.0005), 0.0, 1e-12);
    net.ecn_on = true;
    EXPECT_GT(step_queue(ws, 500.0, p0, net, 0.0005), 0.0);
}

TEST(Queue, SaturatesAtBufferAndEmpty) {
    const NetworkParams net;
    EXPECT_DOUBLE_EQ(1120.0 + step_queue(1e6, 1120.0, 0.0, net, 0.01), net.buffer);
    EXPECT_DOUBLE_EQ(3.0 + step_queue(1.0, 3.0, 0.0, net, 0.01), 0.0);
}

// ---------------------------------------------------------------------------
// Simulation loop

TEST(Simulate, RejectsStepLongerThanSamplingPeriod) {
    SimConfig c;
    c.dt = 0.01;
    EXPECT_THROW((void)simulate(c), std::invalid_argument);
}

TEST(Simulate, RejectsScheduleOutsideRun) {
    SimConfig c;
    c.duration = 10.0;
    c.schedule = {{11.0, 10.0, std::nullopt}};
    EXPECT_THROW((void)simulate(c), std::invalid_argument);
    c.schedule = {{-1.0, 10.0, std::nullopt}};
    EXPECT_THROW((void)simulate(c), std::invalid_argument);
}

TEST(Simulate, InitialConditionsAndSpacing) {
    SimConfig c;
    c.duration = 1.0;
    const auto ts = simulate(c);
    ASSERT_EQ(ts.rows.size(), 2001u);
    EXPECT_EQ(ts.rows[0].ws, c.params.n_flows);
    EXPECT_EQ(ts.rows[0].q, 0.0);
    EXPECT_EQ(ts.rows[0].p, 0.0);
    for (std::size_t i = 1; i < ts.rows.size(); ++i)
        EXPECT_NEAR(ts.rows[i].t - ts.rows[i - 1].t, 0.0005, 1e-12);
}

TEST(Simulate, ZeroOrderHoldBetweenSamplingInstants) {
    SimConfig c;
    c.duration    = 30.0;
    const auto ts = simulate(c);
    for (std::size_t i = 1; i < ts.rows.size(); ++i) {
        if (i % 10 != 0) {
            EXPECT_EQ(ts.rows[i].p, ts.rows[i - 1].p) << i;
        }
    }
}

TEST(Simulate, UpdatesEveryStepWhenStepEqualsPeriod) {
    SimConfig c;
    c.aqm      = RaqConfig{0.0077, 0.0005, 0.0095, 0.2};
    c.dt       = 0.2;
    c.duration = 100.0;
    Simulator sim(c);
    EXPECT_EQ(sim.steps_per_update(), 1u);
    const auto ts = sim.run();
    int changes   = 0;
    for (std::size_t i = 2; i < ts.rows.size(); ++i) changes += ts.rows[i].p != ts.rows[i - 1].p;
    EXPECT_GT(changes, static_cast<int>(ts.rows.size()) / 2);
}

TEST(Simulate, QueueAndProbabilityBounds) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> n(50.0, 3000.0), u(0.0, 1.0);
    const ModelKind kinds[] = {ModelKind::ScenarioA, ModelKind::ScenarioB, ModelKind::MgtTruncated,
                               ModelKind::MgtUntruncated};
    const AqmConfig aqms[] = {PiConfig{}, RemConfig{}, RaqConfig{}};
    for (int i = 0; i < 24; ++i) {
        SimConfig c;
        c.params.n_flows = std::floor(n(rng));
        c.params.ecn_on  = u(rng) < 0.5;
        c.model          = {kinds[i % 4], 1.0 + 3.0 * u(rng)};
        c.aqm            = aqms[(i / 4) % 3];
        c.duration       = 20.0;
        const auto ts    = simulate(c);
        for (const auto& r : ts.rows) {
            ASSERT_GE(r.q, 0.0);
            ASSERT_LE(r.q, c.params.buffer);
            ASSERT_GE(r.ws, 0.0);
            if (c.model.kind != ModelKind::MgtUntruncated) {
                ASSERT_GE(r.p, 0.0);
                ASSERT_LE(r.p, 1.0);
            }
        }
    }
}

TEST(Simulate, Deterministic) {
    SimConfig c;
    c.duration    = 20.0;
    c.aqm         = RemConfig{};
    const auto a  = simulate(c);
    const auto b  = simulate(c);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].q, b.rows[i].q);
        EXPECT_EQ(a.rows[i].p, b.rows[i].p);
    }
}

TEST(Simulate, RecordEveryDecimates) {
    SimConfig c;
    c.duration     = 1.0;
    c.record_every = 20;
    const auto ts  = simulate(c);
    ASSERT_EQ(ts.rows.size(), 101u);
    EXPECT_NEAR(ts.spacing, 0.01, 1e-15);
    EXPECT_NEAR(ts.rows[50].t, 0.5, 1e-12);
}

TEST(Simulate, SeededAtOperatingPointStaysPut) {
    for (auto kind : {ModelKind::ScenarioA, ModelKind::ScenarioB}) {
        SimConfig c;
        c.model       = {kind, 1.767};
        const auto op = operating_point(c.params, c.model);
        Simulator sim(c);
        sim.seed({op.ws0, op.q0, op.p0, op.r0});
        for (int i = 0; i < 5000; ++i) {
            const auto d = sim.advance();
            ASSERT_LT(std::abs(d.dws), 1e-9 * op.ws0);
            ASSERT_LT(std::abs(d.dq), 1e-9 * op.q0);
        }
    }
}

TEST(Simulate, ScheduleChangesPopulation) {
    SimConfig c;
    c.params.n_flows = 300;
    c.model          = {ModelKind::ScenarioB, 1.6575};
    c.duration       = 10.0;
    c.schedule       = {{4.0, 200.0, 1.7670}, {8.0, -200.0, std::nullopt}};
    Simulator sim(c);
    while (sim.time() < 4.0 - 1e-9) sim.advance();
    const double before = sim.current().ws;
    sim.advance();
    EXPECT_EQ(sim.params().n_flows, 500.0);
    EXPECT_GT(sim.current().ws, before + 150.0);
    while (sim.time() < 8.0 + 1e-9) sim.advance();
    EXPECT_EQ(sim.params().n_flows, 300.0);
}

TEST(Simulate, ScenarioBSettlesBelowMgtUnderLightLoad) {
    for (double n : {200.0, 300.0}) {
        SimConfig c;
        c.params.n_flows = n;
        c.duration       = 200.0;
        c.record_every   = 100;
        auto settled_p   = [&](ModelKind k) {
            c.model       = {k, 1.0};
            const auto ts = simulate(c);
            double s = 0.0;
            int cnt  = 0;
            for (const auto& r : ts.rows)
                if (r.t >= 150.0) s += r.p, ++cnt;
            return s / cnt;
        };
        EXPECT_LT(settled_p(ModelKind::ScenarioB), settled_p(ModelKind::MgtTruncated)) << n;
    }
}
