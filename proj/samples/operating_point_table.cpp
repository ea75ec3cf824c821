// Prints the steady-state marking probability of each model across the
// standard congestion cases, then the rho that reproduces a measured p0.

#include <cstdio>

#include "aqmflow/analysis.hpp"

int main() {
    using namespace aqmflow;
    struct Case {
        double n, measured;
    };
    const Case cases[] = {{200, 0.0442}, {300, 0.0877}, {500, 0.2004}, {800, 0.3504}, {1100, 0.4212}, {2000, 0.4879}};

    std::printf("%6s %8s %-14s %9s %9s %9s %9s %9s\n", "N", "w_bar", "level", "mgt", "A(rho=1)", "B(rho=1)", "rho_A",
                "rho_B");
    for (const auto& c : cases) {
        NetworkParams net;
        net.n_flows  = c.n;
        const auto a = operating_point(net, {ModelKind::ScenarioA, 1.0});
        const auto b = operating_point(net, {ModelKind::ScenarioB, 1.0});
        const auto m = operating_point(net, {ModelKind::MgtTruncated, 1.0});
        std::printf("%6.0f %8.4f %-14s %9.4f %9.4f %9.4f %9.4f %9.4f\n", c.n, a.w_bar,
                    std::string(to_string(a.level)).c_str(), m.p0, a.p0, b.p0,
                    rho_from_p0(c.measured, net, ModelKind::ScenarioA, true),
                    rho_from_p0(c.measured, net, ModelKind::ScenarioB, true));
    }

    NetworkParams off;
    off.ecn_on    = false;
    const auto op = operating_point(off, {ModelKind::ScenarioB, 1.0});
    std::printf("\nECN off, N=500: scenario B (rho=1) p0 = %.4f, residual = %.1e\n", op.p0,
                ecn_off_residual(op.p0, off, {ModelKind::ScenarioB, 1.0}));
    return 0;
}
