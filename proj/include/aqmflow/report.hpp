#pragma once

// Text and CSV reports over the operating-point and stability analyses.

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "config.hpp"
#include "experiment.hpp"
#include "stability.hpp"

namespace aqmflow {

struct OpReportRow {
    std::string label;
    OperatingPoint op;
};

struct RhoInversion {
    double p0_measured = 0.0;
    double rho_b       = 0.0;
    double rho_a       = 0.0;
    OperatingPoint op;  ///< at the measured p0
};

struct OpReport {
    std::vector<OpReportRow> rows;
    std::optional<RhoInversion> inversion;
};

[[nodiscard]] inline OpReport build_op_report(const ExperimentConfig& cfg) {
    const auto& net = cfg.sim.params;
    OpReport rep;
    ModelSpec configured = cfg.sim.model;
    std::vector<std::pair<std::string, ModelSpec>> models;
    if (is_scenario(configured.kind))
        models.emplace_back(std::string(to_string(configured.kind)) + " rho=" + rho_label(configured.rho), configured);
    models.emplace_back("scenario-a rho=1", ModelSpec{ModelKind::ScenarioA, 1.0});
    models.emplace_back("scenario-b rho=1", ModelSpec{ModelKind::ScenarioB, 1.0});
    models.emplace_back("mgt", ModelSpec{ModelKind::MgtTruncated, 1.0});
    for (auto& [label, m] : models) rep.rows.push_back({label, operating_point(net, m)});

    if (cfg.measured_p0) {
        RhoInversion inv;
        inv.p0_measured = *cfg.measured_p0;
        inv.rho_b       = rho_from_p0(inv.p0_measured, net, ModelKind::ScenarioB, net.ecn_on);
        inv.rho_a       = rho_from_p0(inv.p0_measured, net, ModelKind::ScenarioA, net.ecn_on);
        inv.op          = operating_point(net, ModelSpec{ModelKind::ScenarioB, inv.rho_b});
        rep.inversion   = inv;
    }
    return rep;
}

inline void print_op_report(std::ostream& os, const OpReport& rep) {
    char line[256];
    std::snprintf(line, sizeof line, "%-24s %10s %8s %10s %8s %8s  %s\n", "model", "ws0", "q0", "p0", "r0", "w_bar",
                  "level");
    os << line;
    for (const auto& r : rep.rows) {
        std::snprintf(line, sizeof line, "%-24s %10.4f %8.2f %10.4f %8.5f %8.4f  %s%s\n", r.label.c_str(), r.op.ws0,
                      r.op.q0, r.op.p0, r.op.r0, r.op.w_bar, std::string(to_string(r.op.level)).c_str(),
                      r.op.needs_truncation ? "  [p0 > 1, truncation required]" : "");
        os << line;
    }
    if (rep.inversion) {
        const auto& inv = *rep.inversion;
        std::snprintf(line, sizeof line, "\nmeasured p0 = %.4f -> rho_B = %.4f, rho_A = %.4f, w_bar = %.4f (%s)\n",
                      inv.p0_measured, inv.rho_b, inv.rho_a, inv.op.w_bar,
                      std::string(to_string(inv.op.level)).c_str());
        os << line;
    }
}

inline void write_op_csv(std::ostream& os, const OpReport& rep) {
    os << "model,ws0,q0,p0,r0,w_bar,level,needs_truncation\n";
    for (const auto& r : rep.rows)
        os << r.label << ',' << fmt6(r.op.ws0) << ',' << fmt6(r.op.q0) << ',' << fmt6(r.op.p0) << ','
           << fmt6(r.op.r0) << ',' << fmt6(r.op.w_bar) << ',' << to_string(r.op.level) << ','
           << (r.op.needs_truncation ? 1 : 0) << '\n';
    if (rep.inversion)
        os << "# measured_p0=" << fmt6(rep.inversion->p0_measured) << " rho_b=" << fmt6(rep.inversion->rho_b)
           << " rho_a=" << fmt6(rep.inversion->rho_a) << '\n';
}

struct StabilityRow {
    std::string label;
    ModelSpec model;
    OperatingPoint op;
    Linearization lin;
    StabilityReport report;
};

/**
 * Stability of both scenarios under the configured PI gains (defaults when
 * the configured AQM is not PI). With a measured p0 the scenarios are
 * linearised there, each with the rho that reproduces it; otherwise at the
 * configured scenario's operating point and its bridged partner.
 */
[[nodiscard]] inline std::vector<StabilityRow> build_stability_report(const ExperimentConfig& cfg) {
    const auto& net  = cfg.sim.params;
    const PiConfig pi = std::holds_alternative<PiConfig>(cfg.sim.aqm) ? std::get<PiConfig>(cfg.sim.aqm) : PiConfig{};
    const PiGains gains = pi_gains(pi);

    std::vector<ModelSpec> models;
    if (cfg.measured_p0) {
        models.push_back({ModelKind::ScenarioA, rho_from_p0(*cfg.measured_p0, net, ModelKind::ScenarioA, net.ecn_on)});
        models.push_back({ModelKind::ScenarioB, rho_from_p0(*cfg.measured_p0, net, ModelKind::ScenarioB, net.ecn_on)});
    } else if (is_scenario(cfg.sim.model.kind)) {
        ExperimentConfig c = cfg;
        c.compare          = true;
        const auto runs    = expand_runs(c);
        models.push_back(runs.at(0).model);
        models.push_back(runs.at(1).model);
        if (models[0].kind == ModelKind::ScenarioB) std::swap(models[0], models[1]);
    } else {
        models.push_back({ModelKind::ScenarioA, 1.0});
        models.push_back({ModelKind::ScenarioB, 1.0});
    }

    std::vector<StabilityRow> rows;
    for (const auto& m : models) {
        StabilityRow row;
        row.model = m;
        row.label = std::string(to_string(m.kind)) + " rho=" + rho_label(m.rho);
        row.op    = operating_point(net, m);
        if (cfg.measured_p0) row.op.p0 = *cfg.measured_p0;
        row.lin    = linearize(row.op, m.rho, net, m.kind);
        row.report = routh_check(characteristic_coeffs(row.lin, row.op, net, gains));
        rows.push_back(row);
    }
    return rows;
}

inline void print_stability_report(std::ostream& os, const std::vector<StabilityRow>& rows) {
    char line[320];
    std::snprintf(line, sizeof line, "%-24s %8s %12s %12s %12s %12s %12s %12s  %s\n", "model", "p0", "alpha1",
                  "alpha2", "alpha3", "alpha4", "beta1", "beta2", "verdict");
    os << line;
    for (const auto& r : rows) {
        const auto& a = r.report.alpha;
        std::snprintf(line, sizeof line, "%-24s %8.4f %12.4f %12.4f %12.4f %12.4g %12.4f %12.4e  %s\n",
                      r.label.c_str(), r.op.p0, a[0], a[1], a[2], a[3], r.report.beta1, r.report.beta2,
                      r.report.stable ? "stable" : "unstable");
        os << line;
    }
}

inline void write_stability_csv(std::ostream& os, const std::vector<StabilityRow>& rows) {
    os << "model,rho,p0,d_ws,d_wsr,d_pr,d_qr,alpha1,alpha2,alpha3,alpha4,beta1,beta2,stable\n";
    for (const auto& r : rows) {
        const auto& a = r.report.alpha;
        os << to_string(r.model.kind) << ',' << fmt6(r.model.rho) << ',' << fmt6(r.op.p0) << ',' << fmt6(r.lin.d_ws)
           << ',' << fmt6(r.lin.d_wsr) << ',' << fmt6(r.lin.d_pr) << ',' << fmt6(r.lin.d_qr) << ',' << fmt6(a[0])
           << ',' << fmt6(a[1]) << ',' << fmt6(a[2]) << ',' << fmt6(a[3]) << ',' << fmt6(r.report.beta1) << ','
           << fmt6(r.report.beta2) << ',' << (r.report.stable ? 1 : 0) << '\n';
    }
}

}  // namespace aqmflow
