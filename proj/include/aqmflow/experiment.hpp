#pragma once

// Experiment driver: expands a config into its model runs, computes summary
// metrics, runs parameter sweeps and formats CSV / text reports.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "analysis.hpp"
#include "config.hpp"
#include "models.hpp"
#include "stability.hpp"

namespace aqmflow {

/// Convergence band as a fraction of q_ref, and how long q must stay inside.
inline constexpr double kConvergenceBand  = 0.05;
inline constexpr double kConvergenceHold  = 10.0;
/// Steady-state statistics use the final quarter of a run.
inline constexpr double kSettledFraction = 0.25;

struct RunMetrics {
    double settled_q = 0.0;
    double settled_p = 0.0;
    std::optional<double> convergence_time;  ///< empty: did not converge
    std::optional<double> bound_gap;         ///< only when both scenarios ran
};

/// First time after which |q - q_ref| < band * q_ref holds for `hold` seconds.
[[nodiscard]] inline std::optional<double> convergence_time(const TimeSeries& ts, double q_ref,
                                                            double band = kConvergenceBand,
                                                            double hold_s = kConvergenceHold) {
    std::optional<double> entered;
    for (const auto& row : ts.rows) {
        if (std::abs(row.q - q_ref) < band * q_ref) {
            if (!entered) entered = row.t;
            if (row.t - *entered >= hold_s) return entered;
        } else {
            entered.reset();
        }
    }
    return std::nullopt;
}

[[nodiscard]] inline RunMetrics compute_metrics(const TimeSeries& ts, double q_ref) {
    RunMetrics m;
    if (ts.rows.empty()) return m;
    const double t_end  = ts.rows.back().t;
    const double t_from = t_end * (1.0 - kSettledFraction);
    double sq = 0.0, sp = 0.0;
    std::size_t n = 0;
    for (const auto& row : ts.rows) {
        if (row.t + 1e-9 < t_from) continue;
        sq += row.q;
        sp += row.p;
        ++n;
    }
    m.settled_q        = sq / static_cast<double>(n);
    m.settled_p        = sp / static_cast<double>(n);
    m.convergence_time = convergence_time(ts, q_ref);
    return m;
}

/// max |q_a(t) - q_b(t)| over the final quarter of two equally sampled runs.
[[nodiscard]] inline double bound_gap(const TimeSeries& a, const TimeSeries& b) {
    const std::size_t n = std::min(a.rows.size(), b.rows.size());
    if (n == 0) return 0.0;
    const double t_from = a.rows[n - 1].t * (1.0 - kSettledFraction);
    double gap          = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (a.rows[i].t + 1e-9 >= t_from) gap = std::max(gap, std::abs(a.rows[i].q - b.rows[i].q));
    return gap;
}

/// How a run follows rho switches carried by schedule events.
enum class RhoTracking {
    Configured,  ///< takes the switched rho as is
    Bridged,     ///< takes the other scenario's equivalent of the switched rho
    Fixed,       ///< ignores rho switches
};

/// One model run requested by an experiment.
struct RunSpec {
    std::string label;
    ModelSpec model;
    RhoTracking tracking = RhoTracking::Configured;
};

[[nodiscard]] inline std::string rho_label(double rho) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", rho);
    return buf;
}

/**
 * @brief Models to run for a config.
 *
 * Without comparison this is just the configured model. With comparison the
 * configured scenario is joined by the other scenario at the rho that shares
 * its operating point, both scenarios at rho = 1, and the simplified MGT model.
 */
/// rho of the other scenario that shares `m`'s operating point.
[[nodiscard]] inline double bridged_rho(const NetworkParams& net, const ModelSpec& m) {
    const double ws0 = operating_point(net, m).ws0;
    return m.kind == ModelKind::ScenarioB ? rho_a_from_rho_b(m.rho, ws0, net.n_flows) : m.rho * net.n_flows / ws0;
}

[[nodiscard]] inline std::vector<RunSpec> expand_runs(const ExperimentConfig& cfg) {
    const ModelSpec& m = cfg.sim.model;
    auto label         = [](const ModelSpec& s) {
        return is_scenario(s.kind) ? std::string(to_string(s.kind)) + "_rho" + rho_label(s.rho)
                                           : std::string(to_string(s.kind));
    };
    std::vector<RunSpec> runs{{label(m), m, RhoTracking::Configured}};
    if (!cfg.compare || !is_scenario(m.kind)) return runs;

    const ModelSpec other{m.kind == ModelKind::ScenarioB ? ModelKind::ScenarioA : ModelKind::ScenarioB,
                          bridged_rho(cfg.sim.params, m)};
    const RunSpec extra[] = {{label(other), other, RhoTracking::Bridged},
                             {label({m.kind, 1.0}), {m.kind, 1.0}, RhoTracking::Fixed},
                             {label({other.kind, 1.0}), {other.kind, 1.0}, RhoTracking::Fixed},
                             {label({ModelKind::MgtTruncated, 1.0}), {ModelKind::MgtTruncated, 1.0}, RhoTracking::Fixed}};
    for (const auto& s : extra) {
        if (std::none_of(runs.begin(), runs.end(), [&](const RunSpec& r) { return r.label == s.label; }))
            runs.push_back(s);
    }
    return runs;
}

/// Schedule as seen by one run: rho switches are kept, translated or dropped.
[[nodiscard]] inline std::vector<FlowChange> schedule_for(const SimConfig& sim, RhoTracking tracking) {
    std::vector<FlowChange> out = sim.schedule;
    NetworkParams net           = sim.params;
    ModelSpec configured        = sim.model;
    for (auto& ev : out) {
        net.n_flows += ev.delta_n;
        if (!ev.rho) continue;
        configured.rho = *ev.rho;
        if (tracking == RhoTracking::Fixed) ev.rho.reset();
        else if (tracking == RhoTracking::Bridged) ev.rho = bridged_rho(net, configured);
    }
    return out;
}

struct RunResult {
    RunSpec spec;
    TimeSeries series;
    RunMetrics metrics;
    std::string error;  ///< non-empty when the run was rejected
};

/// Execute every run of an experiment. The first two scenario runs (the
/// configured one and its bridged partner) define the bound gap.
[[nodiscard]] inline std::vector<RunResult> run_experiment(const ExperimentConfig& cfg) {
    std::vector<RunResult> out;
    for (const auto& spec : expand_runs(cfg)) {
        RunResult res{spec, {}, {}, {}};
        SimConfig sim = cfg.sim;
        sim.model     = spec.model;
        try {
            sim.schedule = schedule_for(cfg.sim, spec.tracking);
            res.series  = simulate(sim);
            res.metrics = compute_metrics(res.series, sim.params.q_ref);
        } catch (const std::invalid_argument& e) {
            res.error = e.what();
        }
        out.push_back(std::move(res));
    }
    if (cfg.compare && out.size() >= 2 && is_scenario(out[0].spec.model.kind) && out[0].error.empty() &&
        out[1].error.empty() && is_scenario(out[1].spec.model.kind)) {
        const double gap          = bound_gap(out[0].series, out[1].series);
        out[0].metrics.bound_gap  = gap;
        out[1].metrics.bound_gap  = gap;
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV formatting. All numbers use 6 significant digits.

[[nodiscard]] inline std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline void write_series_csv(std::ostream& os, const TimeSeries& ts) {
    os << "t,q,p,ws,r,lambda\n";
    for (const auto& r : ts.rows)
        os << fmt6(r.t) << ',' << fmt6(r.q) << ',' << fmt6(r.p) << ',' << fmt6(r.ws) << ',' << fmt6(r.r) << ','
           << fmt6(r.lambda) << '\n';
}

inline constexpr const char* kMetricsHeader = "run,settled_q,settled_p,convergence_time,bound_gap,error";

// settled_q,settled_p,convergence_time,bound_gap,error
inline void write_metrics_fields(std::ostream& os, const RunMetrics& m, const std::string& error) {
    if (!error.empty()) {
        std::string quoted = error;
        std::replace(quoted.begin(), quoted.end(), '"', '\'');
        os << ",,,," << '"' << quoted << '"' << '\n';
        return;
    }
    os << fmt6(m.settled_q) << ',' << fmt6(m.settled_p) << ','
       << (m.convergence_time ? fmt6(*m.convergence_time) : std::string("did-not-converge")) << ','
       << (m.bound_gap ? fmt6(*m.bound_gap) : std::string()) << ",\n";
}

inline void write_metrics_row(std::ostream& os, const std::string& label, const RunMetrics& m,
                              const std::string& error) {
    os << label << ',';
    write_metrics_fields(os, m, error);
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { NFlows, CapacityMbps, PropDelay };

[[nodiscard]] inline SweepAxis parse_sweep_axis(std::string_view s) {
    if (s == "n_flows") return SweepAxis::NFlows;
    if (s == "capacity") return SweepAxis::CapacityMbps;
    if (s == "prop_delay") return SweepAxis::PropDelay;
    throw ConfigError("unknown sweep axis '" + std::string(s) + "' (n_flows, capacity, prop_delay)");
}

[[nodiscard]] inline std::string_view to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::NFlows: return "n_flows";
        case SweepAxis::CapacityMbps: return "capacity";
        case SweepAxis::PropDelay: return "prop_delay";
    }
    return "?";
}

struct SweepRow {
    double value = 0.0;
    std::string run;
    std::optional<OperatingPoint> op;
    RunMetrics metrics;
    std::string error;
};

/// Config for one sweep point; capacity values are in Mb/s.
[[nodiscard]] inline ExperimentConfig with_axis(ExperimentConfig cfg, SweepAxis axis, double value) {
    auto& net = cfg.sim.params;
    switch (axis) {
        case SweepAxis::NFlows: net.n_flows = value; break;
        case SweepAxis::CapacityMbps: net.capacity = mbps_to_pps(value, net.mean_pkt_bytes); break;
        case SweepAxis::PropDelay: net.prop_delay = value; break;
    }
    return cfg;
}

/// Worker count for sweeps: AQMFLOW_THREADS if set, else hardware concurrency.
[[nodiscard]] inline unsigned sweep_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("AQMFLOW_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) n = static_cast<unsigned>(v);
    }
    return n;
}

/**
 * @brief Run the base experiment once per axis value.
 *
 * Points run concurrently on up to `threads` workers; results are collected
 * by index so the output order never depends on scheduling. A failing point
 * yields rows carrying its error and the sweep continues.
 */
[[nodiscard]] inline std::vector<SweepRow> sweep(const ExperimentConfig& base, SweepAxis axis,
                                                 const std::vector<double>& values, unsigned threads = 1) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    std::vector<std::vector<SweepRow>> per_point(values.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            auto& rows = per_point[i];
            try {
                ExperimentConfig cfg = with_axis(base, axis, values[i]);
                cfg.sim.validate();
                for (auto& res : run_experiment(cfg)) {
                    SweepRow row{values[i], res.spec.label, std::nullopt, res.metrics, res.error};
                    try {
                        row.op = operating_point(cfg.sim.params, res.spec.model);
                    } catch (const std::exception& e) {
                        if (row.error.empty()) row.error = e.what();
                    }
                    rows.push_back(std::move(row));
                }
            } catch (const std::exception& e) {
                rows.push_back(SweepRow{values[i], std::string(to_string(base.sim.model.kind)), std::nullopt, {}, e.what()});
            }
        }
    };

    const unsigned n_workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(values.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_workers; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<SweepRow> out;
    for (auto& rows : per_point)
        for (auto& r : rows) out.push_back(std::move(r));
    return out;
}

inline void write_sweep_csv(std::ostream& os, SweepAxis axis, const std::vector<SweepRow>& rows) {
    os << to_string(axis) << ",run,w_bar,level,p0_model,settled_q,settled_p,convergence_time,bound_gap,error\n";
    for (const auto& r : rows) {
        os << fmt6(r.value) << ',' << r.run << ',';
        if (r.op)
            os << fmt6(r.op->w_bar) << ',' << to_string(r.op->level) << ',' << fmt6(r.op->p0) << ',';
        else
            os << ",,,";
        write_metrics_fields(os, r.metrics, r.error);
    }
}

}  // namespace aqmflow
