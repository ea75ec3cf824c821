// aqmflow command-line front end.
//
//   aqmflow run       --config FILE [--preset NAME] [--out DIR]
//   aqmflow op        --config FILE [--measured-p0 X]
//   aqmflow stability --config FILE [--csv FILE]
//   aqmflow sweep     --config FILE --axis n_flows --values 200,500,800
//   aqmflow presets
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "aqmflow/aqmflow.hpp"

namespace fs = std::filesystem;
using namespace aqmflow;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct CommonOptions {
    std::string config_path;
    std::string preset;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config,-c", opts.config_path, "Configuration file (key = value)");
    cmd->add_option("--preset,-p", opts.preset, "Named preset applied before the file");
    cmd->add_option("--set,-s", opts.overrides, "Override a key, e.g. --set network.n_flows=800");
}

ExperimentConfig load(const CommonOptions& opts) {
    ConfigBuilder b;
    if (!opts.preset.empty()) b.set("preset", opts.preset, 0);
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) throw ConfigError("cannot open config file '" + opts.config_path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            b.apply_text(ss.str());
        } catch (const ConfigError& e) {
            throw ConfigError(opts.config_path + ": " + e.what());
        }
    }
    for (const auto& o : opts.overrides) b.apply_override(o);
    return b.build();
}

void echo_config(std::ostream& os, const ExperimentConfig& cfg) {
    const auto& n = cfg.sim.params;
    os << "  config: N=" << n.n_flows << " C=" << n.capacity << " pkt/s T_p=" << n.prop_delay << " B=" << n.buffer
       << " q_ref=" << n.q_ref << " ecn=" << (n.ecn_on ? "on" : "off") << " model=" << to_string(cfg.sim.model.kind)
       << " rho=" << cfg.sim.model.rho << " aqm=" << aqm_name(cfg.sim.aqm) << " dt=" << cfg.sim.dt
       << " duration=" << cfg.sim.duration << '\n';
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write '" + path.string() + "'");
    return f;
}

int cmd_run(const CommonOptions& opts, const std::string& out_flag) {
    auto cfg = load(opts);
    if (!out_flag.empty()) cfg.out_dir = out_flag;
    fs::create_directories(cfg.out_dir);
    std::vector<RunResult> results;
    try {
        results = run_experiment(cfg);
    } catch (const std::exception&) {
        echo_config(std::cerr, cfg);
        throw;
    }
    auto metrics = open_out(fs::path(cfg.out_dir) / "metrics.csv");
    metrics << kMetricsHeader << '\n';
    int failures = 0;
    for (const auto& r : results) {
        write_metrics_row(metrics, r.spec.label, r.metrics, r.error);
        if (!r.error.empty()) {
            ++failures;
            std::cerr << "run " << r.spec.label << " rejected: " << r.error << '\n';
            echo_config(std::cerr, cfg);
            continue;
        }
        const auto path = fs::path(cfg.out_dir) / (r.spec.label + ".csv");
        auto f          = open_out(path);
        write_series_csv(f, r.series);
        std::cout << path.string() << "  settled q=" << fmt6(r.metrics.settled_q)
                  << " p=" << fmt6(r.metrics.settled_p) << '\n';
    }
    return failures == static_cast<int>(results.size()) ? kExitConfig : 0;
}

int cmd_op(const CommonOptions& opts, std::optional<double> measured) {
    auto cfg = load(opts);
    if (measured) {
        if (!(*measured > 0.0 && *measured < 1.0)) throw ConfigError("--measured-p0 must be in (0, 1)");
        cfg.measured_p0 = measured;
    }
    print_op_report(std::cout, build_op_report(cfg));
    return 0;
}

int cmd_stability(const CommonOptions& opts, std::optional<double> measured, const std::string& csv_path) {
    auto cfg = load(opts);
    if (measured) cfg.measured_p0 = measured;
    const auto rows = build_stability_report(cfg);
    print_stability_report(std::cout, rows);
    if (!csv_path.empty()) {
        auto f = open_out(csv_path);
        write_stability_csv(f, rows);
    } else {
        std::cout << '\n';
        write_stability_csv(std::cout, rows);
    }
    return 0;
}

int cmd_sweep(const CommonOptions& opts, const std::string& axis_name, const std::vector<double>& values,
              const std::string& out_flag) {
    auto cfg        = load(opts);
    const auto axis = parse_sweep_axis(axis_name);
    const auto rows = sweep(cfg, axis, values, sweep_threads());
    if (out_flag.empty()) {
        write_sweep_csv(std::cout, axis, rows);
    } else {
        fs::create_directories(fs::path(out_flag).parent_path().empty() ? fs::path(".") : fs::path(out_flag).parent_path());
        auto f = open_out(out_flag);
        write_sweep_csv(f, axis, rows);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"aqmflow: TCP/AQM fluid-model simulation and analysis"};
    app.require_subcommand(1);

    CommonOptions run_opts, op_opts, stab_opts, sweep_opts;
    std::string run_out, sweep_out, stab_csv, axis;
    std::optional<double> op_p0, stab_p0;
    std::vector<double> values;

    auto* run = app.add_subcommand("run", "Simulate and write one CSV per model plus metrics.csv");
    add_common(run, run_opts);
    run->add_option("--out,-o", run_out, "Output directory");

    auto* op = app.add_subcommand("op", "Operating points, rho inversion and congestion level");
    add_common(op, op_opts);
    op->add_option("--measured-p0", op_p0, "Measured steady-state marking probability");

    auto* stab = app.add_subcommand("stability", "Linearised PI stability (Routh-Hurwitz)");
    add_common(stab, stab_opts);
    stab->add_option("--measured-p0", stab_p0, "Linearise at this p0 with matching rho");
    stab->add_option("--csv", stab_csv, "Write the report as CSV to this file");

    auto* sw = app.add_subcommand("sweep", "Run the experiment across one parameter axis");
    add_common(sw, sweep_opts);
    sw->add_option("--axis", axis, "n_flows | capacity (Mb/s) | prop_delay (s)")->required();
    sw->add_option("--values", values, "Comma-separated axis values")->required()->delimiter(',');
    sw->add_option("--out,-o", sweep_out, "Write the metrics table here instead of stdout");

    auto* presets = app.add_subcommand("presets", "List the built-in presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) return cmd_run(run_opts, run_out);
        if (*op) return cmd_op(op_opts, op_p0);
        if (*stab) return cmd_stability(stab_opts, stab_p0, stab_csv);
        if (*sw) return cmd_sweep(sweep_opts, axis, values, sweep_out);
        if (*presets) {
            for (const auto& [name, text] : preset_table()) std::cout << name << '\n';
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
