#pragma once

/**
 * @file config.hpp
 * @brief Experiment configuration: flat `key = value` text with dotted
 *        sections, plus named presets for the standard experiments.
 *
 * Example:
 *
 *     # N = 2000 severe congestion, PI
 *     network.n_flows = 2000
 *     model.kind      = scenario-a
 *     model.rho       = 3.9516
 *     aqm.kind        = pi
 *     sim.duration    = 200
 *
 * Lines are processed in order; later keys override earlier ones. A
 * `preset = NAME` line loads the preset's keys at that position.
 */

#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aqm.hpp"
#include "core.hpp"
#include "models.hpp"

namespace aqmflow {

struct ExperimentConfig {
    SimConfig sim;
    /// Also run the comparison set: the other scenario with the bridged rho,
    /// both scenarios at rho = 1 and the simplified MGT model.
    bool compare = false;
    std::optional<double> measured_p0;
    std::string preset;
    std::string out_dir = ".";
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string located(int line, std::string_view msg) {
    return line > 0 ? "line " + std::to_string(line) + ": " + std::string(msg) : std::string(msg);
}

inline double parse_number(std::string_view text, int line, std::string_view key) {
    const std::string s = trim(text);
    double v            = 0.0;
    const char* first   = s.data();
    const char* last    = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (s.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v))
        throw ConfigError(located(line, "malformed number '" + s + "' for key '" + std::string(key) + "'"));
    return v;
}

inline bool parse_flag(std::string_view text, int line, std::string_view key) {
    const std::string s = trim(text);
    if (s == "on" || s == "true" || s == "1" || s == "yes") return true;
    if (s == "off" || s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(located(line, "expected on/off for key '" + std::string(key) + "', got '" + s + "'"));
}

// "65:+200, 130:-200@1.7670" -> events; the optional @rho switches the model rho.
inline std::vector<FlowChange> parse_schedule(std::string_view text, int line) {
    std::vector<FlowChange> out;
    std::stringstream ss{std::string(text)};
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError(located(line, "schedule entry '" + item + "' must be TIME:DELTA_N[@RHO]"));
        FlowChange ev;
        ev.time              = parse_number(item.substr(0, colon), line, "sim.schedule");
        std::string rest     = item.substr(colon + 1);
        const auto at        = rest.find('@');
        if (at != std::string::npos) {
            ev.rho = parse_number(rest.substr(at + 1), line, "sim.schedule");
            rest   = rest.substr(0, at);
        }
        ev.delta_n = parse_number(rest, line, "sim.schedule");
        out.push_back(ev);
    }
    return out;
}

}  // namespace detail

/// Names of all presets, in documentation order.
[[nodiscard]] inline const std::vector<std::pair<std::string, std::string>>& preset_table() {
    // name -> config text. Durations are chosen per experiment.
    static const std::vector<std::pair<std::string, std::string>> presets = {
        {"fig-pi-n200", "network.n_flows=200\nmodel.kind=scenario-b\nmodel.rho=1.5318\naqm.kind=pi\nmodel.compare=on\nsim.duration=100"},
        {"fig-rem-n200", "network.n_flows=200\nmodel.kind=scenario-b\nmodel.rho=1.5318\naqm.kind=rem\nmodel.compare=on\nsim.duration=100"},
        {"fig-raq-n200", "network.n_flows=200\nmodel.kind=scenario-b\nmodel.rho=1.5318\naqm.kind=raq\nmodel.compare=on\nsim.duration=100"},
        {"fig-pi-n2000", "network.n_flows=2000\nmodel.kind=scenario-a\nmodel.rho=3.9516\naqm.kind=pi\nmodel.compare=on\nsim.duration=200"},
        {"fig-rem-n2000", "network.n_flows=2000\nmodel.kind=scenario-a\nmodel.rho=3.9516\naqm.kind=rem\nmodel.compare=on\nsim.duration=200"},
        {"fig-raq-n2000", "network.n_flows=2000\nmodel.kind=scenario-a\nmodel.rho=3.9516\naqm.kind=raq\nmodel.compare=on\nsim.duration=200"},
        {"fig-untruncated-pi-n2000", "network.n_flows=2000\nmodel.kind=mgt-untruncated\naqm.kind=pi\nsim.duration=5000\nsim.record_every=200"},
        {"fig-untruncated-rem-n2000", "network.n_flows=2000\nmodel.kind=mgt-untruncated\naqm.kind=rem\nsim.duration=1000\nsim.record_every=200"},
        {"fig-untruncated-raq-n2000", "network.n_flows=2000\nmodel.kind=mgt-untruncated\naqm.kind=raq\nsim.duration=200\nsim.record_every=20"},
        {"fig-pi-n500", "network.n_flows=500\nmodel.kind=scenario-b\nmodel.rho=1.7670\naqm.kind=pi\nmodel.compare=on\nsim.duration=200"},
        {"fig-pi-n800", "network.n_flows=800\nmodel.kind=scenario-b\nmodel.rho=2.1022\naqm.kind=pi\nmodel.compare=on\nsim.duration=200"},
        {"fig-pi-n1100", "network.n_flows=1100\nmodel.kind=scenario-b\nmodel.rho=2.9450\naqm.kind=pi\nmodel.compare=on\nsim.duration=200"},
        {"ecn-off-n500", "network.ecn=off\nmodel.kind=scenario-b\nmodel.rho=1.9789\naqm.kind=pi\nmodel.compare=on\nsim.duration=200"},
        {"fig-rem-ecn-off-n500", "network.ecn=off\nmodel.kind=scenario-b\nmodel.rho=1.9789\naqm.kind=rem\nmodel.compare=on\nsim.duration=200"},
        {"fig-raq-ecn-off-n500", "network.ecn=off\nmodel.kind=scenario-b\nmodel.rho=1.9789\naqm.kind=raq\nmodel.compare=on\nsim.duration=200"},
        {"vary-n", "network.n_flows=300\nmodel.kind=scenario-b\nmodel.rho=1.6575\naqm.kind=pi\nmodel.compare=on\nsim.duration=200\nsim.schedule=65:+200@1.7670, 130:-200@1.6575"},
        {"vary-n-rem", "network.n_flows=300\nmodel.kind=scenario-b\nmodel.rho=1.6575\naqm.kind=rem\nmodel.compare=on\nsim.duration=200\nsim.schedule=65:+200@1.7670, 130:-200@1.6575"},
        {"vary-n-raq", "network.n_flows=300\nmodel.kind=scenario-b\nmodel.rho=1.6575\naqm.kind=raq\nmodel.compare=on\nsim.duration=200\nsim.schedule=65:+200@1.7670, 130:-200@1.6575"},
        {"fig-pi-tp005", "network.prop_delay=0.05\nmodel.kind=scenario-b\nmodel.rho=2.0107\naqm.kind=pi\nmodel.compare=on\nsim.duration=200"},
        {"fig-pi-tp015", "network.prop_delay=0.15\nmodel.kind=scenario-b\nmodel.rho=1.6984\naqm.kind=pi\nmodel.compare=on\nsim.duration=200"},
        {"fig-pi-c15", "network.capacity_mbps=15\nmodel.kind=scenario-b\nmodel.rho=2.0297\naqm.kind=pi\nmodel.compare=on\nsim.duration=200"},
        {"fig-pi-c95", "network.capacity_mbps=95\nmodel.kind=scenario-b\nmodel.rho=1.6286\naqm.kind=pi\nmodel.compare=on\nsim.duration=200"},
        {"dt-02", "model.kind=scenario-b\nmodel.rho=1.7670\naqm.kind=raq\naqm.T=0.2\nsim.dt=0.2\nmodel.compare=on\nsim.duration=100"},
    };
    return presets;
}

[[nodiscard]] inline std::optional<std::string> preset_text(std::string_view name) {
    for (const auto& [n, text] : preset_table())
        if (n == name) return text;
    return std::nullopt;
}

/**
 * @brief Incremental config builder. Keys are applied in order; the AQM
 *        kind may be chosen before or after its gains.
 */
class ConfigBuilder {
   public:
    void apply_text(std::string_view text) {
        std::istringstream in{std::string(text)};
        std::string raw;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
            const std::string s = detail::trim(raw);
            if (s.empty()) continue;
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError(detail::located(line, "expected 'key = value', got '" + s + "'"));
            set(detail::trim(s.substr(0, eq)), detail::trim(s.substr(eq + 1)), line);
        }
    }

    /// Apply a single `key=value` override (command-line `--set`).
    void apply_override(std::string_view assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("override '" + std::string(assignment) + "' must be key=value");
        set(detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)), 0);
    }

    void set(const std::string& key, const std::string& value, int line) {
        using detail::parse_flag;
        using detail::parse_number;
        auto num = [&] { return parse_number(value, line, key); };
        auto& sim = cfg_.sim;
        auto& net = sim.params;

        if (key == "preset") {
            const auto text = preset_text(value);
            if (!text) throw ConfigError(detail::located(line, "unknown preset '" + value + "'"));
            cfg_.preset = value;
            apply_text(*text);
        } else if (key == "network.n_flows") {
            net.n_flows = num();
        } else if (key == "network.capacity_mbps") {
            capacity_mbps_ = num();
        } else if (key == "network.capacity_pps") {
            capacity_mbps_.reset();
            net.capacity = num();
        } else if (key == "network.pkt_bytes") {
            net.mean_pkt_bytes = num();
        } else if (key == "network.prop_delay") {
            net.prop_delay = num();
        } else if (key == "network.buffer") {
            net.buffer = num();
        } else if (key == "network.q_ref") {
            net.q_ref = num();
        } else if (key == "network.ecn") {
            net.ecn_on = parse_flag(value, line, key);
        } else if (key == "model.kind") {
            try {
                sim.model.kind = parse_model_kind(value);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(detail::located(line, e.what()));
            }
        } else if (key == "model.rho") {
            sim.model.rho = num();
        } else if (key == "model.compare") {
            cfg_.compare = parse_flag(value, line, key);
        } else if (key == "model.measured_p0") {
            cfg_.measured_p0 = num();
        } else if (key == "aqm.kind") {
            if (value != "pi" && value != "rem" && value != "raq")
                throw ConfigError(detail::located(line, "aqm.kind must be pi, rem or raq"));
            aqm_kind_ = value;
        } else if (key == "aqm.T") {
            pi_.T = rem_.T = raq_.T = num();
        } else if (key == "aqm.a") {
            pi_.a = num();
        } else if (key == "aqm.b") {
            pi_.b = num();
        } else if (key == "aqm.gamma") {
            rem_.gamma = num();
        } else if (key == "aqm.phi") {
            rem_.phi = num();
        } else if (key == "aqm.alpha") {
            rem_.alpha = num();
        } else if (key == "aqm.q_kp") {
            raq_.q_kp = num();
        } else if (key == "aqm.q_ki") {
            raq_.q_ki = num();
        } else if (key == "aqm.r_kp") {
            raq_.r_kp = num();
        } else if (key == "sim.dt") {
            sim.dt   = num();
            dt_line_ = line;
        } else if (key == "sim.duration") {
            sim.duration = num();
        } else if (key == "sim.record_every") {
            const double v = num();
            if (v < 1.0 || v != std::floor(v))
                throw ConfigError(detail::located(line, "sim.record_every must be a positive integer"));
            sim.record_every = static_cast<std::size_t>(v);
        } else if (key == "sim.schedule") {
            sim.schedule = detail::parse_schedule(value, line);
        } else if (key == "output.dir") {
            cfg_.out_dir = value;
        } else {
            throw ConfigError(detail::located(line, "unknown key '" + key + "'"));
        }
    }

    /// Finalise and validate.
    [[nodiscard]] ExperimentConfig build() const {
        ExperimentConfig cfg = cfg_;
        auto& net            = cfg.sim.params;
        if (capacity_mbps_) net.capacity = mbps_to_pps(*capacity_mbps_, net.mean_pkt_bytes);
        if (aqm_kind_ == "pi") cfg.sim.aqm = pi_;
        else if (aqm_kind_ == "rem") cfg.sim.aqm = rem_;
        else cfg.sim.aqm = raq_;
        if (cfg.measured_p0 && !(*cfg.measured_p0 > 0.0 && *cfg.measured_p0 < 1.0))
            throw ConfigError("model.measured_p0 must be in (0, 1)");
        try {
            cfg.sim.validate();
        } catch (const std::invalid_argument& e) {
            const bool about_dt = std::string_view(e.what()).find("dt") != std::string_view::npos;
            throw ConfigError(detail::located(about_dt ? dt_line_ : 0, std::string("invalid configuration: ") + e.what()));
        }
        return cfg;
    }

   private:
    ExperimentConfig cfg_;
    std::optional<double> capacity_mbps_ = 45.0;
    std::string aqm_kind_                = "pi";
    int dt_line_                         = 0;
    PiConfig pi_;
    RemConfig rem_;
    RaqConfig raq_;
};

/// Parse a configuration text; an empty text yields the default experiment
/// (N = 500, 45 Mb/s, 100 ms, B = 1125, q_ref = 500, ECN on, PI).
[[nodiscard]] inline ExperimentConfig parse_config(std::string_view text) {
    ConfigBuilder b;
    b.apply_text(text);
    return b.build();
}

}  // namespace aqmflow
