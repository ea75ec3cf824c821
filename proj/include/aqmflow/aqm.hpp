#pragma once

// Time-driven AQM controllers. Each controller recomputes the marking
// probability once per sampling period T; the simulator holds the output
// constant between sampling instants.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string_view>
#include <variant>

#include "core.hpp"

namespace aqmflow {

/// Discrete PI in the incremental form used by the ns-2 implementation.
struct PiConfig {
    double a = 1.822e-5;
    double b = 1.816e-5;
    double T = 0.005;
};

/// Random Exponential Marking.
struct RemConfig {
    double gamma = 0.001;
    double phi   = 1.001;
    double alpha = 0.1;
    double T     = 0.005;
};

/// Queue-and-rate controller: PI on the normalised queue error plus a
/// proportional term on the normalised rate mismatch.
struct RaqConfig {
    double q_kp = 0.0077;
    double q_ki = 0.0005;
    double r_kp = 0.0095;
    double T    = 0.005;
};

using AqmConfig = std::variant<PiConfig, RemConfig, RaqConfig>;

[[nodiscard]] inline double sampling_period(const AqmConfig& cfg) {
    return std::visit([](const auto& c) { return c.T; }, cfg);
}

[[nodiscard]] inline std::string_view aqm_name(const AqmConfig& cfg) {
    struct {
        std::string_view operator()(const PiConfig&) const { return "pi"; }
        std::string_view operator()(const RemConfig&) const { return "rem"; }
        std::string_view operator()(const RaqConfig&) const { return "raq"; }
    } v;
    return std::visit(v, cfg);
}

inline void validate(const AqmConfig& cfg) {
    std::visit(
        [](const auto& c) {
            using C = std::decay_t<decltype(c)>;
            if (!(c.T > 0.0)) throw std::invalid_argument("aqm sampling period T must be > 0");
            if constexpr (std::is_same_v<C, PiConfig>) {
                if (c.a < 0.0 || c.b < 0.0) throw std::invalid_argument("pi gains must be >= 0");
            } else if constexpr (std::is_same_v<C, RemConfig>) {
                if (!(c.phi > 1.0)) throw std::invalid_argument("rem phi must be > 1");
                if (c.gamma < 0.0 || c.alpha < 0.0) throw std::invalid_argument("rem gains must be >= 0");
            } else {
                if (c.q_kp < 0.0 || c.q_ki < 0.0 || c.r_kp < 0.0)
                    throw std::invalid_argument("raq gains must be >= 0");
            }
        },
        cfg);
}

/**
 * @brief Controller memory carried between sampling instants.
 *
 * `aux` is the previous queue sample for PI, the link price for REM and the
 * previous normalised queue error for RaQ.
 */
struct AqmState {
    double p   = 0.0;
    double aux = 0.0;
};

/// How controller outputs are bounded.
enum class OutputBound {
    Probability,  ///< clamp to [0, 1]
    NonNegative   ///< clamp below at 0 only (untruncated MGT comparison runs)
};

namespace detail {
inline double bound(double p, OutputBound mode) {
    return mode == OutputBound::Probability ? std::clamp(p, 0.0, 1.0) : std::max(p, 0.0);
}
}  // namespace detail

inline double pi_update(AqmState& state, double q, const NetworkParams& params, const PiConfig& cfg,
                        OutputBound mode = OutputBound::Probability) {
    const double raw = state.p + cfg.a * (q - params.q_ref) - cfg.b * (state.aux - params.q_ref);
    state.p   = detail::bound(raw, mode);
    state.aux = q;
    return state.p;
}

/// Price integrates the weighted queue error plus the per-period rate excess.
inline double rem_update(AqmState& state, double q, double lambda, const NetworkParams& params,
                         const RemConfig& cfg) {
    const double excess = cfg.alpha * (q - params.q_ref) + (lambda - params.capacity) * cfg.T;
    state.aux = std::max(0.0, state.aux + cfg.gamma * excess);
    state.p   = 1.0 - std::pow(cfg.phi, -state.aux);
    return state.p;
}

/// Link price that yields marking probability p under REM's exponential law.
[[nodiscard]] inline double rem_price_for(double p, const RemConfig& cfg) {
    if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("rem_price_for: p must be in [0, 1)");
    return -std::log1p(-p) / std::log(cfg.phi);
}

inline double raq_update(AqmState& state, double q, double lambda, const NetworkParams& params,
                         const RaqConfig& cfg, OutputBound mode = OutputBound::Probability) {
    const double e_q  = (q - params.q_ref) / params.q_ref;
    const double e_r  = (lambda - params.capacity) / params.capacity;
    const double raw  = state.p + cfg.q_kp * (e_q - state.aux) + cfg.q_ki * e_q + cfg.r_kp * e_r;
    state.p   = detail::bound(raw, mode);
    state.aux = e_q;
    return state.p;
}

/// Zero-order hold between sampling instants.
[[nodiscard]] inline double hold(const AqmState& state) { return state.p; }

/**
 * @brief A configured controller together with its state.
 *
 * `seed()` places the controller at a known steady state so that an update
 * with q = q_ref and lambda = C leaves p unchanged.
 */
class Controller {
   public:
    Controller(AqmConfig cfg, const NetworkParams& params, OutputBound mode = OutputBound::Probability)
        : cfg_(cfg), params_(params), mode_(mode) {
        validate(cfg_);
        reset(0.0, 0.0);
    }

    /// Initial state: marking probability p0 and last observed queue q0.
    void reset(double p0, double q0) {
        state_.p = p0;
        if (std::holds_alternative<PiConfig>(cfg_)) {
            state_.aux = q0;
        } else if (const auto* rem = std::get_if<RemConfig>(&cfg_)) {
            state_.aux = rem_price_for(std::min(p0, 1.0 - 1e-15), *rem);
            state_.p   = 1.0 - std::pow(rem->phi, -state_.aux);
        } else {
            state_.aux = (q0 - params_.q_ref) / params_.q_ref;
        }
    }

    double update(double q, double lambda) {
        struct {
            Controller& self;
            double q, lambda;
            double operator()(const PiConfig& c) { return pi_update(self.state_, q, self.params_, c, self.mode_); }
            double operator()(const RemConfig& c) { return rem_update(self.state_, q, lambda, self.params_, c); }
            double operator()(const RaqConfig& c) {
                return raq_update(self.state_, q, lambda, self.params_, c, self.mode_);
            }
        } v{*this, q, lambda};
        return std::visit(v, cfg_);
    }

    [[nodiscard]] double probability() const { return hold(state_); }
    [[nodiscard]] const AqmState& state() const { return state_; }
    [[nodiscard]] double period() const { return sampling_period(cfg_); }
    [[nodiscard]] const AqmConfig& config() const { return cfg_; }

    /// Capacity or target changes (e.g. a schedule event) are picked up here.
    void set_params(const NetworkParams& params) { params_ = params; }

   private:
    AqmConfig cfg_;
    NetworkParams params_;
    OutputBound mode_;
    AqmState state_;
};

}  // namespace aqmflow
