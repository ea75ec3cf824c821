#pragma once

/**
 * @file core.hpp
 * @brief Shared domain types and kinematics for the aqmflow fluid models.
 *
 * Every rate and length inside the library is expressed in packets and
 * seconds. Megabits per second only appear at configuration boundaries and
 * are converted with mbps_to_pps().
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aqmflow {

/// Raised for malformed or inconsistent configuration input.
class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Raised when a numerical solver cannot produce a result.
class SolverError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/**
 * @brief Link and flow-population constants of a single bottleneck.
 */
struct NetworkParams {
    double n_flows        = 500.0;     ///< N, number of TCP sessions
    double capacity       = 5625.0;    ///< C, packets/s
    double prop_delay     = 0.1;       ///< T_p, seconds
    double buffer         = 1125.0;    ///< B, packets
    double q_ref          = 500.0;     ///< AQM target queue, packets
    bool ecn_on           = true;
    double mean_pkt_bytes = 1000.0;

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const {
        if (!(n_flows >= 1.0)) throw std::invalid_argument("n_flows must be >= 1");
        if (!(capacity > 0.0)) throw std::invalid_argument("capacity must be > 0");
        if (!(prop_delay > 0.0)) throw std::invalid_argument("prop_delay must be > 0");
        if (!(q_ref > 0.0 && q_ref <= buffer)) throw std::invalid_argument("q_ref must satisfy 0 < q_ref <= buffer");
        if (!(mean_pkt_bytes > 0.0)) throw std::invalid_argument("mean_pkt_bytes must be > 0");
    }
};

enum class ModelKind { ScenarioA, ScenarioB, MgtTruncated, MgtUntruncated };

[[nodiscard]] constexpr std::string_view to_string(ModelKind k) {
    switch (k) {
        case ModelKind::ScenarioA: return "scenario-a";
        case ModelKind::ScenarioB: return "scenario-b";
        case ModelKind::MgtTruncated: return "mgt";
        case ModelKind::MgtUntruncated: return "mgt-untruncated";
    }
    return "?";
}

/// Parses the names produced by to_string(ModelKind); also accepts "a"/"b".
[[nodiscard]] inline ModelKind parse_model_kind(std::string_view s) {
    if (s == "scenario-a" || s == "a") return ModelKind::ScenarioA;
    if (s == "scenario-b" || s == "b") return ModelKind::ScenarioB;
    if (s == "mgt" || s == "mgt-truncated") return ModelKind::MgtTruncated;
    if (s == "mgt-untruncated") return ModelKind::MgtUntruncated;
    throw std::invalid_argument("unknown model kind '" + std::string(s) + "'");
}

[[nodiscard]] constexpr bool is_scenario(ModelKind k) {
    return k == ModelKind::ScenarioA || k == ModelKind::ScenarioB;
}

struct ModelSpec {
    ModelKind kind = ModelKind::ScenarioB;
    double rho     = 1.0;  ///< window-decrement dispersion, only read by the scenario models

    void validate(const NetworkParams& params) const {
        if (is_scenario(kind) && !(rho >= 1.0 && rho <= params.n_flows))
            throw std::invalid_argument("rho must satisfy 1 <= rho <= n_flows");
    }
};

/// Round-trip time seen by a packet arriving to a queue of length q.
[[nodiscard]] inline double rtt(double q, const NetworkParams& params) {
    return params.prop_delay + q / params.capacity;
}

/// Aggregate sending rate of windows totalling ws over round-trip r.
[[nodiscard]] inline double arrival_rate(double ws, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("arrival_rate: round-trip time must be > 0");
    return ws / r;
}

[[nodiscard]] constexpr double mbps_to_pps(double mbps, double pkt_bytes) {
    return mbps * 1e6 / (8.0 * pkt_bytes);
}

[[nodiscard]] constexpr double pps_to_mbps(double pps, double pkt_bytes) {
    return pps * 8.0 * pkt_bytes / 1e6;
}

/// One history entry of the coupled window/queue/marking system.
struct Sample {
    double ws = 0.0;
    double q  = 0.0;
    double p  = 0.0;
    double r  = 0.0;
};

/**
 * @brief Fixed-capacity delay line holding the most recent samples.
 *
 * Samples are pushed once per integration step; `lagged(n)` returns the
 * entry pushed n steps before the newest one. Lags beyond what has been
 * pushed resolve to the oldest retained entry, which after prefill() is the
 * initial condition.
 */
template <typename T>
class DelayLine {
   public:
    explicit DelayLine(std::size_t capacity) : buf_(capacity == 0 ? 1 : capacity) {}

    void prefill(const T& value) {
        std::fill(buf_.begin(), buf_.end(), value);
        head_  = 0;
        count_ = buf_.size();
    }

    void push(const T& value) {
        head_       = (head_ + 1) % buf_.size();
        buf_[head_] = value;
        if (count_ < buf_.size()) ++count_;
    }

    [[nodiscard]] const T& newest() const { return buf_[head_]; }

    [[nodiscard]] const T& lagged(std::size_t n) const {
        if (count_ == 0) throw std::logic_error("DelayLine: empty");
        if (n >= count_) n = count_ - 1;
        return buf_[(head_ + buf_.size() - n) % buf_.size()];
    }

    [[nodiscard]] std::size_t capacity() const { return buf_.size(); }
    [[nodiscard]] std::size_t size() const { return count_; }

   private:
    std::vector<T> buf_;
    std::size_t head_  = 0;
    std::size_t count_ = 0;
};

/// Smallest history able to serve the largest lag floor(R/dt) with R <= T_p + B/C.
[[nodiscard]] inline std::size_t required_history(const NetworkParams& params, double dt) {
    const double max_rtt = params.prop_delay + params.buffer / params.capacity;
    return static_cast<std::size_t>(std::floor(max_rtt / dt)) + 1;
}

}  // namespace aqmflow
