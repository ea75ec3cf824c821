#pragma once

/**
 * @file models.hpp
 * @brief Discrete-time fluid models of the aggregate TCP window and the
 *        bottleneck queue, and the coupled simulation loop.
 *
 * Two bounding scenarios describe the sum of all congestion windows W_s:
 *
 *  - Scenario A: every session grows its window by one packet per unmarked
 *    ACK (slow start).
 *  - Scenario B: every session grows by one packet per round trip
 *    (congestion avoidance).
 *
 * In both, a marked packet halves its session's window; the aggregate
 * decrement carries a dispersion factor rho in [1, N]. The simplified MGT
 * model is provided as a per-session baseline.
 *
 * The discrete update is evaluated on a delay line: W_s(j+1) = W_s(j) +
 * f(W_s(j), W_s(j-n), p(j-n), R(j-n)) dt with n = floor(R(j)/dt).
 */

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <stdexcept>
#include <vector>

#include "aqm.hpp"
#include "core.hpp"

namespace aqmflow {

/// Current and round-trip-delayed state consumed by one window update.
struct StepInput {
    double ws_now     = 0.0;
    double ws_delayed = 0.0;
    double p_delayed  = 0.0;
    double q_delayed  = 0.0;
    double r_delayed  = 0.0;
    double dt         = 0.0;
};

namespace detail {

inline void require_positive_rtt(double r) {
    if (!(r > 0.0)) throw std::invalid_argument("delayed round-trip time must be > 0");
}

inline double scenario_a_rate(const StepInput& in, double n, double rho) {
    require_positive_rtt(in.r_delayed);
    const double arrivals = in.ws_delayed / in.r_delayed;
    return arrivals * (1.0 - in.p_delayed) - rho * in.ws_now * arrivals / (2.0 * n) * in.p_delayed;
}

inline double scenario_b_rate(const StepInput& in, double n, double rho) {
    require_positive_rtt(in.r_delayed);
    if (!(in.ws_now > 0.0)) throw std::invalid_argument("scenario B requires ws_now > 0");
    const double arrivals = in.ws_delayed / in.r_delayed;
    return n * arrivals / in.ws_now * (1.0 - in.p_delayed) -
           rho * in.ws_now * arrivals / (2.0 * n) * in.p_delayed;
}

// Per-session window derivative of the simplified MGT model.
inline double mgt_session_rate(const StepInput& in, double n, bool truncate) {
    require_positive_rtt(in.r_delayed);
    const double w_now     = in.ws_now / n;
    const double w_delayed = in.ws_delayed / n;
    const double p         = truncate ? std::clamp(in.p_delayed, 0.0, 1.0) : in.p_delayed;
    return 1.0 / in.r_delayed - w_delayed * w_now / (2.0 * in.r_delayed) * p;
}

}  // namespace detail

/// Instantaneous derivative of the aggregate window, packets/s.
[[nodiscard]] inline double continuous_rhs(const StepInput& in, const NetworkParams& params, const ModelSpec& model) {
    switch (model.kind) {
        case ModelKind::ScenarioA: return detail::scenario_a_rate(in, params.n_flows, model.rho);
        case ModelKind::ScenarioB: return detail::scenario_b_rate(in, params.n_flows, model.rho);
        case ModelKind::MgtTruncated: return params.n_flows * detail::mgt_session_rate(in, params.n_flows, true);
        case ModelKind::MgtUntruncated:
            return params.n_flows * detail::mgt_session_rate(in, params.n_flows, false);
    }
    return 0.0;
}

[[nodiscard]] inline double step_scenario_a(const StepInput& in, const NetworkParams& params, double rho) {
    return detail::scenario_a_rate(in, params.n_flows, rho) * in.dt;
}

[[nodiscard]] inline double step_scenario_b(const StepInput& in, const NetworkParams& params, double rho) {
    return detail::scenario_b_rate(in, params.n_flows, rho) * in.dt;
}

/// Per-session window increment; multiply by N for the aggregate.
[[nodiscard]] inline double step_mgt(const StepInput& in, const NetworkParams& params, bool truncate) {
    return detail::mgt_session_rate(in, params.n_flows, truncate) * in.dt;
}

/// Aggregate window increment for any model kind.
[[nodiscard]] inline double step_window(const StepInput& in, const NetworkParams& params, const ModelSpec& model) {
    switch (model.kind) {
        case ModelKind::ScenarioA: return step_scenario_a(in, params, model.rho);
        case ModelKind::ScenarioB: return step_scenario_b(in, params, model.rho);
        case ModelKind::MgtTruncated: return params.n_flows * step_mgt(in, params, true);
        case ModelKind::MgtUntruncated: return params.n_flows * step_mgt(in, params, false);
    }
    return 0.0;
}

/// Queue growth rate; with ECN off, marked packets are dropped before queueing.
[[nodiscard]] inline double queue_rate(double ws, double q, double p, const NetworkParams& params) {
    const double lambda = arrival_rate(ws, rtt(q, params));
    if (params.ecn_on) return lambda - params.capacity;
    return lambda - params.capacity - p * lambda;
}

/// Queue increment over dt, saturated so that q + dq stays within [0, B].
[[nodiscard]] inline double step_queue(double ws, double q, double p, const NetworkParams& params, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_queue: dt must be > 0");
    const double next = std::clamp(q + queue_rate(ws, q, p, params) * dt, 0.0, params.buffer);
    return next - q;
}

/// One emitted sample of a simulation run.
struct Row {
    double t      = 0.0;
    double q      = 0.0;
    double p      = 0.0;
    double ws     = 0.0;
    double r      = 0.0;
    double lambda = 0.0;
};

struct TimeSeries {
    double spacing = 0.0;  ///< seconds between consecutive rows
    std::vector<Row> rows;
};

/// A change in the number of active sessions at a given time.
struct FlowChange {
    double time    = 0.0;
    double delta_n = 0.0;
    std::optional<double> rho;  ///< new dispersion for the changed population
};

/// Everything that determines a run. Two equal configs give identical output.
struct SimConfig {
    NetworkParams params;
    ModelSpec model;
    AqmConfig aqm = PiConfig{};
    double dt       = 0.0005;
    double duration = 100.0;
    std::vector<FlowChange> schedule;
    std::size_t record_every = 1;  ///< emit one row per this many steps

    void validate() const {
        params.validate();
        model.validate(params);
        aqmflow::validate(aqm);
        if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
        if (dt > sampling_period(aqm) * (1.0 + 1e-12))
            throw std::invalid_argument("dt must not exceed the AQM sampling period");
        if (!(duration > 0.0)) throw std::invalid_argument("duration must be > 0");
        if (record_every == 0) throw std::invalid_argument("record_every must be >= 1");
        auto events = schedule;
        std::stable_sort(events.begin(), events.end(),
                         [](const FlowChange& a, const FlowChange& b) { return a.time < b.time; });
        double n = params.n_flows;
        for (const auto& ev : events) {
            if (ev.time < 0.0 || ev.time > duration)
                throw std::invalid_argument("schedule entry outside [0, duration]");
            n += ev.delta_n;
            if (n < 1.0) throw std::invalid_argument("schedule drives n_flows below 1");
        }
    }
};

/// Per-step increments actually applied, after floors and saturation.
struct StepDelta {
    double dws = 0.0;
    double dq  = 0.0;
};

/**
 * @brief Explicit-Euler integrator of one window model coupled to a queue
 *        and an AQM controller.
 *
 * The simulator owns its history and controller; it is single-threaded and
 * deterministic.
 */
class Simulator {
   public:
    /// Windows never fall below this many packets in aggregate.
    static constexpr double kMinWindow = 1.0;

    explicit Simulator(SimConfig cfg)
        : cfg_((cfg.validate(), std::move(cfg))),
          params_(cfg_.params),
          controller_(cfg_.aqm, cfg_.params,
                      cfg_.model.kind == ModelKind::MgtUntruncated ? OutputBound::NonNegative
                                                                   : OutputBound::Probability),
          history_(history_capacity()),
          steps_per_update_(static_cast<std::size_t>(std::max<long long>(1, std::llround(controller_.period() / cfg_.dt)))) {
        for (const auto& ev : cfg_.schedule) pending_.push_back(ev);
        std::stable_sort(pending_.begin(), pending_.end(),
                         [](const FlowChange& a, const FlowChange& b) { return a.time < b.time; });
        seed(Sample{params_.n_flows, 0.0, 0.0, rtt(0.0, params_)});
    }

    /// Restart from a constant history equal to `s`; the controller is placed
    /// at marking probability s.p with its last observed queue s.q.
    void seed(const Sample& s) {
        step_  = 0;
        ws_    = s.ws;
        q_     = s.q;
        p_     = s.p;
        controller_.reset(s.p, s.q);
        p_ = controller_.probability();
        history_.prefill(Sample{ws_, q_, p_, rtt(q_, params_)});
        next_event_ = 0;
        observed_   = false;
    }

    [[nodiscard]] double time() const { return static_cast<double>(step_) * cfg_.dt; }
    [[nodiscard]] const NetworkParams& params() const { return params_; }
    [[nodiscard]] std::size_t steps_per_update() const { return steps_per_update_; }
    [[nodiscard]] const Controller& controller() const { return controller_; }

    [[nodiscard]] Row current() const {
        const double r = rtt(q_, params_);
        return Row{time(), q_, p_, ws_, r, ws_ / r};
    }

    /// Advance one step of length dt; returns the increments applied.
    StepDelta advance() {
        observe();
        return integrate();
    }

    /// Run to the configured duration, emitting every record_every-th row.
    TimeSeries run() {
        const auto total = static_cast<std::size_t>(std::llround(cfg_.duration / cfg_.dt));
        TimeSeries out;
        out.spacing = cfg_.dt * static_cast<double>(cfg_.record_every);
        out.rows.reserve(total / cfg_.record_every + 2);
        for (std::size_t i = 0;; ++i) {
            observe();
            if (i % cfg_.record_every == 0) out.rows.push_back(current());
            if (i == total) break;
            integrate();
        }
        return out;
    }

   private:
    std::size_t history_capacity() const {
        // RTT is bounded by T_p + B/C; ask for one extra slot as headroom.
        return required_history(cfg_.params, cfg_.dt) + 1;
    }

    // MGT carries no ECN-off drop term in its queue equation.
    NetworkParams queue_params() const {
        if (is_scenario(cfg_.model.kind)) return params_;
        NetworkParams p = params_;
        p.ecn_on        = true;
        return p;
    }

    void apply_due_events() {
        while (next_event_ < pending_.size() && pending_[next_event_].time <= time() + 0.5 * cfg_.dt) {
            const double before = params_.n_flows;
            const double after  = before + pending_[next_event_].delta_n;
            // Joining sessions start with one packet; leaving sessions take their
            // average share of the aggregate window with them.
            if (after > before) {
                ws_ += after - before;
            } else {
                ws_ *= after / before;
            }
            ws_               = std::max(ws_, kMinWindow);
            params_.n_flows   = after;
            if (pending_[next_event_].rho) cfg_.model.rho = *pending_[next_event_].rho;
            controller_.set_params(params_);
            ++next_event_;
        }
    }

    // Applies session-count events and, at sampling instants, the AQM update
    // for the current step. Idempotent within a step.
    void observe() {
        if (observed_) return;
        apply_due_events();
        if (step_ > 0 && step_ % steps_per_update_ == 0) p_ = controller_.update(q_, ws_ / rtt(q_, params_));
        if (step_ > 0) history_.push(Sample{ws_, q_, p_, rtt(q_, params_)});
        observed_ = true;
    }

    StepDelta integrate() {
        const double r        = rtt(q_, params_);
        const auto lag        = static_cast<std::size_t>(std::floor(r / cfg_.dt));
        const Sample& delayed = history_.lagged(lag);
        const StepInput in{ws_, delayed.ws, delayed.p, delayed.q, delayed.r, cfg_.dt};

        const double ws_next = std::max(ws_ + step_window(in, params_, cfg_.model), kMinWindow);
        const double dq      = step_queue(ws_, q_, p_, queue_params(), cfg_.dt);
        const StepDelta d{ws_next - ws_, dq};
        ws_ = ws_next;
        q_ += dq;
        ++step_;
        observed_ = false;
        return d;
    }

    SimConfig cfg_;
    NetworkParams params_;
    Controller controller_;
    DelayLine<Sample> history_;
    std::size_t steps_per_update_;
    std::vector<FlowChange> pending_;
    std::size_t next_event_ = 0;
    std::size_t step_       = 0;
    bool observed_          = false;
    double ws_ = 0.0, q_ = 0.0, p_ = 0.0;
};

/// Run a full simulation and return its time series.
[[nodiscard]] inline TimeSeries simulate(const SimConfig& cfg) { return Simulator(cfg).run(); }

}  // namespace aqmflow
