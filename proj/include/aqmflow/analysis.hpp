#pragma once

/**
 * @file analysis.hpp
 * @brief Steady-state (operating point) analysis of the fluid models.
 *
 * At the operating point the queue sits at the AQM target q0 = q_ref, the
 * round trip is R0 = T_p + q0/C and the aggregate window balances the link:
 * W_s0 = R0 C with ECN, or R0 C / (1 - p0) when marked packets are dropped.
 * The marking probability follows from setting the window derivative to zero.
 */

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string_view>

#include "core.hpp"

namespace aqmflow {

enum class CongestionLevel { Mild, MildModerate, Moderate, ModerateSevere, Severe };

[[nodiscard]] constexpr std::string_view to_string(CongestionLevel level) {
    switch (level) {
        case CongestionLevel::Mild: return "Mild";
        case CongestionLevel::MildModerate: return "Mild/Moderate";
        case CongestionLevel::Moderate: return "Moderate";
        case CongestionLevel::ModerateSevere: return "Moderate/Severe";
        case CongestionLevel::Severe: return "Severe";
    }
    return "?";
}

/// Half-width of the band around w = 1 and w = 2 reported as a boundary case.
inline constexpr double kBoundaryBand = 0.15;

/**
 * @brief Congestion level from the average per-session window.
 *
 * Mild above 2 packets, severe below 1, moderate in between. Values within
 * kBoundaryBand of either threshold are reported as the boundary level.
 */
[[nodiscard]] inline CongestionLevel classify_congestion(double w_bar, double band = kBoundaryBand) {
    if (!(w_bar > 0.0)) throw std::invalid_argument("classify_congestion: w_bar must be > 0");
    if (std::abs(w_bar - 2.0) <= band) return CongestionLevel::MildModerate;
    if (std::abs(w_bar - 1.0) <= band) return CongestionLevel::ModerateSevere;
    if (w_bar > 2.0) return CongestionLevel::Mild;
    if (w_bar < 1.0) return CongestionLevel::Severe;
    return CongestionLevel::Moderate;
}

struct OperatingPoint {
    double ws0   = 0.0;
    double q0    = 0.0;
    double p0    = 0.0;
    double r0    = 0.0;
    double w_bar = 0.0;
    CongestionLevel level = CongestionLevel::Mild;
    /// Set when the model's p0 exceeds 1 (simplified MGT under heavy load).
    bool needs_truncation = false;
};

/// Steady-state marking probability of a bounding scenario for a given W_s0.
[[nodiscard]] inline double scenario_p0(ModelKind kind, double n_flows, double rho, double ws0) {
    switch (kind) {
        case ModelKind::ScenarioA: return 2.0 * n_flows / (2.0 * n_flows + rho * ws0);
        case ModelKind::ScenarioB: {
            const double two_n2 = 2.0 * n_flows * n_flows;
            return two_n2 / (two_n2 + rho * ws0 * ws0);
        }
        default: break;
    }
    throw std::invalid_argument("scenario_p0: model must be Scenario A or B");
}

/// Simplified MGT steady state, 2N^2 / (R0 C)^2; may exceed 1.
[[nodiscard]] inline double mgt_p0(double n_flows, double r0, double capacity) {
    const double rc = r0 * capacity;
    return 2.0 * n_flows * n_flows / (rc * rc);
}

namespace detail {
inline OperatingPoint finish(double ws0, double p0, const NetworkParams& params) {
    OperatingPoint op;
    op.q0    = params.q_ref;
    op.r0    = rtt(params.q_ref, params);
    op.ws0   = ws0;
    op.p0    = p0;
    op.w_bar = ws0 / params.n_flows;
    op.level = classify_congestion(op.w_bar);
    op.needs_truncation = p0 > 1.0;
    return op;
}
}  // namespace detail

/**
 * Residual of the ECN-off fixed point: zero when p0 is consistent with the
 * window R0 C / (1 - p0) it produces. Strictly increasing in p0 on [0, 1).
 */
[[nodiscard]] inline double ecn_off_residual(double p0, const NetworkParams& params, const ModelSpec& model) {
    const double r0  = rtt(params.q_ref, params);
    const double ws0 = r0 * params.capacity / (1.0 - p0);
    return p0 - scenario_p0(model.kind, params.n_flows, model.rho, ws0);
}

/// ECN-off operating point of Scenario A or B, by bisection on p0.
[[nodiscard]] inline OperatingPoint operating_point_ecn_off(const NetworkParams& params, const ModelSpec& model) {
    params.validate();
    if (!is_scenario(model.kind)) throw std::invalid_argument("ECN-off operating point needs Scenario A or B");
    if (!(model.rho > 0.0)) throw std::invalid_argument("rho must be > 0");

    double lo = 0.0;
    double hi = 1.0;
    if (!(ecn_off_residual(lo, params, model) < 0.0))
        throw SolverError("ECN-off operating point: residual not negative at p0 = 0");
    // The residual tends to 1 as p0 -> 1 for any positive rho, so [0, 1) brackets the root.
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (ecn_off_residual(mid, params, model) < 0.0 ? lo : hi) = mid;
    }
    const double p0 = (hi < 1.0 && std::abs(ecn_off_residual(hi, params, model)) <
                                       std::abs(ecn_off_residual(lo, params, model)))
                          ? hi
                          : lo;
    if (!(std::abs(ecn_off_residual(p0, params, model)) < 1e-12))
        throw SolverError("ECN-off operating point: bisection did not reach residual 1e-12");
    const double r0 = rtt(params.q_ref, params);
    return detail::finish(r0 * params.capacity / (1.0 - p0), p0, params);
}

/**
 * @brief Operating point of a model at q0 = q_ref.
 *
 * Scenario models with ECN off are solved numerically; the simplified MGT
 * model has no drop term and always uses W_s0 = R0 C.
 */
[[nodiscard]] inline OperatingPoint operating_point(const NetworkParams& params, const ModelSpec& model) {
    params.validate();
    if (is_scenario(model.kind) && !params.ecn_on) return operating_point_ecn_off(params, model);
    const double r0  = rtt(params.q_ref, params);
    const double ws0 = r0 * params.capacity;
    const double p0  = is_scenario(model.kind) ? scenario_p0(model.kind, params.n_flows, model.rho, ws0)
                                               : mgt_p0(params.n_flows, r0, params.capacity);
    return detail::finish(ws0, p0, params);
}

/// Inverts the scenario p0 formula: the rho that reproduces a measured p0.
[[nodiscard]] inline double rho_from_p0(double p0_measured, const NetworkParams& params, ModelKind scenario,
                                        bool ecn_on) {
    if (!(p0_measured > 0.0 && p0_measured < 1.0)) throw std::invalid_argument("rho_from_p0: p0 must be in (0, 1)");
    const double r0  = rtt(params.q_ref, params);
    const double ws0 = ecn_on ? r0 * params.capacity : r0 * params.capacity / (1.0 - p0_measured);
    const double n   = params.n_flows;
    const double odds = (1.0 - p0_measured) / p0_measured;
    switch (scenario) {
        case ModelKind::ScenarioA: return 2.0 * n * odds / ws0;
        case ModelKind::ScenarioB: return 2.0 * n * n * odds / (ws0 * ws0);
        default: break;
    }
    throw std::invalid_argument("rho_from_p0: scenario must be A or B");
}

/// Scenario A dispersion giving the same p0 as Scenario B with rho_b.
[[nodiscard]] inline double rho_a_from_rho_b(double rho_b, double ws0, double n_flows) {
    if (!(rho_b > 0.0)) throw std::invalid_argument("rho_a_from_rho_b: rho_b must be > 0");
    return ws0 / n_flows * rho_b;
}

}  // namespace aqmflow
