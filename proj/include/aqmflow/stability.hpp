#pragma once

/**
 * @file stability.hpp
 * @brief Small-signal stability of a bounding scenario under PI control.
 *
 * The window law is linearised at the operating point in the current window,
 * the delayed window, the delayed marking probability and the delayed queue.
 * Closing the loop through the linearised queue, a PI controller
 * k_p + k_i/s and a first-order lag 1/(1 + s R0) for the round-trip delay
 * yields a monic quartic
 *
 *     s^4 + a1 s^3 + a2 s^2 + a3 s + a4 = 0
 *
 * whose roots all lie in the open left half plane iff a1 > 0, b1 > 0, b2 > 0
 * and a4 > 0, with b1 = a1 a2 - a3 and b2 = a3 b1 - a1^2 a4.
 */

#include <array>
#include <stdexcept>

#include "analysis.hpp"
#include "aqm.hpp"
#include "core.hpp"

namespace aqmflow {

/// Partial derivatives of the window derivative at the operating point.
struct Linearization {
    double d_ws  = 0.0;  ///< w.r.t. current aggregate window, 1/s
    double d_wsr = 0.0;  ///< w.r.t. delayed aggregate window, 1/s
    double d_pr  = 0.0;  ///< w.r.t. delayed marking probability, packets/s
    double d_qr  = 0.0;  ///< w.r.t. delayed queue, 1/s
};

struct PiGains {
    double k_p = 0.0;
    double k_i = 0.0;
};

/// Transfer-form gains of the incremental PI law p += a e(k) - b e(k-1):
/// k_p = b, k_i = a - b.
[[nodiscard]] inline PiGains pi_gains(const PiConfig& cfg) { return {cfg.b, cfg.a - cfg.b}; }

struct StabilityReport {
    std::array<double, 4> alpha{};
    double beta1 = 0.0;
    double beta2 = 0.0;
    bool stable  = false;
};

[[nodiscard]] inline Linearization linearize(const OperatingPoint& op, double rho, const NetworkParams& params,
                                             ModelKind scenario) {
    if (!(op.p0 > 0.0 && op.p0 < 1.0)) throw std::invalid_argument("linearize: p0 must be in (0, 1)");
    const double n   = params.n_flows;
    const double c   = params.capacity;
    const double r0  = op.r0;
    const double ws0 = op.ws0;
    const double p0  = op.p0;
    // Shared marking-decrement term rho W_s0 p0 / (2 N R0).
    const double decrement = rho * ws0 * p0 / (2.0 * n * r0);

    Linearization lin;
    switch (scenario) {
        case ModelKind::ScenarioA:
            lin.d_ws  = -decrement;
            lin.d_wsr = (1.0 - p0) / r0 - decrement;
            lin.d_pr  = -ws0 / r0 - rho * ws0 * ws0 / (2.0 * n * r0);
            lin.d_qr  = -ws0 * (1.0 - p0) / (r0 * r0 * c) + rho * ws0 * ws0 * p0 / (2.0 * n * r0 * r0 * c);
            break;
        case ModelKind::ScenarioB: {
            const double growth = n * (1.0 - p0) / (r0 * ws0);
            lin.d_ws  = -growth - decrement;
            lin.d_wsr = growth - decrement;
            lin.d_pr  = -n / r0 - rho * ws0 * ws0 / (2.0 * n * r0);
            lin.d_qr  = -n * (1.0 - p0) / (r0 * r0 * c) + rho * ws0 * ws0 * p0 / (2.0 * n * r0 * r0 * c);
            break;
        }
        default: throw std::invalid_argument("linearize: scenario must be A or B");
    }
    return lin;
}

/// Coefficients a1..a4 of the closed-loop characteristic quartic.
[[nodiscard]] inline std::array<double, 4> characteristic_coeffs(const Linearization& lin, const OperatingPoint& op,
                                                                 const NetworkParams& params, PiGains gains) {
    if (!(gains.k_i > 0.0)) throw std::invalid_argument("characteristic_coeffs: k_i must be > 0");
    const double r  = op.r0;
    const double r2 = r * r;
    const double r3 = r2 * r;
    const double c  = params.capacity;
    const double w  = op.ws0;

    const double a1 = 1.0 / r - lin.d_ws + w / (r2 * c);
    const double a2 = -(lin.d_ws + lin.d_wsr) / r + w * (1.0 - lin.d_ws * r) / (r3 * c);
    const double a3 = -w * (lin.d_ws + lin.d_wsr) / (r3 * c) - (lin.d_qr + lin.d_pr * gains.k_p) / r2;
    const double a4 = -lin.d_pr * gains.k_i / r2;
    return {a1, a2, a3, a4};
}

[[nodiscard]] inline StabilityReport routh_check(const std::array<double, 4>& alpha) {
    const auto [a1, a2, a3, a4] = alpha;
    StabilityReport rep;
    rep.alpha  = alpha;
    rep.beta1  = a1 * a2 - a3;
    rep.beta2  = a3 * rep.beta1 - a1 * a1 * a4;
    rep.stable = a1 > 0.0 && rep.beta1 > 0.0 && rep.beta2 > 0.0 && a4 > 0.0;
    return rep;
}

/// Linearise, build the quartic and apply the Routh conditions in one call.
[[nodiscard]] inline StabilityReport analyze_stability(const NetworkParams& params, const ModelSpec& model,
                                                       const OperatingPoint& op, PiGains gains) {
    const auto lin = linearize(op, model.rho, params, model.kind);
    return routh_check(characteristic_coeffs(lin, op, params, gains));
}

}  // namespace aqmflow
