#pragma once

#include <optional>
#include <utility>

#include "pwmstab/model.hpp"
#include "pwmstab/types.hpp"

namespace pwmstab {

/// T-periodic steady state of the switched system: initial state, switching
/// instant, and the one-sided derivatives at the switch.
struct PeriodicOrbit {
    Vec x0;                 // x(0)
    double switch_time_d = 0.0;
    Vec x_at_d;             // x(d)
    Vec deriv_minus;        // xdot(d-), on-stage field at x(d)
    Vec deriv_plus;         // xdot(d+), off-stage field at x(d)
    double residual_norm = 0.0; // scaled infinity norm of the shooting residual
};

struct OrbitOptions {
    double tol = 1e-10;      // shooting residual tolerance (scaled units)
    int max_iter = 60;
    double transversality_eps = 1e-9;
    int crossing_samples = 256; // first-crossing validation grid on (0, d)
};

/// Averaged-model starting point: duty ratio from matching the sensed peak
/// against the threshold on a coarse duty grid, state from the blended
/// equilibrium shifted to the valley.
struct OrbitGuess {
    Vec x0;
    double switch_time_d;
};

OrbitGuess averaged_guess(const PiecewiseAffineModel& model,
                          const SwitchingRule& rule);

/// Solves the two shooting residuals
///   R1 = flow_off(T-d, flow_on(d, x0)) - x0          (periodicity)
///   R2 = F flow_on(d, x0) - (i_c - m_c d)            (switching)
/// jointly in (x0, d) by damped Newton on normalized unknowns.
///
/// Throws OrbitNotFoundError when Newton fails from every seed,
/// TransversalityError for a degenerate switch, and MultiPulseError when the
/// on-stage trajectory reaches the threshold before d.
PeriodicOrbit find_periodic_orbit(const PiecewiseAffineModel& model,
                                  const SwitchingRule& rule,
                                  std::optional<OrbitGuess> guess = {},
                                  const OrbitOptions& opts = {});

/// Sensed-signal slopes at the steady state. Instantaneous values are taken
/// exactly at the switching instant; the linear-approximation values are the
/// chordal slopes over each stage.
struct OrbitSlopes {
    double m1_inst; //  F xdot(d-)
    double m2_inst; // -F xdot(d+)
    double m1_lin;  //  (F x(d) - F x(0)) / d
    double m2_lin;  //  (F x(d) - F x(T)) / (T - d)
};

OrbitSlopes orbit_slopes(const PeriodicOrbit& orbit,
                         const PiecewiseAffineModel& model,
                         const SwitchingRule& rule);

} // namespace pwmstab
