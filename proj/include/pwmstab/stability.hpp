#pragma once

#include "pwmstab/model.hpp"
#include "pwmstab/orbit.hpp"
#include "pwmstab/simulator.hpp"
#include "pwmstab/types.hpp"

namespace pwmstab {

/// Rank-one correction to the cycle Jacobian for the state-dependent
/// switching time:
///   S = I - (xdot(d-) - xdot(d+)) F / (F xdot(d-) + m_c).
/// Its determinant collapses to (F xdot(d+) + m_c) / (F xdot(d-) + m_c).
struct SaltationMatrix {
    Mat matrix;
    double denominator = 0.0; // F xdot(d-) + m_c, A/s
    Vec jump;                 // xdot(d-) - xdot(d+)
};

SaltationMatrix saltation_matrix(const PeriodicOrbit& orbit,
                                 const PiecewiseAffineModel& model,
                                 const SwitchingRule& rule);

/// Cycle-to-cycle Jacobian of the sampled dynamics about the orbit:
///   Phi_o = e^{A2 (T-d)} * S * e^{A1 d}.
Mat compute_jacobian(const PeriodicOrbit& orbit,
                     const PiecewiseAffineModel& model,
                     const SwitchingRule& rule);

/// Sampled input and control gains of the linearized cycle map, by central
/// differences of the exact cycle map against source voltage and current
/// command at the fixed point.
struct SampledGains {
    Vec gamma_v; // d(end state)/d(v_s)
    Vec gamma_c; // d(end state)/d(i_c)
};

SampledGains sampled_gains(const PeriodicOrbit& orbit,
                           const PiecewiseAffineModel& model,
                           const SwitchingRule& rule,
                           const SimOptions& opts = {});

enum class Verdict { stable, unstable, marginal };

const char* to_string(Verdict v);

/// Exact sampled-data test: stable iff every eigenvalue of Phi_o lies inside
/// the unit circle (with a small classification margin around |lambda| = 1).
struct ExactStability {
    Verdict verdict = Verdict::marginal;
    double spectral_radius = 0.0;
    ComplexVec eigenvalues;
};

ExactStability exact_stability(const Mat& phi_o, double eps_margin = 1e-8);

/// Necessary condition for open-loop orbital stability:
///   |(F xdot(d+) + m_c) / (F xdot(d-) + m_c)| <= e^{tr[A2-A1] d - tr[A2] T}.
/// Both sides are compared in log space so large trace exponents cannot
/// overflow the test.
struct NecessaryCondition {
    double lhs = 0.0;
    double rhs = 0.0;
    double log_lhs = 0.0;
    double log_rhs = 0.0;
    bool holds = false;
};

NecessaryCondition necessary_condition(const PeriodicOrbit& orbit,
                                       const PiecewiseAffineModel& model,
                                       const SwitchingRule& rule);

enum class SlopeVariant { instantaneous, linear };

/// Classical slope criterion |(-m2 + m_c) / (m1 + m_c)| < 1, with either the
/// instantaneous slopes at the switching instant or the chordal
/// linear-approximation slopes.
struct SlopeCriterion {
    double ratio = 0.0;
    bool holds = false;
};

SlopeCriterion slope_criterion(const PeriodicOrbit& orbit,
                               const PiecewiseAffineModel& model,
                               const SwitchingRule& rule, SlopeVariant variant);

/// Everything the three criteria produce for one configuration.
struct StabilityReport {
    Mat phi_o;
    ComplexVec eigenvalues;
    double spectral_radius = 0.0;
    double det_phi = 0.0;
    double nc_lhs = 0.0;
    double nc_rhs = 0.0;
    double nc_log_margin = 0.0; // log rhs - log lhs, > 0 when satisfied
    bool nc_holds = false;
    double slope_ratio_inst = 0.0;
    double slope_ratio_lin = 0.0;
    bool slope_holds_inst = false;
    bool slope_holds_lin = false;
    Verdict verdict_exact = Verdict::marginal;
    Vec gamma_v;
    Vec gamma_c;
};

/// Assembles the full report for a solved orbit. Sampled gains come from the
/// simulator and are the slow part; with_gains = false skips them for sweeps.
StabilityReport build_report(const PeriodicOrbit& orbit,
                             const PiecewiseAffineModel& model,
                             const SwitchingRule& rule, bool with_gains = true,
                             const SimOptions& opts = {});

} // namespace pwmstab
