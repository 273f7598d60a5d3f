#pragma once

#include <optional>
#include <vector>

#include "pwmstab/model.hpp"
#include "pwmstab/numerics.hpp"
#include "pwmstab/orbit.hpp"

namespace pwmstab {

/// One switching cycle of the exact switched system.
struct CycleResult {
    Vec end_state;                    // x at T (start of the next cycle)
    std::vector<double> switch_times; // upward threshold crossings in [0, T)
    int pulse_count = 0;              // == switch_times.size()
    bool saturated = false;           // no crossing: switch stayed on all cycle
};

/// Per-cycle perturbations of the source voltage and the current command.
struct CycleOverrides {
    std::optional<double> v_s;
    std::optional<double> i_c;
};

struct SimOptions {
    int scan_samples = 512;       // uniform prescan for event bracketing
    double event_tol_rel = 1e-12; // bisection bracket width, relative to T
};

/// Integrates cycles of the switched system with exact affine flows inside
/// each stage; the only numerical error is event location. Propagators for
/// the uniform prescan grid are cached across cycles.
class CycleSimulator {
public:
    CycleSimulator(PiecewiseAffineModel model, SwitchingRule rule,
                   SimOptions opts = {});

    CycleResult run_cycle(const Vec& x_in,
                          const CycleOverrides& overrides = {}) const;

    /// States of the latched trajectory at t = j*T/n_points, j = 0..n_points-1,
    /// plus the cycle result. Used for waveform dumps.
    std::pair<std::vector<Vec>, CycleResult>
    sample_cycle(const Vec& x_in, int n_points,
                 const CycleOverrides& overrides = {}) const;

    const PiecewiseAffineModel& model() const { return model_; }
    const SwitchingRule& rule() const { return rule_; }
    const SimOptions& options() const { return opts_; }

private:
    PiecewiseAffineModel model_;
    SwitchingRule rule_;
    SimOptions opts_;
    AffinePropagator on_step_; // over T / scan_samples
    AffinePropagator on_full_; // over T
};

/// One-shot convenience wrapper around CycleSimulator.
CycleResult exact_cycle_map(const PiecewiseAffineModel& model,
                            const SwitchingRule& rule, const Vec& x_in,
                            const CycleOverrides& overrides = {},
                            const SimOptions& opts = {});

/// Empirical orbital-stability measurement from iterating the cycle map on a
/// perturbed start.
struct StabilityProbe {
    enum class Verdict { decaying, growing, period2, inconclusive };
    std::vector<double> contraction_ratios; // per-cycle ||d_{n+1}|| / ||d_n||
    Verdict verdict = Verdict::inconclusive;
    double measured_rate = 0.0; // geometric-mean contraction per cycle
};

const char* to_string(StabilityProbe::Verdict v);

StabilityProbe probe_orbital_stability(const PiecewiseAffineModel& model,
                                       const SwitchingRule& rule,
                                       const PeriodicOrbit& orbit,
                                       double perturbation_size = 1e-5,
                                       int n_cycles = 60,
                                       const SimOptions& opts = {});

/// Central-difference Jacobian of the exact cycle map at the orbit's fixed
/// point, step max(1e-6, 1e-6 |x_i|). Throws ProbeSaturatedError if any
/// probe cycle saturates.
Mat finite_difference_jacobian(const PiecewiseAffineModel& model,
                               const SwitchingRule& rule,
                               const PeriodicOrbit& orbit,
                               double step_abs = 1e-6, double step_rel = 1e-6,
                               const SimOptions& opts = {});

/// One grid point of a brute-force bifurcation scan.
struct ScanPoint {
    double param_value = 0.0;
    std::vector<Vec> samples; // post-settle sampled states x(nT)
    bool any_saturated = false;
};

struct ScanOptions {
    int settle_cycles = 300;
    int record_cycles = 64;
    SimOptions sim;
};

/// Settles each grid point from the averaged-model start and records sampled
/// states; period-1 shows one accumulation point, period-2 shows two.
std::vector<ScanPoint> bifurcation_scan(const ConverterParams& params,
                                        const SwitchingRule& rule,
                                        SweepParam which,
                                        const std::vector<double>& grid,
                                        const ScanOptions& opts = {});

/// Accumulation-point count in a sampled-state sequence: 1 (period-1),
/// 2 (period-2), or 3 meaning more/irregular.
int count_branches(const std::vector<Vec>& samples);

} // namespace pwmstab
