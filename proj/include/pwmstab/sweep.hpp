#pragma once

#include <string>
#include <vector>

#include "pwmstab/config.hpp"
#include "pwmstab/stability.hpp"

namespace pwmstab {

/// One evaluated grid point. A point whose orbit solve fails still produces
/// a row; status carries the failure category and the numeric columns are
/// NaN.
struct SweepRow {
    double value = 0.0;
    std::string status = "ok"; // ok | orbit_failed | degenerate | multi_pulse
    double switch_time_d = 0.0;
    double duty = 0.0;
    double spectral_radius = 0.0;
    double det_phi = 0.0;
    double nc_lhs = 0.0;
    double nc_rhs = 0.0;
    double nc_log_margin = 0.0;
    bool nc_holds = false;
    double slope_ratio_inst = 0.0;
    bool slope_holds_inst = false;
    double slope_ratio_lin = 0.0;
    bool slope_holds_lin = false;
    std::string verdict_exact;
    std::string sim_verdict;
    double sim_rate = 0.0;
};

struct SweepBoundary {
    std::string criterion; // exact_radius_1 | nc_equality | slope_inst_1 | slope_lin_1
    bool found = false;
    double value = 0.0;
};

struct SweepOutcome {
    std::vector<SweepRow> rows;           // one per grid point, sorted
    std::vector<SweepBoundary> boundaries; // fixed criterion order
};

/// Evaluates every grid point of the config's sweep section (worker pool,
/// order-preserving) and bisects the first crossing of each criterion's
/// margin. Requires cfg.sweep.
SweepOutcome run_sweep(const RunConfig& cfg, int n_threads = 0);

/// The uniform grid the sweep section describes.
std::vector<double> sweep_grid(const SweepConfig& sw);

} // namespace pwmstab
