#include "pwmstab/sweep.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "pwmstab/numerics.hpp"
#include "pwmstab/orbit.hpp"
#include "pwmstab/simulator.hpp"

namespace pwmstab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PointEval {
    bool ok = false;
    StabilityReport report;
    PeriodicOrbit orbit;
    std::string status = "ok";
};

PointEval evaluate_point(const RunConfig& cfg, SweepParam which, double value,
                         bool with_sim_verdict, SweepRow* row) {
    PointEval ev;
    row->value = value;
    row->switch_time_d = kNaN;
    row->duty = kNaN;
    row->spectral_radius = kNaN;
    row->det_phi = kNaN;
    row->nc_lhs = kNaN;
    row->nc_rhs = kNaN;
    row->nc_log_margin = kNaN;
    row->slope_ratio_inst = kNaN;
    row->slope_ratio_lin = kNaN;
    row->sim_rate = kNaN;

    ConverterParams params = cfg.converter;
    SwitchingRule rule = cfg.make_rule();
    set_param(params, rule, which, value);

    OrbitOptions oopts;
    oopts.tol = cfg.solver.orbit_tol;
    SimOptions sopts;
    sopts.event_tol_rel = cfg.solver.event_tol_rel;

    try {
        const PiecewiseAffineModel model = build_converter(params);
        ev.orbit = find_periodic_orbit(model, rule, {}, oopts);
        ev.report = build_report(ev.orbit, model, rule, /*with_gains=*/false,
                                 sopts);
        ev.ok = true;

        row->switch_time_d = ev.orbit.switch_time_d;
        row->duty = ev.orbit.switch_time_d / model.period_T;
        row->spectral_radius = ev.report.spectral_radius;
        row->det_phi = ev.report.det_phi;
        row->nc_lhs = ev.report.nc_lhs;
        row->nc_rhs = ev.report.nc_rhs;
        row->nc_log_margin = ev.report.nc_log_margin;
        row->nc_holds = ev.report.nc_holds;
        row->slope_ratio_inst = ev.report.slope_ratio_inst;
        row->slope_holds_inst = ev.report.slope_holds_inst;
        row->slope_ratio_lin = ev.report.slope_ratio_lin;
        row->slope_holds_lin = ev.report.slope_holds_lin;
        row->verdict_exact = to_string(ev.report.verdict_exact);

        if (with_sim_verdict) {
            const StabilityProbe probe = probe_orbital_stability(
                model, rule, ev.orbit, 1e-5, 100, sopts);
            row->sim_verdict = to_string(probe.verdict);
            row->sim_rate = probe.measured_rate;
        }
    } catch (const TransversalityError&) {
        ev.status = "degenerate";
    } catch (const MultiPulseError&) {
        ev.status = "multi_pulse";
    } catch (const Error&) {
        ev.status = "orbit_failed";
    }
    row->status = ev.status;
    return ev;
}

// Margin extractors; the boundary of each criterion is the zero crossing.
double margin_of(const SweepRow& row, const std::string& criterion) {
    if (criterion == "exact_radius_1") return row.spectral_radius - 1.0;
    if (criterion == "nc_equality") return -row.nc_log_margin;
    if (criterion == "slope_inst_1") return row.slope_ratio_inst - 1.0;
    return row.slope_ratio_lin - 1.0; // slope_lin_1
}

} // namespace

std::vector<double> sweep_grid(const SweepConfig& sw) {
    std::vector<double> grid(sw.points);
    for (int i = 0; i < sw.points; ++i)
        grid[i] = sw.lo + (sw.hi - sw.lo) * i / (sw.points - 1);
    return grid;
}

SweepOutcome run_sweep(const RunConfig& cfg, int n_threads) {
    if (!cfg.sweep)
        throw ValidationError("sweep requested without a sweep section");
    const SweepConfig sw = *cfg.sweep;
    const std::vector<double> grid = sweep_grid(sw);

    SweepOutcome outcome;
    outcome.rows.resize(grid.size());

    if (n_threads <= 0)
        n_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;
    n_threads = std::min<int>(n_threads, static_cast<int>(grid.size()));

    // Order-preserving worker pool: each point writes only its own slot.
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            evaluate_point(cfg, sw.param, grid[i], /*with_sim_verdict=*/true,
                           &outcome.rows[i]);
        }
    };
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Boundary bisection: first sign change of each margin between adjacent
    // solvable points, refined with fresh evaluations.
    const char* criteria[] = {"exact_radius_1", "nc_equality",
                              "slope_inst_1", "slope_lin_1"};
    for (const char* criterion : criteria) {
        SweepBoundary boundary;
        boundary.criterion = criterion;
        for (size_t i = 0; i + 1 < outcome.rows.size(); ++i) {
            const SweepRow& a = outcome.rows[i];
            const SweepRow& b = outcome.rows[i + 1];
            if (a.status != "ok" || b.status != "ok") continue;
            const double ma = margin_of(a, criterion);
            const double mb = margin_of(b, criterion);
            if (!std::isfinite(ma) || !std::isfinite(mb)) continue;
            if (ma == 0.0) {
                boundary.found = true;
                boundary.value = a.value;
                break;
            }
            if (ma * mb > 0.0) continue;

            try {
                const double tol = std::max(cfg.solver.bisect_tol,
                                            1e-9 * (sw.hi - sw.lo));
                boundary.value = bisect(
                    [&](double p) {
                        SweepRow probe;
                        const PointEval ev = evaluate_point(
                            cfg, sw.param, p, /*with_sim_verdict=*/false,
                            &probe);
                        if (!ev.ok)
                            throw OrbitNotFoundError(
                                "boundary bisection: orbit lost inside bracket");
                        return margin_of(probe, criterion);
                    },
                    a.value, b.value, tol);
                boundary.found = true;
            } catch (const Error&) {
                boundary.found = false;
            }
            break;
        }
        if (!boundary.found) boundary.value = kNaN;
        outcome.boundaries.push_back(boundary);
    }
    return outcome;
}

} // namespace pwmstab
