#include "pwmstab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pwmstab {

namespace {

// Bisects the first upward crossing of g inside (t_lo, t_hi], flowing from
// x_base anchored at t_base. Returns the crossing time and fills x_at.
double locate_crossing(const Mat& A, const Mat& B, const Vec& u,
                       const RowVec& F, const Vec& x_base, double t_base,
                       double t_lo, double t_hi, double i_c, double m_c,
                       double tol_t, Vec* x_at) {
    auto g_at = [&](double t) {
        const AffinePropagator p = affine_propagator(A, B, t - t_base);
        const Vec x = p.transition * x_base + p.forced_gain * u;
        return F.dot(x) - (i_c - m_c * t);
    };
    double lo = t_lo, hi = t_hi;
    for (int iter = 0; iter < 200 && (hi - lo) > tol_t; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (g_at(mid) >= 0.0)
            hi = mid;
        else
            lo = mid;
    }
    const double t_cross = 0.5 * (lo + hi);
    if (x_at) {
        const AffinePropagator p = affine_propagator(A, B, t_cross - t_base);
        *x_at = p.transition * x_base + p.forced_gain * u;
    }
    return t_cross;
}

} // namespace

CycleSimulator::CycleSimulator(PiecewiseAffineModel model, SwitchingRule rule,
                               SimOptions opts)
    : model_(std::move(model)), rule_(std::move(rule)), opts_(opts) {
    model_.validate();
    rule_.validate(model_.dim());
    if (opts_.scan_samples < 2)
        throw ValidationError("simulator: scan_samples must be at least 2");
    const double h = model_.period_T / opts_.scan_samples;
    on_step_ = affine_propagator(model_.A1, model_.B1, h);
    on_full_ = affine_propagator(model_.A1, model_.B1, model_.period_T);
}

CycleResult CycleSimulator::run_cycle(const Vec& x_in,
                                      const CycleOverrides& ov) const {
    if (x_in.size() != model_.dim())
        throw DimensionError("run_cycle: state dimension mismatch");
    if (!x_in.allFinite())
        throw NumericError("run_cycle: non-finite state");

    Vec u = model_.input_u;
    if (ov.v_s) u(0) = *ov.v_s;
    const double i_c = ov.i_c.value_or(rule_.control_level);
    const double m_c = rule_.ramp_slope_mc;
    const RowVec& F = rule_.feedback_F;
    const double T = model_.period_T;
    const int N = opts_.scan_samples;
    const double h = T / N;
    const double tol_t = opts_.event_tol_rel * T;

    CycleResult res;

    // On stage: step the exact flow over the prescan grid and bracket the
    // first upward crossing of g(t) = F x(t) - (i_c - m_c t).
    double d = 0.0;
    Vec x_d;
    bool crossed = false;
    const double g0 = F.dot(x_in) - i_c;
    if (g0 >= 0.0) {
        // Command already at/below the sensed signal: off at t -> 0+.
        d = 0.0;
        x_d = x_in;
        crossed = true;
    } else {
        const Vec forced_step = on_step_.forced_gain * u;
        Vec x_prev = x_in;
        double g_prev = g0;
        for (int k = 1; k <= N; ++k) {
            const Vec x_k = on_step_.transition * x_prev + forced_step;
            const double g_k = F.dot(x_k) - (i_c - m_c * (k * h));
            if (g_prev < 0.0 && g_k >= 0.0) {
                d = locate_crossing(model_.A1, model_.B1, u, F, x_prev,
                                    (k - 1) * h, (k - 1) * h, k * h, i_c, m_c,
                                    tol_t, &x_d);
                crossed = true;
                break;
            }
            x_prev = x_k;
            g_prev = g_k;
        }
        if (!crossed) {
            res.saturated = true;
            res.end_state = on_full_.transition * x_in + on_full_.forced_gain * u;
            res.pulse_count = 0;
            return res;
        }
    }
    res.switch_times.push_back(d);

    // Off stage: single exact flow for the end state, plus a crossing scan
    // of the remainder so extra pulses are reported.
    const double rem = T - d;
    const AffinePropagator off_full =
        affine_propagator(model_.A2, model_.B2, rem);
    res.end_state = off_full.transition * x_d + off_full.forced_gain * u;

    if (rem > 0.0) {
        const double h2 = rem / N;
        const AffinePropagator off_step =
            affine_propagator(model_.A2, model_.B2, h2);
        const Vec forced2 = off_step.forced_gain * u;
        const double margin = 1e-9 * std::max(1.0, std::abs(i_c));
        bool armed = false;
        Vec x_prev = x_d;
        double g_prev = 0.0;
        for (int k = 1; k <= N; ++k) {
            const Vec x_k = off_step.transition * x_prev + forced2;
            const double t_k = d + k * h2;
            const double g_k = F.dot(x_k) - (i_c - m_c * t_k);
            if (!armed) {
                if (g_k < -margin) armed = true;
            } else if (g_prev < 0.0 && g_k >= 0.0 && t_k < T) {
                const double t_cross = locate_crossing(
                    model_.A2, model_.B2, u, F, x_prev, t_k - h2, t_k - h2,
                    t_k, i_c, m_c, tol_t, nullptr);
                if (t_cross < T) res.switch_times.push_back(t_cross);
                armed = false;
            }
            x_prev = x_k;
            g_prev = g_k;
        }
    }
    res.pulse_count = static_cast<int>(res.switch_times.size());
    return res;
}

std::pair<std::vector<Vec>, CycleResult>
CycleSimulator::sample_cycle(const Vec& x_in, int n_points,
                             const CycleOverrides& ov) const {
    if (n_points < 1)
        throw ValidationError("sample_cycle: n_points must be at least 1");
    const CycleResult res = run_cycle(x_in, ov);
    const double T = model_.period_T;
    const double d =
        res.saturated ? std::numeric_limits<double>::infinity()
                      : res.switch_times.front();

    Vec u = model_.input_u;
    if (ov.v_s) u(0) = *ov.v_s;

    Vec x_d;
    if (!res.saturated) {
        const AffinePropagator p = affine_propagator(model_.A1, model_.B1, d);
        x_d = p.transition * x_in + p.forced_gain * u;
    }

    std::vector<Vec> states;
    states.reserve(n_points);
    for (int j = 0; j < n_points; ++j) {
        const double t = T * j / n_points;
        if (t < d) {
            const AffinePropagator p =
                affine_propagator(model_.A1, model_.B1, t);
            states.push_back(p.transition * x_in + p.forced_gain * u);
        } else {
            const AffinePropagator p =
                affine_propagator(model_.A2, model_.B2, t - d);
            states.push_back(p.transition * x_d + p.forced_gain * u);
        }
    }
    return {std::move(states), res};
}

CycleResult exact_cycle_map(const PiecewiseAffineModel& model,
                            const SwitchingRule& rule, const Vec& x_in,
                            const CycleOverrides& overrides,
                            const SimOptions& opts) {
    return CycleSimulator(model, rule, opts).run_cycle(x_in, overrides);
}

const char* to_string(StabilityProbe::Verdict v) {
    switch (v) {
        case StabilityProbe::Verdict::decaying: return "decaying";
        case StabilityProbe::Verdict::growing: return "growing";
        case StabilityProbe::Verdict::period2: return "period2";
        case StabilityProbe::Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

StabilityProbe probe_orbital_stability(const PiecewiseAffineModel& model,
                                       const SwitchingRule& rule,
                                       const PeriodicOrbit& orbit,
                                       double perturbation_size, int n_cycles,
                                       const SimOptions& opts) {
    if (n_cycles < 1)
        throw ValidationError("probe: n_cycles must be at least 1");
    const CycleSimulator sim(model, rule, opts);
    const double scale = 1.0 + orbit.x0.norm();
    const double noise_floor = 1e-12 * scale;
    const double d0 = perturbation_size * scale;
    const Vec dir = Vec::Ones(model.dim()).normalized();

    std::vector<Vec> states;
    std::vector<double> dnorm;
    states.reserve(n_cycles + 1);
    dnorm.reserve(n_cycles + 1);
    Vec x = orbit.x0 + d0 * dir;
    states.push_back(x);
    dnorm.push_back((x - orbit.x0).norm());
    for (int c = 0; c < n_cycles; ++c) {
        x = sim.run_cycle(x).end_state;
        states.push_back(x);
        dnorm.push_back((x - orbit.x0).norm());
    }

    StabilityProbe probe;
    for (size_t k = 0; k + 1 < dnorm.size(); ++k)
        if (dnorm[k] > 0.0)
            probe.contraction_ratios.push_back(dnorm[k + 1] / dnorm[k]);

    // Geometric-mean rate over the last clean post-transient ratios.
    {
        double sum_log = 0.0;
        int count = 0;
        for (size_t k = dnorm.size() - 1; k >= 6 && count < 20; --k) {
            if (dnorm[k] > 100.0 * noise_floor &&
                dnorm[k - 1] > 100.0 * noise_floor &&
                dnorm[k] < 0.1 * scale && dnorm[k - 1] < 0.1 * scale) {
                sum_log += std::log(dnorm[k] / dnorm[k - 1]);
                ++count;
            }
        }
        probe.measured_rate = count > 0 ? std::exp(sum_log / count) : 0.0;
    }

    const double dmax = *std::max_element(dnorm.begin(), dnorm.end());
    if (dmax <= 1e-8 * scale) {
        // Unperturbed (or effectively so): nothing but numerical noise.
        probe.verdict = StabilityProbe::Verdict::decaying;
        probe.measured_rate = 0.0;
        return probe;
    }

    // Period-2 signature on the tail: even/odd subsequences converged while
    // adjacent states stay separated and the separation is not still decaying.
    if (n_cycles >= 24) {
        const size_t tail = 16;
        const size_t base = states.size() - tail;
        double mean_gap = 0.0;
        for (size_t j = 0; j + 1 < tail; ++j)
            mean_gap += (states[base + j + 1] - states[base + j]).norm();
        mean_gap /= (tail - 1);
        double spread = 0.0;
        for (size_t j = 0; j + 2 < tail; ++j)
            spread = std::max(
                spread, (states[base + j + 2] - states[base + j]).norm());
        double gap_first = 0.0, gap_last = 0.0;
        for (size_t j = 0; j < 4; ++j) {
            gap_first += (states[base + j + 1] - states[base + j]).norm();
            gap_last +=
                (states[base + tail - 1 - j] - states[base + tail - 2 - j])
                    .norm();
        }
        if (mean_gap > 1e-6 * scale && spread < 0.05 * mean_gap &&
            gap_last > 0.98 * gap_first) {
            probe.verdict = StabilityProbe::Verdict::period2;
            return probe;
        }
    }

    const double d_ref = std::max(d0, noise_floor);
    if (dmax > 1e3 * d_ref) {
        probe.verdict = StabilityProbe::Verdict::growing;
        return probe;
    }

    const size_t post = std::min<size_t>(5, dnorm.size() - 1);
    if (dnorm.back() < dnorm[post]) {
        probe.verdict = StabilityProbe::Verdict::decaying;
        return probe;
    }
    probe.verdict = StabilityProbe::Verdict::inconclusive;
    return probe;
}

Mat finite_difference_jacobian(const PiecewiseAffineModel& model,
                               const SwitchingRule& rule,
                               const PeriodicOrbit& orbit, double step_abs,
                               double step_rel, const SimOptions& opts) {
    const CycleSimulator sim(model, rule, opts);
    const Eigen::Index n = model.dim();
    Mat J(n, n);
    Vec probe = orbit.x0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = std::max(step_abs, step_rel * std::abs(orbit.x0(i)));
        probe(i) = orbit.x0(i) + h;
        const CycleResult plus = sim.run_cycle(probe);
        probe(i) = orbit.x0(i) - h;
        const CycleResult minus = sim.run_cycle(probe);
        probe(i) = orbit.x0(i);
        if (plus.saturated || minus.saturated)
            throw ProbeSaturatedError(
                "finite_difference_jacobian: probe cycle saturated");
        J.col(i) = (plus.end_state - minus.end_state) / (2.0 * h);
    }
    return J;
}

std::vector<ScanPoint> bifurcation_scan(const ConverterParams& params,
                                        const SwitchingRule& rule,
                                        SweepParam which,
                                        const std::vector<double>& grid,
                                        const ScanOptions& opts) {
    std::vector<ScanPoint> out;
    out.reserve(grid.size());
    for (double value : grid) {
        ConverterParams p = params;
        SwitchingRule r = rule;
        set_param(p, r, which, value);
        const PiecewiseAffineModel model = build_converter(p);

        ScanPoint point;
        point.param_value = value;

        const OrbitGuess g = averaged_guess(model, r);
        // Small deterministic offset so a flip mode gets excited even when
        // the averaged guess happens to sit close to the orbit.
        const double scale = 1.0 + g.x0.norm();
        Vec x = g.x0 + 1e-3 * scale * Vec::Ones(model.dim()).normalized();

        const CycleSimulator sim(model, r, opts.sim);
        for (int c = 0; c < opts.settle_cycles; ++c) {
            const CycleResult res = sim.run_cycle(x);
            point.any_saturated = point.any_saturated || res.saturated;
            x = res.end_state;
        }
        point.samples.reserve(opts.record_cycles);
        for (int c = 0; c < opts.record_cycles; ++c) {
            const CycleResult res = sim.run_cycle(x);
            point.any_saturated = point.any_saturated || res.saturated;
            x = res.end_state;
            point.samples.push_back(x);
        }
        out.push_back(std::move(point));
    }
    return out;
}

int count_branches(const std::vector<Vec>& samples) {
    const size_t m = samples.size();
    if (m == 0) return 0;
    if (m < 4) return 1;

    double scale = 1.0;
    for (const Vec& s : samples)
        scale = std::max(scale, s.lpNorm<Eigen::Infinity>());
    const double atol = 1e-7 * scale;

    std::vector<double> gaps(m - 1);
    double max_gap = 0.0, mean_gap = 0.0;
    for (size_t j = 0; j + 1 < m; ++j) {
        gaps[j] = (samples[j + 1] - samples[j]).lpNorm<Eigen::Infinity>();
        max_gap = std::max(max_gap, gaps[j]);
        mean_gap += gaps[j];
    }
    mean_gap /= gaps.size();
    if (max_gap <= 10.0 * atol) return 1;

    const size_t q = gaps.size() / 4;
    double gap_first = 0.0, gap_last = 0.0;
    for (size_t j = 0; j < q; ++j) {
        gap_first += gaps[j];
        gap_last += gaps[gaps.size() - 1 - j];
    }
    gap_first /= q;
    gap_last /= q;
    if (gap_last < 0.9 * gap_first) return 1; // transient still converging

    double spread = 0.0;
    for (size_t j = 0; j + 2 < m; ++j)
        spread = std::max(spread,
                          (samples[j + 2] - samples[j]).lpNorm<Eigen::Infinity>());
    if (spread < std::max(atol, 0.05 * mean_gap) && mean_gap > 10.0 * atol)
        return 2;
    return 3;
}

} // namespace pwmstab
