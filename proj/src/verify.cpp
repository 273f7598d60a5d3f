#include "pwmstab/verify.hpp"

#include <cmath>

#include "pwmstab/corpus.hpp"
#include "pwmstab/numerics.hpp"
#include "pwmstab/orbit.hpp"
#include "pwmstab/simulator.hpp"
#include "pwmstab/stability.hpp"

namespace pwmstab {

namespace {

void run_config_checks(const std::string& name, const RunConfig& cfg,
                       double k, const VerifyHooks& hooks,
                       VerifySummary* summary) {
    auto push = [&](const std::string& check, double residual, double tol) {
        CheckResult r;
        r.check = check;
        r.config = name;
        r.residual = residual;
        r.tol = tol;
        r.pass = residual <= tol;
        summary->all_pass = summary->all_pass && r.pass;
        summary->checks.push_back(r);
    };

    const PiecewiseAffineModel model = build_converter(cfg.converter);
    const SwitchingRule rule = cfg.make_rule();
    OrbitOptions oopts;
    oopts.tol = cfg.solver.orbit_tol;

    PeriodicOrbit orbit;
    try {
        orbit = find_periodic_orbit(model, rule, {}, oopts);
    } catch (const Error&) {
        push("orbit_solve", 1.0, 0.0); // no orbit: every check fails loudly
        return;
    }

    SaltationMatrix salt = saltation_matrix(orbit, model, rule);
    if (hooks.corrupt_saltation_sign) {
        // I + jF/den instead of I - jF/den.
        salt.matrix =
            2.0 * Mat::Identity(model.dim(), model.dim()) - salt.matrix;
    }

    // Rank-one update determinant identity.
    {
        const double lhs = determinant(salt.matrix);
        const double rhs =
            1.0 - rule.feedback_F.dot(salt.jump) / salt.denominator;
        push("saltation_rank1_det", std::abs(lhs - rhs) / (1.0 + std::abs(rhs)),
             1e-12 * k);
    }

    const Mat phi = matexp(model.A2, model.period_T - orbit.switch_time_d) *
                    salt.matrix * matexp(model.A1, orbit.switch_time_d);

    // |det Phi| against the trace/slope expression from the proof chain.
    {
        const double num =
            rule.feedback_F.dot(orbit.deriv_plus) + rule.ramp_slope_mc;
        const double den =
            rule.feedback_F.dot(orbit.deriv_minus) + rule.ramp_slope_mc;
        const double expected =
            std::exp(-(model.A2 - model.A1).trace() * orbit.switch_time_d +
                     model.A2.trace() * model.period_T) *
            std::abs(num / den);
        push("det_trace_identity",
             std::abs(std::abs(determinant(phi)) - expected) / expected,
             1e-9 * k);
    }

    SimOptions tight;
    tight.event_tol_rel = 1e-14;

    // Finite-difference Jacobian of the exact cycle map.
    {
        const Mat fd =
            finite_difference_jacobian(model, rule, orbit, 1e-6, 1e-6, tight);
        push("fd_jacobian_match", (phi - fd).norm() / phi.norm(), 1e-5 * k);
    }

    const ExactStability ex = exact_stability(phi);

    // Exactly stable must imply the necessary condition.
    {
        const NecessaryCondition nc = necessary_condition(orbit, model, rule);
        double residual = 0.0;
        if (ex.verdict == Verdict::stable)
            residual = std::max(0.0, nc.log_lhs - nc.log_rhs);
        push("necessary_condition_implication", residual, 1e-12 * k);
    }

    // One simulated period returns to the fixed point and switches at d.
    {
        const CycleResult res = exact_cycle_map(model, rule, orbit.x0, {},
                                                SimOptions{});
        const double scale = 1.0 + orbit.x0.lpNorm<Eigen::Infinity>();
        double residual = (res.end_state - orbit.x0).lpNorm<Eigen::Infinity>() /
                          (10.0 * cfg.solver.orbit_tol * scale);
        if (res.saturated || res.switch_times.empty()) {
            residual = 1.0 / 0.0;
        } else {
            const double dt =
                std::abs(res.switch_times.front() - orbit.switch_time_d);
            residual = std::max(residual, dt / (1e-10 * model.period_T));
        }
        push("cycle_consistency", residual, 1.0 * k);
    }

    // Measured contraction against the spectral radius, when measurable.
    if (ex.verdict == Verdict::stable && ex.spectral_radius > 0.1 &&
        ex.spectral_radius < 0.96) {
        const StabilityProbe probe =
            probe_orbital_stability(model, rule, orbit, 1e-4, 60);
        push("contraction_match",
             std::abs(probe.measured_rate - ex.spectral_radius) /
                 ex.spectral_radius,
             0.05 * k);
    }
}

} // namespace

VerifySummary run_verification(const std::optional<RunConfig>& user_config,
                               double tol_scale, const VerifyHooks& hooks) {
    if (!(tol_scale > 0.0))
        throw ValidationError("tol_scale must be positive");
    VerifySummary summary;
    for (const CorpusEntry& entry : verification_corpus())
        run_config_checks(entry.name, entry.config, tol_scale, hooks, &summary);
    if (user_config)
        run_config_checks("user", *user_config, tol_scale, hooks, &summary);
    return summary;
}

} // namespace pwmstab
