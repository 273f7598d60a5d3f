#include "pwmstab/orbit.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pwmstab/numerics.hpp"

namespace pwmstab {

namespace {

// Affine propagator without the t >= 0 guard: the shooting residual must
// stay evaluable while Newton wanders slightly outside [0, T].
AffinePropagator propagate_any_t(const Mat& A, const Mat& B, double t) {
    const Eigen::Index n = A.rows();
    const Eigen::Index m = B.cols();
    Mat aug = Mat::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = A;
    aug.topRightCorner(n, m) = B;
    const Mat E = matexp(aug, t);
    return AffinePropagator{E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

Vec flow_state(const PiecewiseAffineModel& model, Stage stage, const Vec& x,
               double t) {
    const Mat& A = stage == Stage::on ? model.A1 : model.A2;
    const Mat& B = stage == Stage::on ? model.B1 : model.B2;
    const AffinePropagator p = propagate_any_t(A, B, t);
    return p.transition * x + p.forced_gain * model.input_u;
}

} // namespace

OrbitGuess averaged_guess(const PiecewiseAffineModel& model,
                          const SwitchingRule& rule) {
    const double T = model.period_T;
    const Eigen::Index n = model.dim();
    const Vec& u = model.input_u;
    const RowVec& F = rule.feedback_F;

    double best_mismatch = std::numeric_limits<double>::infinity();
    Vec best_x0 = Vec::Zero(n);
    double best_duty = 0.5;

    // Duty scan: blended equilibrium of the averaged system, peak estimated
    // from the on-stage slope, matched against the ramp threshold.
    for (int k = 1; k < 38; ++k) {
        const double duty = 0.025 * k;
        const Mat A_avg = duty * model.A1 + (1.0 - duty) * model.A2;
        const Mat B_avg = duty * model.B1 + (1.0 - duty) * model.B2;
        Eigen::FullPivLU<Mat> lu(A_avg);
        if (!lu.isInvertible()) continue;
        const Vec x_avg = lu.solve(-(B_avg * u));
        const double slope_on = F.dot(model.A1 * x_avg + model.B1 * u);
        const double half_swing = 0.5 * slope_on * duty * T;
        const double peak = F.dot(x_avg) + half_swing;
        const double mismatch =
            std::abs(peak - ramp_value(rule, duty * T));
        if (mismatch < best_mismatch) {
            best_mismatch = mismatch;
            best_duty = duty;
            // Shift the sensed component from the average down to the valley.
            best_x0 = x_avg - (half_swing / F.squaredNorm()) * F.transpose();
        }
    }
    return OrbitGuess{best_x0, best_duty * T};
}

PeriodicOrbit find_periodic_orbit(const PiecewiseAffineModel& model,
                                  const SwitchingRule& rule,
                                  std::optional<OrbitGuess> guess,
                                  const OrbitOptions& opts) {
    model.validate();
    rule.validate(model.dim());

    const double T = model.period_T;
    const Eigen::Index n = model.dim();
    const Vec& u = model.input_u;
    const RowVec& F = rule.feedback_F;

    const OrbitGuess avg = guess ? *guess : averaged_guess(model, rule);

    // Normalized unknowns z = (x0 ./ sx, d / T) keep the finite-difference
    // steps of the Newton kernel meaningful across heterogeneous units.
    Vec sx(n);
    for (Eigen::Index i = 0; i < n; ++i)
        sx(i) = std::max(1.0, std::abs(avg.x0(i)));
    const double amp_scale =
        std::max({1.0, std::abs(rule.control_level), rule.ramp_slope_mc * T});

    const auto residual = [&](const Vec& z) -> Vec {
        const Vec x0 = z.head(n).cwiseProduct(sx);
        const double d = z(n) * T;
        const Vec x_d = flow_state(model, Stage::on, x0, d);
        const Vec x_T = flow_state(model, Stage::off, x_d, T - d);
        Vec r(n + 1);
        r.head(n) = (x_T - x0).cwiseQuotient(sx);
        r(n) = (F.dot(x_d) - ramp_value(rule, d)) / amp_scale;
        return r;
    };

    NewtonOptions nopts;
    nopts.tol = opts.tol;
    nopts.max_iter = opts.max_iter;

    std::vector<double> d_seeds;
    if (guess) {
        d_seeds = {avg.switch_time_d};
    } else {
        d_seeds = {0.5 * T, avg.switch_time_d, 0.35 * T, 0.65 * T};
    }

    Vec z_sol;
    bool solved = false;
    std::string last_error = "no seed attempted";
    for (double d0 : d_seeds) {
        Vec z(n + 1);
        z.head(n) = avg.x0.cwiseQuotient(sx);
        z(n) = d0 / T;
        try {
            z_sol = newton_solve(residual, z, nopts);
            solved = true;
            break;
        } catch (const ConvergenceError& e) {
            last_error = e.what();
        } catch (const SingularityError& e) {
            last_error = e.what();
        } catch (const NumericError& e) {
            last_error = e.what();
        }
    }
    if (!solved)
        throw OrbitNotFoundError(std::string("periodic orbit not found: ") +
                                 last_error);

    PeriodicOrbit orbit;
    orbit.x0 = z_sol.head(n).cwiseProduct(sx);
    orbit.switch_time_d = z_sol(n) * T;
    orbit.residual_norm = residual(z_sol).lpNorm<Eigen::Infinity>();

    const double d = orbit.switch_time_d;
    if (!(d > 0.0) || !(d < T))
        throw OrbitNotFoundError("periodic orbit not found: switching instant "
                                 "outside (0, T)");

    orbit.x_at_d = flow_state(model, Stage::on, orbit.x0, d);
    orbit.deriv_minus = vector_field(model, Stage::on, orbit.x_at_d);
    orbit.deriv_plus = vector_field(model, Stage::off, orbit.x_at_d);

    const double denom = F.dot(orbit.deriv_minus) + rule.ramp_slope_mc;
    const double denom_scale = std::max(
        {1.0, std::abs(F.dot(orbit.deriv_minus)), rule.ramp_slope_mc});
    if (std::abs(denom) <= opts.transversality_eps * denom_scale)
        throw TransversalityError(
            "degenerate orbit: sensed signal tangent to the threshold");

    // First-crossing validity: the sensed signal must stay below the
    // threshold on (0, d). Exact stepping over a uniform grid.
    {
        const int N = opts.crossing_samples;
        const double h = d / N;
        const AffinePropagator step = propagate_any_t(model.A1, model.B1, h);
        const Vec forced = step.forced_gain * u;
        Vec x = orbit.x0;
        const double eps_cross = std::max(1e-8, 10.0 * opts.tol) * amp_scale;
        for (int k = 0; k < N; ++k) {
            const double g = F.dot(x) - ramp_value(rule, k * h);
            if (g > eps_cross)
                throw MultiPulseError(
                    "on-stage trajectory reaches the threshold before the "
                    "solved switching instant");
            x = step.transition * x + forced;
        }
    }
    return orbit;
}

OrbitSlopes orbit_slopes(const PeriodicOrbit& orbit,
                         const PiecewiseAffineModel& model,
                         const SwitchingRule& rule) {
    const RowVec& F = rule.feedback_F;
    const double T = model.period_T;
    const double d = orbit.switch_time_d;
    if (!(d > 0.0) || !(d < T))
        throw TransversalityError("orbit_slopes: degenerate switching instant");

    const Vec x_T = flow_state(model, Stage::off, orbit.x_at_d, T - d);

    OrbitSlopes s;
    s.m1_inst = F.dot(orbit.deriv_minus);
    s.m2_inst = -F.dot(orbit.deriv_plus);
    s.m1_lin = (F.dot(orbit.x_at_d) - F.dot(orbit.x0)) / d;
    s.m2_lin = (F.dot(orbit.x_at_d) - F.dot(x_T)) / (T - d);
    return s;
}

} // namespace pwmstab
