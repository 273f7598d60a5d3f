#include "pwmstab/stability.hpp"

#include <cmath>

#include "pwmstab/numerics.hpp"

namespace pwmstab {

SaltationMatrix saltation_matrix(const PeriodicOrbit& orbit,
                                 const PiecewiseAffineModel& model,
                                 const SwitchingRule& rule) {
    const RowVec& F = rule.feedback_F;
    const Eigen::Index n = model.dim();
    if (orbit.deriv_minus.size() != n || orbit.deriv_plus.size() != n)
        throw DimensionError("saltation_matrix: orbit/model dimension mismatch");

    SaltationMatrix s;
    s.jump = orbit.deriv_minus - orbit.deriv_plus;
    s.denominator = F.dot(orbit.deriv_minus) + rule.ramp_slope_mc;
    const double denom_scale = std::max(
        {1.0, std::abs(F.dot(orbit.deriv_minus)), rule.ramp_slope_mc});
    if (std::abs(s.denominator) <= 1e-12 * denom_scale)
        throw TransversalityError("saltation_matrix: zero denominator");
    s.matrix = Mat::Identity(n, n) - (s.jump * F) / s.denominator;
    return s;
}

Mat compute_jacobian(const PeriodicOrbit& orbit,
                     const PiecewiseAffineModel& model,
                     const SwitchingRule& rule) {
    const SaltationMatrix s = saltation_matrix(orbit, model, rule);
    const double d = orbit.switch_time_d;
    return matexp(model.A2, model.period_T - d) * s.matrix * matexp(model.A1, d);
}

SampledGains sampled_gains(const PeriodicOrbit& orbit,
                           const PiecewiseAffineModel& model,
                           const SwitchingRule& rule, const SimOptions& opts) {
    const CycleSimulator sim(model, rule, opts);
    const double vs = model.input_u(0);
    const double ic = rule.control_level;
    const double h_v = 1e-6 * std::max(1.0, std::abs(vs));
    const double h_c = 1e-6 * std::max(1.0, std::abs(ic));

    CycleOverrides ov;
    SampledGains g;

    ov.v_s = vs + h_v;
    const Vec vp = sim.run_cycle(orbit.x0, ov).end_state;
    ov.v_s = vs - h_v;
    const Vec vm = sim.run_cycle(orbit.x0, ov).end_state;
    g.gamma_v = (vp - vm) / (2.0 * h_v);

    ov = CycleOverrides{};
    ov.i_c = ic + h_c;
    const Vec cp = sim.run_cycle(orbit.x0, ov).end_state;
    ov.i_c = ic - h_c;
    const Vec cm = sim.run_cycle(orbit.x0, ov).end_state;
    g.gamma_c = (cp - cm) / (2.0 * h_c);
    return g;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::stable: return "stable";
        case Verdict::unstable: return "unstable";
        case Verdict::marginal: return "marginal";
    }
    return "?";
}

ExactStability exact_stability(const Mat& phi_o, double eps_margin) {
    if (phi_o.rows() != phi_o.cols())
        throw DimensionError("exact_stability: matrix must be square");
    ExactStability out;
    out.eigenvalues = eigenvalues(phi_o);
    out.spectral_radius = out.eigenvalues.cwiseAbs().maxCoeff();
    if (out.spectral_radius < 1.0 - eps_margin)
        out.verdict = Verdict::stable;
    else if (out.spectral_radius > 1.0 + eps_margin)
        out.verdict = Verdict::unstable;
    else
        out.verdict = Verdict::marginal;
    return out;
}

NecessaryCondition necessary_condition(const PeriodicOrbit& orbit,
                                       const PiecewiseAffineModel& model,
                                       const SwitchingRule& rule) {
    const RowVec& F = rule.feedback_F;
    const double mc = rule.ramp_slope_mc;
    const double num = F.dot(orbit.deriv_plus) + mc;
    const double den = F.dot(orbit.deriv_minus) + mc;
    const double denom_scale =
        std::max({1.0, std::abs(F.dot(orbit.deriv_minus)), mc});
    if (std::abs(den) <= 1e-12 * denom_scale)
        throw TransversalityError("necessary_condition: zero denominator");

    NecessaryCondition out;
    const double d = orbit.switch_time_d;
    const double T = model.period_T;
    out.log_rhs = (model.A2 - model.A1).trace() * d - model.A2.trace() * T;
    out.log_lhs = std::log(std::abs(num)) - std::log(std::abs(den));
    out.lhs = std::abs(num / den);
    out.rhs = std::exp(out.log_rhs);
    out.holds = out.log_lhs <= out.log_rhs + std::log1p(1e-12);
    return out;
}

SlopeCriterion slope_criterion(const PeriodicOrbit& orbit,
                               const PiecewiseAffineModel& model,
                               const SwitchingRule& rule,
                               SlopeVariant variant) {
    const OrbitSlopes s = orbit_slopes(orbit, model, rule);
    const double m1 =
        variant == SlopeVariant::instantaneous ? s.m1_inst : s.m1_lin;
    const double m2 =
        variant == SlopeVariant::instantaneous ? s.m2_inst : s.m2_lin;
    const double mc = rule.ramp_slope_mc;
    const double den = m1 + mc;
    if (std::abs(den) <= 1e-12 * std::max({1.0, std::abs(m1), mc}))
        throw TransversalityError("slope_criterion: zero denominator m1 + m_c");

    SlopeCriterion out;
    out.ratio = std::abs((-m2 + mc) / den);
    out.holds = out.ratio < 1.0;
    return out;
}

StabilityReport build_report(const PeriodicOrbit& orbit,
                             const PiecewiseAffineModel& model,
                             const SwitchingRule& rule, bool with_gains,
                             const SimOptions& opts) {
    StabilityReport r;
    r.phi_o = compute_jacobian(orbit, model, rule);
    const ExactStability ex = exact_stability(r.phi_o);
    r.eigenvalues = ex.eigenvalues;
    r.spectral_radius = ex.spectral_radius;
    r.verdict_exact = ex.verdict;
    r.det_phi = determinant(r.phi_o);

    const NecessaryCondition nc = necessary_condition(orbit, model, rule);
    r.nc_lhs = nc.lhs;
    r.nc_rhs = nc.rhs;
    r.nc_log_margin = nc.log_rhs - nc.log_lhs;
    r.nc_holds = nc.holds;

    r.slope_ratio_inst =
        slope_criterion(orbit, model, rule, SlopeVariant::instantaneous).ratio;
    r.slope_holds_inst = r.slope_ratio_inst < 1.0;
    r.slope_ratio_lin =
        slope_criterion(orbit, model, rule, SlopeVariant::linear).ratio;
    r.slope_holds_lin = r.slope_ratio_lin < 1.0;

    if (with_gains) {
        const SampledGains g = sampled_gains(orbit, model, rule, opts);
        r.gamma_v = g.gamma_v;
        r.gamma_c = g.gamma_c;
    }
    return r;
}

} // namespace pwmstab
