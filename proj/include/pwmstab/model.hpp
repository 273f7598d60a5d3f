#pragma once

#include <string>

#include "pwmstab/types.hpp"

namespace pwmstab {

enum class Topology { buck, boost };

/// Physical parameters of the power stage (SI units throughout).
struct ConverterParams {
    Topology topology = Topology::buck;
    double inductance_L = 0.0;   // H
    double capacitance_C = 0.0;  // F
    double load_R = 0.0;         // ohm
    double source_vs = 0.0;      // V
    double period_T = 0.0;       // s
    double esr_rC = 0.0;         // ohm, capacitor ESR
    double resistance_rL = 0.0;  // ohm, inductor series resistance

    void validate() const; // throws ValidationError naming the bad field
};

/// Two-stage piecewise-affine system xdot = A_s x + B_s u with period T.
/// State ordering is fixed as x = [i_L, v_C]; u(0) is the source voltage.
struct PiecewiseAffineModel {
    Mat A1, B1; // on stage (switch conducting)
    Mat A2, B2; // off stage
    Vec input_u;
    RowVec output_E; // sampled output map, v_o = E x at the sample instant
    double period_T = 0.0;

    Eigen::Index dim() const { return A1.rows(); }
    void validate() const;
};

enum class Stage { on, off };

/// Current-mode switching rule: the switch turns off at the first
/// t = d in (0, T) where F x(t) = i_c - m_c t.
///
/// Sign convention: with the switching function written as
/// g(t) = F x(t) - (i_c - m_c t), the effective threshold has slope -m_c and
/// the quantity entering the saltation denominator F xdot(d-) + hdot(d) is
/// hdot(d) = +m_c. Under this convention the slope-criterion denominator
/// comes out as m1 + m_c.
struct SwitchingRule {
    RowVec feedback_F;          // maps state to the sensed signal
    double control_level = 0.0; // i_c, A
    double ramp_slope_mc = 0.0; // m_c, A/s, >= 0

    void validate(Eigen::Index state_dim) const;
};

PiecewiseAffineModel build_buck(const ConverterParams& params);
PiecewiseAffineModel build_boost(const ConverterParams& params);
PiecewiseAffineModel build_converter(const ConverterParams& params);

/// A_stage x + B_stage u; the one-sided orbit derivatives come from this.
Vec vector_field(const PiecewiseAffineModel& model, Stage stage, const Vec& x);

/// Threshold value i_c - m_c t at time t into the cycle.
double ramp_value(const SwitchingRule& rule, double t);

/// Slope of the effective threshold: -m_c. (The hdot entering the saltation
/// denominator is +m_c; see the SwitchingRule convention note.)
double ramp_slope(const SwitchingRule& rule);

/// Parameters a sweep may vary.
enum class SweepParam { m_c, i_c, v_s, load_R, period_T };

const char* sweep_param_name(SweepParam p);
SweepParam sweep_param_from_name(const std::string& name);

/// Writes one sweep-parameter value into the (params, rule) pair.
void set_param(ConverterParams& params, SwitchingRule& rule, SweepParam which,
               double value);

/// Default current-mode feedback row [1, 0, ...]: senses the inductor current.
RowVec default_feedback(Eigen::Index state_dim);

} // namespace pwmstab
