#include "pwmstab/model.hpp"

#include <cmath>

namespace pwmstab {

namespace {

void require_positive(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError(std::string(field) + " must be positive and finite");
}

void require_nonnegative(double v, const char* field) {
    if (v < 0.0 || !std::isfinite(v))
        throw ValidationError(std::string(field) + " must be non-negative and finite");
}

} // namespace

void ConverterParams::validate() const {
    require_positive(inductance_L, "inductance");
    require_positive(capacitance_C, "capacitance");
    require_positive(load_R, "load_R");
    require_positive(source_vs, "source_vs");
    require_positive(period_T, "period_T");
    require_nonnegative(esr_rC, "esr_rC");
    require_nonnegative(resistance_rL, "resistance_rL");
}

void PiecewiseAffineModel::validate() const {
    const Eigen::Index n = A1.rows();
    if (A1.cols() != n || A2.rows() != n || A2.cols() != n)
        throw DimensionError("model: A1, A2 must be square and same size");
    if (n < 2 || n > 4)
        throw ValidationError("model: state dimension must be 2, 3 or 4");
    if (B1.rows() != n || B2.rows() != n)
        throw DimensionError("model: B1, B2 must have n rows");
    if (B1.cols() != input_u.size() || B2.cols() != input_u.size())
        throw DimensionError("model: B column count must match input_u length");
    if (output_E.size() != n)
        throw DimensionError("model: output_E must have n columns");
    if (!(period_T > 0.0))
        throw ValidationError("model: period_T must be positive");
    if (!A1.allFinite() || !A2.allFinite() || !B1.allFinite() ||
        !B2.allFinite() || !input_u.allFinite() || !output_E.allFinite())
        throw NumericError("model: non-finite entries");
}

void SwitchingRule::validate(Eigen::Index state_dim) const {
    if (feedback_F.size() != state_dim)
        throw DimensionError("rule: feedback_F length must match state dimension");
    if (feedback_F.isZero(0.0))
        throw ValidationError("rule: feedback_F must be nonzero");
    if (ramp_slope_mc < 0.0 || !std::isfinite(ramp_slope_mc))
        throw ValidationError("rule: ramp_slope_mc must be non-negative and finite");
    if (!std::isfinite(control_level))
        throw ValidationError("rule: control_level must be finite");
}

PiecewiseAffineModel build_buck(const ConverterParams& p) {
    p.validate();
    const double L = p.inductance_L, C = p.capacitance_C, R = p.load_R;
    const double rC = p.esr_rC, rL = p.resistance_rL;
    const double alpha = R / (R + rC); // load/ESR divider

    // x = [i_L, v_C]; v_o = alpha*(v_C + rC*i_L) whenever the inductor feeds
    // the output node, which for the buck is both stages.
    Mat A(2, 2);
    A << -(rL + alpha * rC) / L, -alpha / L,
         alpha / C,              -alpha / (R * C);

    PiecewiseAffineModel m;
    m.A1 = A;
    m.A2 = A; // same topology with the source removed
    m.B1 = Mat(2, 1);
    m.B1 << 1.0 / L, 0.0;
    m.B2 = Mat::Zero(2, 1);
    m.input_u = Vec::Constant(1, p.source_vs);
    m.output_E = RowVec(2);
    m.output_E << alpha * rC, alpha;
    m.period_T = p.period_T;
    m.validate();
    return m;
}

PiecewiseAffineModel build_boost(const ConverterParams& p) {
    p.validate();
    const double L = p.inductance_L, C = p.capacitance_C, R = p.load_R;
    const double rC = p.esr_rC, rL = p.resistance_rL;
    const double alpha = R / (R + rC);

    // On stage: inductor charges from the source, capacitor alone feeds the
    // load. Off stage: inductor feeds the output node through the diode.
    Mat A1(2, 2);
    A1 << -rL / L, 0.0,
          0.0,     -1.0 / ((R + rC) * C);
    Mat A2(2, 2);
    A2 << -(rL + alpha * rC) / L, -alpha / L,
          alpha / C,              -1.0 / ((R + rC) * C);

    PiecewiseAffineModel m;
    m.A1 = A1;
    m.A2 = A2;
    m.B1 = Mat(2, 1);
    m.B1 << 1.0 / L, 0.0;
    m.B2 = m.B1;
    m.input_u = Vec::Constant(1, p.source_vs);
    // Sampled at the start of the on stage, where the diode blocks.
    m.output_E = RowVec(2);
    m.output_E << 0.0, alpha;
    m.period_T = p.period_T;
    m.validate();
    return m;
}

PiecewiseAffineModel build_converter(const ConverterParams& p) {
    return p.topology == Topology::buck ? build_buck(p) : build_boost(p);
}

Vec vector_field(const PiecewiseAffineModel& model, Stage stage, const Vec& x) {
    if (x.size() != model.dim())
        throw DimensionError("vector_field: state dimension mismatch");
    if (stage == Stage::on)
        return model.A1 * x + model.B1 * model.input_u;
    return model.A2 * x + model.B2 * model.input_u;
}

double ramp_value(const SwitchingRule& rule, double t) {
    return rule.control_level - rule.ramp_slope_mc * t;
}

double ramp_slope(const SwitchingRule& rule) {
    return -rule.ramp_slope_mc;
}

const char* sweep_param_name(SweepParam p) {
    switch (p) {
        case SweepParam::m_c: return "m_c";
        case SweepParam::i_c: return "i_c";
        case SweepParam::v_s: return "v_s";
        case SweepParam::load_R: return "load_R";
        case SweepParam::period_T: return "period_T";
    }
    return "?";
}

SweepParam sweep_param_from_name(const std::string& name) {
    if (name == "m_c") return SweepParam::m_c;
    if (name == "i_c") return SweepParam::i_c;
    if (name == "v_s") return SweepParam::v_s;
    if (name == "load_R") return SweepParam::load_R;
    if (name == "period_T") return SweepParam::period_T;
    throw ValidationError("unknown sweep parameter '" + name + "'");
}

void set_param(ConverterParams& params, SwitchingRule& rule, SweepParam which,
               double value) {
    switch (which) {
        case SweepParam::m_c: rule.ramp_slope_mc = value; return;
        case SweepParam::i_c: rule.control_level = value; return;
        case SweepParam::v_s: params.source_vs = value; return;
        case SweepParam::load_R: params.load_R = value; return;
        case SweepParam::period_T: params.period_T = value; return;
    }
}

RowVec default_feedback(Eigen::Index state_dim) {
    RowVec f = RowVec::Zero(state_dim);
    f(0) = 1.0;
    return f;
}

} // namespace pwmstab
