#pragma once

#include <random>

#include "pwmstab/model.hpp"
#include "pwmstab/types.hpp"

namespace testsup {

using pwmstab::Mat;
using pwmstab::Vec;

inline Mat random_matrix(std::mt19937& rng, int n, double lo = -1.0,
                         double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Mat M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            M(i, j) = dist(rng);
    return M;
}

/// Random matrix with eigenvalues pushed into the left half plane by a
/// diagonal shift: stable enough for flow comparisons over moderate spans.
inline Mat random_stable_matrix(std::mt19937& rng, int n) {
    Mat M = random_matrix(rng, n);
    M -= (1.5 + M.cwiseAbs().rowwise().sum().maxCoeff()) * Mat::Identity(n, n);
    return M;
}

/// Independent flow oracle: classic RK4 on xdot = A x + B u with step
/// halving until the result settles. Shares nothing with the matrix
/// exponential path under test.
inline Vec rk4_flow(const Mat& A, const Mat& B, const Vec& u, const Vec& x0,
                    double t, double rel_tol = 1e-12) {
    auto integrate = [&](int steps) {
        const double h = t / steps;
        Vec x = x0;
        const Vec f = B * u;
        for (int k = 0; k < steps; ++k) {
            const Vec k1 = A * x + f;
            const Vec k2 = A * (x + 0.5 * h * k1) + f;
            const Vec k3 = A * (x + 0.5 * h * k2) + f;
            const Vec k4 = A * (x + h * k3) + f;
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return x;
    };
    int steps = 64;
    Vec prev = integrate(steps);
    for (int round = 0; round < 12; ++round) {
        steps *= 2;
        const Vec next = integrate(steps);
        if ((next - prev).norm() <= rel_tol * (1.0 + next.norm()))
            return next;
        prev = next;
    }
    return prev;
}

/// Canonical stable buck used across the suites: 12 V in, 50 kHz,
/// duty around 0.4 so every criterion agrees on "stable".
inline pwmstab::ConverterParams canonical_buck() {
    pwmstab::ConverterParams p;
    p.topology = pwmstab::Topology::buck;
    p.inductance_L = 50e-6;
    p.capacitance_C = 100e-6;
    p.load_R = 5.0;
    p.source_vs = 12.0;
    p.period_T = 20e-6;
    return p;
}

inline pwmstab::SwitchingRule canonical_buck_rule(double i_c = 1.54,
                                                  double m_c = 0.0) {
    pwmstab::SwitchingRule r;
    r.feedback_F = pwmstab::default_feedback(2);
    r.control_level = i_c;
    r.ramp_slope_mc = m_c;
    return r;
}

/// Canonical boost: 5 V in, duty around 0.4, stable without ramp. The small
/// capacitor keeps the output pole fast enough that a few hundred cycles
/// settle the orbit.
inline pwmstab::ConverterParams canonical_boost() {
    pwmstab::ConverterParams p;
    p.topology = pwmstab::Topology::boost;
    p.inductance_L = 100e-6;
    p.capacitance_C = 47e-6;
    p.load_R = 20.0;
    p.source_vs = 5.0;
    p.period_T = 20e-6;
    return p;
}

inline pwmstab::SwitchingRule canonical_boost_rule(double i_c = 0.89,
                                                   double m_c = 0.0) {
    pwmstab::SwitchingRule r;
    r.feedback_F = pwmstab::default_feedback(2);
    r.control_level = i_c;
    r.ramp_slope_mc = m_c;
    return r;
}

} // namespace testsup
