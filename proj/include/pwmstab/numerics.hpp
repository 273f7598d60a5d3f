#pragma once

#include <functional>

#include "pwmstab/types.hpp"

namespace pwmstab {

/// Matrix exponential e^{A t} by scaling-and-squaring with a scaled Taylor
/// series. Intended for the small (n <= 5, including augmentation) dense
/// matrices of this toolkit.
Mat matexp(const Mat& A, double t);

/// Solution of xdot = A x + B u with constant u over [0, t]:
///   x(t) = transition * x(0) + forced.
struct AffineFlowResult {
    Mat transition; // e^{A t}
    Vec forced;     // integral of e^{A (t-s)} B u ds
};

/// State-transition and input-gain blocks of the constant-input affine flow:
///   x(t) = transition * x(0) + forced_gain * u.
/// Computed from the exponential of the augmented matrix [[A, B], [0, 0]],
/// which stays valid when A is singular.
struct AffinePropagator {
    Mat transition;  // n x n
    Mat forced_gain; // n x m
};

AffinePropagator affine_propagator(const Mat& A, const Mat& B, double t);

AffineFlowResult affine_flow(const Mat& A, const Mat& B, const Vec& u, double t);

/// All eigenvalues with multiplicity. Closed-form quadratic for 2x2,
/// QR iteration otherwise.
ComplexVec eigenvalues(const Mat& M);

double determinant(const Mat& M);

/// max |lambda_i| of M.
double spectral_radius(const Mat& M);

struct NewtonOptions {
    double tol = 1e-10;  // infinity norm of the residual
    int max_iter = 50;
    double fd_step_abs = 1e-7; // finite-difference step max(abs, rel*|x_j|)
    double fd_step_rel = 1e-7;
};

/// Damped Newton on residual(x) = 0 with a central finite-difference
/// Jacobian. Throws ConvergenceError when the iteration budget runs out and
/// SingularityError when the Jacobian is numerically singular.
Vec newton_solve(const std::function<Vec(const Vec&)>& residual, Vec x,
                 const NewtonOptions& opts = {});

/// Central finite-difference Jacobian of f at x, step max(abs, rel*|x_j|).
Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x,
                double step_abs = 1e-7, double step_rel = 1e-7);

/// Bisection on [lo, hi]; requires f(lo)*f(hi) <= 0. Returns the midpoint of
/// the final bracket once its width drops to tol (or an exact zero is hit).
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol);

} // namespace pwmstab
