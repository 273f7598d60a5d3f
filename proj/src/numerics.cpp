#include "pwmstab/numerics.hpp"

#include <cmath>
#include <complex>
#include <limits>

namespace pwmstab {

namespace {

double inf_norm(const Mat& M) {
    if (M.size() == 0) return 0.0;
    return M.cwiseAbs().rowwise().sum().maxCoeff();
}

} // namespace

Mat matexp(const Mat& A, double t) {
    if (A.rows() != A.cols())
        throw DimensionError("matexp: matrix must be square");
    if (!A.allFinite() || !std::isfinite(t))
        throw NumericError("matexp: non-finite input");

    const Eigen::Index n = A.rows();
    Mat M = A * t;

    // Scale so the Taylor series converges fast, square back afterwards.
    int squarings = 0;
    const double norm = inf_norm(M);
    if (norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
        M /= std::pow(2.0, squarings);
    }

    // 24 scaled terms put the truncation error far below double precision
    // for ||M|| <= 0.5.
    Mat result = Mat::Identity(n, n);
    Mat term = Mat::Identity(n, n);
    for (int k = 1; k <= 24; ++k) {
        term = (term * M) / static_cast<double>(k);
        result += term;
    }
    for (int s = 0; s < squarings; ++s)
        result = result * result;
    return result;
}

AffinePropagator affine_propagator(const Mat& A, const Mat& B, double t) {
    if (A.rows() != A.cols())
        throw DimensionError("affine_propagator: A must be square");
    if (B.rows() != A.rows())
        throw DimensionError("affine_propagator: B row count must match A");
    if (t < 0.0)
        throw NumericError("affine_propagator: negative time");

    const Eigen::Index n = A.rows();
    const Eigen::Index m = B.cols();

    // exp([[A, B], [0, 0]] t) = [[e^{At}, int_0^t e^{A s} ds B], [0, I]]
    Mat aug = Mat::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = A;
    aug.topRightCorner(n, m) = B;
    const Mat E = matexp(aug, t);

    AffinePropagator out;
    out.transition = E.topLeftCorner(n, n);
    out.forced_gain = E.topRightCorner(n, m);
    return out;
}

AffineFlowResult affine_flow(const Mat& A, const Mat& B, const Vec& u, double t) {
    if (B.cols() != u.size())
        throw DimensionError("affine_flow: B column count must match u");
    const AffinePropagator p = affine_propagator(A, B, t);
    return AffineFlowResult{p.transition, p.forced_gain * u};
}

ComplexVec eigenvalues(const Mat& M) {
    if (M.rows() != M.cols())
        throw DimensionError("eigenvalues: matrix must be square");
    if (M.rows() < 1)
        throw DimensionError("eigenvalues: matrix must be at least 1x1");

    const Eigen::Index n = M.rows();
    ComplexVec ev(n);
    if (n == 1) {
        ev(0) = std::complex<double>(M(0, 0), 0.0);
        return ev;
    }
    if (n == 2) {
        // Roots of lambda^2 - tr lambda + det.
        const double tr = M(0, 0) + M(1, 1);
        const double det = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
        const double disc = tr * tr / 4.0 - det;
        if (disc >= 0.0) {
            const double root = std::sqrt(disc);
            ev(0) = std::complex<double>(tr / 2.0 - root, 0.0);
            ev(1) = std::complex<double>(tr / 2.0 + root, 0.0);
        } else {
            const double imag = std::sqrt(-disc);
            ev(0) = std::complex<double>(tr / 2.0, -imag);
            ev(1) = std::complex<double>(tr / 2.0, imag);
        }
        return ev;
    }
    Eigen::EigenSolver<Mat> solver(M, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw ConvergenceError("eigenvalues: QR iteration failed");
    return solver.eigenvalues();
}

double determinant(const Mat& M) {
    if (M.rows() != M.cols())
        throw DimensionError("determinant: matrix must be square");
    return M.determinant();
}

double spectral_radius(const Mat& M) {
    return eigenvalues(M).cwiseAbs().maxCoeff();
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x,
                double step_abs, double step_rel) {
    const Eigen::Index n = x.size();
    Vec probe = x;
    Mat J;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double h = std::max(step_abs, step_rel * std::abs(x(j)));
        probe(j) = x(j) + h;
        const Vec fp = f(probe);
        probe(j) = x(j) - h;
        const Vec fm = f(probe);
        probe(j) = x(j);
        if (J.size() == 0) J.resize(fp.size(), n);
        J.col(j) = (fp - fm) / (2.0 * h);
    }
    return J;
}

Vec newton_solve(const std::function<Vec(const Vec&)>& residual, Vec x,
                 const NewtonOptions& opts) {
    Vec r = residual(x);
    if (!r.allFinite())
        throw NumericError("newton_solve: residual not finite at initial point");

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        double rnorm = r.lpNorm<Eigen::Infinity>();
        if (rnorm <= opts.tol)
            return x;

        const Mat J = fd_jacobian(residual, x, opts.fd_step_abs, opts.fd_step_rel);
        if (!J.allFinite())
            throw NumericError("newton_solve: Jacobian not finite");
        Eigen::FullPivLU<Mat> lu(J);
        if (!lu.isInvertible())
            throw SingularityError("newton_solve: singular Jacobian");
        const Vec dx = lu.solve(-r);

        // Backtracking: halve the step until the residual shrinks, keeping
        // the best trial if nothing strictly improves.
        double best_norm = std::numeric_limits<double>::infinity();
        Vec best_x = x;
        Vec best_r = r;
        double lambda = 1.0;
        bool improved = false;
        for (int k = 0; k < 7; ++k, lambda *= 0.5) {
            const Vec x_try = x + lambda * dx;
            const Vec r_try = residual(x_try);
            if (!r_try.allFinite()) continue;
            const double n_try = r_try.lpNorm<Eigen::Infinity>();
            if (n_try < best_norm) {
                best_norm = n_try;
                best_x = x_try;
                best_r = r_try;
            }
            if (n_try < rnorm) {
                improved = true;
                break;
            }
        }
        if (!improved && !(best_norm < std::numeric_limits<double>::infinity()))
            throw ConvergenceError("newton_solve: line search found no finite residual");
        x = best_x;
        r = best_r;
    }
    if (r.lpNorm<Eigen::Infinity>() <= opts.tol)
        return x;
    throw ConvergenceError("newton_solve: max_iter exceeded");
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol) {
    if (!(lo <= hi))
        throw BracketError("bisect: lo must not exceed hi");
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0)
        throw BracketError("bisect: no sign change on bracket");

    // Width halves every step; the iteration cap only guards against
    // tolerances below representable spacing.
    for (int iter = 0; iter < 200 && (hi - lo) > tol; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace pwmstab
