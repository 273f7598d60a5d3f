#include <doctest.h>

#include <cmath>
#include <random>

#include "pwmstab/numerics.hpp"
#include "test_support.hpp"

using namespace pwmstab;
using testsup::random_matrix;
using testsup::random_stable_matrix;
using testsup::rk4_flow;

namespace {

// Plain truncated Taylor series, no scaling: only valid for small ||A t||,
// which is exactly why it is an independent oracle for matexp.
Mat taylor_exp(const Mat& A, double t, int terms) {
    const Eigen::Index n = A.rows();
    Mat result = Mat::Identity(n, n);
    Mat term = Mat::Identity(n, n);
    const Mat M = A * t;
    for (int k = 1; k <= terms; ++k) {
        term = (term * M) / static_cast<double>(k);
        result += term;
    }
    return result;
}

} // namespace

TEST_CASE("matexp: zero matrix gives identity") {
    const Mat A = Mat::Zero(2, 2);
    CHECK((matexp(A, 1.0) - Mat::Identity(2, 2)).norm() == doctest::Approx(0.0));
}

TEST_CASE("matexp: diagonal closed form") {
    Mat A = Mat::Zero(2, 2);
    A(0, 0) = -3.0;
    A(1, 1) = 0.7;
    const Mat E = matexp(A, 2.0);
    CHECK(E(0, 0) == doctest::Approx(std::exp(-6.0)).epsilon(1e-13));
    CHECK(E(1, 1) == doctest::Approx(std::exp(1.4)).epsilon(1e-13));
    CHECK(std::abs(E(0, 1)) < 1e-15);
    CHECK(std::abs(E(1, 0)) < 1e-15);
}

TEST_CASE("matexp: matches 30-term Taylor oracle on random 2x2") {
    std::mt19937 rng(12345);
    for (int trial = 0; trial < 50; ++trial) {
        const Mat A = random_matrix(rng, 2);
        const Mat ours = matexp(A, 0.5);
        const Mat oracle = taylor_exp(A, 0.5, 30);
        CHECK((ours - oracle).norm() <= 1e-12 * (1.0 + oracle.norm()));
    }
}

TEST_CASE("matexp: semigroup property on random stable matrices") {
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> tdist(0.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 3;
        const Mat A = random_stable_matrix(rng, n);
        const double s = tdist(rng), t = tdist(rng);
        const Mat whole = matexp(A, s + t);
        const Mat split = matexp(A, s) * matexp(A, t);
        CHECK((whole - split).norm() <= 1e-9 * whole.norm());
    }
}

TEST_CASE("matexp: negative time inverts") {
    std::mt19937 rng(31);
    const Mat A = random_matrix(rng, 3);
    const Mat prod = matexp(A, 0.7) * matexp(A, -0.7);
    CHECK((prod - Mat::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("matexp: det equals exp of trace") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> tdist(0.0, 1.5);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + trial % 3;
        const Mat A = random_stable_matrix(rng, n);
        const double t = tdist(rng);
        const double det = determinant(matexp(A, t));
        const double expected = std::exp(A.trace() * t);
        CHECK(std::abs(det - expected) <= 1e-10 * expected);
    }
}

TEST_CASE("matexp: rejects bad input") {
    CHECK_THROWS_AS(matexp(Mat::Zero(2, 3), 1.0), DimensionError);
    Mat A = Mat::Zero(2, 2);
    A(0, 0) = std::nan("");
    CHECK_THROWS_AS(matexp(A, 1.0), NumericError);
}

TEST_CASE("affine_flow: pure integrator accumulates u*t") {
    const Mat A = Mat::Zero(2, 2);
    const Mat B = Mat::Identity(2, 2);
    Vec u(2);
    u << 3.0, -1.0;
    const AffineFlowResult r = affine_flow(A, B, u, 2.5);
    CHECK((r.transition - Mat::Identity(2, 2)).norm() < 1e-14);
    CHECK((r.forced - 2.5 * u).norm() < 1e-12 * u.norm());
}

TEST_CASE("affine_flow: t = 0 is the identity with zero forcing") {
    std::mt19937 rng(5);
    const Mat A = random_matrix(rng, 3);
    const Mat B = random_matrix(rng, 3);
    const Vec u = Vec::Ones(3);
    const AffineFlowResult r = affine_flow(A, B, u, 0.0);
    CHECK((r.transition - Mat::Identity(3, 3)).norm() < 1e-15);
    CHECK(r.forced.norm() < 1e-15);
}

TEST_CASE("affine_flow: matches RK4 oracle on random stable systems") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> tdist(0.05, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 3;
        const Mat A = random_stable_matrix(rng, n);
        const Mat B = random_matrix(rng, n);
        const Vec u = Vec::Ones(n);
        const Vec x0 = random_matrix(rng, n).col(0);
        const double t = tdist(rng);
        const AffineFlowResult r = affine_flow(A, B, u, t);
        const Vec ours = r.transition * x0 + r.forced;
        const Vec oracle = rk4_flow(A, B, u, x0, t);
        CHECK((ours - oracle).norm() <= 1e-9 * (1.0 + oracle.norm()));
    }
}

TEST_CASE("affine_flow: buck on-stage over half a period matches RK4") {
    const auto params = testsup::canonical_buck();
    const auto model = build_buck(params);
    Vec x0(2);
    x0 << 1.0, 6.0;
    const double t = params.period_T / 2.0;
    const AffineFlowResult r = affine_flow(model.A1, model.B1, model.input_u, t);
    const Vec ours = r.transition * x0 + r.forced;
    const Vec oracle = rk4_flow(model.A1, model.B1, model.input_u, x0, t);
    CHECK((ours - oracle).norm() <= 1e-9 * oracle.norm());
}

TEST_CASE("affine_flow: singular A is handled by the augmented form") {
    // Ideal boost on-stage has a zero row/column block.
    const auto model = build_boost(testsup::canonical_boost());
    Vec x0(2);
    x0 << 0.5, 8.0;
    const double t = 5e-6;
    const AffineFlowResult r = affine_flow(model.A1, model.B1, model.input_u, t);
    const Vec ours = r.transition * x0 + r.forced;
    const Vec oracle = rk4_flow(model.A1, model.B1, model.input_u, x0, t);
    CHECK((ours - oracle).norm() <= 1e-9 * (1.0 + oracle.norm()));
}

TEST_CASE("affine_flow: dimension and sign errors") {
    CHECK_THROWS_AS(affine_flow(Mat::Zero(2, 2), Mat::Zero(3, 1), Vec::Ones(1), 1.0),
                    DimensionError);
    CHECK_THROWS_AS(affine_flow(Mat::Zero(2, 2), Mat::Zero(2, 1), Vec::Ones(2), 1.0),
                    DimensionError);
    CHECK_THROWS_AS(affine_flow(Mat::Zero(2, 2), Mat::Zero(2, 1), Vec::Ones(1), -1.0),
                    NumericError);
}

TEST_CASE("eigenvalues: identity and rotation") {
    const ComplexVec ev_id = eigenvalues(Mat::Identity(2, 2));
    CHECK(ev_id(0).real() == doctest::Approx(1.0));
    CHECK(ev_id(1).real() == doctest::Approx(1.0));

    Mat rot(2, 2);
    rot << 0.0, 1.0, -1.0, 0.0;
    const ComplexVec ev = eigenvalues(rot);
    CHECK(std::abs(ev(0).imag()) == doctest::Approx(1.0));
    CHECK(std::abs(ev(1).imag()) == doctest::Approx(1.0));
    CHECK(ev(0).real() == doctest::Approx(0.0));
    CHECK((ev(0) + ev(1)).imag() == doctest::Approx(0.0));
}

TEST_CASE("eigenvalues: product equals determinant") {
    std::mt19937 rng(4242);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 2 + trial % 2;
        const Mat M = random_matrix(rng, n, -2.0, 2.0);
        const ComplexVec ev = eigenvalues(M);
        std::complex<double> prod(1.0, 0.0);
        for (Eigen::Index i = 0; i < ev.size(); ++i) prod *= ev(i);
        const double det = determinant(M);
        CHECK(std::abs(prod.real() - det) <= 1e-9 * (1.0 + std::abs(det)));
        CHECK(std::abs(prod.imag()) <= 1e-9 * (1.0 + std::abs(det)));
    }
}

TEST_CASE("eigenvalues: non-square rejected") {
    CHECK_THROWS_AS(eigenvalues(Mat::Zero(2, 3)), DimensionError);
}

TEST_CASE("determinant: basics and multiplicativity") {
    CHECK(determinant(Mat::Identity(3, 3)) == doctest::Approx(1.0));
    Mat D = Mat::Zero(2, 2);
    D(0, 0) = 2.0;
    D(1, 1) = 3.0;
    CHECK(determinant(D) == doctest::Approx(6.0));

    std::mt19937 rng(11);
    const Mat A = random_matrix(rng, 3);
    const Mat B = random_matrix(rng, 3);
    CHECK(determinant(A * B) ==
          doctest::Approx(determinant(A) * determinant(B)).epsilon(1e-10));
    CHECK_THROWS_AS(determinant(Mat::Zero(1, 2)), DimensionError);
}

TEST_CASE("determinant of stage product obeys the trace identity") {
    const auto model = build_boost(testsup::canonical_boost());
    const double T = model.period_T;
    const double d = 0.37 * T;
    const double det =
        determinant(matexp(model.A1, d) * matexp(model.A2, T - d));
    const double expected =
        std::exp(model.A1.trace() * d + model.A2.trace() * (T - d));
    CHECK(std::abs(det - expected) <= 1e-10 * std::abs(expected));
}

TEST_CASE("newton_solve: affine residual converges in one iteration") {
    Vec c(2);
    c << 4.0, -2.0;
    int calls = 0;
    auto residual = [&](const Vec& x) {
        ++calls;
        return Vec(x - c);
    };
    const Vec x = newton_solve(residual, Vec::Zero(2));
    CHECK((x - c).norm() < 1e-12);
}

TEST_CASE("newton_solve: scalar quadratic") {
    auto residual = [](const Vec& x) {
        Vec r(1);
        r(0) = x(0) * x(0) - 4.0;
        return r;
    };
    Vec x0(1);
    x0 << 3.0;
    const Vec x = newton_solve(residual, x0);
    CHECK(x(0) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("newton_solve: singular Jacobian throws") {
    auto residual = [](const Vec& x) {
        Vec r(2);
        r(0) = x(0) + x(1) - 1.0;
        r(1) = 2.0 * (x(0) + x(1)) - 5.0; // parallel rows, no solution
        return r;
    };
    CHECK_THROWS_AS(newton_solve(residual, Vec::Zero(2)), SingularityError);
}

TEST_CASE("newton_solve: rootless residual exhausts iterations") {
    auto residual = [](const Vec& x) {
        Vec r(1);
        r(0) = x(0) * x(0) + 1.0;
        return r;
    };
    Vec x0(1);
    x0 << 0.5;
    NewtonOptions opts;
    opts.max_iter = 25;
    CHECK_THROWS_AS(newton_solve(residual, x0, opts), ConvergenceError);
}

TEST_CASE("bisect: linear and trigonometric roots") {
    CHECK(bisect([](double x) { return x - 0.5; }, 0.0, 1.0, 1e-12) ==
          doctest::Approx(0.5).epsilon(1e-10));
    CHECK(bisect([](double x) { return std::cos(x); }, 1.0, 2.0, 1e-12) ==
          doctest::Approx(std::acos(0.0)).epsilon(1e-10));
}

TEST_CASE("bisect: missing sign change throws") {
    CHECK_THROWS_AS(bisect([](double x) { return x + 2.0; }, 0.0, 1.0, 1e-10),
                    BracketError);
}
