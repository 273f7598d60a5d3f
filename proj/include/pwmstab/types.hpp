#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace pwmstab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;
using ComplexVec = Eigen::VectorXcd;

/// Base class for everything this library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrix/vector shape mismatch.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Non-finite values where finite ones are required.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Iterative solver exhausted its iteration budget.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Singular (or numerically rank-deficient) linear system inside a solver.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Bisection called without a sign change on the bracket.
class BracketError : public Error {
public:
    using Error::Error;
};

/// Invalid physical parameter or configuration value; names the field.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Config text that cannot be parsed; carries a line number in the message.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Periodic-orbit solve did not converge.
class OrbitNotFoundError : public Error {
public:
    using Error::Error;
};

/// Sensed signal meets the threshold tangentially: the saltation denominator
/// F*xdot(d-) + m_c is (numerically) zero.
class TransversalityError : public Error {
public:
    using Error::Error;
};

/// The on-stage trajectory crosses the threshold before the solved switching
/// instant, so the period-1 orbit is invalid as posed.
class MultiPulseError : public Error {
public:
    using Error::Error;
};

/// A finite-difference probe cycle saturated (no threshold crossing).
class ProbeSaturatedError : public Error {
public:
    using Error::Error;
};

} // namespace pwmstab
