// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mmasim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

//! Raised when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

//! Raised when an operation's precondition (typically a condition check) fails.
class PreconditionError : public std::runtime_error
{
  public:
    PreconditionError(std::string message, std::vector<std::string> failing)
        : std::runtime_error(std::move(message)), failing_(std::move(failing))
    {
    }

    std::vector<std::string> const& failing_conditions() const noexcept
    {
        return failing_;
    }

  private:
    std::vector<std::string> failing_;
};

//! Raised when an operation does not apply to the supplied objects.
class NotApplicableError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Value with an absolute error estimate.
struct Estimate
{
    double value = 0;
    double error = 0;

    Estimate& operator+=(Estimate const& other)
    {
        value += other.value;
        error += other.error;
        return *this;
    }
};

inline Estimate operator+(Estimate a, Estimate const& b)
{
    return a += b;
}

inline Estimate operator*(double w, Estimate const& e)
{
    return {w * e.value, std::abs(w) * e.error};
}

//! Induced 2-norm (largest singular value); exact for 1x1 and vectors.
inline double op_norm(Matrix const& m)
{
    if (m.size() == 0)
        return 0;
    if (m.rows() == 1 || m.cols() == 1)
        return m.norm();
    if (m.rows() == 2 && m.cols() == 2)
    {
        double const a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
        return 0.5 * (std::hypot(a + d, c - b) + std::hypot(a - d, b + c));
    }
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

inline bool is_finite(double x)
{
    return std::isfinite(x);
}

}  // namespace mmasim
