// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "core.hpp"

namespace mmasim {

inline bool is_diagonal(Matrix const& a)
{
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (i != j && a(i, j) != 0)
                return false;
    return true;
}

inline bool is_symmetric(Matrix const& a, double tol = 1e-12)
{
    return a.rows() == a.cols() && (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, a.cwiseAbs().maxCoeff());
}

//! e^{A s}; diagonal matrices take the elementwise shortcut.
namespace detail {

//! e^M for 2x2 M: e^m (ch(q) I + sh(q)/q (M - m I)), m = tr M / 2, q^2 = m^2 - det M.
inline Matrix expm2(Matrix const& mm)
{
    double const m = 0.5 * (mm(0, 0) + mm(1, 1));
    double const q2 = m * m - (mm(0, 0) * mm(1, 1) - mm(0, 1) * mm(1, 0));
    double ch = 1;
    double shq = 1;  // sh(q) / q
    if (q2 > 1e-16)
    {
        double const q = std::sqrt(q2);
        ch = std::cosh(q);
        shq = std::sinh(q) / q;
    }
    else if (q2 < -1e-16)
    {
        double const q = std::sqrt(-q2);
        ch = std::cos(q);
        shq = std::sin(q) / q;
    }
    else
    {
        ch = 1 + q2 / 2;
        shq = 1 + q2 / 6;
    }
    Matrix out = shq * mm;
    out(0, 0) += ch - shq * m;
    out(1, 1) += ch - shq * m;
    return std::exp(m) * out;
}

}  // namespace detail

inline Matrix expm(Matrix const& a, double s)
{
    if (a.size() == 1)
        return Matrix::Constant(1, 1, std::exp(a(0, 0) * s));
    if (is_diagonal(a))
    {
        Matrix out = Matrix::Zero(a.rows(), a.cols());
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out(i, i) = std::exp(a(i, i) * s);
        return out;
    }
    if (a.rows() == 2 && std::abs(a(0, 0) - a(1, 1)) * std::abs(s) < 400 && (a.cwiseAbs().maxCoeff() * std::abs(s)) < 400)
        return detail::expm2(a * s);
    Matrix as = a * s;
    return as.exp();
}

//! Largest real part of the eigenvalues of a square matrix.
inline double spectral_abscissa(Matrix const& a)
{
    if (a.size() == 1)
        return a(0, 0);
    Eigen::EigenSolver<Matrix> es(a, false);
    return es.eigenvalues().real().maxCoeff();
}

//! True when every eigenvalue has strictly negative real part.
inline bool is_stable_matrix(Matrix const& a)
{
    return a.rows() == a.cols() && a.rows() > 0 && spectral_abscissa(a) < 0;
}

//! Smallest eigenvalue of a symmetric matrix.
inline double min_symmetric_eigenvalue(Matrix const& a)
{
    if (a.size() == 0)
        return 0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace mmasim
