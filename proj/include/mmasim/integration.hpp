// SPDX-License-Identifier: Apache-2.0
//! \file integration.hpp
//! Integrals over (A, s) of functionals of f(A, s): query sets for
//! pushforward measures, s-domain truncation and breakpoint bookkeeping.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "core.hpp"
#include "kernels.hpp"
#include "measures.hpp"
#include "quad.hpp"

namespace mmasim {

//! Borel query set for pushforward measures of the stacked vector
//! (f(A, t_1 - s) x, ..., f(A, t_k - s) x) in R^{n k}.
//!
//! Radial queries ask max_j ||y_j|| > r; rectangles are half-open (lo, hi]
//! in the stacked coordinates.
struct SetQuery
{
    enum class Kind
    {
        radial,
        rectangle
    };

    Kind kind = Kind::radial;
    double r = 1;
    Vector lo;
    Vector hi;
    std::vector<double> times{0.0};

    static SetQuery radial(double r, std::vector<double> times = {0.0})
    {
        if (!(r > 0))
            throw DomainError("radial query: r must be positive");
        SetQuery q;
        q.kind = Kind::radial;
        q.r = r;
        q.times = std::move(times);
        return q;
    }

    static SetQuery rectangle(Vector lo, Vector hi, std::vector<double> times = {0.0})
    {
        if (lo.size() != hi.size() || lo.size() == 0)
            throw DomainError("rectangle query: bounds differ in size");
        for (Eigen::Index i = 0; i < lo.size(); ++i)
            if (!(hi(i) > lo(i)))
                throw DomainError("rectangle query: empty side");
        SetQuery q;
        q.kind = Kind::rectangle;
        q.lo = std::move(lo);
        q.hi = std::move(hi);
        q.times = std::move(times);
        return q;
    }

    //! Dimension per time slot of the stacked vector.
    Eigen::Index slot(Eigen::Index stacked_size) const
    {
        return stacked_size / static_cast<Eigen::Index>(times.size());
    }

    bool contains(Vector const& y) const
    {
        if (kind == Kind::radial)
        {
            Eigen::Index const n = slot(y.size());
            double m = 0;
            for (std::size_t j = 0; j < times.size(); ++j)
                m = std::max(m, y.segment(static_cast<Eigen::Index>(j) * n, n).norm());
            return m > r;
        }
        for (Eigen::Index i = 0; i < y.size(); ++i)
            if (!(y(i) > lo(i) && y(i) <= hi(i)))
                return false;
        return true;
    }

    //! {rho > 0 : rho v in B} as an interval (a, b); empty when a >= b.
    std::pair<double, double> ray_interval(Vector const& v) const
    {
        if (kind == Kind::radial)
        {
            Eigen::Index const n = slot(v.size());
            double m = 0;
            for (std::size_t j = 0; j < times.size(); ++j)
                m = std::max(m, v.segment(static_cast<Eigen::Index>(j) * n, n).norm());
            if (m == 0)
                return {kInf, kInf};
            return {r / m, kInf};
        }
        double a = 0;
        double b = kInf;
        for (Eigen::Index i = 0; i < v.size(); ++i)
        {
            double const vi = v(i);
            if (vi > 0)
            {
                a = std::max(a, lo(i) / vi);
                b = std::min(b, hi(i) / vi);
            }
            else if (vi < 0)
            {
                a = std::max(a, hi(i) / vi);
                b = std::min(b, lo(i) / vi);
            }
            else if (!(lo(i) < 0 && hi(i) >= 0))
            {
                return {kInf, kInf};
            }
        }
        return {a, b};
    }

    //! Lower bound on max_j ||y_j|| over the closure of the set; 0 when it touches the origin.
    double distance_from_origin() const
    {
        if (kind == Kind::radial)
            return r;
        double d = 0;
        for (Eigen::Index i = 0; i < lo.size(); ++i)
        {
            if (lo(i) >= 0)
                d = std::max(d, lo(i));
            else if (hi(i) <= 0)
                d = std::max(d, -hi(i));
        }
        return d;
    }

    SetQuery scaled(double t) const
    {
        SetQuery q = *this;
        if (kind == Kind::radial)
            q.r *= t;
        else
        {
            q.lo *= t;
            q.hi *= t;
        }
        return q;
    }
};

//! Stacked kernel values [f(A, t_1 - s); ...; f(A, t_k - s)].
inline Matrix stacked_kernel(KernelSpec const& k, Matrix const& a, double s, std::vector<double> const& times)
{
    Matrix out(k.rows * static_cast<Eigen::Index>(times.size()), k.cols);
    for (std::size_t j = 0; j < times.size(); ++j)
        out.middleRows(static_cast<Eigen::Index>(j) * k.rows, k.rows) = k.eval(a, times[j] - s);
    return out;
}

//! Mass that a radial law with discrete spectral part puts on {x : M x in B}.
inline double radial_pushforward_mass(RadialLaw const& law, std::vector<Vector> const& dirs,
                                      std::vector<double> const& weights, Matrix const& m, SetQuery const& q)
{
    double t = 0;
    for (std::size_t j = 0; j < dirs.size(); ++j)
    {
        auto [a, b] = q.ray_interval(m * dirs[j]);
        if (a < b)
            t += weights[j] * law.mass(a, b);
    }
    return t;
}

//! nu{x : M x in B}.
inline double pushforward_mass(LevyMeasure const& nu, Matrix const& m, SetQuery const& q)
{
    if (nu.is_discrete())
    {
        double t = 0;
        for (std::size_t i = 0; i < nu.atoms().size(); ++i)
            if (q.contains(m * nu.atoms()[i]))
                t += nu.rates()[i];
        return t;
    }
    return radial_pushforward_mass(nu.law(), nu.directions(), nu.weights(), m, q);
}

//! Scan width for transition searches on [lo, hi].
inline double scan_step(double lo, double hi)
{
    return std::max((hi - lo) / 20000.0, 1e-12);
}

//! The s-range where some t - s, t in [t_lo, t_hi], falls in the kernel's
//! truncated support at envelope level eta (or within the ladder level when no
//! envelope is known).
inline std::pair<double, double> s_domain(KernelSpec const& k, Matrix const& a, double eta, double t_lo, double t_hi,
                                          double level)
{
    double lo_u = k.support_lo;
    double hi_u = k.support_hi;
    if (k.has_envelope())
    {
        auto [l, h] = k.s_range(a, eta);
        lo_u = l;
        hi_u = h;
    }
    else
    {
        lo_u = std::max(lo_u, -level);
        hi_u = std::min(hi_u, level);
        if (k.causal)
            lo_u = std::max(lo_u, 0.0);
    }
    return {t_lo - hi_u, t_hi - lo_u};
}

//! Breakpoints t - b in s for kernel breakpoints b and times t.
inline std::vector<double> shifted_breaks(KernelSpec const& k, std::vector<double> const& times)
{
    std::vector<double> out;
    for (double t : times)
    {
        for (double b : k.breakpoints)
            out.push_back(t - b);
        if (std::isfinite(k.support_lo))
            out.push_back(t - k.support_lo);
        if (std::isfinite(k.support_hi))
            out.push_back(t - k.support_hi);
    }
    return out;
}

//! Envelope level below which neglected kernel mass is at most \c budget for
//! integrands bounded by C ||f||^p: needs C eta^p / (p rho) <= budget.
inline double envelope_level(KernelSpec const& k, Matrix const& a, double p, double c, double budget)
{
    if (!k.has_envelope())
        return 1e-300;
    double const rho = k.decay_rho(a);
    double const eta = std::pow(budget * p * rho / std::max(c, 1e-300), 1 / p);
    return std::clamp(eta, 1e-300, 1e-3);
}

//! sup_A kappa(A) over the support of pi, or +inf when it grows without bound.
inline double kappa_sup(KernelSpec const& k, MixingMeasure const& pi)
{
    if (k.global_bound)
        return *k.global_bound;
    if (!k.has_envelope())
        return kInf;
    if (pi.is_discrete())
    {
        double m = 0;
        for (auto const& at : pi.atoms())
            m = std::max(m, k.bound_kappa(at.A));
        return m;
    }
    auto [lo, hi] = pi.r_support();
    double m = 0;
    std::vector<double> probe{std::max(lo, std::exp(-40.0)), std::max(lo, std::exp(-20.0)), std::max(lo, 1e-3), 1.0, hi};
    for (double r : probe)
        if (r > 0)
            m = std::max(m, k.bound_kappa(pi.matrix_for(r)));
    // Growth between the two smallest probes means the envelope blows up as R -> 0.
    double const k40 = k.bound_kappa(pi.matrix_for(probe[0]));
    double const k20 = k.bound_kappa(pi.matrix_for(probe[1]));
    if (k40 > 1.01 * k20)
        return kInf;
    return m;
}

}  // namespace mmasim
