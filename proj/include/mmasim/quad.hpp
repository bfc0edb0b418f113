// SPDX-License-Identifier: Apache-2.0
//! \file quad.hpp
//! One-dimensional integration helpers: adaptive Gauss-Kronrod over
//! piecewise-smooth integrands, level-set measures of indicator integrands,
//! and the truncation ladder used to certify divergence.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "core.hpp"

namespace mmasim::quad {

struct Settings
{
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    unsigned max_depth = 40;
};

//! Adaptive G7/K15 on a finite or infinite interval.
template<class F>
Estimate integrate(F&& f, double a, double b, Settings const& s = {})
{
    if (!(b > a))
        return {};
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    double err = 0;
    double l1 = 0;
    // Coarse pass to translate the absolute tolerance into Boost's relative one.
    double const coarse = GK::integrate(f, a, b, 0, 0.0, &err, &l1);
    if (!std::isfinite(coarse))
        return {coarse, kInf};
    if (l1 == 0)
        return {0, err};
    double const tol = std::max(s.rel_tol, s.abs_tol / l1);
    if (err <= tol * l1)
        return {coarse, err};
    // Boost compares an error estimate in [-1, 1] units with a tolerance scaled by the
    // half-width; below half-width 2 eps / tol every piece splits again, so stop there.
    double const floor_width = 8 * std::numeric_limits<double>::epsilon() / tol;
    // Infinite ranges are mapped onto a unit interval first.
    double const half = std::isfinite(a) && std::isfinite(b) ? 0.5 * (b - a) : 0.5;
    auto const depth_cap = static_cast<unsigned>(std::clamp(std::floor(std::log2(half / floor_width)), 1.0, 64.0));
    double const v = GK::integrate(f, a, b, std::min(s.max_depth, depth_cap), tol, &err, &l1);
    return {v, err};
}

//! Sorts, deduplicates and clips breakpoints to [a, b], endpoints included.
inline std::vector<double> pieces(double a, double b, std::vector<double> breaks)
{
    std::vector<double> out{a};
    std::sort(breaks.begin(), breaks.end());
    for (double x : breaks)
    {
        if (x > out.back() && x < b)
            out.push_back(x);
    }
    out.push_back(b);
    return out;
}

//! Integrates each smooth piece between consecutive breakpoints.
template<class F>
Estimate integrate_pieces(F&& f, double a, double b, std::vector<double> breaks, Settings const& s = {})
{
    Estimate total;
    if (!(b > a))
        return total;
    auto const knots = pieces(a, b, std::move(breaks));
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
        total += integrate(f, knots[i], knots[i + 1], s);
    return total;
}

//! Points in (a, b) where a piecewise-constant predicate changes value.
//!
//! The predicate is sampled on a uniform scan of width \c step and every
//! sign change is bisected to machine resolution; intervals holding two
//! changes closer than \c step are not resolved.
template<class P>
std::vector<double> transitions(P&& pred, double a, double b, double step)
{
    std::vector<double> out;
    if (!(b > a))
        return out;
    auto const n = static_cast<std::size_t>(std::ceil((b - a) / step));
    double x0 = a;
    bool v0 = pred(a);
    for (std::size_t i = 1; i <= n; ++i)
    {
        double const x1 = (i == n) ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
        bool const v1 = pred(x1);
        if (v1 != v0)
        {
            double lo = x0;
            double hi = x1;
            for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(hi)); ++it)
            {
                double const mid = 0.5 * (lo + hi);
                if (pred(mid) == v0)
                    lo = mid;
                else
                    hi = mid;
            }
            out.push_back(0.5 * (lo + hi));
        }
        x0 = x1;
        v0 = v1;
    }
    return out;
}

//! Lebesgue measure of {x in [a, b] : pred(x)} for piecewise-constant predicates.
template<class P>
double indicator_measure(P&& pred, double a, double b, double step)
{
    if (!(b > a))
        return 0;
    auto const cuts = pieces(a, b, transitions(pred, a, b, step));
    double total = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    {
        if (pred(0.5 * (cuts[i] + cuts[i + 1])))
            total += cuts[i + 1] - cuts[i];
    }
    return total;
}

//! Crossings of a continuous function through \c level on [a, b].
template<class G>
std::vector<double> crossings(G&& g, double level, double a, double b, double step)
{
    return transitions([&](double x) { return g(x) > level; }, a, b, step);
}

//! Truncation levels of the divergence ladder.
inline constexpr std::array<double, 3> kLadder{10.0, 20.0, 40.0};

struct LadderOutcome
{
    std::array<double, 3> partials{};
    Estimate final;  //!< value at the deepest level
    bool divergent = false;
};

//! Evaluates an integral at truncation levels S in {10, 20, 40}.
//!
//! Divergence is certified when the partial values grow by at least
//! \c growth between successive levels (or stop being finite).
template<class F>
LadderOutcome ladder(F&& at_level, double growth = 1.5)
{
    LadderOutcome out;
    Estimate last;
    for (std::size_t i = 0; i < kLadder.size(); ++i)
    {
        last = at_level(kLadder[i]);
        out.partials[i] = last.value;
    }
    out.final = last;
    auto const& p = out.partials;
    bool const nonfinite = !std::isfinite(p[2]);
    bool const grows = p[0] > 0 && p[1] >= growth * p[0] && p[2] >= growth * p[1];
    out.divergent = nonfinite || grows;
    // Converged case: the change between the two deepest levels bounds the tail.
    if (!out.divergent)
        out.final.error += std::abs(p[2] - p[1]);
    return out;
}

}  // namespace mmasim::quad
