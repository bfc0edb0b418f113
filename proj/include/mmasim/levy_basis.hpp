// SPDX-License-Identifier: Apache-2.0
//! \file levy_basis.hpp
//! Characteristic triplet (gamma_int, Sigma_int, nu_int) of the MMA integral
//! int int f(A, t - s) Lambda(dA, ds).
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "conditions.hpp"
#include "integration.hpp"
#include "kernels.hpp"
#include "measures.hpp"

namespace mmasim {

namespace detail {

//! int pi(dA) int ds  m{x : stacked f(A, t_j - s) x in Q} for a measure m given
//! by discrete atoms or by a radial law with discrete spectral part.
inline Estimate query_integral(KernelSpec const& k, MixingMeasure const& pi, SetQuery const& q,
                               LevyMeasure const* discrete, RadialLaw const* law, std::vector<Vector> const* dirs,
                               std::vector<double> const* weights, quad::Settings const& qs)
{
    double const dist = q.distance_from_origin();
    if (!(dist > 0))
        throw DomainError("query set touches the origin");
    if (q.kind == SetQuery::Kind::rectangle && q.lo.size() != k.rows * static_cast<Eigen::Index>(q.times.size()))
        throw DomainError("rectangle query has wrong dimension for the kernel and time list");
    double const t_lo = *std::min_element(q.times.begin(), q.times.end());
    double const t_hi = *std::max_element(q.times.begin(), q.times.end());
    auto const breaks = shifted_breaks(k, q.times);

    if (discrete)
    {
        double xmax = 0;
        for (auto const& x : discrete->atoms())
            xmax = std::max(xmax, x.norm());
        return pi.integrate(
            [&](Matrix const& a) {
                auto [lo, hi] = s_domain(k, a, 0.5 * dist / xmax, t_lo, t_hi, quad::kLadder.back());
                Estimate e;
                if (!(hi > lo))
                    return e;
                // Scan finely enough to separate the level sets of exponential kernels.
                double const step = std::min(scan_step(lo, hi), 1e-3 * (hi - lo) + 1e-12);
                for (std::size_t i = 0; i < discrete->atoms().size(); ++i)
                {
                    auto const& x = discrete->atoms()[i];
                    auto pred = [&](double s) { return q.contains(stacked_kernel(k, a, s, q.times) * x); };
                    double const m = quad::indicator_measure(pred, lo, hi, step);
                    e.value += discrete->rates()[i] * m;
                    e.error += discrete->rates()[i] * 1e-13 * (hi - lo);
                }
                return e;
            },
            quad::kLadder.back(), qs);
    }
    double const budget = 1e-3 * qs.abs_tol;
    return pi.integrate(
        [&](Matrix const& a) {
            double const eta = envelope_level(k, a, law->alpha, law->c * std::pow(dist, -law->alpha), budget);
            auto [lo, hi] = s_domain(k, a, eta, t_lo, t_hi, quad::kLadder.back());
            if (!(hi > lo))
                return Estimate{};
            auto f = [&](double s) {
                return radial_pushforward_mass(*law, *dirs, *weights, stacked_kernel(k, a, s, q.times), q);
            };
            return quad::integrate_pieces(f, lo, hi, breaks, qs);
        },
        quad::kLadder.back(), qs);
}

}  // namespace detail

struct TripletInt
{
    Vector gamma_int;
    Matrix Sigma_int;
    Vector gamma_error;
    Matrix Sigma_error;
    //! Budget for mass neglected by truncating s (absolute, per integral).
    double truncation_bound = 0;
    std::function<Estimate(SetQuery const&)> nu_int_eval;
};

//! Triplet of the infinitely divisible law of X_0.
inline TripletInt compute_triplet(GeneratingQuadruple const& q, KernelSpec const& k, ConditionSettings const& cs = {})
{
    auto const reports = check_existence(q, k, cs);
    std::vector<std::string> failing;
    for (auto const& r : reports)
        if (r.verdict != Verdict::pass)
            failing.push_back(r.id);
    if (!failing.empty())
        throw PreconditionError("compute_triplet: existence conditions fail", failing);

    detail::KernelView view{&k, std::nullopt};
    double const c = detail::integrand_scale(q);
    LevyMeasure const* atoms = q.nu.is_discrete() ? &q.nu : nullptr;
    int const n = k.rows;
    TripletInt t;
    t.gamma_int = Vector::Zero(n);
    t.gamma_error = Vector::Zero(n);
    t.Sigma_int = Matrix::Zero(n, n);
    t.Sigma_error = Matrix::Zero(n, n);
    t.truncation_bound = 1e-3 * cs.quad.abs_tol;
    for (int i = 0; i < n; ++i)
    {
        auto lo = detail::view_integral(
            view, q.pi, [&](Matrix const&, Matrix const& m) { return (m * q.gamma + q.nu.e1(m))(i); },
            detail::nu_decay_power(q.nu, 1.0), c, atoms, cs);
        t.gamma_int(i) = lo.final.value;
        t.gamma_error(i) = lo.final.error;
    }
    if (q.Sigma.cwiseAbs().maxCoeff() > 0)
    {
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
            {
                auto lo = detail::view_integral(
                    view, q.pi, [&](Matrix const&, Matrix const& m) { return (m * q.Sigma * m.transpose())(i, j); },
                    2.0, c, nullptr, cs);
                t.Sigma_int(i, j) = t.Sigma_int(j, i) = lo.final.value;
                t.Sigma_error(i, j) = t.Sigma_error(j, i) = lo.final.error;
            }
    }
    auto const qs = cs.quad;
    t.nu_int_eval = [q, k, qs](SetQuery const& query) {
        if (q.nu.is_discrete())
            return detail::query_integral(k, q.pi, query, &q.nu, nullptr, nullptr, nullptr, qs);
        RadialLaw const law = q.nu.law();
        return detail::query_integral(k, q.pi, query, nullptr, &law, &q.nu.directions(), &q.nu.weights(), qs);
    };
    return t;
}

}  // namespace mmasim
