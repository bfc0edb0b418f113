// SPDX-License-Identifier: Apache-2.0
//! \file tails.hpp
//! Empirical regular variation: Hill estimator, spectral samples of path
//! exceedances, the limit measure mu_X and relative-compactness rates.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "core.hpp"
#include "integration.hpp"
#include "kernels.hpp"
#include "levy_basis.hpp"
#include "measures.hpp"
#include "paths.hpp"

namespace mmasim {

struct TailEstimate
{
    double alpha_hat = 0;
    std::size_t k = 0;
    std::size_t n = 0;
    double stderr_ = 0;  //!< alpha_hat / sqrt(k)
    double threshold = 0;
};

//! Hill estimator from the k largest of n positive samples.
inline TailEstimate hill(std::vector<double> samples, std::size_t k)
{
    auto const n = samples.size();
    if (k == 0 || k >= n)
        throw DomainError("hill: need 0 < k < n");
    auto const kth = samples.begin() + static_cast<std::ptrdiff_t>(k);
    std::nth_element(samples.begin(), kth, samples.end(), std::greater<>());
    double const thr = *kth;
    if (!(thr > 0))
        throw DomainError("hill: samples must be positive");
    double sum = 0;
    for (auto it = samples.begin(); it != kth; ++it)
        sum += std::log(*it / thr);
    if (!(sum > 0))
        throw DomainError("hill: top order statistics are all equal");
    TailEstimate t;
    t.k = k;
    t.n = n;
    t.threshold = thr;
    t.alpha_hat = static_cast<double>(k) / sum;
    t.stderr_ = t.alpha_hat / std::sqrt(static_cast<double>(k));
    return t;
}

//! Default order-statistic count ceil(n^{2/3}).
inline std::size_t default_hill_k(std::size_t n)
{
    auto k = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(n), 2.0 / 3.0) - 1e-9));
    return std::min(k, n > 1 ? n - 1 : 0);
}

struct SpectralSample
{
    std::size_t index = 0;  //!< position of the path in the input
    CadlagPath normalized_path;
    double radius = 0;
    double argmax_time = 0;
    Vector direction_at_max;
};

//! Normalized paths of every input path with sup-norm above u.
inline std::vector<SpectralSample> spectral_harvest(std::vector<CadlagPath> const& paths, double u)
{
    if (!(u > 0))
        throw DomainError("spectral_harvest: u must be positive");
    std::vector<SpectralSample> out;
    for (std::size_t i = 0; i < paths.size(); ++i)
    {
        auto const sn = sup_norm(paths[i]);
        if (!(sn.value > u))
            continue;
        SpectralSample s;
        s.index = i;
        s.radius = sn.value;
        s.argmax_time = sn.argmax;
        s.normalized_path = paths[i].scaled(1 / sn.value);
        for (auto const& e : s.normalized_path.events())
            if (e.time == sn.argmax && e.left == sn.at_left_limit)
            {
                s.direction_at_max = e.value / e.value.norm();
                break;
            }
        out.push_back(std::move(s));
    }
    return out;
}

struct LimitMeasureQuery
{
    SetQuery set;
    double value = kNaN;
    double error_bound = kNaN;
};

//! mu_X(B) = int int int 1_B(f(A, s) x) mu_nu(dx) ds pi(dA) for the power-law limit mu_nu.
inline LimitMeasureQuery mu_x_query(GeneratingQuadruple const& q, KernelSpec const& k, SetQuery const& set,
                                    quad::Settings const& qs = {1e-12, 1e-12, 40})
{
    if (q.nu.is_discrete())
        throw NotApplicableError("mu_x_query: driver is not regularly varying");
    RadialLaw const law = q.nu.limit_law();
    auto const e = detail::query_integral(k, q.pi, set, nullptr, &law, &q.nu.directions(), &q.nu.weights(), qs);
    return {set, e.value, e.error};
}

//! a_n with n mu_X(||x|| > a_n) = 1 for the radial marginal functional at time 0.
inline double default_scaling(GeneratingQuadruple const& q, KernelSpec const& k, double n)
{
    double const m1 = mu_x_query(q, k, SetQuery::radial(1.0)).value;
    return std::pow(n * m1, 1 / q.nu.law().alpha);
}

//! a_n = (n c)^{1/alpha} from the driver tail constant alone.
inline double power_scaling(GeneratingQuadruple const& q, double n)
{
    return std::pow(n * q.nu.law().c, 1 / q.nu.law().alpha);
}

struct RelcompRates
{
    std::size_t n = 0;
    //! n P(a_n^{-1} w(X, [0, delta)) >= eps), n P(a_n^{-1} w(X, [1 - delta, 1)) >= eps),
    //! n P(a_n^{-1} w''(X, delta) >= eps)
    std::array<double, 3> rate{};
    std::array<double, 3> stderr_{};
    std::array<std::size_t, 3> count{};
};

//! Streaming accumulator of the three relative-compactness indicators.
class RelcompAccumulator
{
  public:
    RelcompAccumulator(double a_n, double eps, double delta) : a_(a_n), eps_(eps), delta_(delta)
    {
        if (!(a_n > 0))
            throw DomainError("relcomp: a_n must be positive");
        if (!(delta > 0 && delta <= 1))
            throw DomainError("relcomp: delta must lie in (0, 1]");
    }

    //! Indicator triple of one path.
    std::array<bool, 3> indicators(CadlagPath const& p) const
    {
        double const lim = eps_ * a_;
        return {modulus_w(p, {0, delta_, false}) >= lim, modulus_w(p, {1 - delta_, 1, false}) >= lim,
                modulus_wpp(p, delta_) >= lim};
    }

    void add(std::array<bool, 3> const& ind)
    {
        ++n_;
        for (int i = 0; i < 3; ++i)
            count_[i] += ind[i] ? 1 : 0;
    }

    void add(CadlagPath const& p) { add(indicators(p)); }

    RelcompRates rates() const
    {
        RelcompRates r;
        r.n = n_;
        r.count = count_;
        for (int i = 0; i < 3; ++i)
        {
            if (n_ == 0)
                continue;
            double const nn = static_cast<double>(n_);
            double const p = static_cast<double>(count_[i]) / nn;
            r.rate[i] = nn * p;
            r.stderr_[i] = nn * std::sqrt(p * (1 - p) / nn);
        }
        return r;
    }

  private:
    double a_;
    double eps_;
    double delta_;
    std::size_t n_ = 0;
    std::array<std::size_t, 3> count_{};
};

inline RelcompRates relcomp_diagnostics(std::vector<CadlagPath> const& paths, double a_n, double eps, double delta)
{
    RelcompAccumulator acc(a_n, eps, delta);
    for (auto const& p : paths)
        acc.add(p);
    return acc.rates();
}

struct EmpiricalTail
{
    double value = 0;   //!< n x fraction in a_n^{-1} B
    double stderr_ = 0; //!< binomial standard error of value
    std::size_t count = 0;
};

//! n P-hat(a_n^{-1} X in B) over n marginal samples (stacked over the query times).
inline EmpiricalTail empirical_tail_measure(std::vector<Vector> const& marginals, double a_n, SetQuery const& b)
{
    if (!(b.distance_from_origin() > 0))
        throw DomainError("empirical_tail_measure: set touches the origin");
    if (!(a_n > 0))
        throw DomainError("empirical_tail_measure: a_n must be positive");
    EmpiricalTail out;
    for (auto const& x : marginals)
        if (b.contains(x / a_n))
            ++out.count;
    double const n = static_cast<double>(marginals.size());
    if (n == 0)
        return out;
    double const p = static_cast<double>(out.count) / n;
    out.value = static_cast<double>(out.count);
    out.stderr_ = std::sqrt(n * p * (1 - p));
    return out;
}

//! Stacked marginal vector (X_{t_1}, ..., X_{t_k}) of a path (right values).
inline Vector path_marginal(CadlagPath const& p, std::vector<double> const& times)
{
    auto const n = p.dim();
    Vector out(n * static_cast<Eigen::Index>(times.size()));
    for (std::size_t j = 0; j < times.size(); ++j)
    {
        auto const& g = p.grid();
        auto it = std::lower_bound(g.begin(), g.end(), times[j]);
        if (it == g.end() || *it != times[j])
            throw DomainError("marginal time is not a grid time");
        out.segment(static_cast<Eigen::Index>(j) * n, n) = p.values()[static_cast<std::size_t>(it - g.begin())];
    }
    return out;
}

}  // namespace mmasim
