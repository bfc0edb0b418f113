// SPDX-License-Identifier: Apache-2.0
//! \file pointproc.hpp
//! Exceedance point process N_n = sum_i delta_{a_n^{-1} X_i} of an ensemble
//! of path segments and fixed-n diagnostics of its Poisson limit.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "core.hpp"
#include "paths.hpp"

namespace mmasim {

struct ExceedancePoint
{
    std::size_t replica = 0;
    double radius = 0;  //!< a_n^{-1} sup-norm
    double argmax_time = 0;
    Vector direction;
    Vector marginal;  //!< a_n^{-1} X at the argmax
};

struct ExceedancePointSet
{
    std::vector<ExceedancePoint> points;
    std::size_t n = 0;
    double a_n = 1;
    double u = 0;
};

//! Summary point of one replica, or nothing if its scaled sup-norm is <= u.
inline std::optional<ExceedancePoint> exceedance(CadlagPath const& p, std::size_t replica, double a_n, double u)
{
    auto const sn = sup_norm(p);
    double const r = sn.value / a_n;
    if (!(r > u) || !std::isfinite(r))
        return std::nullopt;
    ExceedancePoint e;
    e.replica = replica;
    e.radius = r;
    e.argmax_time = sn.argmax;
    for (auto const& ev : p.events())
        if (ev.time == sn.argmax && ev.left == sn.at_left_limit)
        {
            e.marginal = ev.value / a_n;
            e.direction = ev.value / ev.value.norm();
            break;
        }
    return e;
}

inline ExceedancePointSet build_point_process(std::vector<CadlagPath> const& ensemble, double a_n, double u)
{
    if (!(u > 0))
        throw DomainError("build_point_process: u must be positive");
    if (!(a_n > 0))
        throw DomainError("build_point_process: a_n must be positive");
    ExceedancePointSet s;
    s.n = ensemble.size();
    s.a_n = a_n;
    s.u = u;
    for (std::size_t i = 0; i < ensemble.size(); ++i)
        if (auto e = exceedance(ensemble[i], i, a_n, u))
            s.points.push_back(std::move(*e));
    return s;
}

//! Radial shell (lo, hi].
struct Shell
{
    double lo = 1;
    double hi = 2;
};

//! Shells must be nonempty, bounded away from 0 and pairwise disjoint.
inline void validate_shells(std::vector<Shell> const& shells)
{
    for (auto const& c : shells)
        if (!(c.lo > 0 && c.hi > c.lo))
            throw DomainError("shell must satisfy 0 < lo < hi");
    for (std::size_t i = 0; i < shells.size(); ++i)
        for (std::size_t j = i + 1; j < shells.size(); ++j)
            if (shells[i].lo < shells[j].hi && shells[j].lo < shells[i].hi)
                throw DomainError("shells overlap");
}

struct CellReport
{
    Shell shell;
    std::size_t count = 0;
    double block_mean = 0;
    double block_variance = 0;
    double dispersion = kNaN;  //!< variance / mean over blocks
    double chi_square = kNaN;  //!< Poisson goodness of fit of block counts
    int dof = 0;
    double p_value = kNaN;
};

struct PoissonDiagnostics
{
    bool sufficient = false;
    std::string reason;
    std::size_t blocks = 0;
    std::vector<CellReport> cells;
    std::vector<std::vector<double>> correlation;  //!< across blocks, cell by cell
};

//! Block counts per shell: replica i belongs to block floor(i B / n).
inline PoissonDiagnostics poisson_limit_diagnostics(ExceedancePointSet const& pp, std::vector<Shell> const& shells,
                                                    std::size_t blocks)
{
    validate_shells(shells);
    PoissonDiagnostics out;
    out.blocks = blocks;
    if (pp.n < 2 || blocks < 2 || blocks > pp.n)
    {
        out.reason = "insufficient data: need at least two replicas and 2 <= blocks <= n";
        for (auto const& c : shells)
            out.cells.push_back({c});
        for (auto const& p : pp.points)
            for (auto& c : out.cells)
                if (p.radius > c.shell.lo && p.radius <= c.shell.hi)
                    ++c.count;
        return out;
    }
    out.sufficient = true;
    auto const nc = shells.size();
    std::vector<std::vector<double>> counts(nc, std::vector<double>(blocks, 0.0));
    for (auto const& p : pp.points)
    {
        auto const b = std::min(blocks - 1, p.replica * blocks / pp.n);
        for (std::size_t c = 0; c < nc; ++c)
            if (p.radius > shells[c].lo && p.radius <= shells[c].hi)
                counts[c][b] += 1;
    }
    double const nb = static_cast<double>(blocks);
    std::vector<double> means(nc);
    std::vector<double> sds(nc);
    for (std::size_t c = 0; c < nc; ++c)
    {
        CellReport r;
        r.shell = shells[c];
        double sum = 0;
        for (double v : counts[c])
            sum += v;
        r.count = static_cast<std::size_t>(sum);
        r.block_mean = sum / nb;
        double ss = 0;
        for (double v : counts[c])
            ss += (v - r.block_mean) * (v - r.block_mean);
        r.block_variance = ss / (nb - 1);
        means[c] = r.block_mean;
        sds[c] = std::sqrt(r.block_variance);
        if (r.block_mean > 0)
        {
            r.dispersion = r.block_variance / r.block_mean;
            // Goodness of fit: bins 0..K-1 and a tail bin, K chosen so every bin expects >= 5.
            boost::math::poisson_distribution<double> pois(r.block_mean);
            std::vector<double> expected;
            std::vector<double> observed;
            double cum = 0;
            int kmax = 0;
            while (true)
            {
                double const pk = boost::math::pdf(pois, kmax);
                if (nb * pk < 5 || nb * (1 - cum - pk) < 5)
                    break;
                expected.push_back(nb * pk);
                cum += pk;
                ++kmax;
            }
            expected.push_back(nb * (1 - cum));
            observed.assign(expected.size(), 0.0);
            for (double v : counts[c])
            {
                auto const k = static_cast<std::size_t>(v);
                observed[std::min(k, observed.size() - 1)] += 1;
            }
            if (expected.size() >= 2)
            {
                double chi = 0;
                for (std::size_t i = 0; i < expected.size(); ++i)
                    chi += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
                r.chi_square = chi;
                r.dof = static_cast<int>(expected.size()) - 2;  // one fitted parameter
                if (r.dof >= 1)
                    r.p_value = boost::math::cdf(
                        boost::math::complement(boost::math::chi_squared_distribution<double>(r.dof), chi));
            }
        }
        out.cells.push_back(r);
    }
    out.correlation.assign(nc, std::vector<double>(nc, kNaN));
    for (std::size_t a = 0; a < nc; ++a)
        for (std::size_t b = 0; b < nc; ++b)
        {
            if (!(sds[a] > 0 && sds[b] > 0))
                continue;
            double s = 0;
            for (std::size_t i = 0; i < blocks; ++i)
                s += (counts[a][i] - means[a]) * (counts[b][i] - means[b]);
            out.correlation[a][b] = s / (nb - 1) / (sds[a] * sds[b]);
        }
    return out;
}

}  // namespace mmasim
