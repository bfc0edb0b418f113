// SPDX-License-Identifier: Apache-2.0
//! \file simulate.hpp
//! Sample paths of MMA processes on [0, 1] from Poisson clouds, assembled by
//! direct summation and by the ODE representation, with the big/small-jump
//! decomposition and reproducible ensembles.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "conditions.hpp"
#include "core.hpp"
#include "kernels.hpp"
#include "linalg.hpp"
#include "measures.hpp"
#include "paths.hpp"
#include "random.hpp"

namespace mmasim {

enum class SmallJumps
{
    drop,
    gaussian
};

struct TruncationSettings
{
    double eps = 1;                //!< jumps with ||x|| <= eps are not sampled
    std::optional<double> s_max;   //!< burn-in length override
    SmallJumps small_jumps = SmallJumps::drop;
    double gaussian_rate = 64;     //!< Gaussian impulses per unit time
    double burn_in_tol = 1e-6;
};

//! Everything needed to turn a replica index into a path.
struct SimulationModel
{
    GeneratingQuadruple quad;
    KernelSpec kernel;
    TruncationSettings trunc;
    Vector drift;        //!< drift of the truncated driver, b_eps
    Vector drift_term;   //!< int int f(A, u) b_eps du pi(dA), constant in t
    Matrix gauss_cov;    //!< covariance per unit time of the Gaussian surrogate
    Matrix gauss_root;   //!< gauss_cov = root root^T
    double s_max = 0;
    double window_lo = 0;
    double window_hi = 1;
    double jump_rate = 0;       //!< nu(||x|| > eps)
    double burn_in_bound = 0;   //!< kappa e^{-rho S_max} x rate x E||x||
    std::vector<std::string> warnings;
};

//! Identifiers of conditions that block simulation (existence, and for supOU kernels
//! the log moment and kappa^2/rho integrability).
inline std::vector<std::string> failing_preconditions(GeneratingQuadruple const& q, KernelSpec const& k,
                                                      ConditionSettings const& cs = {})
{
    std::vector<std::string> out;
    for (auto const& r : check_existence(q, k, cs))
        if (r.verdict != Verdict::pass)
            out.push_back(r.id);
    if (k.family == KernelFamily::supou && k.has_envelope())
    {
        for (auto const& r : check_supou(q, k, 1.0, cs))
            if ((r.id == "SUPOU-LOG" || r.id == "SUPOU-K2R") && r.verdict != Verdict::pass)
                out.push_back(r.id);
    }
    return out;
}

namespace detail {

inline double mean_jump_size(LevyMeasure const& nu, double eps)
{
    double const rate = nu.tail_mass(eps);
    if (!(rate > 0))
        return 0;
    double const m = nu.abs_moment(1, eps, kInf);
    if (std::isfinite(m))
        return m / rate;
    // Infinite mean: use the 1 - 1e-3 quantile of ||x|| instead.
    auto const& law = nu.law();
    return std::max(eps, law.r_min) * std::pow(1e-3, -1 / law.alpha);
}

inline Matrix kernel_integral_matrix(KernelSpec const& k, MixingMeasure const& pi, double level)
{
    Matrix out = Matrix::Zero(k.rows, k.cols);
    for (int i = 0; i < k.rows; ++i)
        for (int j = 0; j < k.cols; ++j)
        {
            auto e = pi.integrate(
                [&](Matrix const& a) {
                    auto [lo, hi] = s_domain(k, a, 1e-16, 0, 0, level);
                    return quad::integrate_pieces([&](double s) { return k.eval(a, -s)(i, j); }, lo, hi,
                                                  shifted_breaks(k, {0.0}));
                },
                quad::kLadder.back());
            out(i, j) = e.value;
        }
    return out;
}

}  // namespace detail

//! Builds a simulation model; refuses configurations whose preconditions fail unless forced.
inline SimulationModel make_model(GeneratingQuadruple q, KernelSpec k, TruncationSettings trunc, bool force = false,
                                  ConditionSettings const& cs = {})
{
    q.validate();
    if (!(trunc.eps > 0))
        throw DomainError("truncation eps must be positive");
    if (q.dim() != k.cols)
        throw DomainError("kernel input dimension does not match the driver");
    SimulationModel m;
    auto failing = failing_preconditions(q, k, cs);
    if (!failing.empty())
    {
        if (!force)
            throw PreconditionError("simulation preconditions fail", failing);
        std::string w = "forced past failing conditions:";
        for (auto const& id : failing)
            w += " " + id;
        m.warnings.push_back(w);
    }
    int const d = q.dim();
    double const eps = trunc.eps;
    Vector b = q.gamma;
    if (eps < 1)
        b -= q.nu.first_moment(eps, 1);
    else if (eps > 1)
        b += q.nu.first_moment(1, eps);
    m.drift = b;

    m.gauss_cov = q.Sigma;
    if (trunc.small_jumps == SmallJumps::gaussian)
        m.gauss_cov += q.nu.second_moment(0, eps);
    else if (!std::isfinite(q.nu.abs_moment(1, 0, eps)))
        m.warnings.push_back("small jumps of an infinite-variation driver dropped");
    if (m.gauss_cov.cwiseAbs().maxCoeff() > 0)
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m.gauss_cov + m.gauss_cov.transpose()));
        m.gauss_root = es.eigenvectors() * es.eigenvalues().cwiseMax(0).cwiseSqrt().asDiagonal();
    }
    else
        m.gauss_root = Matrix::Zero(d, d);

    m.jump_rate = q.nu.tail_mass(eps);
    double const mean_size = std::max(detail::mean_jump_size(q.nu, eps), 1e-300);
    double const mass = std::max(m.jump_rate + (m.gauss_cov.cwiseAbs().maxCoeff() > 0 ? 1.0 : 0.0), 1e-300);

    // Burn-in: kappa e^{-rho S} rate E||x|| < tol for every pi-atom (or for the 1e-3 lower R quantile).
    double s = 0;
    double bound = 0;
    if (trunc.s_max)
        s = *trunc.s_max;
    if (k.has_envelope())
    {
        std::vector<Matrix> mats;
        if (q.pi.is_discrete())
            for (auto const& at : q.pi.atoms())
                mats.push_back(at.A);
        else
        {
            mats.push_back(q.pi.matrix_for(q.pi.lower_quantile(1e-3)));
            m.warnings.push_back("burn-in bound holds for mixing mass above the 1e-3 quantile");
        }
        double need = 0;
        for (auto const& a : mats)
        {
            double const kap = k.bound_kappa(a);
            double const rho = k.decay_rho(a);
            need = std::max(need, std::log(kap * mass * mean_size / trunc.burn_in_tol) / rho);
        }
        if (!trunc.s_max)
            s = std::max(need, 0.0);
        for (auto const& a : mats)
            bound = std::max(bound, k.bound_kappa(a) * std::exp(-k.decay_rho(a) * s) * mass * mean_size);
    }
    else if (std::isfinite(k.support_hi) && std::isfinite(k.support_lo))
    {
        if (!trunc.s_max)
            s = std::max(k.support_hi, -k.support_lo);
        bound = 0;
    }
    else if (!trunc.s_max)
        throw DomainError("kernel without decay data needs an explicit s_max");
    m.s_max = s;
    m.burn_in_bound = bound;
    m.window_lo = -std::min(s, std::isfinite(k.support_hi) ? k.support_hi : kInf);
    m.window_hi = k.causal ? 1.0 : 1.0 + std::min(s, std::isfinite(k.support_lo) ? -k.support_lo : kInf);

    m.drift_term = Vector::Zero(k.rows);
    if (b.cwiseAbs().maxCoeff() > 0)
        m.drift_term = detail::kernel_integral_matrix(k, q.pi, std::max(s, 40.0)) * b;
    m.quad = std::move(q);
    m.kernel = std::move(k);
    m.trunc = trunc;
    return m;
}

//! Jumps of the driver above eps plus, when configured, Gaussian impulses.
inline PoissonCloud sample_cloud(SimulationModel const& m, RandomStream& rng)
{
    auto cloud = sample_jumps(m.quad.nu, m.quad.pi, m.window_lo, m.window_hi, m.trunc.eps, rng);
    if (m.gauss_cov.cwiseAbs().maxCoeff() > 0)
    {
        double const rate = m.trunc.gaussian_rate;
        double const mean = rate * (m.window_hi - m.window_lo);
        long const k = boost::random::poisson_distribution<long, double>(mean)(rng);
        boost::random::normal_distribution<double> normal;
        int const d = m.quad.dim();
        for (long i = 0; i < k; ++i)
        {
            CloudPoint p;
            p.kind = PointKind::gaussian;
            p.s = m.window_lo + (m.window_hi - m.window_lo) * rng.uniform();
            p.A = m.quad.pi.sample(rng);
            Vector z(d);
            for (int j = 0; j < d; ++j)
                z(j) = normal(rng);
            p.x = m.gauss_root * z / std::sqrt(rate);
            cloud.points.push_back(std::move(p));
        }
        std::stable_sort(cloud.points.begin(), cloud.points.end(),
                         [](CloudPoint const& l, CloudPoint const& r) { return l.s < r.s; });
    }
    return cloud;
}

//! Uniform grid 0, step, ..., 1.
inline std::vector<double> make_grid(double step)
{
    if (!(step > 0 && step <= 1))
        throw DomainError("grid step must lie in (0, 1]");
    auto const n = static_cast<long>(std::llround(1 / step));
    std::vector<double> g;
    if (std::abs(n * step - 1) < 1e-9)
    {
        for (long i = 0; i <= n; ++i)
            g.push_back(static_cast<double>(i) / static_cast<double>(n));
        return g;
    }
    for (long i = 0; i * step < 1 - 1e-12; ++i)
        g.push_back(i * step);
    g.push_back(1.0);
    return g;
}

//! Validates an explicit grid and adds the endpoints 0 and 1.
inline std::vector<double> normalize_grid(std::vector<double> g)
{
    for (std::size_t i = 0; i < g.size(); ++i)
    {
        if (!(g[i] >= 0 && g[i] <= 1))
            throw DomainError("grid time outside [0, 1]");
        if (i > 0 && !(g[i] > g[i - 1]))
            throw DomainError("grid is not strictly increasing");
    }
    if (g.empty() || g.front() != 0)
        g.insert(g.begin(), 0.0);
    if (g.back() != 1)
        g.push_back(1.0);
    return g;
}

//! Times in (0, 1] where some f(A_i, t - s_i) jumps.
inline std::vector<double> jump_times(PoissonCloud const& cloud, KernelSpec const& k)
{
    std::vector<double> out;
    for (auto const& p : cloud.points)
        for (double b : k.breakpoints)
        {
            double const t = p.s + b;
            if (t > 0 && t <= 1)
                out.push_back(t);
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace detail {

inline void check_grid(std::vector<double> const& grid)
{
    if (grid.size() < 2 || grid.front() != 0 || grid.back() != 1)
        throw DomainError("grid must start at 0 and end at 1");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw DomainError("grid is not strictly increasing");
}

//! base + sum_i f(A_i, t - s_i) x_i at grid times and at both sides of the given jump times.
class DirectSum
{
  public:
    DirectSum(std::vector<CloudPoint const*> pts, KernelSpec const& k, Vector base)
        : pts_(std::move(pts)), k_(k), base_(std::move(base))
    {
        scalar_ = k.rows == 1 && k.cols == 1 && static_cast<bool>(k.scalar_eval);
        if (scalar_)
            for (auto const* p : pts_)
            {
                a_.push_back(p->A(0, 0));
                x_.push_back(p->x(0));
                s_.push_back(p->s);
            }
    }

    Vector at(double t, bool left) const
    {
        // Causal kernels only see points with s <= t (s < t for left limits).
        std::size_t end = pts_.size();
        if (k_.causal)
            end = static_cast<std::size_t>(
                std::upper_bound(pts_.begin(), pts_.end(), t, [](double v, CloudPoint const* p) { return v < p->s; }) -
                pts_.begin());
        std::size_t begin = 0;
        if (std::isfinite(k_.support_hi))
            begin = static_cast<std::size_t>(
                std::lower_bound(pts_.begin(), pts_.begin() + static_cast<std::ptrdiff_t>(end), t - k_.support_hi,
                                 [](CloudPoint const* p, double v) { return p->s < v; }) -
                pts_.begin());
        if (scalar_)
        {
            double acc = base_(0);
            auto const& f = left && k_.scalar_left ? k_.scalar_left : k_.scalar_eval;
            for (std::size_t i = begin; i < end; ++i)
                acc += f(a_[i], t - s_[i]) * x_[i];
            return Vector::Constant(1, acc);
        }
        Vector acc = base_;
        for (std::size_t i = begin; i < end; ++i)
        {
            auto const* p = pts_[i];
            acc += (left ? k_.left(p->A, t - p->s) : k_.eval(p->A, t - p->s)) * p->x;
        }
        return acc;
    }

    CadlagPath path(std::vector<double> const& grid, std::vector<double> const& jumps) const
    {
        std::vector<Vector> values;
        values.reserve(grid.size());
        for (double t : grid)
            values.push_back(at(t, false));
        std::vector<JumpRecord> recs;
        recs.reserve(jumps.size());
        for (double t : jumps)
            recs.push_back({t, at(t, true), at(t, false)});
        return CadlagPath(grid, std::move(values), std::move(recs));
    }

  private:
    std::vector<CloudPoint const*> pts_;
    KernelSpec const& k_;
    Vector base_;
    bool scalar_ = false;
    std::vector<double> a_;
    std::vector<double> x_;
    std::vector<double> s_;
};

inline std::vector<CloudPoint const*> all_points(PoissonCloud const& c)
{
    std::vector<CloudPoint const*> out;
    out.reserve(c.points.size());
    for (auto const& p : c.points)
        out.push_back(&p);
    return out;
}

}  // namespace detail

//! X_t = drift_term + sum_i f(A_i, t - s_i) x_i with exact jump insertion.
inline CadlagPath path_direct(PoissonCloud const& cloud, KernelSpec const& k, Vector const& drift_term,
                              std::vector<double> const& grid)
{
    detail::check_grid(grid);
    for (std::size_t i = 1; i < cloud.points.size(); ++i)
        if (cloud.points[i].s < cloud.points[i - 1].s)
            throw DomainError("cloud points must be sorted by time");
    detail::DirectSum sum(detail::all_points(cloud), k, drift_term);
    return sum.path(grid, jump_times(cloud, k));
}

inline CadlagPath path_direct(PoissonCloud const& cloud, SimulationModel const& m, std::vector<double> const& grid)
{
    return path_direct(cloud, m.kernel, m.drift_term, grid);
}

//! X_t = X_0 + int_0^t Z_u du + (C2 - C1) L_t.
//!
//! Exponential kernels march the per-matrix states exactly between events;
//! other differentiable kernels integrate Z by adaptive quadrature.
inline CadlagPath path_ode(PoissonCloud const& cloud, KernelSpec const& k, Vector const& drift_term,
                           Vector const& drift, std::vector<double> const& grid)
{
    if (!k.has_deriv())
        throw NotApplicableError("path_ode: kernel has no derivative");
    detail::check_grid(grid);
    int const n = k.rows;
    int const d = k.cols;
    auto const& pts = cloud.points;
    auto const jt = jump_times(cloud, k);
    Matrix const dC = k.C2 - k.C1;

    Vector x0 = detail::DirectSum(detail::all_points(cloud), k, drift_term).at(0, false);

    // Event times: grid, jump times and, for non-causal kernels, point times in (0, 1).
    std::vector<double> events(grid.begin(), grid.end());
    events.insert(events.end(), jt.begin(), jt.end());
    for (auto const& p : pts)
        if (p.s > 0 && p.s < 1)
            events.push_back(p.s);
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());

    bool const exponential = (k.family == KernelFamily::supou || k.family == KernelFamily::two_sided_supou);

    // Exponential states: past points S = sum e^{A(u - s)} x, future points F = sum e^{A(s - u)} x.
    struct Group
    {
        Matrix A;
        Vector past;
        Vector future;
    };
    std::vector<Group> groups;
    std::vector<std::size_t> group_of(pts.size());
    if (exponential)
    {
        std::map<std::vector<double>, std::size_t> index;
        for (std::size_t i = 0; i < pts.size(); ++i)
        {
            std::vector<double> key(pts[i].A.data(), pts[i].A.data() + pts[i].A.size());
            auto [it, fresh] = index.emplace(key, groups.size());
            if (fresh)
                groups.push_back({pts[i].A, Vector::Zero(d), Vector::Zero(d)});
            group_of[i] = it->second;
            auto& g = groups[it->second];
            if (pts[i].s <= 0)
                g.past += expm(pts[i].A, -pts[i].s) * pts[i].x;
            else if (!k.causal)
                g.future += expm(pts[i].A, pts[i].s) * pts[i].x;
        }
    }

    Vector integral = Vector::Zero(n);
    Vector levy = Vector::Zero(d);
    Vector const drift_z = (k.C1 - k.C2) * drift;

    auto value = [&](Vector const& l) -> Vector { return x0 + integral + dC * l; };

    std::vector<Vector> values(grid.size());
    std::vector<JumpRecord> recs;
    recs.reserve(jt.size());
    std::size_t gi = 0;
    std::size_t ji = 0;
    std::size_t pi_next = 0;  // first point with s > current time
    while (pi_next < pts.size() && pts[pi_next].s <= 0)
        ++pi_next;
    double u = 0;
    for (double t : events)
    {
        double const h = t - u;
        if (h > 0)
        {
            if (exponential)
            {
                for (auto& g : groups)
                {
                    Matrix const up = expm(g.A, h);
                    integral += k.C2 * ((up - Matrix::Identity(d, d)) * g.past);
                    g.past = up * g.past;
                    if (!k.causal)
                    {
                        Matrix const down = expm(g.A, -h);
                        integral += k.C2 * ((down - Matrix::Identity(d, d)) * g.future);
                        g.future = down * g.future;
                    }
                }
            }
            else
            {
                for (auto const& p : pts)
                {
                    if (k.causal && p.s >= t)
                        continue;
                    double const lo = k.causal ? std::max(u, p.s) : u;
                    if (!(t > lo))
                        continue;
                    for (int r = 0; r < n; ++r)
                    {
                        auto e = quad::integrate_pieces(
                            [&](double v) { return (k.deriv(p.A, v - p.s) * p.x)(r); }, lo, t,
                            [&] {
                                std::vector<double> b;
                                for (double bp : k.breakpoints)
                                    b.push_back(p.s + bp);
                                return b;
                            }(),
                            quad::Settings{1e-12, 1e-12, 40});
                        integral(r) += e.value;
                    }
                }
            }
            integral += drift_z * h;
            levy += drift * h;
            u = t;
        }
        // Points at time t enter L (and move from the future to the past state).
        bool const is_jump = ji < jt.size() && jt[ji] == t;
        Vector left;
        if (is_jump)
            left = value(levy);
        while (pi_next < pts.size() && pts[pi_next].s <= t)
        {
            auto const& p = pts[pi_next];
            if (p.s == t)
            {
                levy += p.x;
                if (exponential)
                {
                    auto& g = groups[group_of[pi_next]];
                    g.past += p.x;
                    if (!k.causal)
                        g.future -= p.x;
                }
            }
            ++pi_next;
        }
        if (is_jump)
        {
            recs.push_back({t, left, value(levy)});
            ++ji;
        }
        if (gi < grid.size() && grid[gi] == t)
            values[gi++] = value(levy);
    }
    return CadlagPath(grid, std::move(values), std::move(recs));
}

inline CadlagPath path_ode(PoissonCloud const& cloud, SimulationModel const& m, std::vector<double> const& grid)
{
    return path_ode(cloud, m.kernel, m.drift_term, m.drift, grid);
}

//! L_t = b t + sum of cloud jumps in (0, t].
inline CadlagPath underlying_levy(PoissonCloud const& cloud, Vector const& drift, std::vector<double> const& grid)
{
    detail::check_grid(grid);
    std::vector<double> times;
    for (auto const& p : cloud.points)
        if (p.s > 0 && p.s <= 1)
            times.push_back(p.s);
    times.erase(std::unique(times.begin(), times.end()), times.end());
    auto sum_upto = [&](double t, bool strict) {
        Vector acc = drift * t;
        for (auto const& p : cloud.points)
            if (p.s > 0 && (strict ? p.s < t : p.s <= t))
                acc += p.x;
        return acc;
    };
    std::vector<Vector> values;
    for (double t : grid)
        values.push_back(sum_upto(t, false));
    std::vector<JumpRecord> recs;
    for (double t : times)
        recs.push_back({t, sum_upto(t, true), sum_upto(t, false)});
    return CadlagPath(grid, std::move(values), std::move(recs));
}

struct SimulatedDecomposition
{
    CadlagPath path_total;
    CadlagPath path_big;     //!< contribution of driver jumps with ||x|| > 1
    CadlagPath path_small;   //!< path_total - path_big
    CadlagPath underlying_levy;
};

inline SimulatedDecomposition decompose(PoissonCloud const& cloud, SimulationModel const& m,
                                        std::vector<double> const& grid)
{
    SimulatedDecomposition out;
    out.path_total = path_direct(cloud, m, grid);
    std::vector<CloudPoint const*> big;
    for (auto const& p : cloud.points)
        if (p.kind == PointKind::jump && p.x.norm() > 1)
            big.push_back(&p);
    detail::DirectSum sum(std::move(big), m.kernel, Vector::Zero(m.kernel.rows));
    out.path_big = sum.path(grid, jump_times(cloud, m.kernel));
    out.path_small = out.path_total - out.path_big;
    out.underlying_levy = underlying_levy(cloud, m.drift, grid);
    return out;
}

//! Cloud of replica \c index under master seed \c seed.
inline PoissonCloud replica_cloud(SimulationModel const& m, std::uint64_t seed, std::uint64_t index)
{
    auto rng = replica_stream(seed, index);
    return sample_cloud(m, rng);
}

//! Runs fn(i) for i in [0, n) over \c threads workers; fn must write only to slot i.
template<class F>
void parallel_for(std::size_t n, unsigned threads, F&& fn)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex mu;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            try
            {
                for (std::size_t i = next++; i < n; i = next++)
                    fn(i);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(mu);
                if (!failure)
                    failure = std::current_exception();
                next = n;
            }
        });
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
}

//! n_paths independent stationary segments; replica i depends only on (seed, i).
inline std::vector<SimulatedDecomposition> simulate_ensemble(SimulationModel const& m, std::size_t n_paths,
                                                             std::vector<double> const& grid, std::uint64_t seed,
                                                             unsigned threads = 1)
{
    std::vector<SimulatedDecomposition> out(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t i) { out[i] = decompose(replica_cloud(m, seed, i), m, grid); });
    return out;
}

//! Convenience overload that validates preconditions before simulating.
inline std::vector<SimulatedDecomposition> simulate_ensemble(GeneratingQuadruple const& q, KernelSpec const& k,
                                                             std::size_t n_paths, std::vector<double> const& grid,
                                                             std::uint64_t seed, TruncationSettings trunc = {},
                                                             bool force = false)
{
    if (n_paths == 0)
        return {};
    auto const m = make_model(q, k, trunc, force);
    return simulate_ensemble(m, n_paths, grid, seed);
}

}  // namespace mmasim
