// SPDX-License-Identifier: Apache-2.0
//! \file kernels.hpp
//! Kernel functions f(A, s) of mixed moving averages, their s-derivatives,
//! one-sided limits at s = 0, the modulus kernel f_delta and the exponential
//! envelope ||f(A, s)|| <= kappa(A) exp(-rho(A) s).
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "linalg.hpp"

namespace mmasim {

enum class KernelFamily
{
    supou,
    two_sided_supou,
    indicator,
    exp_poly,
    custom
};

struct KernelSpec
{
    using MatrixFn = std::function<Matrix(Matrix const&, double)>;
    using ScalarFn = std::function<double(Matrix const&)>;

    std::string name;
    KernelFamily family = KernelFamily::custom;
    int rows = 1;  //!< n
    int cols = 1;  //!< d

    MatrixFn eval;       //!< f(A, s), right-continuous in s
    MatrixFn eval_left;  //!< f(A, s-)
    MatrixFn deriv;      //!< f'(A, s); empty when unavailable
    Matrix C1;           //!< f(A, 0-)
    Matrix C2;           //!< f(A, 0+)
    //! Optional 1 x 1 fast paths taking the scalar entry of A.
    std::function<double(double, double)> scalar_eval;
    std::function<double(double, double)> scalar_left;
    std::function<double(double, double)> scalar_deriv;
    ScalarFn bound_kappa;  //!< empty when no envelope is known
    ScalarFn decay_rho;
    bool causal = true;
    std::optional<double> global_bound;

    //! Points in s where f(A, .) may jump (independent of A).
    std::vector<double> breakpoints;
    //! f(A, s) = 0 outside [support_lo, support_hi].
    double support_lo = -kInf;
    double support_hi = kInf;

    bool has_deriv() const { return static_cast<bool>(deriv); }
    bool has_envelope() const { return bound_kappa && decay_rho; }

    Matrix left(Matrix const& a, double s) const
    {
        return eval_left ? eval_left(a, s) : eval(a, s);
    }

    //! Reach in s beyond which ||f(A, s)|| <= tol (finite when the kernel decays).
    double reach(Matrix const& a, double tol) const
    {
        double hi = std::max(std::abs(support_lo), std::abs(support_hi));
        if (std::isfinite(hi))
            return hi;
        if (!has_envelope())
            return kInf;
        double const k = bound_kappa(a);
        double const r = decay_rho(a);
        return std::max(0.0, std::log(std::max(k, 1.0) / tol) / r);
    }

    //! Finite integration range in s for the kernel argument at level tol.
    std::pair<double, double> s_range(Matrix const& a, double tol) const
    {
        double const r = reach(a, tol);
        double lo = std::max(support_lo, -r);
        double hi = std::min(support_hi, r);
        if (causal)
            lo = std::max(lo, 0.0);
        return {lo, hi};
    }
};

namespace detail {

//! Per-matrix overrides for (kappa, rho) supplied in the configuration.
using EnvelopeOverrides = std::vector<std::pair<Matrix, std::pair<double, double>>>;

inline std::optional<std::pair<double, double>> find_override(EnvelopeOverrides const& ov, Matrix const& a)
{
    for (auto const& [m, kr] : ov)
        if (m.rows() == a.rows() && m.cols() == a.cols() && (m - a).cwiseAbs().maxCoeff() == 0)
            return kr;
    return std::nullopt;
}

//! Envelope of ||p(s) e^{As}|| with p a polynomial (p = 1 for supOU).
//!
//! Symmetric A gives kappa = 1, rho = -lambda_max exactly. Otherwise rho is
//! half the spectral gap and kappa the grid maximum of ||e^{As}|| e^{rho s},
//! inflated by 5 % to absorb grid error.
inline std::pair<double, double> exponential_envelope(Matrix const& a, std::vector<double> const& poly = {1.0})
{
    bool const plain = poly.size() == 1 && poly[0] == 1.0;
    double const gap = -spectral_abscissa(a);
    if (!(gap > 0))
        throw DomainError("mixing matrix has an eigenvalue with nonnegative real part");
    if (plain && (a.size() == 1 || is_symmetric(a)))
        return {1.0, gap};
    double const rho = gap / 2;
    double const horizon = 60.0 / rho;
    int const n = 4000;
    double kappa = 1.0;
    for (int i = 0; i <= n; ++i)
    {
        double const s = horizon * i / n;
        double p = 0;
        for (std::size_t k = poly.size(); k-- > 0;)
            p = p * s + poly[k];
        kappa = std::max(kappa, std::abs(p) * op_norm(expm(a, s)) * std::exp(rho * s));
    }
    return {kappa * 1.05, rho};
}

inline void attach_envelope(KernelSpec& k, EnvelopeOverrides ov, std::vector<double> poly = {1.0}, double scale = 1.0)
{
    // Envelopes of non-normal matrices cost a grid scan; memoize per matrix.
    struct Cache
    {
        std::mutex mu;
        std::map<std::vector<double>, std::pair<double, double>> table;
    };
    auto cache = std::make_shared<Cache>();
    auto lookup = [ov = std::move(ov), poly = std::move(poly), scale, cache](Matrix const& a) {
        if (auto o = find_override(ov, a))
            return *o;
        std::vector<double> key(a.data(), a.data() + a.size());
        {
            std::lock_guard<std::mutex> lock(cache->mu);
            auto it = cache->table.find(key);
            if (it != cache->table.end())
                return it->second;
        }
        auto e = exponential_envelope(a, poly);
        e.first = std::max(1.0, e.first * scale);
        std::lock_guard<std::mutex> lock(cache->mu);
        cache->table.emplace(std::move(key), e);
        return e;
    };
    k.bound_kappa = [lookup](Matrix const& a) { return lookup(a).first; };
    k.decay_rho = [lookup](Matrix const& a) { return lookup(a).second; };
}

}  // namespace detail

//! f(A, s) = e^{As} 1_{[0, inf)}(s).
inline KernelSpec supou_kernel(int d, detail::EnvelopeOverrides overrides = {})
{
    if (d < 1)
        throw DomainError("supou_kernel: dimension must be >= 1");
    KernelSpec k;
    k.name = "supou";
    k.family = KernelFamily::supou;
    k.rows = k.cols = d;
    k.eval = [d](Matrix const& a, double s) -> Matrix {
        if (s < 0)
            return Matrix::Zero(d, d);
        return expm(a, s);
    };
    k.eval_left = [d](Matrix const& a, double s) -> Matrix {
        if (s <= 0)
            return Matrix::Zero(d, d);
        return expm(a, s);
    };
    k.deriv = [d](Matrix const& a, double s) -> Matrix {
        if (s < 0)
            return Matrix::Zero(d, d);
        return a * expm(a, s);
    };
    k.C1 = Matrix::Zero(d, d);
    k.C2 = Matrix::Identity(d, d);
    k.causal = true;
    k.breakpoints = {0.0};
    k.support_lo = 0;
    if (d == 1)
    {
        k.scalar_eval = [](double a, double s) { return s < 0 ? 0.0 : std::exp(a * s); };
        k.scalar_left = [](double a, double s) { return s <= 0 ? 0.0 : std::exp(a * s); };
        k.scalar_deriv = [](double a, double s) { return s < 0 ? 0.0 : a * std::exp(a * s); };
    }
    detail::attach_envelope(k, std::move(overrides));
    return k;
}

//! f(A, s) = e^{A|s|}: continuous at 0 with C1 = C2 = I.
inline KernelSpec two_sided_supou_kernel(int d, detail::EnvelopeOverrides overrides = {})
{
    if (d < 1)
        throw DomainError("two_sided_supou_kernel: dimension must be >= 1");
    KernelSpec k;
    k.name = "two_sided_supou";
    k.family = KernelFamily::two_sided_supou;
    k.rows = k.cols = d;
    k.eval = [](Matrix const& a, double s) -> Matrix { return expm(a, std::abs(s)); };
    k.deriv = [](Matrix const& a, double s) -> Matrix {
        if (s >= 0)
            return a * expm(a, s);
        return -a * expm(a, -s);
    };
    k.C1 = Matrix::Identity(d, d);
    k.C2 = Matrix::Identity(d, d);
    k.causal = false;
    if (d == 1)
    {
        k.scalar_eval = [](double a, double s) { return std::exp(a * std::abs(s)); };
        k.scalar_left = k.scalar_eval;
        k.scalar_deriv = [](double a, double s) { return s >= 0 ? a * std::exp(a * s) : -a * std::exp(-a * s); };
    }
    detail::attach_envelope(k, std::move(overrides));
    return k;
}

//! f(A, s) = 1_{[0, w)}(s) I_d; jumps inside (0, 1) and fails the vanishing condition.
inline KernelSpec indicator_test_kernel(int d, double width = 0.5)
{
    if (d < 1)
        throw DomainError("indicator_test_kernel: dimension must be >= 1");
    if (!(width > 0))
        throw DomainError("indicator_test_kernel: width must be positive");
    KernelSpec k;
    k.name = "indicator_test";
    k.family = KernelFamily::indicator;
    k.rows = k.cols = d;
    k.eval = [d, width](Matrix const&, double s) -> Matrix {
        return Matrix::Identity(d, d) * ((s >= 0 && s < width) ? 1.0 : 0.0);
    };
    k.eval_left = [d, width](Matrix const&, double s) -> Matrix {
        return Matrix::Identity(d, d) * ((s > 0 && s <= width) ? 1.0 : 0.0);
    };
    k.C1 = Matrix::Zero(d, d);
    k.C2 = Matrix::Identity(d, d);
    k.causal = true;
    k.global_bound = 1.0;
    k.breakpoints = {0.0, width};
    k.support_lo = 0;
    k.support_hi = width;
    if (d == 1)
    {
        k.scalar_eval = [width](double, double s) { return (s >= 0 && s < width) ? 1.0 : 0.0; };
        k.scalar_left = [width](double, double s) { return (s > 0 && s <= width) ? 1.0 : 0.0; };
    }
    return k;
}

//! f(A, s) = B p(s) e^{As} 1_{[0, inf)}(s) with p(s) = sum_k c_k s^k and B an n x d matrix.
inline KernelSpec exp_poly_kernel(Matrix b, std::vector<double> coeffs, detail::EnvelopeOverrides overrides = {})
{
    if (coeffs.empty())
        throw DomainError("exp_poly_kernel: polynomial needs at least one coefficient");
    if (b.size() == 0)
        throw DomainError("exp_poly_kernel: empty output matrix");
    KernelSpec k;
    k.name = "exp_poly";
    k.family = KernelFamily::exp_poly;
    k.rows = static_cast<int>(b.rows());
    k.cols = static_cast<int>(b.cols());
    auto poly = [coeffs](double s) {
        double p = 0;
        for (std::size_t i = coeffs.size(); i-- > 0;)
            p = p * s + coeffs[i];
        return p;
    };
    auto dpoly = [coeffs](double s) {
        double p = 0;
        for (std::size_t i = coeffs.size(); i-- > 1;)
            p = p * s + static_cast<double>(i) * coeffs[i];
        return p;
    };
    int const n = k.rows;
    int const d = k.cols;
    k.eval = [b, poly, n, d](Matrix const& a, double s) -> Matrix {
        if (s < 0)
            return Matrix::Zero(n, d);
        return poly(s) * (b * expm(a, s));
    };
    k.eval_left = [b, poly, n, d](Matrix const& a, double s) -> Matrix {
        if (s <= 0)
            return Matrix::Zero(n, d);
        return poly(s) * (b * expm(a, s));
    };
    k.deriv = [b, poly, dpoly, n, d](Matrix const& a, double s) -> Matrix {
        if (s < 0)
            return Matrix::Zero(n, d);
        Matrix const e = expm(a, s);
        return b * (dpoly(s) * e + poly(s) * (a * e));
    };
    k.C1 = Matrix::Zero(n, d);
    k.C2 = coeffs[0] * b;
    k.causal = true;
    k.breakpoints = {0.0};
    k.support_lo = 0;
    detail::attach_envelope(k, std::move(overrides), coeffs, op_norm(b));
    return k;
}

// ---------------------------------------------------------------------------
// f_delta

struct FdeltaSettings
{
    int grid_per_delta = 16;  //!< t1 and h grid resolution relative to delta
    int golden_iterations = 60;
};

namespace detail {

//! Whether the closed-form sup applies: exponential kernels with symmetric A.
inline bool fdelta_closed_form(KernelSpec const& k, Matrix const& a)
{
    if (k.family != KernelFamily::supou && k.family != KernelFamily::two_sided_supou)
        return false;
    return a.size() == 1 || is_symmetric(a);
}

inline double fdelta_exponential(KernelSpec const& k, double delta, Matrix const& a, double s)
{
    int const d = static_cast<int>(a.rows());
    Matrix const step = expm(a, delta) - Matrix::Identity(d, d);
    if (k.family == KernelFamily::supou)
    {
        if (s > 1)
            return 0;
        if (s >= 0)
            return op_norm(step);
        return op_norm(expm(a, -s) * step);
    }
    if (s <= 1)
        return op_norm(expm(a, s < 0 ? -s : 0.0) * step);
    // Both arguments negative: t2 = t1 + h may pass 1, so the sup sits at v = s - t1 = max(s - 1, delta).
    if (s - 1 < delta)
        return op_norm(step);
    return op_norm(expm(a, s - 1) * (expm(a, -delta) - Matrix::Identity(d, d)));
}

//! Direct grid-and-golden search for f_delta of exponential kernels with
//! non-normal A; slower than FdeltaProfile and kept as a second route. With both kernel arguments
//! on the same side of 0 the difference is e^{Au}(e^{Ah} - I) up to sign, so the
//! sup runs over (u, h) in one (supou) or two (two-sided) regions.
inline double fdelta_exponential_general(KernelSpec const& k, double delta, Matrix const& a, double s,
                                         FdeltaSettings const& fs)
{
    int const d = static_cast<int>(a.rows());
    Matrix const id = Matrix::Identity(d, d);
    auto g = [&](double u, double h) { return op_norm(expm(a, u) * (expm(a, h) - id)); };
    // Region as a function of h: u in [lo(h), hi(h)].
    struct Region
    {
        std::function<std::pair<double, double>(double)> range;
        bool fixed;  //!< range independent of h
    };
    std::vector<Region> regions;
    if (s <= 1)
        regions.push_back({[s](double) { return std::pair{std::max(0.0, -s), 1 - s}; }, true});
    if (k.family == KernelFamily::two_sided_supou && s > 0)
        regions.push_back({[s](double h) { return std::pair{std::max(0.0, s - 1 - h), s - h}; }, false});
    int const nh = fs.grid_per_delta;
    int const nu = 4 * fs.grid_per_delta;
    std::vector<Matrix> dh(static_cast<std::size_t>(nh));
    for (int j = 0; j < nh; ++j)
        dh[static_cast<std::size_t>(j)] = expm(a, delta * (j + 1) / nh) - id;
    double best = 0;
    for (auto const& r : regions)
    {
        double bu = -1;
        double bh = delta;
        double rb = 0;
        std::vector<Matrix> eu;
        if (r.fixed)
        {
            auto [lo, hi] = r.range(0);
            for (int i = 0; i <= nu; ++i)
                eu.push_back(expm(a, lo + (hi - lo) * i / nu));
        }
        for (int j = 0; j < nh; ++j)
        {
            double const h = delta * (j + 1) / nh;
            auto [lo, hi] = r.range(h);
            if (hi < lo)
                continue;
            for (int i = 0; i <= nu; ++i)
            {
                double const u = lo + (hi - lo) * i / nu;
                Matrix const e = r.fixed ? eu[static_cast<std::size_t>(i)] : expm(a, u);
                double const v = op_norm(e * dh[static_cast<std::size_t>(j)]);
                if (v > rb)
                {
                    rb = v;
                    bu = u;
                    bh = h;
                }
            }
        }
        if (bu < 0)
            continue;
        // Coordinate-wise golden refinement around the grid maximum.
        auto golden = [&](auto&& f, double lo, double hi) {
            double const q = 0.5 * (std::sqrt(5.0) - 1);
            double x1 = hi - q * (hi - lo);
            double x2 = lo + q * (hi - lo);
            double f1 = f(x1);
            double f2 = f(x2);
            for (int it = 0; it < fs.golden_iterations / 2; ++it)
            {
                if (f1 < f2)
                {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + q * (hi - lo);
                    f2 = f(x2);
                }
                else
                {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - q * (hi - lo);
                    f1 = f(x1);
                }
            }
            return f1 > f2 ? x1 : x2;
        };
        for (int round = 0; round < 2; ++round)
        {
            auto [lo, hi] = r.range(bh);
            double const du = (hi - lo) / nu;
            double const u = golden([&](double x) { return g(x, bh); }, std::max(lo, bu - du), std::min(hi, bu + du));
            if (g(u, bh) > rb)
            {
                rb = g(u, bh);
                bu = u;
            }
            double const step = delta / nh;
            double const h = golden(
                [&](double y) {
                    auto [l2, h2] = r.range(y);
                    return bu >= l2 && bu <= h2 ? g(bu, y) : 0.0;
                },
                std::max(0.0, bh - step), std::min(delta, bh + step));
            auto [l2, h2] = r.range(h);
            if (bu >= l2 && bu <= h2 && g(bu, h) > rb)
            {
                rb = g(bu, h);
                bh = h;
            }
        }
        best = std::max(best, rb);
    }
    return best;
}

//! Golden-section maximiser of f on [lo, hi]; returns the best abscissa seen.
template<class F>
double golden_max(F&& f, double lo, double hi, int iterations)
{
    double const q = 0.5 * (std::sqrt(5.0) - 1);
    double x1 = hi - q * (hi - lo);
    double x2 = lo + q * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < iterations; ++it)
    {
        if (f1 < f2)
        {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + q * (hi - lo);
            f2 = f(x2);
        }
        else
        {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - q * (hi - lo);
            f1 = f(x1);
        }
    }
    return f1 > f2 ? x1 : x2;
}

//! max of a fixed function F on windows [lo, hi] of [0, inf). F is tabulated
//! lazily; interior local maxima are refined once, so a window max is the
//! larger of F at both ends and the cached peaks inside.
class WindowMax
{
  public:
    WindowMax(std::function<double(double)> f, double step, int golden_iterations)
        : f_(std::move(f)), step_(step), golden_(golden_iterations)
    {
    }

    double operator()(double lo, double hi)
    {
        lo = std::max(lo, 0.0);
        if (hi < lo)
            return 0;
        extend(hi);
        double best = std::max(f_(lo), f_(hi));
        auto it = std::lower_bound(peaks_.begin(), peaks_.end(), lo,
                                   [](std::pair<double, double> const& p, double x) { return p.first < x; });
        for (; it != peaks_.end() && it->first <= hi; ++it)
            best = std::max(best, it->second);
        return best;
    }

  private:
    void extend(double x)
    {
        while (static_cast<double>(tab_.size()) * step_ <= x + 2 * step_)
        {
            tab_.push_back(f_(static_cast<double>(tab_.size()) * step_));
            auto const n = tab_.size();
            if (n < 3)
                continue;
            auto const i = n - 2;
            if (tab_[i] >= tab_[i - 1] && tab_[i] > tab_[i + 1])
            {
                double const xl = static_cast<double>(i - 1) * step_;
                double const xs = golden_max(f_, xl, xl + 2 * step_, golden_);
                double const fx = f_(xs);
                double const xi = static_cast<double>(i) * step_;
                if (fx >= tab_[i])
                    peaks_.emplace_back(xs, fx);
                else
                    peaks_.emplace_back(xi, tab_[i]);
                std::sort(peaks_.begin(), peaks_.end());
            }
        }
    }

    std::function<double(double)> f_;
    double step_;
    int golden_;
    std::vector<double> tab_;
    std::vector<std::pair<double, double>> peaks_;
};

//! ||f(A, t1 + h - s) - f(A, t1 - s)|| with the exclusion s in (t1, t1 + h].
inline double fdelta_objective(KernelSpec const& k, Matrix const& a, double s, double t1, double h)
{
    double const t2 = t1 + h;
    if (s > t1 && s <= t2)
        return 0;
    return op_norm(k.eval(a, t2 - s) - k.eval(a, t1 - s));
}

}  // namespace detail

//! f_delta(A, .) of an exponential kernel for one matrix A. With both kernel
//! arguments on the same side of 0 the difference is e^{Au}(e^{Ah} - I) up to
//! sign: for s <= 1 the sup is G(u) = sup_h ||e^{Au}(e^{Ah} - I)|| over u in
//! [max(0, -s), 1 - s], and on the anti-causal side (two-sided, s > 0) it is
//! H(v) = sup_{h <= min(delta, v)} ||e^{Av} - e^{A(v - h)}|| over v in [s - 1, s].
class FdeltaProfile
{
  public:
    FdeltaProfile(KernelSpec const& k, double delta, Matrix const& a, FdeltaSettings const& fs = {})
        : two_sided_(k.family == KernelFamily::two_sided_supou), delta_(delta), a_(a),
          id_(Matrix::Identity(a.rows(), a.rows())),
          g_([this](double u) { return g(u); }, delta / fs.grid_per_delta, fs.golden_iterations),
          h_([this](double v) { return h(v); }, delta / fs.grid_per_delta, fs.golden_iterations),
          nh_(fs.grid_per_delta), golden_(fs.golden_iterations)
    {
        if (k.family != KernelFamily::supou && k.family != KernelFamily::two_sided_supou)
            throw DomainError("FdeltaProfile: exponential kernels only");
        if (!(delta > 0 && delta < 1))
            throw DomainError("f_delta: delta must lie in (0, 1)");
        for (int j = 1; j <= nh_; ++j)
            dh_.push_back(expm(a, delta * j / nh_) - id_);
    }

    FdeltaProfile(FdeltaProfile const&) = delete;
    FdeltaProfile& operator=(FdeltaProfile const&) = delete;

    double operator()(double s)
    {
        double best = 0;
        if (s <= 1)
            best = g_(-s, 1 - s);
        if (two_sided_ && s > 0)
            best = std::max(best, h_(s - 1, s));
        return best;
    }

  private:
    //! sup over h by grid then golden refinement around the best grid h.
    template<class N>
    double sup_h(N&& norm_at, double hmax)
    {
        double bh = 0;
        double best = 0;
        for (int j = 1; j <= nh_; ++j)
        {
            double const hh = delta_ * j / nh_;
            if (hh > hmax)
                break;
            double const v = norm_at(hh, static_cast<std::size_t>(j - 1));
            if (v > best)
            {
                best = v;
                bh = hh;
            }
        }
        double const step = delta_ / nh_;
        double const top = std::min(delta_, hmax);
        if (!(bh > 0))
        {
            // hmax below the first grid h.
            if (!(top > 0))
                return 0;
            bh = top;
            best = norm_at(top, std::size_t(-1));
        }
        double const lo = std::max(0.0, bh - step);
        double const hi = std::min(top, bh + step);
        if (hi > lo)
        {
            double const x = detail::golden_max([&](double y) { return norm_at(y, std::size_t(-1)); }, lo, hi, golden_);
            best = std::max(best, norm_at(x, std::size_t(-1)));
        }
        return std::max(best, norm_at(top, std::size_t(-1)));
    }

    double g(double u)
    {
        Matrix const e = expm(a_, u);
        return sup_h(
            [&](double hh, std::size_t j) {
                return op_norm(e * (j < dh_.size() ? dh_[j] : Matrix(expm(a_, hh) - id_)));
            },
            delta_);
    }

    double h(double v)
    {
        Matrix const e = expm(a_, v);
        return sup_h([&](double hh, std::size_t) { return op_norm(e - expm(a_, v - hh)); }, v);
    }

    bool two_sided_;
    double delta_;
    Matrix a_;
    Matrix id_;
    detail::WindowMax g_;
    detail::WindowMax h_;
    int nh_;
    int golden_;
    std::vector<Matrix> dh_;
};

//! f_delta(A, s) = sup ||f(A, t2 - s) - f(A, t1 - s)|| 1{s notin (t1, t2]}
//! over t1 in [0, 1], t1 <= t2 <= t1 + delta.
inline double f_delta(KernelSpec const& k, double delta, Matrix const& a, double s, FdeltaSettings const& fs = {})
{
    if (!(delta > 0 && delta < 1))
        throw DomainError("f_delta: delta must lie in (0, 1)");
    if (detail::fdelta_closed_form(k, a))
        return detail::fdelta_exponential(k, delta, a, s);
    if (k.family == KernelFamily::supou || k.family == KernelFamily::two_sided_supou)
        return FdeltaProfile(k, delta, a, fs)(s);

    double const step = delta / fs.grid_per_delta;
    auto const nt = static_cast<int>(std::ceil(1.0 / step));
    int const nh = fs.grid_per_delta;
    double best = 0;
    double best_t1 = 0;
    double best_h = delta;
    auto consider = [&](double t1, double h) {
        t1 = std::clamp(t1, 0.0, 1.0);
        h = std::clamp(h, 0.0, delta);
        double const v = detail::fdelta_objective(k, a, s, t1, h);
        if (v > best)
        {
            best = v;
            best_t1 = t1;
            best_h = h;
        }
    };
    for (int i = 0; i <= nt; ++i)
    {
        double const t1 = std::min(1.0, i * step);
        for (int j = 1; j <= nh; ++j)
            consider(t1, j * step);
    }
    // Candidates straddling kernel breakpoints, where grid sampling can miss a
    // jump by a hair: put t1 - s just left of a breakpoint and t2 - s at it.
    for (double b : k.breakpoints)
    {
        for (double h : {delta, delta / 2, step})
        {
            double const t2 = s + b;
            consider(t2 - h, h);
            double const t1 = s + b - 1e-12;
            consider(t1, h);
            consider(s + b - h * 0.5, h);
        }
    }
    // Golden-section refinement in t1 (fixed h), then in h (fixed t1).
    auto golden = [&](auto&& g, double lo, double hi) {
        double const r = 0.5 * (std::sqrt(5.0) - 1);
        double x1 = hi - r * (hi - lo);
        double x2 = lo + r * (hi - lo);
        double f1 = g(x1);
        double f2 = g(x2);
        for (int it = 0; it < fs.golden_iterations; ++it)
        {
            if (f1 < f2)
            {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + r * (hi - lo);
                f2 = g(x2);
            }
            else
            {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - r * (hi - lo);
                f1 = g(x1);
            }
        }
    };
    double const h0 = best_h;
    golden([&](double t1) { consider(t1, h0); return detail::fdelta_objective(k, a, s, std::clamp(t1, 0.0, 1.0), h0); },
           std::max(0.0, best_t1 - step), std::min(1.0, best_t1 + step));
    double const t10 = best_t1;
    golden([&](double h) { consider(t10, h); return detail::fdelta_objective(k, a, s, t10, std::clamp(h, 0.0, delta)); },
           std::max(0.0, best_h - step), std::min(delta, best_h + step));
    return best;
}

//! Flags kernels whose f_delta does not shrink with delta at some sampled (A, s), s != 0.
inline bool interior_discontinuity(KernelSpec const& k, std::vector<Matrix> const& mats, std::vector<double> const& s_points)
{
    for (auto const& a : mats)
        for (double s : s_points)
        {
            if (s == 0)
                continue;
            double const big = f_delta(k, 0.5, a, s);
            if (big <= 0)
                continue;
            if (f_delta(k, 1e-3, a, s) > 0.5 * big)
                return true;
        }
    return false;
}

}  // namespace mmasim
