// SPDX-License-Identifier: Apache-2.0
//! \file measures.hpp
//! Lévy measures nu on R^d and mixing probability measures pi on stable
//! matrices, the generating quadruple (gamma, Sigma, nu, pi) and the Poisson
//! sampler for the jump measure with intensity nu x pi x Lebesgue.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/lognormal_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "core.hpp"
#include "linalg.hpp"
#include "quad.hpp"
#include "random.hpp"

namespace mmasim {

//! Radial law nu_r(dr) = c alpha r^{-alpha-1} dr on (r_min, inf).
struct RadialLaw
{
    double alpha = 1;
    double c = 1;
    double r_min = 0;

    //! nu_r((r, inf)).
    double tail(double r) const
    {
        double const a = std::max(r, r_min);
        if (a <= 0)
            return kInf;
        if (!std::isfinite(a))
            return 0;
        return c * std::pow(a, -alpha);
    }

    //! nu_r((a, b]).
    double mass(double a, double b) const
    {
        if (!(b > a))
            return 0;
        double const lo = std::max(a, r_min);
        if (!(b > lo))
            return 0;
        return tail(lo) - tail(b);
    }

    //! int_{(a, b]} r^p nu_r(dr) in closed form (may be +inf).
    double moment(double p, double a, double b) const
    {
        double const lo = std::max(a, r_min);
        if (!(b > lo))
            return 0;
        double const q = p - alpha;
        double const k = c * alpha;
        if (q == 0)
        {
            if (lo <= 0 || !std::isfinite(b))
                return kInf;
            return k * std::log(b / lo);
        }
        if (!std::isfinite(b) && q > 0)
            return kInf;
        if (lo <= 0 && q < 0)
            return kInf;
        double const top = std::isfinite(b) ? std::pow(b, q) : 0.0;
        double const bottom = lo > 0 ? std::pow(lo, q) : 0.0;
        return k * (top - bottom) / q;
    }

    //! int_{(a, b]} ln(r) nu_r(dr) for a >= 1.
    double log_moment_above(double a) const
    {
        double const lo = std::max({a, r_min, 1.0});
        return c * std::pow(lo, -alpha) * (std::log(lo) + 1 / alpha);
    }
};

//! nu as one of: a finite set of atoms, or a radial power law times a discrete spectral measure.
class LevyMeasure
{
  public:
    enum class Kind
    {
        finite_discrete,
        pareto_radial,
        alpha_stable_radial
    };

    static LevyMeasure finite_discrete(std::vector<Vector> atoms, std::vector<double> rates)
    {
        if (atoms.empty() || atoms.size() != rates.size())
            throw DomainError("finite_discrete: need matching non-empty atoms and rates");
        LevyMeasure m;
        m.kind_ = Kind::finite_discrete;
        m.dim_ = static_cast<int>(atoms[0].size());
        for (std::size_t i = 0; i < atoms.size(); ++i)
        {
            if (atoms[i].size() != m.dim_)
                throw DomainError("finite_discrete: atoms differ in dimension");
            if (!(atoms[i].norm() > 0))
                throw DomainError("finite_discrete: atom at the origin");
            if (!(rates[i] > 0) || !std::isfinite(rates[i]))
                throw DomainError("finite_discrete: rates must be positive and finite");
        }
        m.atoms_ = std::move(atoms);
        m.rates_ = std::move(rates);
        return m;
    }

    static LevyMeasure pareto_radial(double alpha, double c, std::vector<Vector> dirs, std::vector<double> weights,
                                     double r_min)
    {
        if (!(alpha > 0) || !(c > 0) || !(r_min >= 0))
            throw DomainError("pareto_radial: need alpha > 0, c > 0, r_min >= 0");
        if (r_min == 0 && !(alpha < 2))
            throw DomainError("pareto_radial: r_min = 0 requires alpha < 2 for int (1 ^ |x|^2) nu < inf");
        LevyMeasure m;
        m.kind_ = Kind::pareto_radial;
        m.law_ = {alpha, c, r_min};
        m.set_spectral(std::move(dirs), std::move(weights));
        return m;
    }

    static LevyMeasure alpha_stable_radial(double alpha, double scale, std::vector<Vector> dirs,
                                           std::vector<double> weights)
    {
        if (!(alpha > 0 && alpha < 2) || !(scale > 0))
            throw DomainError("alpha_stable_radial: need alpha in (0, 2) and scale > 0");
        LevyMeasure m;
        m.kind_ = Kind::alpha_stable_radial;
        m.law_ = {alpha, std::pow(scale, alpha), 0};
        m.set_spectral(std::move(dirs), std::move(weights));
        return m;
    }

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    bool is_discrete() const { return kind_ == Kind::finite_discrete; }
    bool is_stable() const { return kind_ == Kind::alpha_stable_radial; }
    std::vector<Vector> const& atoms() const { return atoms_; }
    std::vector<double> const& rates() const { return rates_; }
    std::vector<Vector> const& directions() const { return dirs_; }
    std::vector<double> const& weights() const { return weights_; }
    RadialLaw const& law() const { return law_; }

    //! Tail index for the radial families; empty for finite discrete measures.
    std::optional<double> alpha() const
    {
        if (is_discrete())
            return std::nullopt;
        return law_.alpha;
    }

    //! Power-law limit measure mu_nu(||x|| > r) = c r^{-alpha} of a radial family.
    RadialLaw limit_law() const
    {
        if (is_discrete())
            throw NotApplicableError("finite discrete Lévy measure is not regularly varying");
        return {law_.alpha, law_.c, 0};
    }

    //! nu(||x|| > r).
    double tail_mass(double r) const
    {
        if (!(r > 0))
            throw DomainError("tail_mass: r must be positive");
        if (is_discrete())
        {
            double t = 0;
            for (std::size_t i = 0; i < atoms_.size(); ++i)
                if (atoms_[i].norm() > r)
                    t += rates_[i];
            return t;
        }
        return law_.tail(r);
    }

    //! int_{a < ||x|| <= b} ||x||^p nu(dx).
    double abs_moment(double p, double a, double b) const
    {
        if (is_discrete())
        {
            double t = 0;
            for (std::size_t i = 0; i < atoms_.size(); ++i)
            {
                double const r = atoms_[i].norm();
                if (r > a && r <= b)
                    t += rates_[i] * std::pow(r, p);
            }
            return t;
        }
        return law_.moment(p, a, b);
    }

    //! int_{a < ||x|| <= b} x nu(dx).
    Vector first_moment(double a, double b) const
    {
        Vector out = Vector::Zero(dim_);
        if (is_discrete())
        {
            for (std::size_t i = 0; i < atoms_.size(); ++i)
            {
                double const r = atoms_[i].norm();
                if (r > a && r <= b)
                    out += rates_[i] * atoms_[i];
            }
            return out;
        }
        double const m = law_.moment(1, a, b);
        if (m == 0)
            return out;
        for (std::size_t j = 0; j < dirs_.size(); ++j)
            out += weights_[j] * m * dirs_[j];
        return out;
    }

    //! int_{a < ||x|| <= b} x x^T nu(dx).
    Matrix second_moment(double a, double b) const
    {
        Matrix out = Matrix::Zero(dim_, dim_);
        if (is_discrete())
        {
            for (std::size_t i = 0; i < atoms_.size(); ++i)
            {
                double const r = atoms_[i].norm();
                if (r > a && r <= b)
                    out += rates_[i] * atoms_[i] * atoms_[i].transpose();
            }
            return out;
        }
        double const m = law_.moment(2, a, b);
        if (m == 0)
            return out;
        for (std::size_t j = 0; j < dirs_.size(); ++j)
            out += weights_[j] * m * dirs_[j] * dirs_[j].transpose();
        return out;
    }

    //! int_{||x|| > 1} ln ||x|| nu(dx).
    double log_moment() const
    {
        if (is_discrete())
        {
            double t = 0;
            for (std::size_t i = 0; i < atoms_.size(); ++i)
            {
                double const r = atoms_[i].norm();
                if (r > 1)
                    t += rates_[i] * std::log(r);
            }
            return t;
        }
        return law_.log_moment_above(1);
    }

    //! int (1 ^ ||x||^2) nu(dx); finite by construction.
    double truncated_second_moment() const
    {
        return abs_moment(2, 0, 1) + tail_mass(1);
    }

    //! int (1 ^ ||M x||^2) nu(dx).
    double e3(Matrix const& m) const
    {
        if (is_discrete())
        {
            double t = 0;
            for (std::size_t i = 0; i < atoms_.size(); ++i)
                t += rates_[i] * std::min(1.0, (m * atoms_[i]).squaredNorm());
            return t;
        }
        double t = 0;
        for (std::size_t j = 0; j < dirs_.size(); ++j)
        {
            double const g = (m * dirs_[j]).norm();
            if (g == 0)
                continue;
            double const rs = 1 / g;
            t += weights_[j] * (g * g * law_.moment(2, 0, rs) + law_.tail(rs));
        }
        return t;
    }

    //! int M x (1{||M x|| <= 1} - 1{||x|| <= 1}) nu(dx).
    Vector e1(Matrix const& m) const
    {
        Vector out = Vector::Zero(m.rows());
        if (is_discrete())
        {
            for (std::size_t i = 0; i < atoms_.size(); ++i)
            {
                Vector const y = m * atoms_[i];
                double const ind = (y.norm() <= 1 ? 1.0 : 0.0) - (atoms_[i].norm() <= 1 ? 1.0 : 0.0);
                if (ind != 0)
                    out += rates_[i] * ind * y;
            }
            return out;
        }
        for (std::size_t j = 0; j < dirs_.size(); ++j)
        {
            Vector const v = m * dirs_[j];
            double const g = v.norm();
            if (g == 0 || g == 1)
                continue;
            double const mom = g < 1 ? law_.moment(1, 1, 1 / g) : -law_.moment(1, 1 / g, 1);
            out += weights_[j] * mom * v;
        }
        return out;
    }

    //! int_{||x|| > 1} (1 ^ ||M x||) nu(dx).
    double xt2(Matrix const& m) const
    {
        if (is_discrete())
        {
            double t = 0;
            for (std::size_t i = 0; i < atoms_.size(); ++i)
                if (atoms_[i].norm() > 1)
                    t += rates_[i] * std::min(1.0, (m * atoms_[i]).norm());
            return t;
        }
        double t = 0;
        for (std::size_t j = 0; j < dirs_.size(); ++j)
        {
            double const g = (m * dirs_[j]).norm();
            if (g == 0)
                continue;
            double const cut = std::max(1.0, 1 / g);
            t += weights_[j] * (g * law_.moment(1, 1, cut) + law_.tail(cut));
        }
        return t;
    }

    //! Draws x from nu restricted to {||x|| > eps}, normalized.
    Vector sample_above(RandomStream& rng, double eps) const
    {
        if (is_discrete())
        {
            double total = 0;
            for (std::size_t i = 0; i < atoms_.size(); ++i)
                if (atoms_[i].norm() > eps)
                    total += rates_[i];
            double u = rng.uniform() * total;
            std::size_t last = 0;
            for (std::size_t i = 0; i < atoms_.size(); ++i)
            {
                if (atoms_[i].norm() <= eps)
                    continue;
                last = i;
                if (u < rates_[i])
                    return atoms_[i];
                u -= rates_[i];
            }
            return atoms_[last];
        }
        double const lo = std::max(eps, law_.r_min);
        double const r = lo * std::pow(rng.uniform_open(), -1 / law_.alpha);
        return r * dirs_[pick_direction(rng.uniform())];
    }

  private:
    void set_spectral(std::vector<Vector> dirs, std::vector<double> weights)
    {
        if (dirs.empty() || dirs.size() != weights.size())
            throw DomainError("spectral measure: need matching non-empty directions and weights");
        dim_ = static_cast<int>(dirs[0].size());
        double sum = 0;
        for (std::size_t j = 0; j < dirs.size(); ++j)
        {
            if (dirs[j].size() != dim_ || !(dirs[j].norm() > 0))
                throw DomainError("spectral measure: invalid direction");
            if (!(weights[j] > 0))
                throw DomainError("spectral measure: weights must be positive");
            dirs[j] /= dirs[j].norm();
            sum += weights[j];
        }
        if (std::abs(sum - 1) > 1e-12)
            throw DomainError("spectral measure: weights must sum to 1");
        dirs_ = std::move(dirs);
        weights_ = std::move(weights);
    }

    std::size_t pick_direction(double u) const
    {
        for (std::size_t j = 0; j + 1 < weights_.size(); ++j)
        {
            if (u < weights_[j])
                return j;
            u -= weights_[j];
        }
        return weights_.size() - 1;
    }

    Kind kind_ = Kind::finite_discrete;
    int dim_ = 1;
    std::vector<Vector> atoms_;
    std::vector<double> rates_;
    RadialLaw law_;
    std::vector<Vector> dirs_;
    std::vector<double> weights_;
};

//! Mixing probability measure pi on stable d x d matrices.
class MixingMeasure
{
  public:
    enum class Kind
    {
        discrete,
        scalar_family
    };
    enum class Family
    {
        gamma,
        exponential,
        uniform,
        lognormal
    };
    struct Atom
    {
        Matrix A;
        double p = 0;
    };

    static MixingMeasure discrete(std::vector<Atom> atoms)
    {
        if (atoms.empty())
            throw DomainError("mixing measure: no atoms");
        MixingMeasure m;
        m.kind_ = Kind::discrete;
        m.dim_ = static_cast<int>(atoms[0].A.rows());
        double sum = 0;
        for (auto const& a : atoms)
        {
            if (a.A.rows() != m.dim_ || a.A.cols() != m.dim_)
                throw DomainError("mixing measure: atoms must be square matrices of equal size");
            if (!is_stable_matrix(a.A))
                throw DomainError("mixing measure: matrix has an eigenvalue with nonnegative real part");
            if (!(a.p > 0))
                throw DomainError("mixing measure: probabilities must be positive");
            sum += a.p;
        }
        if (std::abs(sum - 1) > 1e-12)
            throw DomainError("mixing measure: probabilities must sum to 1");
        m.atoms_ = std::move(atoms);
        return m;
    }

    //! A = -R I_d with R from a positive scalar family.
    //! Parameters: gamma (shape, rate), exponential (rate), uniform (lo, hi) with lo >= 0, lognormal (mu, sigma).
    static MixingMeasure scalar(int d, Family family, double p1, double p2 = 0)
    {
        if (d < 1)
            throw DomainError("mixing measure: dimension must be >= 1");
        MixingMeasure m;
        m.kind_ = Kind::scalar_family;
        m.dim_ = d;
        m.family_ = family;
        m.p1_ = p1;
        m.p2_ = p2;
        switch (family)
        {
        case Family::gamma:
            if (!(p1 > 0 && p2 > 0))
                throw DomainError("gamma mixing: shape and rate must be positive");
            break;
        case Family::exponential:
            if (!(p1 > 0))
                throw DomainError("exponential mixing: rate must be positive");
            m.family_ = Family::gamma;
            m.p2_ = p1;
            m.p1_ = 1;
            break;
        case Family::uniform:
            if (!(p1 >= 0 && p2 > p1))
                throw DomainError("uniform mixing: need 0 <= lo < hi");
            break;
        case Family::lognormal:
            if (!(p2 > 0))
                throw DomainError("lognormal mixing: sigma must be positive");
            break;
        }
        return m;
    }

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    bool is_discrete() const { return kind_ == Kind::discrete; }
    std::vector<Atom> const& atoms() const { return atoms_; }
    Family family() const { return family_; }
    double param1() const { return p1_; }
    double param2() const { return p2_; }

    Matrix matrix_for(double r) const { return -r * Matrix::Identity(dim_, dim_); }

    double pdf(double r) const
    {
        if (!(r > 0))
            return 0;
        switch (family_)
        {
        case Family::gamma:
        case Family::exponential:
            return boost::math::pdf(boost::math::gamma_distribution<double>(p1_, 1 / p2_), r);
        case Family::uniform:
            return (r >= p1_ && r <= p2_) ? 1 / (p2_ - p1_) : 0.0;
        case Family::lognormal:
            return boost::math::pdf(boost::math::lognormal_distribution<double>(p1_, p2_), r);
        }
        return 0;
    }

    //! Upper quantile R with P(R > r) = q.
    double upper_quantile(double q) const
    {
        switch (family_)
        {
        case Family::gamma:
        case Family::exponential:
            return boost::math::quantile(boost::math::complement(boost::math::gamma_distribution<double>(p1_, 1 / p2_), q));
        case Family::uniform:
            return p2_ - q * (p2_ - p1_);
        case Family::lognormal:
            return boost::math::quantile(boost::math::complement(boost::math::lognormal_distribution<double>(p1_, p2_), q));
        }
        return kNaN;
    }

    //! Lower quantile R with P(R <= r) = q.
    double lower_quantile(double q) const
    {
        switch (family_)
        {
        case Family::gamma:
        case Family::exponential:
            return boost::math::quantile(boost::math::gamma_distribution<double>(p1_, 1 / p2_), q);
        case Family::uniform:
            return p1_ + q * (p2_ - p1_);
        case Family::lognormal:
            return boost::math::quantile(boost::math::lognormal_distribution<double>(p1_, p2_), q);
        }
        return kNaN;
    }

    //! Support of R, with an effectively-infinite upper end cut at the 1e-16 upper quantile.
    std::pair<double, double> r_support() const
    {
        if (family_ == Family::uniform)
            return {p1_, p2_};
        return {0.0, upper_quantile(1e-16)};
    }

    double sample_r(RandomStream& rng) const
    {
        switch (family_)
        {
        case Family::gamma:
        case Family::exponential:
            return boost::random::gamma_distribution<double>(p1_, 1 / p2_)(rng);
        case Family::uniform:
            return p1_ + (p2_ - p1_) * rng.uniform_open();
        case Family::lognormal:
            return boost::random::lognormal_distribution<double>(p1_, p2_)(rng);
        }
        return kNaN;
    }

    Matrix sample(RandomStream& rng) const
    {
        if (is_discrete())
        {
            double u = rng.uniform();
            for (std::size_t j = 0; j + 1 < atoms_.size(); ++j)
            {
                if (u < atoms_[j].p)
                    return atoms_[j].A;
                u -= atoms_[j].p;
            }
            return atoms_.back().A;
        }
        double r = 0;
        while (!(r > 0))
            r = sample_r(rng);
        return matrix_for(r);
    }

    //! int g(A) pi(dA) with g returning an Estimate.
    //!
    //! For scalar families the integral runs over u = ln R on
    //! [max(ln R_lo, -level), ln R_hi]; \c level is the truncation level of the
    //! divergence ladder. Inner errors add at most their sup (pi has mass 1).
    template<class G>
    Estimate integrate(G&& g, double level = quad::kLadder.back(), quad::Settings const& qs = {}) const
    {
        if (is_discrete())
        {
            Estimate total;
            for (auto const& a : atoms_)
                total += a.p * g(a.A);
            return total;
        }
        auto [lo, hi] = r_support();
        double const ulo = std::max(lo > 0 ? std::log(lo) : -kInf, -level);
        double const uhi = std::log(hi);
        double inner_err = 0;
        auto f = [&](double u) {
            double const r = std::exp(u);
            double const w = pdf(r) * r;
            if (w == 0)
                return 0.0;
            Estimate const e = g(matrix_for(r));
            inner_err = std::max(inner_err, std::isfinite(e.error) ? w * e.error : kInf);
            return w * e.value;
        };
        // Inner integrals carry relative noise near qs.rel_tol; the outer rule must not chase it.
        quad::Settings outer = qs;
        outer.rel_tol = std::max(qs.rel_tol * 100, 1e-9);
        outer.max_depth = std::min(qs.max_depth, 14u);
        Estimate out = quad::integrate(f, ulo, uhi, outer);
        // sup of the weighted inner error times the length of the u-range
        out.error += inner_err * (uhi - ulo);
        return out;
    }

  private:
    Kind kind_ = Kind::discrete;
    int dim_ = 1;
    std::vector<Atom> atoms_;
    Family family_ = Family::gamma;
    double p1_ = 0;
    double p2_ = 0;
};

struct GeneratingQuadruple
{
    Vector gamma;
    Matrix Sigma;
    LevyMeasure nu;
    MixingMeasure pi;

    int dim() const { return nu.dim(); }

    void validate() const
    {
        int const d = nu.dim();
        if (pi.dim() != d)
            throw DomainError("quadruple: mixing matrices and Lévy measure differ in dimension");
        if (gamma.size() != d)
            throw DomainError("quadruple: gamma has wrong dimension");
        if (Sigma.rows() != d || Sigma.cols() != d)
            throw DomainError("quadruple: Sigma has wrong shape");
        if (!is_symmetric(Sigma, 1e-12))
            throw DomainError("quadruple: Sigma is not symmetric");
        if (min_symmetric_eigenvalue(0.5 * (Sigma + Sigma.transpose())) < -1e-12)
            throw DomainError("quadruple: Sigma is not positive semidefinite");
    }

    //! gamma_0 = gamma - int_{||x|| <= 1} x nu(dx) when the small jumps have finite variation.
    std::optional<Vector> gamma0() const
    {
        if (!std::isfinite(nu.abs_moment(1, 0, 1)))
            return std::nullopt;
        return gamma - nu.first_moment(0, 1);
    }

    bool finite_variation() const
    {
        return Sigma.cwiseAbs().maxCoeff() == 0 && std::isfinite(nu.abs_moment(1, 0, 1));
    }
};

enum class PointKind
{
    jump,      //!< a Poisson jump of the Lévy basis
    gaussian,  //!< an impulse of the Gaussian small-jump surrogate
};

struct CloudPoint
{
    Vector x;
    Matrix A;
    double s = 0;
    PointKind kind = PointKind::jump;
};

//! Finite realization of the jump measure on a time window.
struct PoissonCloud
{
    std::vector<CloudPoint> points;
    double window_lo = 0;
    double window_hi = 0;
    double eps = 1;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

//! Points of N restricted to {||x|| > eps} x M x [a, b], sorted by time.
inline PoissonCloud sample_jumps(LevyMeasure const& nu, MixingMeasure const& pi, double a, double b, double eps,
                                 RandomStream& rng)
{
    if (!(eps > 0))
        throw DomainError("sample_jumps: eps must be positive");
    if (b < a)
        throw DomainError("sample_jumps: window end precedes start");
    double const rate = nu.tail_mass(eps);
    if (!std::isfinite(rate))
        throw DomainError("sample_jumps: infinite tail mass at eps");
    PoissonCloud cloud;
    cloud.window_lo = a;
    cloud.window_hi = b;
    cloud.eps = eps;
    cloud.seed = rng.seed();
    cloud.stream = rng.stream();
    double const mean = rate * (b - a);
    if (!(mean > 0))
        return cloud;
    long const k = boost::random::poisson_distribution<long, double>(mean)(rng);
    cloud.points.reserve(static_cast<std::size_t>(k));
    for (long i = 0; i < k; ++i)
    {
        CloudPoint p;
        p.s = a + (b - a) * rng.uniform();
        p.A = pi.sample(rng);
        p.x = nu.sample_above(rng, eps);
        cloud.points.push_back(std::move(p));
    }
    std::stable_sort(cloud.points.begin(), cloud.points.end(),
                     [](CloudPoint const& l, CloudPoint const& r) { return l.s < r.s; });
    return cloud;
}

}  // namespace mmasim
