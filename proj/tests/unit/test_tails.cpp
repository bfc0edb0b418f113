#include <gtest/gtest.h>

#include <mmasim/tails.hpp>

#include <cmath>

using namespace mmasim;

namespace {

Vector v1(double x)
{
    return Vector::Constant(1, x);
}

Matrix scalar(double v)
{
    return Matrix::Constant(1, 1, v);
}

GeneratingQuadruple symmetric_pareto(double alpha)
{
    return {v1(0), Matrix::Zero(1, 1), LevyMeasure::pareto_radial(alpha, 1, {v1(1), v1(-1)}, {0.5, 0.5}, 1),
            MixingMeasure::discrete({{scalar(-1), 1}})};
}

}  // namespace

TEST(Hill, RecoversParetoIndex)
{
    RandomStream rng(2024, 0);
    std::size_t const n = 50000;
    for (double alpha : {0.8, 2.0})
    {
        std::vector<double> x(n);
        for (auto& v : x)
            v = std::pow(rng.uniform_open(), -1 / alpha);
        auto const h = hill(x, default_hill_k(n));
        EXPECT_EQ(h.k, default_hill_k(n));
        EXPECT_NEAR(h.alpha_hat, alpha, 5 * h.stderr_);
        EXPECT_NEAR(h.stderr_, h.alpha_hat / std::sqrt(static_cast<double>(h.k)), 1e-15);
    }
}

TEST(Hill, ExactOnGeometricSpacing)
{
    // top 9 values e^{j / 2} above threshold 1: the log excesses sum to 45 / 2
    std::vector<double> x{1};
    for (int j = 1; j <= 9; ++j)
        x.push_back(std::exp(j / 2.0));
    x.push_back(0.5);
    auto const h = hill(x, 9);
    EXPECT_EQ(h.threshold, 1);
    EXPECT_NEAR(h.alpha_hat, 9 / (45 / 2.0), 1e-14);
}

TEST(Hill, RejectsBadInput)
{
    std::vector<double> x{3, 2, 1};
    EXPECT_THROW(hill(x, 0), DomainError);
    EXPECT_THROW(hill(x, 3), DomainError);
    EXPECT_THROW(hill({1, 1, 1, 1}, 2), DomainError);
    EXPECT_THROW(hill({-1, 2, 3}, 2), DomainError);
    EXPECT_EQ(default_hill_k(1000), 100u);
}

TEST(LimitMeasure, MarginalTailOfSupou)
{
    auto const q = symmetric_pareto(1.5);
    auto const k = supou_kernel(1);
    // mu_X(|y| > r) = int c (r e^{s})^{-alpha} ds = r^{-alpha} / alpha; half of it on each side
    for (double r : {0.5, 1.0, 4.0})
    {
        auto const rad = mu_x_query(q, k, SetQuery::radial(r));
        EXPECT_NEAR(rad.value, std::pow(r, -1.5) / 1.5, 1e-9);
        EXPECT_LE(rad.error_bound, 1e-8);
        auto const pos = mu_x_query(q, k, SetQuery::rectangle(v1(r), v1(kInf)));
        EXPECT_NEAR(pos.value, 0.5 * std::pow(r, -1.5) / 1.5, 1e-9);
    }
    auto const band = mu_x_query(q, k, SetQuery::rectangle(v1(1), v1(2)));
    EXPECT_NEAR(band.value, 0.5 * (1 - std::pow(2.0, -1.5)) / 1.5, 1e-9);
}

TEST(LimitMeasure, TwoTimeRadialQuery)
{
    // max(|y_0|, |y_{1/2}|) > r: jumps at u <= 0 peak at t = 0, jumps in (0, 1/2] at t = 1/2
    auto const q = symmetric_pareto(1.5);
    double const a = 1.5;
    double const want = (1 + (1 - std::exp(-a / 2))) / a;
    EXPECT_NEAR(mu_x_query(q, supou_kernel(1), SetQuery::radial(1, {0.0, 0.5})).value, want, 1e-8);
}

TEST(LimitMeasure, ScalingsAndPreconditions)
{
    auto const q = symmetric_pareto(1.5);
    auto const k = supou_kernel(1);
    EXPECT_NEAR(default_scaling(q, k, 1000), std::pow(1000 / 1.5, 1 / 1.5), 1e-6);
    EXPECT_NEAR(power_scaling(q, 1000), 100, 1e-9);
    GeneratingQuadruple const cp{v1(1), Matrix::Zero(1, 1), LevyMeasure::finite_discrete({v1(1)}, {1}),
                                 MixingMeasure::discrete({{scalar(-1), 1}})};
    EXPECT_THROW(mu_x_query(cp, k, SetQuery::radial(1)), NotApplicableError);
}

TEST(EmpiricalTail, CountsScaledSamples)
{
    std::vector<Vector> x{v1(1), v1(5), v1(-7), v1(12), v1(3)};
    auto const e = empirical_tail_measure(x, 2, SetQuery::rectangle(v1(2), v1(6)));  // x / 2 in (2, 6]
    EXPECT_EQ(e.count, 2u);
    EXPECT_EQ(e.value, 2);
    EXPECT_NEAR(e.stderr_, std::sqrt(5 * 0.4 * 0.6), 1e-15);
    EXPECT_EQ(empirical_tail_measure(x, 2, SetQuery::radial(3)).count, 2u);
    EXPECT_THROW(empirical_tail_measure(x, 2, SetQuery::rectangle(v1(-1), v1(1))), DomainError);
}

TEST(Relcomp, IndicatorsOnHandPath)
{
    // jump of 4 at 0.05 and a spike 0 -> 3 -> 0 inside [0.5, 0.56]
    CadlagPath p({0, 1}, {v1(0), v1(4)},
                 {{0.05, v1(0), v1(4)}, {0.5, v1(4), v1(7)}, {0.56, v1(7), v1(4)}});
    RelcompAccumulator acc(1, 2.5, 0.1);
    auto const ind = acc.indicators(p);
    EXPECT_TRUE(ind[0]);   // w on [0, 0.1) sees the jump
    EXPECT_FALSE(ind[1]);  // flat on [0.9, 1)
    EXPECT_TRUE(ind[2]);   // two jumps of 3 within 0.06
    RelcompAccumulator wide(1, 3.5, 0.1);
    EXPECT_FALSE(wide.indicators(p)[2]);

    auto const r = relcomp_diagnostics({p, CadlagPath::zero({0, 1}, 1)}, 1, 2.5, 0.1);
    EXPECT_EQ(r.n, 2u);
    EXPECT_EQ(r.count[0], 1u);
    EXPECT_EQ(r.rate[0], 1);
    EXPECT_NEAR(r.stderr_[0], 2 * std::sqrt(0.25 / 2), 1e-15);
}

TEST(Spectral, HarvestNormalizesAtTheMaximum)
{
    CadlagPath p({0, 0.5, 1}, {v1(1), v1(-4), v1(2)});
    CadlagPath small({0, 1}, {v1(0.1), v1(0.2)});
    auto const s = spectral_harvest({small, p}, 1);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].index, 1u);
    EXPECT_EQ(s[0].radius, 4);
    EXPECT_EQ(s[0].argmax_time, 0.5);
    EXPECT_EQ(s[0].direction_at_max(0), -1);
    EXPECT_EQ(sup_norm(s[0].normalized_path).value, 1);

    Vector const m = path_marginal(p, {0.0, 1.0});
    EXPECT_EQ(m(0), 1);
    EXPECT_EQ(m(1), 2);
    EXPECT_THROW(path_marginal(p, {0.3}), DomainError);
}
