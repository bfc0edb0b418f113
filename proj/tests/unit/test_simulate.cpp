#include <gtest/gtest.h>

#include <mmasim/simulate.hpp>

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

//! nu = delta_1, pi = delta_{-1}: X_0 = sum e^{-s_i} over a rate-1 Poisson process on s >= 0.
GeneratingQuadruple cp_toy()
{
    return {v1(1), Matrix::Zero(1, 1), LevyMeasure::finite_discrete({v1(1)}, {1}),
            MixingMeasure::discrete({{scalar(-1), 1}})};
}

GeneratingQuadruple pareto_toy()
{
    return {v1(0), Matrix::Zero(1, 1), LevyMeasure::pareto_radial(1.5, 1, {v1(1), v1(-1)}, {0.5, 0.5}, 1),
            MixingMeasure::discrete({{scalar(-1), 0.5}, {scalar(-3), 0.5}})};
}

}  // namespace

TEST(Simulate, GridConstruction)
{
    EXPECT_EQ(make_grid(0.25), (std::vector<double>{0, 0.25, 0.5, 0.75, 1}));
    auto const g = make_grid(0.3);
    EXPECT_EQ(g.back(), 1);
    EXPECT_EQ(g.size(), 5u);
    EXPECT_EQ(normalize_grid({0.5}), (std::vector<double>{0, 0.5, 1}));
    EXPECT_THROW(normalize_grid({0.5, 0.4}), DomainError);
    EXPECT_THROW(make_grid(0), DomainError);
}

TEST(Simulate, CloudInvariants)
{
    TruncationSettings tr;
    tr.eps = 1.5;
    auto const m = make_model(pareto_toy(), supou_kernel(1), tr);
    EXPECT_LT(m.window_lo, -10);
    EXPECT_EQ(m.window_hi, 1);
    for (std::uint64_t i = 0; i < 50; ++i)
    {
        auto const c = replica_cloud(m, 12, i);
        auto const again = replica_cloud(m, 12, i);
        ASSERT_EQ(c.points.size(), again.points.size());
        for (std::size_t j = 0; j < c.points.size(); ++j)
        {
            auto const& p = c.points[j];
            EXPECT_GT(p.x.norm(), tr.eps);
            EXPECT_GE(p.s, m.window_lo);
            EXPECT_LE(p.s, m.window_hi);
            EXPECT_TRUE(p.A(0, 0) == -1 || p.A(0, 0) == -3);
            EXPECT_EQ(p.x, again.points[j].x);
            EXPECT_EQ(p.s, again.points[j].s);
            if (j > 0)
            {
                EXPECT_LE(c.points[j - 1].s, p.s);
            }
        }
    }
}

TEST(Simulate, CompoundPoissonMoments)
{
    TruncationSettings tr;
    tr.eps = 0.5;
    auto const m = make_model(cp_toy(), supou_kernel(1), tr);
    EXPECT_EQ(m.drift(0), 0);  // gamma minus the mass of nu on (eps, 1]
    std::size_t const n = 20000;
    auto const grid = make_grid(0.5);
    double s0 = 0, s1 = 0, q0 = 0;
    for (std::size_t i = 0; i < n; ++i)
    {
        auto const p = path_direct(replica_cloud(m, 3, i), m, grid);
        s0 += p.values().front()(0);
        s1 += p.values().back()(0);
        q0 += p.values().front()(0) * p.values().front()(0);
    }
    double const mean0 = s0 / n;
    double const var0 = q0 / n - mean0 * mean0;
    // E X_t = int e^{-s} ds = 1, Var X_t = int e^{-2s} ds = 1/2; 5 sigma
    EXPECT_NEAR(mean0, 1, 5 * std::sqrt(0.5 / n));
    EXPECT_NEAR(s1 / n, 1, 5 * std::sqrt(0.5 / n));
    EXPECT_NEAR(var0, 0.5, 0.05);
}

TEST(Simulate, JumpsMatchCloudPoints)
{
    auto const m = make_model(pareto_toy(), supou_kernel(1), {});
    auto const cloud = replica_cloud(m, 99, 4);
    auto const p = path_direct(cloud, m, make_grid(0.1));
    std::vector<CloudPoint> inside;
    for (auto const& c : cloud.points)
        if (c.s > 0 && c.s <= 1)
            inside.push_back(c);
    ASSERT_EQ(p.jumps().size(), inside.size());
    for (std::size_t i = 0; i < inside.size(); ++i)
    {
        EXPECT_EQ(p.jumps()[i].time, inside[i].s);
        // supOU: the jump of X at s equals the driver jump
        EXPECT_NEAR((p.jumps()[i].right - p.jumps()[i].left)(0), inside[i].x(0), 1e-12 * std::abs(inside[i].x(0)) + 1e-12);
    }
}

TEST(Simulate, DirectAndOdeRoutesAgree)
{
    auto const m = make_model(pareto_toy(), supou_kernel(1), {});
    auto const grid = make_grid(0.05);
    for (std::uint64_t i = 0; i < 20; ++i)
    {
        auto const c = replica_cloud(m, 5, i);
        auto const a = path_direct(c, m, grid);
        auto const b = path_ode(c, m, grid);
        EXPECT_LE(sup_norm(a - b).value, 1e-9 * std::max(1.0, sup_norm(a).value));
    }
}

TEST(Simulate, DriftTermIsStationaryMean)
{
    // gamma = 2 with eps = 1: X_t = drift_term + jumps, drift_term = E[1/R] * 2 = 2 * (0.5 + 1/6)
    auto q = pareto_toy();
    q.gamma = v1(2);
    auto const m = make_model(q, supou_kernel(1), {});
    EXPECT_NEAR(m.drift_term(0), 2 * (0.5 * 1 + 0.5 / 3), 1e-9);
    auto const grid = make_grid(0.25);
    auto const c = replica_cloud(m, 1, 0);
    EXPECT_LE(sup_norm(path_direct(c, m, grid) - path_ode(c, m, grid)).value, 1e-9);
}

TEST(Simulate, DecompositionAddsUp)
{
    TruncationSettings tr;
    tr.eps = 0.3;
    auto const q = GeneratingQuadruple{v1(0), Matrix::Zero(1, 1),
                                       LevyMeasure::pareto_radial(1.5, 1, {v1(1)}, {1}, 0.1),
                                       MixingMeasure::discrete({{scalar(-1), 1}})};
    auto const m = make_model(q, supou_kernel(1), tr);
    auto const grid = make_grid(0.1);
    for (auto const& d : simulate_ensemble(m, 10, grid, 8))
    {
        EXPECT_LE(sup_norm(d.path_total - (d.path_big + d.path_small)).value, 1e-12);
        EXPECT_EQ(d.underlying_levy.values().front()(0), 0);
    }
}

TEST(Simulate, EnsembleIndependentOfThreadCount)
{
    auto const m = make_model(pareto_toy(), supou_kernel(1), {});
    auto const grid = make_grid(0.1);
    auto const one = simulate_ensemble(m, 40, grid, 77, 1);
    auto const four = simulate_ensemble(m, 40, grid, 77, 4);
    for (std::size_t i = 0; i < one.size(); ++i)
    {
        EXPECT_EQ(one[i].path_total.values(), four[i].path_total.values());
        EXPECT_EQ(one[i].path_total.jumps().size(), four[i].path_total.jumps().size());
    }
}

TEST(Simulate, RefusesFailingPreconditionsUnlessForced)
{
    auto const q = GeneratingQuadruple{v1(0), Matrix::Zero(1, 1),
                                       LevyMeasure::pareto_radial(1.5, 1, {v1(1)}, {1}, 1),
                                       MixingMeasure::scalar(1, MixingMeasure::Family::gamma, 0.5, 1)};
    EXPECT_THROW(make_model(q, supou_kernel(1), {}), PreconditionError);
    EXPECT_FALSE(failing_preconditions(q, supou_kernel(1)).empty());
    TruncationSettings tr;
    tr.s_max = 20;
    auto const m = make_model(q, supou_kernel(1), tr, true);
    ASSERT_FALSE(m.warnings.empty());
    EXPECT_EQ(m.warnings.front().rfind("forced", 0), 0u);
}

TEST(Simulate, BurnInBoundRespectsTolerance)
{
    auto const m = make_model(pareto_toy(), supou_kernel(1), {});
    EXPECT_LE(m.burn_in_bound, m.trunc.burn_in_tol * (1 + 1e-9));
    EXPECT_GT(m.s_max, 0);
}
