#include <gtest/gtest.h>

#include <mmasim/quad.hpp>

#include <chrono>
#include <cmath>

namespace quad = mmasim::quad;

TEST(Quadrature, SmoothIntegralsWithinReportedError)
{
    auto const e = quad::integrate([](double x) { return std::exp(x); }, 0, 1);
    EXPECT_NEAR(e.value, std::exp(1.0) - 1, 1e-12);
    EXPECT_LE(std::abs(e.value - (std::exp(1.0) - 1)), std::max(e.error, 1e-14));

    auto const tail = quad::integrate([](double x) { return std::exp(-x); }, 0, std::numeric_limits<double>::infinity());
    EXPECT_NEAR(tail.value, 1, 1e-9);
}

TEST(Quadrature, EmptyIntervalIsZero)
{
    auto const e = quad::integrate([](double) { return 1.0; }, 2, 1);
    EXPECT_EQ(e.value, 0);
    EXPECT_EQ(e.error, 0);
}

TEST(Quadrature, PiecesHandleJumps)
{
    auto step = [](double x) { return x < 0.3 ? 1.0 : (x < 0.7 ? 5.0 : -2.0); };
    auto const e = quad::integrate_pieces(step, 0, 1, {0.3, 0.7, 1.5, -1});
    EXPECT_NEAR(e.value, 0.3 + 2.0 - 0.6, 1e-13);

    auto const cuts = quad::pieces(0, 1, {0.5, 0.5, 2, 0.25});
    EXPECT_EQ(cuts, (std::vector<double>{0, 0.25, 0.5, 1}));
}

TEST(Quadrature, TightToleranceTerminates)
{
    // Extremely tight tolerances must not make the recursion run away.
    auto const t0 = std::chrono::steady_clock::now();
    quad::Settings s{1e-300, 1e-16, 40};
    auto const e = quad::integrate([](double x) { return std::sqrt(x) * std::cos(30 * x); }, 0, 5, s);
    double const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_LT(secs, 2.0);
    EXPECT_TRUE(std::isfinite(e.value));
}

TEST(Quadrature, TransitionsAndIndicatorMeasure)
{
    auto pred = [](double x) { return (x > 0.2 && x <= 0.45) || x > 0.8; };
    auto const t = quad::transitions(pred, 0, 1, 0.01);
    ASSERT_EQ(t.size(), 3u);
    EXPECT_NEAR(t[0], 0.2, 1e-14);
    EXPECT_NEAR(t[1], 0.45, 1e-14);
    EXPECT_NEAR(t[2], 0.8, 1e-14);
    EXPECT_NEAR(quad::indicator_measure(pred, 0, 1, 0.01), 0.45, 1e-13);

    auto const c = quad::crossings([](double x) { return x * x; }, 0.25, -1, 1, 0.1);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_NEAR(c[0], -0.5, 1e-14);
    EXPECT_NEAR(c[1], 0.5, 1e-14);
}

TEST(Quadrature, LadderSeparatesGrowthFromConvergence)
{
    auto grow = quad::ladder([](double s) { return mmasim::Estimate{s, 0}; });
    EXPECT_TRUE(grow.divergent);
    EXPECT_EQ(grow.partials, (std::array<double, 3>{10, 20, 40}));

    auto conv = quad::ladder([](double s) { return mmasim::Estimate{1 - std::exp(-s), 1e-15}; });
    EXPECT_FALSE(conv.divergent);
    EXPECT_NEAR(conv.final.value, 1, 1e-15);
    // error includes the change between the two deepest levels
    EXPECT_GE(conv.final.error, std::exp(-20.0) - std::exp(-40.0));

    auto inf = quad::ladder([](double s) { return mmasim::Estimate{s > 30 ? mmasim::kInf : 1.0, 0}; });
    EXPECT_TRUE(inf.divergent);
}
