#include <gtest/gtest.h>

#include <mmasim/conditions.hpp>

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

GeneratingQuadruple pareto(MixingMeasure pi, double alpha = 1.5)
{
    return {v1(0), Matrix::Zero(1, 1), LevyMeasure::pareto_radial(alpha, 1, {v1(1)}, {1}, 1), std::move(pi)};
}

MixingMeasure gamma_mixing(double shape)
{
    return MixingMeasure::scalar(1, MixingMeasure::Family::gamma, shape, 1);
}

ConditionReport find(std::vector<ConditionReport> const& rs, std::string const& id)
{
    for (auto const& r : rs)
        if (r.id == id)
            return r;
    ADD_FAILURE() << "no report " << id;
    return {};
}

}  // namespace

TEST(Conditions, ExistencePassesForStableSupou)
{
    auto const rs = check_existence(pareto(MixingMeasure::discrete({{scalar(-1), 1}})), supou_kernel(1));
    ASSERT_EQ(rs.size(), 3u);
    for (auto const& r : rs)
        EXPECT_EQ(r.verdict, Verdict::pass) << r.id << " " << r.details;
    // E2 integrates the zero Gaussian part
    EXPECT_EQ(find(rs, "E2").value, 0);
}

TEST(Conditions, ExistenceValuesForCompoundPoissonToy)
{
    // nu = delta_1, pi = delta_{-1}: E3 = int min(1, e^{-2s}) ds = 1/2, E1 = int e^{-s} ds = 1
    GeneratingQuadruple const q{v1(1), Matrix::Zero(1, 1), LevyMeasure::finite_discrete({v1(1)}, {1}),
                                MixingMeasure::discrete({{scalar(-1), 1}})};
    auto const rs = check_existence(q, supou_kernel(1));
    EXPECT_NEAR(find(rs, "E3").value, 0.5, 1e-8);
    EXPECT_NEAR(find(rs, "E1").value, 1, 1e-8);
}

TEST(Conditions, ExistenceDivergesForHeavyMixingAtZero)
{
    auto const rs = check_existence(pareto(gamma_mixing(0.5)), supou_kernel(1));
    auto const e3 = find(rs, "E3");
    EXPECT_EQ(e3.verdict, Verdict::divergent);
    ASSERT_EQ(e3.partials.size(), 3u);
    // growth certificate along the ladder
    EXPECT_GE(e3.partials[1], 1.5 * e3.partials[0]);
    EXPECT_GE(e3.partials[2], 1.5 * e3.partials[1]);
}

TEST(Conditions, SupouClausesForGammaMixing)
{
    auto const ok = check_supou(pareto(gamma_mixing(2)), supou_kernel(1), 1.5);
    for (auto const& r : ok)
        EXPECT_EQ(r.verdict, Verdict::pass) << r.id << " " << r.details;
    // kappa = 1, rho = R: int kappa^2 / rho dpi = E[1 / R] = 1 for Gamma(2, 1)
    EXPECT_NEAR(find(ok, "SUPOU-K2R").value, 1, 1e-6);

    auto const bad = check_supou(pareto(gamma_mixing(0.5)), supou_kernel(1), 1.5);
    EXPECT_EQ(find(bad, "SUPOU-K2R").verdict, Verdict::divergent);
}

TEST(Conditions, SupouClausesNotApplicableWithoutEnvelope)
{
    auto const rs = check_supou(pareto(MixingMeasure::discrete({{scalar(-1), 1}})), indicator_test_kernel(1), 1.5);
    ASSERT_EQ(rs.size(), 5u);
    for (auto const& r : rs)
        EXPECT_EQ(r.verdict, Verdict::not_applicable);
}

TEST(Conditions, RegularVariationAndXt2ForToy)
{
    auto const q = pareto(MixingMeasure::discrete({{scalar(-1), 1}}));
    EXPECT_EQ(check_regvar_sufficient(q, supou_kernel(1), 1.5).verdict, Verdict::pass);
    auto const x = check_xt2(q, supou_kernel(1), 1.5);
    EXPECT_EQ(x.verdict, Verdict::pass);
    EXPECT_EQ(x.clause, "i");
    EXPECT_NEAR(x.value, 1, 1e-8);  // int e^{-s} ds

    auto const xf = check_xt2(q, supou_kernel(1), 1.5, {}, 0.1);
    EXPECT_EQ(xf.id, "XT2-FDELTA");
    EXPECT_EQ(xf.verdict, Verdict::pass);
    EXPECT_NEAR(xf.value, 2 * (1 - std::exp(-0.1)), 1e-8);  // int f_delta ds for alpha > 1

    auto const discrete = GeneratingQuadruple{v1(1), Matrix::Zero(1, 1), LevyMeasure::finite_discrete({v1(1)}, {1}),
                                              MixingMeasure::discrete({{scalar(-1), 1}})};
    EXPECT_EQ(check_regvar_sufficient(discrete, supou_kernel(1), 1.5).verdict, Verdict::not_applicable);
}

TEST(Conditions, FdeltaIntegralClosedForm)
{
    auto const pi = MixingMeasure::discrete({{scalar(-2), 1}});
    for (double alpha : {0.5, 1.0, 2.0})
        for (double delta : {0.3, 0.01})
        {
            // f_delta = (1 - e^{-2 delta}) on [0, 1] and times e^{2s} for s < 0
            double const exact = std::pow(1 - std::exp(-2 * delta), alpha) * (1 + 1 / (2 * alpha));
            auto const v = fdelta_alpha_integral(supou_kernel(1), pi, delta, alpha);
            EXPECT_FALSE(v.divergent);
            EXPECT_NEAR(v.value.value, exact, 1e-8 * std::max(1.0, exact));
        }
}

TEST(Conditions, FdeltaVanishingVerdicts)
{
    auto const pi = MixingMeasure::discrete({{scalar(-1), 1}});
    auto const good = check_fdelta_vanishing(supou_kernel(1), pi, 1.5);
    EXPECT_EQ(good.verdict, Verdict::pass) << good.details;
    ASSERT_EQ(good.partials.size(), 5u);
    for (std::size_t i = 1; i < good.partials.size(); ++i)
        EXPECT_LT(good.partials[i], good.partials[i - 1]);

    auto const bad = check_fdelta_vanishing(indicator_test_kernel(1), pi, 1.5);
    EXPECT_EQ(bad.verdict, Verdict::fail) << bad.details;
    for (double v : bad.partials)
        EXPECT_GE(v, 1.0);
}

TEST(Conditions, FdeltaForNonNormalMixingDecreases)
{
    Matrix a(2, 2);
    a << -1, 3, 0, -1.5;
    auto const pi = MixingMeasure::discrete({{a, 1}});
    double prev = kInf;
    for (double delta : {0.2, 0.1, 0.05})
    {
        auto const v = fdelta_alpha_integral(supou_kernel(2), pi, delta, 1.5);
        EXPECT_LT(v.value.value, prev);
        prev = v.value.value;
    }
}

TEST(Conditions, NondegeneracyByEnumeration)
{
    auto const q = pareto(MixingMeasure::discrete({{scalar(-1), 1}}));
    EXPECT_EQ(nondegeneracy(q, supou_kernel(1)).rfind("nondegeneracy verified", 0), 0u);
}

TEST(Conditions, VerdictNames)
{
    EXPECT_STREQ(to_string(Verdict::pass), "pass");
    EXPECT_STREQ(to_string(Verdict::not_applicable), "not-applicable");
    EXPECT_STREQ(to_string(Verdict::divergent), "divergent");
}
