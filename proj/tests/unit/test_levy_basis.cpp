#include <gtest/gtest.h>

#include <mmasim/levy_basis.hpp>

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

//! Compound-Poisson supOU: nu = delta_1, pi = delta_{-lambda}, gamma = int_{|x|<=1} x nu(dx) = 1.
GeneratingQuadruple cp_toy(double lambda)
{
    return {v1(1), Matrix::Zero(1, 1), LevyMeasure::finite_discrete({v1(1)}, {1}),
            MixingMeasure::discrete({{scalar(-lambda), 1}})};
}

}  // namespace

TEST(LevyBasis, CompoundPoissonLevyMeasure)
{
    // nu_int is the image of ds under s -> e^{-lambda s}: nu_int((b, c]) = ln(c / b) / lambda.
    for (double lambda : {1.0, 2.5})
    {
        auto const t = compute_triplet(cp_toy(lambda), supou_kernel(1));
        for (auto [b, c] : {std::pair{0.1, 1.0}, {0.25, 0.5}, {0.9, 0.95}})
            EXPECT_NEAR(t.nu_int_eval(SetQuery::rectangle(v1(b), v1(c))).value, std::log(c / b) / lambda, 1e-8);
        EXPECT_NEAR(t.nu_int_eval(SetQuery::radial(0.5)).value, std::log(2.0) / lambda, 1e-8);
        EXPECT_NEAR(t.nu_int_eval(SetQuery::radial(1.0)).value, 0, 1e-12);
        EXPECT_NEAR(t.nu_int_eval(SetQuery::rectangle(v1(-1), v1(-0.1))).value, 0, 1e-12);
    }
}

TEST(LevyBasis, CompoundPoissonDrift)
{
    // X_0 = sum e^{-lambda s_i} with every image jump in (0, 1]: gamma_int = int e^{-lambda s} ds.
    for (double lambda : {1.0, 2.5})
    {
        auto const t = compute_triplet(cp_toy(lambda), supou_kernel(1));
        EXPECT_NEAR(t.gamma_int(0), 1 / lambda, 1e-8);
        EXPECT_EQ(t.Sigma_int(0, 0), 0);
    }
}

TEST(LevyBasis, GaussianPartOfDiagonalSupou)
{
    Matrix a(2, 2);
    a << -1, 0, 0, -2;
    Matrix sigma(2, 2);
    sigma << 1, 0.5, 0.5, 2;
    GeneratingQuadruple q{Vector::Zero(2), sigma, LevyMeasure::finite_discrete({Vector::Zero(2) + Vector::Ones(2)}, {0.5}),
                          MixingMeasure::discrete({{a, 1}})};
    q.gamma = q.nu.first_moment(0, 1);
    auto const t = compute_triplet(q, supou_kernel(2));
    // Sigma_int = int e^{As} Sigma e^{A^T s} ds, entrywise sigma_ij / (lambda_i + lambda_j)
    EXPECT_NEAR(t.Sigma_int(0, 0), 0.5, 1e-8);
    EXPECT_NEAR(t.Sigma_int(0, 1), 0.5 / 3, 1e-8);
    EXPECT_NEAR(t.Sigma_int(1, 1), 0.5, 1e-8);
}

TEST(LevyBasis, GammaMixedGaussianVariance)
{
    // A = -R with R ~ Gamma(2, 1): Sigma_int = E[1 / (2R)] = 1/2.
    GeneratingQuadruple q{v1(0), scalar(1), LevyMeasure::finite_discrete({v1(0.5)}, {1}),
                          MixingMeasure::scalar(1, MixingMeasure::Family::gamma, 2, 1)};
    q.gamma = q.nu.first_moment(0, 1);
    auto const t = compute_triplet(q, supou_kernel(1));
    EXPECT_NEAR(t.Sigma_int(0, 0), 0.5, 1e-6);
    // gamma_int = E[1/R] * 0.5 with every image jump below 1
    EXPECT_NEAR(t.gamma_int(0), 0.5, 1e-6);
}

TEST(LevyBasis, PowerLawLevyMeasureScalesHomogeneously)
{
    GeneratingQuadruple q{v1(0), Matrix::Zero(1, 1), LevyMeasure::pareto_radial(1.5, 1, {v1(1)}, {1}, 0),
                          MixingMeasure::discrete({{scalar(-1), 1}})};
    auto const t = compute_triplet(q, supou_kernel(1));
    // nu_int((r, inf)) = int c (r e^{s})^{-alpha} ds = r^{-alpha} / alpha
    for (double r : {0.5, 1.0, 3.0})
        EXPECT_NEAR(t.nu_int_eval(SetQuery::radial(r)).value, std::pow(r, -1.5) / 1.5, 1e-7);
}

TEST(LevyBasis, RefusesWhenExistenceFails)
{
    // Gamma(0.5) mixing: E[1 / R] is infinite and so are the existence integrals
    GeneratingQuadruple q{v1(0), Matrix::Zero(1, 1), LevyMeasure::pareto_radial(1.5, 1, {v1(1)}, {1}, 1),
                          MixingMeasure::scalar(1, MixingMeasure::Family::gamma, 0.5, 1)};
    EXPECT_THROW(compute_triplet(q, supou_kernel(1)), PreconditionError);
}
