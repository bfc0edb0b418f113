#include <gtest/gtest.h>

#include <mmasim/kernels.hpp>
#include <mmasim/linalg.hpp>

#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using namespace mmasim;

namespace {

Matrix m2(double a, double b, double c, double d)
{
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

Matrix scalar(double v)
{
    return Matrix::Constant(1, 1, v);
}

//! sup over a (t1, h) grid of the defining objective: a lower bound for f_delta.
double brute_fdelta(KernelSpec const& k, double delta, Matrix const& a, double s, int nt, int nh)
{
    double best = 0;
    for (int i = 0; i <= nt; ++i)
        for (int j = 0; j <= nh; ++j)
            best = std::max(best, detail::fdelta_objective(k, a, s, static_cast<double>(i) / nt, delta * j / nh));
    return best;
}

}  // namespace

TEST(Linalg, ClosedFormTwoByTwoMatchesEigen)
{
    std::vector<Matrix> cases{m2(-1, 0.5, 0, -2), m2(-0.7, -1.2, 1.2, -0.7), m2(-1, 3, 0, -1),
                              m2(-3, 0.1, 0.2, -0.5), m2(0, 0, 0, 0), m2(-1e-9, 1, 0, -1e-9)};
    for (auto const& a : cases)
        for (double s : {-2.0, -0.1, 0.0, 1e-6, 0.37, 3.0, 12.0})
        {
            Matrix const ref = (a * s).exp();
            Matrix const got = expm(a, s);
            EXPECT_LE((got - ref).norm(), 1e-13 * std::max(1.0, ref.norm())) << a << " s=" << s;
        }
}

TEST(Linalg, OperatorNormMatchesSingularValues)
{
    std::vector<Matrix> cases{m2(1, 2, 3, 4), m2(-0.7, -1.2, 1.2, -0.7), m2(0, 1, 0, 0), m2(5, 0, 0, -7)};
    for (auto const& a : cases)
    {
        Eigen::JacobiSVD<Matrix> svd(a);
        EXPECT_NEAR(op_norm(a), svd.singularValues()(0), 1e-13 * svd.singularValues()(0));
    }
    Matrix three(3, 3);
    three << 1, 2, 0, 0, -1, 4, 2, 0, 1;
    Eigen::JacobiSVD<Matrix> svd(three);
    EXPECT_NEAR(op_norm(three), svd.singularValues()(0), 1e-12);
}

TEST(Kernels, SupouValuesAndLimits)
{
    auto const k = supou_kernel(1);
    Matrix const a = scalar(-2);
    EXPECT_DOUBLE_EQ(k.eval(a, 0.5)(0, 0), std::exp(-1.0));
    EXPECT_EQ(k.eval(a, 0)(0, 0), 1);
    EXPECT_EQ(k.left(a, 0)(0, 0), 0);
    EXPECT_EQ(k.eval(a, -0.1)(0, 0), 0);
    EXPECT_DOUBLE_EQ(k.deriv(a, 0.5)(0, 0), -2 * std::exp(-1.0));
    EXPECT_EQ(k.scalar_eval(-2, 0.5), k.eval(a, 0.5)(0, 0));
    EXPECT_EQ(k.C2(0, 0) - k.C1(0, 0), 1);
}

TEST(Kernels, TwoSidedIsContinuousAtZero)
{
    auto const k = two_sided_supou_kernel(2);
    Matrix const a = m2(-1, 0.5, 0, -2);
    EXPECT_LE((k.eval(a, 1e-12) - k.eval(a, -1e-12)).norm(), 1e-11);
    EXPECT_LE((k.eval(a, -0.4) - expm(a, 0.4)).norm(), 1e-15);
    EXPECT_EQ(k.C1, k.C2);
}

TEST(Kernels, ExpPolyDerivativeMatchesDifferenceQuotient)
{
    Matrix b(2, 1);
    b << 1, -0.5;
    auto const k = exp_poly_kernel(b, {1.0, 2.0, -0.5});
    Matrix const a = scalar(-1.5);
    EXPECT_EQ(k.rows, 2);
    EXPECT_EQ(k.cols, 1);
    EXPECT_LE((k.C2 - b).norm(), 0);
    for (double s : {0.1, 0.8, 2.5})
    {
        double const h = 1e-6;
        Matrix const fd = (k.eval(a, s + h) - k.eval(a, s - h)) / (2 * h);
        EXPECT_LE((fd - k.deriv(a, s)).norm(), 1e-7);
    }
    // envelope: ||f(A, s)|| <= kappa e^{-rho s}
    for (double s : {0.0, 0.5, 1.0, 3.0, 10.0})
        EXPECT_LE(op_norm(k.eval(a, s)), k.bound_kappa(a) * std::exp(-k.decay_rho(a) * s) * (1 + 1e-12));
}

TEST(Kernels, IndicatorIsRightContinuous)
{
    auto const k = indicator_test_kernel(1, 0.5);
    Matrix const a = scalar(-1);
    EXPECT_EQ(k.eval(a, 0)(0, 0), 1);
    EXPECT_EQ(k.left(a, 0)(0, 0), 0);
    EXPECT_EQ(k.eval(a, 0.5)(0, 0), 0);
    EXPECT_EQ(k.left(a, 0.5)(0, 0), 1);
}

TEST(Fdelta, ClosedFormMatchesBruteForce)
{
    auto const k = supou_kernel(1);
    Matrix const a = scalar(-1.3);
    double const delta = 0.1;
    for (double s : {-2.0, -0.5, 0.0, 0.4, 0.95, 1.05})
    {
        double const v = f_delta(k, delta, a, s);
        double const b = brute_fdelta(k, delta, a, s, 400, 40);
        EXPECT_GE(v + 1e-12, b) << "s=" << s;
        EXPECT_LE(v - b, 1e-2 * std::max(v, 1e-12)) << "s=" << s;
    }
    EXPECT_NEAR(f_delta(k, delta, a, 0.3), 1 - std::exp(-1.3 * delta), 1e-15);
    EXPECT_EQ(f_delta(k, delta, a, 1.2), 0);
}

TEST(Fdelta, ProfileAgreesWithGridRouteForNonNormalMatrices)
{
    Matrix const a = m2(-1, 3, 0, -1.5);
    double const delta = 0.1;
    for (auto const& k : {supou_kernel(2), two_sided_supou_kernel(2)})
    {
        FdeltaProfile prof(k, delta, a);
        for (double s : {-1.5, -0.7, -0.05, 0.0, 0.3, 0.99, 1.0, 1.4, 2.2})
        {
            double const p = prof(s);
            double const g = detail::fdelta_exponential_general(k, delta, a, s, {});
            double const b = brute_fdelta(k, delta, a, s, 200, 20);
            EXPECT_NEAR(p, g, 1e-8 * std::max(1.0, g)) << k.name << " s=" << s;
            EXPECT_GE(p + 1e-12, b) << k.name << " s=" << s;
            EXPECT_EQ(p, f_delta(k, delta, a, s));
        }
    }
}

TEST(Fdelta, ProfileReproducesClosedFormForSymmetricMatrices)
{
    Matrix const sym = m2(-1, 0.3, 0.3, -2);
    for (auto const& k : {supou_kernel(1), two_sided_supou_kernel(1), supou_kernel(2), two_sided_supou_kernel(2)})
    {
        Matrix const a = k.cols == 1 ? scalar(-0.8) : sym;
        for (double delta : {0.2, 0.05})
        {
            FdeltaProfile prof(k, delta, a);
            for (double s : {-2.0, -0.3, 0.0, 0.5, 1.0, 1.3, 2.5})
                EXPECT_NEAR(prof(s), detail::fdelta_exponential(k, delta, a, s), 1e-10)
                    << k.name << " d=" << k.cols << " delta=" << delta << " s=" << s;
        }
    }
}

TEST(Fdelta, ProfileIsContinuousInS)
{
    Matrix const a = m2(-0.7, -1.2, 1.2, -0.7);
    auto const k = supou_kernel(2);
    FdeltaProfile prof(k, 0.05, a);
    double prev = prof(-3);
    for (int i = 1; i <= 2000; ++i)
    {
        double const s = -3 + 4.0 * i / 2000;
        double const v = prof(s);
        // Lipschitz in s with constant about ||A|| sup f_delta over a step of 0.002
        EXPECT_LE(std::abs(v - prev), 0.01) << "s=" << s;
        prev = v;
    }
}

TEST(Fdelta, IndicatorKernelDoesNotVanish)
{
    auto const k = indicator_test_kernel(1, 0.5);
    Matrix const a = scalar(-1);
    for (double delta : {0.2, 0.05, 0.01})
    {
        EXPECT_EQ(f_delta(k, delta, a, 0.3), 1);
        EXPECT_EQ(f_delta(k, delta, a, -0.2), 1);
        EXPECT_EQ(f_delta(k, delta, a, 1.5), 0);
    }
}

TEST(Fdelta, RejectsDeltaOutsideUnitInterval)
{
    auto const k = supou_kernel(1);
    EXPECT_THROW(f_delta(k, 0, scalar(-1), 0), DomainError);
    EXPECT_THROW(f_delta(k, 1, scalar(-1), 0), DomainError);
}
