#include "sdwave/weights.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numbers>

using namespace sdwave;

TEST(Weights, ClosedFormValues)
{
    EXPECT_DOUBLE_EQ(eval_weight(make_weight(3, 1.0), 2.0), 0.5);
    EXPECT_NEAR(eval_weight(make_weight(2, 1.0), std::numbers::e), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(eval_weight(make_weight(1, 0.0, 1.0), 3.0), 3.0);
    EXPECT_EQ(make_weight(1, 0.0).form, WeightForm::Linear);
    EXPECT_EQ(make_weight(2, 1.0).form, WeightForm::Log);
    EXPECT_EQ(make_weight(5, 1.0).form, WeightForm::PowerGap);
}

TEST(Weights, GradientExamples)
{
    const HarmonicWeight w4 = make_weight(4, 1.0);
    EXPECT_DOUBLE_EQ(eval_weight_gradient(w4, 2.0), 0.25);
    EXPECT_LE(eval_weight_gradient(w4, 2.0), 2.0 / 8.0);
    const HarmonicWeight w2 = make_weight(2, 1.0);
    for (double r : {1.0, 2.0, 7.5}) EXPECT_DOUBLE_EQ(eval_weight_gradient(w2, r), 1.0 / r);
    const HarmonicWeight w1 = make_weight(1, 0.0, 2.5);
    for (double r : {0.1, 4.0}) EXPECT_DOUBLE_EQ(eval_weight_gradient(w1, r), 2.5);
}

TEST(Weights, InvalidArguments)
{
    expect_error(ErrorKind::InvalidArgument, [] { make_weight(1, 1.0); });
    expect_error(ErrorKind::InvalidArgument, [] { make_weight(1, 0.0, -1.0); });
    expect_error(ErrorKind::InvalidArgument, [] { make_weight(3, 0.0); });
    expect_error(ErrorKind::InvalidDimension, [] { make_weight(0, 1.0); });
    expect_error(ErrorKind::OutOfDomain, [] { eval_weight(make_weight(3, 1.0), 0.5); });
    expect_error(ErrorKind::OutOfDomain, [] { eval_weight_gradient(make_weight(2, 1.0), 0.9); });
}

TEST(Weights, BoundaryVanishingExactly)
{
    for (int dim : {2, 3, 4, 6})
        for (double r0 : {0.3, 1.0, 2.7}) EXPECT_EQ(eval_weight(make_weight(dim, r0), r0), 0.0);
    EXPECT_EQ(eval_weight(make_weight(1, 0.0, 3.0), 0.0), 0.0);
}

TEST(Weights, MonotoneAndBoundedOnRandomRadii)
{
    auto rng = seeded_rng();
    std::uniform_real_distribution<double> log_r(0.0, 8.0);
    for (int dim : {2, 3, 4, 5}) {
        const HarmonicWeight w = make_weight(dim, 1.0);
        for (int k = 0; k < 200; ++k) {
            const double a = std::exp(log_r(rng)), b = a * (1.0 + 1e-3 + std::exp(-log_r(rng)));
            EXPECT_LT(eval_weight(w, a), eval_weight(w, b));
            EXPECT_GT(eval_weight(w, a), 0.0);
            if (dim >= 3) EXPECT_LT(eval_weight(w, a), 1.0);
        }
    }
}

TEST(Weights, FarFieldLimitDim3)
{
    EXPECT_NEAR(eval_weight(make_weight(3, 1.0), 1e6), 1.0, 1e-3);
    EXPECT_NEAR(eval_weight(make_weight(3, 2.0), 2e6), 1.0, 1e-3);
}

TEST(Weights, GradientFluxConstant)
{
    for (int dim : {1, 2, 3, 4, 5}) {
        const double r0 = dim == 1 ? 0.0 : 1.5;
        const HarmonicWeight w = make_weight(dim, r0);
        const double c = gradient_flux_constant(w);
        if (dim >= 3) EXPECT_DOUBLE_EQ(c, (dim - 2) * std::pow(r0, dim - 2));
        for (double r : {1.5, 2.0, 10.0, 1000.0})
            EXPECT_NEAR(std::abs(eval_weight_gradient(w, r)) * std::pow(r, dim - 1), c, 1e-13 * c);
    }
}

TEST(Weights, DerivativesMatchFiniteDifferences)
{
    for (int dim : {1, 2, 3, 4}) {
        const HarmonicWeight w = make_weight(dim, dim == 1 ? 0.0 : 1.0);
        for (double r : {1.3, 2.0, 5.0}) {
            const double h = 1e-4;
            const double fd1 = (eval_weight(w, r + h) - eval_weight(w, r - h)) / (2 * h);
            const double fd2 = (eval_weight(w, r + h) - 2 * eval_weight(w, r) + eval_weight(w, r - h)) / (h * h);
            EXPECT_NEAR(eval_weight_gradient(w, r), fd1, 1e-7);
            EXPECT_NEAR(eval_weight_second_derivative(w, r), fd2, 1e-5);
            EXPECT_NEAR(eval_weight_laplacian(w, r), 0.0, 1e-14);
        }
    }
}

TEST(Weights, VerifyPowerGapDim3)
{
    const RadialGrid g = build_radial_grid(3, 1.0, 11.0, 512);
    const WeightReport rep = verify_weight(make_weight(3, 1.0), g);
    EXPECT_LE(rep.max_laplacian_residual, 1e-3);
    EXPECT_EQ(rep.boundary_value, 0.0);
    EXPECT_EQ(rep.bound_violations, 0u);
    EXPECT_NEAR(rep.gradient_decay_constant, 1.0, 1e-12);
    EXPECT_LE(rep.gradient_constancy_spread, 1e-14);
    EXPECT_GT(rep.far_field_lower_bound, 0.8);
}

TEST(Weights, VerifyLinearResidualVanishes)
{
    const RadialGrid g = build_radial_grid(1, 0.0, 10.0, 100);
    const WeightReport rep = verify_weight(make_weight(1, 0.0), g);
    EXPECT_LE(rep.max_laplacian_residual, 1e-12);
    EXPECT_EQ(rep.bound_violations, 0u);
}

TEST(Weights, VerifyLogGrowthConstant)
{
    const RadialGrid g = build_radial_grid(2, 1.0, 50.0, 256);
    const WeightReport rep = verify_weight(make_weight(2, 1.0), g);
    EXPECT_NEAR(rep.log_growth_constant, 1.0, 1e-12);
    EXPECT_NEAR(rep.gradient_decay_constant, 1.0, 1e-12);
}

TEST(Weights, VerifyMismatch)
{
    const RadialGrid g = build_radial_grid(2, 2.0, 5.0, 64);
    expect_error(ErrorKind::DimensionMismatch, [&] { verify_weight(make_weight(2, 1.0), g); });
    expect_error(ErrorKind::DimensionMismatch, [&] { verify_weight(make_weight(3, 2.0), g); });
}

TEST(Weights, DiscreteHarmonicitySecondOrder)
{
    for (int dim : {2, 3, 4}) {
        std::vector<double> res;
        for (int cells : {256, 512, 1024}) {
            const RadialGrid g = build_radial_grid(dim, 1.0, 11.0, cells);
            res.push_back(verify_weight(make_weight(dim, 1.0), g).max_laplacian_residual);
        }
        EXPECT_GE(res[0] / res[1], 3.5) << "dim " << dim;
        EXPECT_GE(res[1] / res[2], 3.5) << "dim " << dim;
    }
}
