#include "opinionlab/error.hpp"
#include "opinionlab/saturation.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace opinionlab;

namespace {

double central_slope(const SaturationSpec& s, double y, double h = 1e-6) {
    return (s(y + h) - s(y - h)) / (2.0 * h);
}

}  // namespace

TEST(Saturation, TanhNormalisation) {
    for (double k : {0.5, 1.0, 3.0}) {
        const SaturationSpec s = SaturationSpec::odd_tanh(k);
        EXPECT_EQ(s(0.0), 0.0);
        EXPECT_NEAR(central_slope(s, 0.0), 1.0, 1e-9);
        EXPECT_NEAR(s(50.0 * k), k, 1e-12);
        EXPECT_NEAR(s(-50.0 * k), -k, 1e-12);
        EXPECT_NEAR(s(0.7), -s(-0.7), 1e-15);
        EXPECT_TRUE(s.is_odd());
        EXPECT_DOUBLE_EQ(s.max_slope(), 1.0);
    }
}

TEST(Saturation, LogisticMatchesClosedForm) {
    const double k1 = 0.8, k2 = 1.2;
    const SaturationSpec s = SaturationSpec::asymmetric_logistic(k1, k2);
    const double B = (k1 + k2) / (k1 * k2);
    const double y0 = std::log(k1 / k2);
    for (double y : {-3.0, -0.4, 0.0, 0.25, 1.0, 5.0}) {
        const double expect = (k1 + k2) / (1.0 + std::exp(-(B * y + y0))) - k1;
        EXPECT_NEAR(s(y), expect, 1e-14) << y;
        EXPECT_NEAR(s.derivative(y), central_slope(s, y), 1e-8) << y;
    }
    EXPECT_EQ(s(0.0), 0.0);
    EXPECT_NEAR(central_slope(s, 0.0), 1.0, 1e-9);
    EXPECT_NEAR(s(-200.0), -k1, 1e-12);
    EXPECT_NEAR(s(200.0), k2, 1e-12);
    EXPECT_FALSE(s.is_odd());

    // Curvature at the origin: S''(0) = (k1+k2) B^2 sigma'' where the
    // logistic's second derivative at y0 is sig (1 - sig)(1 - 2 sig).
    const double sig = k1 / (k1 + k2);
    const double curvature = (k1 + k2) * B * B * sig * (1.0 - sig) * (1.0 - 2.0 * sig);
    const double h = 1e-4;
    EXPECT_NEAR((s(h) - 2.0 * s(0.0) + s(-h)) / (h * h), curvature, 1e-5);
    EXPECT_GT(std::abs(curvature), 1e-6);
}

TEST(Saturation, SymmetricLogisticIsOdd) {
    const SaturationSpec s = SaturationSpec::asymmetric_logistic(1.0, 1.0);
    EXPECT_TRUE(s.is_odd());
    for (double y : {0.1, 0.9, 3.0}) EXPECT_NEAR(s(y), -s(-y), 1e-14);
    // k1 = k2 = 1 reduces to tanh.
    EXPECT_NEAR(s(0.6), std::tanh(0.6), 1e-14);
}

TEST(Saturation, OddPart) {
    const SaturationSpec s = SaturationSpec::asymmetric_logistic(0.5, 2.0);
    for (double y : {0.2, 1.0, 4.0}) {
        EXPECT_NEAR(s.odd(y), 0.5 * (s(y) - s(-y)), 1e-15);
        EXPECT_NEAR(s.odd(-y), -s.odd(y), 1e-15);
    }
}

TEST(Saturation, CustomTable) {
    const SaturationSpec s = SaturationSpec::custom_table({-2.0, -1.0, 1.0, 2.0}, {-1.5, -1.0, 1.0, 1.2});
    EXPECT_EQ(s(0.0), 0.0);
    EXPECT_NEAR(central_slope(s, 0.0), 1.0, 1e-9);
    EXPECT_DOUBLE_EQ(s(-10.0), -1.5);
    EXPECT_DOUBLE_EQ(s(10.0), 1.2);
    EXPECT_DOUBLE_EQ(s(1.5), 1.1);
    EXPECT_DOUBLE_EQ(s.k1(), 1.5);
    EXPECT_DOUBLE_EQ(s.k2(), 1.2);
}

TEST(Saturation, RejectsInvalidSpecifications) {
    EXPECT_THROW(SaturationSpec::odd_tanh(0.0), ParameterError);
    EXPECT_THROW(SaturationSpec::asymmetric_logistic(-1.0, 1.0), ParameterError);
    // Slope at the origin is 2, not 1.
    EXPECT_THROW(SaturationSpec::custom_table({-1.0, 1.0}, {-2.0, 2.0}), ParameterError);
    // Does not pass through the origin.
    EXPECT_THROW(SaturationSpec::custom_table({-1.0, 1.0}, {-0.5, 1.5}), ParameterError);
    // Decreasing values.
    EXPECT_THROW(SaturationSpec::custom_table({-1.0, 0.0, 1.0}, {-1.0, 0.0, -0.5}), ParameterError);
    // Never positive.
    EXPECT_THROW(SaturationSpec::custom_table({-1.0, 0.0}, {-1.0, 0.0}), ParameterError);
    EXPECT_THROW(SaturationSpec::custom_table({0.0}, {0.0}), ParameterError);
    EXPECT_THROW(parse_saturation_family("relu"), ParameterError);
}
