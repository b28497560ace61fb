#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "kesten/kesten.hpp"
#include "oracles.hpp"

using namespace kesten;

namespace {

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

}  // namespace

TEST(Sample, ConstantLawRepeatsValue) {
    const auto x = sample(CoefficientLaw::constant(0.55), RngStream{7, 0}, 3);
    EXPECT_EQ(x, (std::vector<double>{0.55, 0.55, 0.55}));
}

TEST(Sample, ExponentialMeanWithinThreeSigma) {
    const auto x = sample(CoefficientLaw::exponential(0.55), RngStream{1, 0}, 1'000'000);
    EXPECT_NEAR(mean_of(x), 0.55, 0.002);
}

TEST(Sample, UniformMeanIsHalf) {
    const auto x = sample(CoefficientLaw::uniform(0.0, 1.0), RngStream{2, 0}, 1'000'000);
    EXPECT_NEAR(mean_of(x), 0.5, 0.001);
}

TEST(Sample, EqualStreamsGiveBitwiseEqualDraws) {
    for (const auto& law : {CoefficientLaw::exponential(0.6), CoefficientLaw::uniform(0.1, 0.2),
                            CoefficientLaw::normal(0.0, 0.007), CoefficientLaw::garch_coefficient(0.9, 0.09)}) {
        EXPECT_EQ(sample(law, RngStream{11, 3}, 1000), sample(law, RngStream{11, 3}, 1000));
        EXPECT_NE(sample(law, RngStream{11, 3}, 1000), sample(law, RngStream{11, 4}, 1000));
    }
}

TEST(Sample, ZeroCountRejected) {
    EXPECT_THROW((void)sample(CoefficientLaw::constant(1.0), RngStream{}, 0), Error);
}

TEST(CoefficientLaw, InvalidParametersRejected) {
    EXPECT_THROW((void)CoefficientLaw::exponential(0.0), Error);
    EXPECT_THROW((void)CoefficientLaw::uniform(1.0, 1.0), Error);
    EXPECT_THROW((void)CoefficientLaw::normal(0.0, -1.0), Error);
    EXPECT_THROW((void)CoefficientLaw::constant(NAN), Error);
    EXPECT_THROW((void)CoefficientLaw::garch_coefficient(-0.1, 0.1), Error);
}

TEST(Moment, ExponentialCubeMatchesClosedFormAndQuadratureOracle) {
    const auto law = CoefficientLaw::exponential(0.55);
    EXPECT_NEAR(moment(law, 3.0), 6.0 * 0.55 * 0.55 * 0.55, 1e-12);
    EXPECT_NEAR(moment(law, 3.0), 0.99825, 1e-12);
    const double quad = oracle::exponential_expectation(0.55, [](double x) { return x * x * x; });
    EXPECT_NEAR(moment(law, 3.0), quad, 1e-9);
}

TEST(Moment, TrivialValues) {
    EXPECT_EQ(moment(CoefficientLaw::constant(1.0), 7.0), 1.0);
    EXPECT_DOUBLE_EQ(moment(CoefficientLaw::uniform(0.0, 1.0), 1.0), 0.5);
}

TEST(Moment, FractionalOrderOfSignChangingLawRejected) {
    try {
        (void)moment(CoefficientLaw::normal(0.0, 1.0), 0.5);
        FAIL() << "expected NonnegativityRequired";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonnegativityRequired);
    }
    EXPECT_NEAR(moment(CoefficientLaw::normal(0.0, 2.0), 2.0), 4.0, 1e-12);
}

TEST(Moment, GarchIntegerOrdersMatchExpansion) {
    const auto law = CoefficientLaw::garch_coefficient(0.9, 0.09);
    EXPECT_NEAR(moment(law, 1.0), 0.99, 1e-15);
    // E(b + a z^2)^2 = b^2 + 2ab + 3a^2
    EXPECT_NEAR(moment(law, 2.0), 0.81 + 2 * 0.9 * 0.09 + 3 * 0.09 * 0.09, 1e-14);
}

TEST(MomentProperty, MonteCarloWithinFourStandardErrorsOfClosedForm) {
    const std::vector<CoefficientLaw> laws{CoefficientLaw::exponential(0.55), CoefficientLaw::exponential(1.3),
                                           CoefficientLaw::uniform(0.0, 1.0), CoefficientLaw::uniform(0.7, 0.8)};
    int stream = 0;
    for (const auto& law : laws) {
        const auto x = sample(law, RngStream{99, static_cast<std::uint64_t>(stream++)}, 1'000'000);
        for (double mu : {0.5, 1.0, 2.0, 3.0}) {
            double s = 0.0, ss = 0.0;
            for (double v : x) {
                const double p = std::pow(v, mu);
                s += p;
                ss += p * p;
            }
            const double n = static_cast<double>(x.size());
            const double m = s / n;
            const double se = std::sqrt((ss / n - m * m) / n);
            EXPECT_LE(std::abs(m - moment(law, mu)), 4.0 * se) << law.kind() << " mu=" << mu;
        }
    }
}

TEST(MomentProperty, OrderNearZeroIsOne) {
    for (const auto& law : {CoefficientLaw::exponential(0.55), CoefficientLaw::uniform(0.0, 1.0),
                            CoefficientLaw::constant(3.0), CoefficientLaw::garch_coefficient(0.9, 0.1)}) {
        const double m = moment(law, 1e-6);
        EXPECT_GE(m, 0.999) << law.kind();
        EXPECT_LE(m, 1.001) << law.kind();
    }
}

TEST(LogMoment, TrivialAndClosedFormValues) {
    EXPECT_EQ(log_moment(CoefficientLaw::constant(1.0)), 0.0);
    EXPECT_NEAR(log_moment(CoefficientLaw::exponential(1.0)), -0.5772, 1e-4);
    EXPECT_NEAR(log_moment(CoefficientLaw::exponential(1.0)), -oracle::euler_gamma(), 1e-9);
    EXPECT_NEAR(log_moment(CoefficientLaw::exponential(0.55)), std::log(0.55) - oracle::euler_gamma(), 1e-9);
}

TEST(LogMoment, StoredEulerConstantMatchesQuadrature) { EXPECT_NEAR(euler_gamma, oracle::euler_gamma(), 1e-10); }

TEST(LogMoment, GarchCoefficientIsSlightlyNegative) {
    const Estimate e = log_moment_estimate(CoefficientLaw::garch_coefficient(0.9, 0.1));
    EXPECT_EQ(e.method, Method::monte_carlo);
    EXPECT_GT(e.std_error, 0.0);
    EXPECT_NEAR(e.value, -0.008, 0.002);
    // quadrature over z as an independent check
    const double quad = 2.0 * oracle::simpson([](double z) {
        return std::log(0.9 + 0.1 * z * z) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    }, 0.0, 40.0);
    EXPECT_NEAR(e.value, quad, 4.0 * e.std_error);
}

TEST(LogMoment, NonPositiveLawsRejected) {
    for (const auto& law : {CoefficientLaw::normal(0.0, 1.0), CoefficientLaw::constant(0.0)}) {
        try {
            (void)log_moment(law);
            FAIL() << law.kind();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::PositivityRequired);
        }
    }
}

TEST(LogMomentProperty, JensenStrictForNonConstantLaws) {
    for (const auto& law : {CoefficientLaw::exponential(0.55), CoefficientLaw::exponential(2.0),
                            CoefficientLaw::uniform(0.0, 1.0), CoefficientLaw::uniform(0.7, 0.8),
                            CoefficientLaw::garch_coefficient(0.9, 0.09)}) {
        EXPECT_LT(log_moment(law), std::log(moment(law, 1.0))) << law.kind();
    }
    EXPECT_DOUBLE_EQ(log_moment(CoefficientLaw::constant(0.7)), std::log(moment(CoefficientLaw::constant(0.7), 1.0)));
}

TEST(DensityLimits, OneSidedAtSupportBoundary) {
    const auto d = density_limits(CoefficientLaw::uniform(0.0, 1.0), 1.0);
    EXPECT_EQ(d.left, 1.0);
    EXPECT_EQ(d.right, 0.0);
    EXPECT_THROW((void)density_limits(CoefficientLaw::constant(1.0), 1.0), Error);
}

TEST(Serialization, LawRoundTripAndStrictKeys) {
    for (const auto& law : {CoefficientLaw::exponential(0.55), CoefficientLaw::uniform(0.7, 0.8),
                            CoefficientLaw::normal(0.0, 0.0065), CoefficientLaw::constant(1.0),
                            CoefficientLaw::garch_coefficient(0.9, 0.09)}) {
        EXPECT_EQ(law_from_json(to_json(law)), law);
    }
    EXPECT_EQ(to_json(CoefficientLaw::exponential(0.55)).dump(), R"({"kind":"exponential","mean":0.55})");
    EXPECT_THROW((void)law_from_json(Json::parse(R"({"kind":"exponential","mean":0.55,"sd":1})")), Error);
    EXPECT_THROW((void)law_from_json(Json::parse(R"({"kind":"cauchy"})")), Error);
    EXPECT_THROW((void)law_from_json(Json::parse(R"({"kind":"exponential","mean":-1})")), Error);
}
