#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "kesten/kesten.hpp"
#include "oracles.hpp"

using namespace kesten;

namespace {

const CoefficientLaw fig3_a = CoefficientLaw::exponential(0.55);
const CoefficientLaw fig3_e = CoefficientLaw::normal(0.0, 0.0065);

KestenArSpec fig4_spec() {
    return {CoefficientLaw::exponential(0.6),
            CoefficientLaw::normal(0.0, 0.007),
            {CoefficientLaw::uniform(0.7, 0.8), CoefficientLaw::uniform(0.1, 0.2), CoefficientLaw::uniform(0.0, 0.2)},
            false,
            {}};
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::InvalidParameter;
}

}  // namespace

TEST(InverseMultiplier, ZeroMultiplierReturnsNoise) {
    const auto s = simulate_inverse_multiplier({CoefficientLaw::constant(0.0), CoefficientLaw::constant(1.0)},
                                               RngStream{1, 0}, 3);
    EXPECT_EQ(s.values(), (std::vector<double>{1.0, 1.0, 1.0}));
    EXPECT_EQ(s.burn_in_dropped(), 0u);
}

TEST(InverseMultiplier, UniformMultiplierHasExactUnitTail) {
    const auto s = simulate_inverse_multiplier({CoefficientLaw::uniform(0.0, 1.0), CoefficientLaw::constant(1.0)},
                                               RngStream{2, 0}, 1'000'000);
    // P(1 / (1 - U) > x) = 1/x
    EXPECT_NEAR(oracle::survival(s.values(), 10.0), 0.1, 0.003);
    EXPECT_NEAR(oracle::survival(s.values(), 100.0), 0.01, 0.0004);
}

TEST(InverseMultiplier, UnitConstantMultiplierRejected) {
    EXPECT_EQ(code_of([] {
                  (void)simulate_inverse_multiplier({CoefficientLaw::constant(1.0), CoefficientLaw::constant(1.0)},
                                                    RngStream{}, 5);
              }),
              ErrorCode::DegenerateSpec);
}

TEST(KestenScalar, ZeroMultiplierIsWhiteNoise) {
    const auto s = simulate_kesten_scalar({CoefficientLaw::constant(0.0), CoefficientLaw::normal(0.0, 1.0)},
                                          RngStream{3, 0}, 1'000'000);
    EXPECT_LE(std::abs(acf(s, 1, false).values[1]), 3.0 / std::sqrt(1e6));
}

TEST(KestenScalar, ConstantLawsConvergeToFixedPoint) {
    const auto s = simulate_kesten_scalar({CoefficientLaw::constant(0.5), CoefficientLaw::constant(1.0), 0.0},
                                          RngStream{}, 51, 0);
    EXPECT_LT(std::abs(s.values()[50] - 2.0), 1e-10);
}

TEST(KestenScalar, HeavyTailedReturnsAtOnePercentScale) {
    const auto s = simulate_kesten_scalar({fig3_a, fig3_e}, RngStream{5, 0}, 1'000'000);
    EXPECT_NEAR(sample_std(s.values()), 0.01, 0.002);
    EXPECT_NEAR(tail_exponent_ls(s, 0.02).exponent, 3.0, 0.3);
}

TEST(KestenScalar, ExplodingRecursionReportsOverflow) {
    EXPECT_EQ(code_of([] {
                  (void)simulate_kesten_scalar({CoefficientLaw::constant(2.0), CoefficientLaw::constant(1.0)},
                                               RngStream{}, 5000, 0);
              }),
              ErrorCode::NumericalOverflow);
}

TEST(KestenScalar, NormalMultiplierRejected) {
    EXPECT_THROW((void)simulate_kesten_scalar({CoefficientLaw::normal(0.5, 0.1), fig3_e}, RngStream{}, 10), Error);
}

TEST(KestenAr, OrderOneMatchesScalarBitwise) {
    for (std::uint64_t seed : {0ULL, 1ULL, 12345ULL}) {
        const KestenScalarSpec scalar{fig3_a, fig3_e, 0.0};
        const auto a = simulate_kesten_scalar(scalar, RngStream{seed, 0}, 10'000, 100);
        const auto b = simulate_kesten_ar(embed_scalar(scalar), RngStream{seed, 0}, 10'000, 100);
        EXPECT_EQ(a.values(), b.values());
    }
}

TEST(KestenAr, ThreeLagProcessHasPowerTail) {
    const auto s = simulate_kesten_ar(fig4_spec(), RngStream{6, 0}, 1'000'000);
    const double mu = tail_exponent_ls(s, 0.02).exponent;
    EXPECT_GE(mu, 2.0);
    EXPECT_LE(mu, 4.0);
}

TEST(KestenAr, ConstantLawsConvergeToFixedPoint) {
    const KestenArSpec spec{CoefficientLaw::constant(0.5), CoefficientLaw::constant(1.0),
                            {CoefficientLaw::constant(0.5), CoefficientLaw::constant(0.5)}, false, {0.0, 0.0}};
    const auto s = simulate_kesten_ar(spec, RngStream{}, 200, 0);
    EXPECT_LT(std::abs(s.values().back() - 2.0), 1e-10);
}

TEST(KestenArProperty, ContractiveConstantLawsConvergeGeometrically) {
    // r = a * (w1 + w2) r + e with a (w1 + w2) = 0.4
    const KestenArSpec spec{CoefficientLaw::constant(0.8), CoefficientLaw::constant(1.0),
                            {CoefficientLaw::constant(0.3), CoefficientLaw::constant(0.2)}, false, {5.0, -3.0}};
    const auto s = simulate_kesten_ar(spec, RngStream{}, 200, 0);
    const double fixed = 1.0 / (1.0 - 0.4);
    double prev_err = std::abs(s.values()[10] - fixed);
    for (std::size_t t = 20; t <= 60; t += 10) {
        const double err = std::abs(s.values()[t] - fixed);
        EXPECT_LT(err, prev_err * 0.5 + 1e-15);
        prev_err = err;
    }
    EXPECT_LT(std::abs(s.values().back() - fixed), 1e-12);
}

TEST(KestenAr, ZeroWeightSumDetectedWhenNormalizing) {
    const KestenArSpec spec{CoefficientLaw::constant(0.5), CoefficientLaw::constant(1.0),
                            {CoefficientLaw::constant(0.0), CoefficientLaw::constant(0.0)}, true, {}};
    EXPECT_EQ(code_of([&] { (void)simulate_kesten_ar(spec, RngStream{}, 10, 0); }), ErrorCode::ZeroWeightSum);
}

TEST(KestenAr, NormalizedWeightsSumToOne) {
    // weights 0.3 and 0.1 normalize to 0.75 and 0.25: fixed point e / (1 - a)
    const KestenArSpec spec{CoefficientLaw::constant(0.5), CoefficientLaw::constant(1.0),
                            {CoefficientLaw::constant(0.3), CoefficientLaw::constant(0.1)}, true, {}};
    const auto s = simulate_kesten_ar(spec, RngStream{}, 200, 0);
    EXPECT_NEAR(s.values().back(), 2.0, 1e-12);
}

TEST(Garch11, NoFeedbackGivesConstantVariance) {
    const double omega = 0.04;
    const auto s = simulate_garch11({omega, 0.0, 0.0, 1.0}, RngStream{8, 0}, 1'000'000);
    double ss = 0.0;
    for (double v : s.values()) ss += v * v;
    const double var = ss / 1e6;
    EXPECT_NEAR(var, omega, 3.0 * omega * std::sqrt(2.0 / 1e6));
}

TEST(Garch11, VarianceFollowsMappedRecursionPathwise) {
    const Garch11Spec spec{0.01, 0.09, 0.9, 1.0};
    const auto path = simulate_garch11_path(spec, RngStream{9, 0}, 100'000, 1000);
    double worst = 0.0;
    for (std::size_t t = 1; t < path.sigma2.size(); ++t) {
        const double a = spec.beta + spec.alpha * path.z[t - 1] * path.z[t - 1];
        const double kesten = a * path.sigma2[t - 1] + spec.omega;
        worst = std::max(worst, std::abs(kesten - path.sigma2[t]) / path.sigma2[t]);
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(Garch11, ReturnsAreSeriallyUncorrelated) {
    const auto s = simulate_garch11({0.01, 0.09, 0.9, 1.0}, RngStream{10, 0}, 1'000'000);
    EXPECT_NEAR(acf(s, 1, false).values[1], 0.0, 0.01);
}

TEST(GarchToKesten, MapsToShiftedChiSquareCoefficient) {
    const auto [a, e] = garch_to_kesten(0.01, 0.09, 0.9);
    EXPECT_EQ(a, CoefficientLaw::garch_coefficient(0.9, 0.09));
    EXPECT_EQ(e, CoefficientLaw::constant(0.01));
    EXPECT_EQ(moment(a, 1.0), 0.99);
}

TEST(GarchToKesten, NoFeedbackIsConstant) {
    const auto [a, e] = garch_to_kesten(1.0, 0.0, 0.0);
    EXPECT_EQ(a, CoefficientLaw::constant(0.0));
    EXPECT_EQ(e, CoefficientLaw::constant(1.0));
}

TEST(GarchToKesten, LogMomentIsNegativeButNearZero) {
    const auto [a, e] = garch_to_kesten(0.01, 0.1, 0.9);
    EXPECT_NEAR(log_moment(a), -0.008, 0.002);
}

TEST(CompanionMatrix, Construction) {
    const std::vector<double> one{1.0};
    const auto m1 = build_companion_matrix(1.0, one);
    EXPECT_EQ(m1.order(), 1u);
    EXPECT_EQ(m1(0, 0), 1.0);

    const std::vector<double> half{0.5, 0.5};
    const auto m2 = build_companion_matrix(2.0, half);
    EXPECT_EQ(std::vector<double>(m2.data().begin(), m2.data().end()), (std::vector<double>{1, 1, 1, 0}));

    const std::vector<double> w{0.75, 0.15, 0.10};
    const auto m3 = build_companion_matrix(0.6, w);
    EXPECT_NEAR(m3(0, 0), 0.45, 1e-15);
    EXPECT_NEAR(m3(0, 1), 0.09, 1e-15);
    EXPECT_NEAR(m3(0, 2), 0.06, 1e-15);
    EXPECT_EQ(m3(1, 0), 1.0);
    EXPECT_EQ(m3(2, 1), 1.0);
    EXPECT_EQ(m3(1, 1), 0.0);
    EXPECT_EQ(m3(2, 2), 0.0);
}

TEST(ProcessProperty, SameSeedSameSeriesDifferentSeedDifferentSeries) {
    const ProcessSpec specs[] = {InverseMultiplierSpec{CoefficientLaw::uniform(0.0, 1.0), CoefficientLaw::normal(0.0, 1.0)},
                                 KestenScalarSpec{fig3_a, fig3_e, 0.0}, fig4_spec(), Garch11Spec{0.01, 0.09, 0.9, 1.0}};
    for (const auto& spec : specs) {
        const auto a = simulate(spec, RngStream{77, 0}, 5000);
        const auto b = simulate(spec, RngStream{77, 0}, 5000);
        const auto c = simulate(spec, RngStream{78, 0}, 5000);
        EXPECT_EQ(a.values(), b.values()) << process_kind(spec);
        EXPECT_NE(a.values(), c.values()) << process_kind(spec);
        EXPECT_EQ(a.spec_digest(), c.spec_digest());
    }
}

TEST(ProcessProperty, DisjointWindowsGiveConsistentTailExponents) {
    // OLS slope errors ignore the dependence between CCDF points, so the Hill
    // standard errors serve as the yardstick here.
    const auto s = simulate_kesten_scalar({fig3_a, fig3_e}, RngStream{12, 0}, 1'000'000);
    const std::span<const double> all(s.values());
    const auto h1 = hill_estimator(all.subspan(0, 500'000), 5000);
    const auto h2 = hill_estimator(all.subspan(500'000), 5000);
    EXPECT_LE(std::abs(h1.exponent - h2.exponent), 2.0 * std::hypot(h1.std_error, h2.std_error));
    const auto l1 = tail_exponent_ls(all.subspan(0, 500'000), 0.02);
    const auto l2 = tail_exponent_ls(all.subspan(500'000), 0.02);
    EXPECT_LE(std::abs(l1.exponent - l2.exponent), 2.0 * std::hypot(h1.std_error, h2.std_error));
}

TEST(ReturnSeries, RejectsNonFiniteValues) {
    EXPECT_THROW(ReturnSeries({1.0, NAN}, "x", RngStream{}), Error);
}

TEST(ProcessSpecSerialization, RoundTrip) {
    const ProcessSpec specs[] = {InverseMultiplierSpec{CoefficientLaw::uniform(0.0, 1.0), CoefficientLaw::normal(0.0, 1.0)},
                                 KestenScalarSpec{fig3_a, fig3_e, 0.25}, fig4_spec(), Garch11Spec{0.01, 0.09, 0.9, 1.0}};
    for (const auto& spec : specs) EXPECT_EQ(process_from_json(to_json(spec)), spec) << process_kind(spec);
    EXPECT_THROW((void)process_from_json(Json::parse(
                     R"({"kind":"kesten_scalar","a":{"kind":"normal","mean":0,"sd":1},"e":{"kind":"constant","value":1}})")),
                 Error);
}
