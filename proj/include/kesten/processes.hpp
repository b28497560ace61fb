#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "kesten/distributions.hpp"
#include "kesten/error.hpp"
#include "kesten/process_spec.hpp"
#include "kesten/rng.hpp"
#include "kesten/serialization.hpp"

namespace kesten {

inline constexpr std::size_t default_burn_in = 10'000;
inline constexpr double overflow_threshold = 1e300;
inline constexpr double singular_multiplier_tolerance = 1e-12;

// Sub-stream layout shared by every simulator: a_t, e_t, then one stream per AR weight.
inline constexpr std::uint64_t a_stream = 0;
inline constexpr std::uint64_t e_stream = 1;
inline constexpr std::uint64_t weight_stream_base = 2;

namespace detail {

inline void check_overflow(double value, std::size_t step) {
    if (!(std::abs(value) <= overflow_threshold)) {
        throw Error(ErrorCode::NumericalOverflow,
                    "|r_t| exceeded 1e300 at step " + std::to_string(step) +
                        "; the coefficient law is likely non-stationary (see stationarity_check)");
    }
}

inline bool near_one_constant(const CoefficientLaw& law) {
    if (!law.is_constant()) return false;
    const double v = law.support_max();
    return std::abs(1.0 - v) < singular_multiplier_tolerance;
}

}  // namespace detail

[[nodiscard]] inline ReturnSeries simulate_inverse_multiplier(const InverseMultiplierSpec& spec,
                                                              const RngStream& rng, std::size_t n) {
    validate(spec);
    detail::require(n >= 1, ErrorCode::InvalidParameter, "n must be at least 1");
    if (detail::near_one_constant(spec.a_law)) {
        throw Error(ErrorCode::DegenerateSpec, "a_t is identically 1, so (1 - a_t)^-1 is undefined");
    }
    LawSampler a(spec.a_law, rng.substream(a_stream));
    LawSampler e(spec.e_law, rng.substream(e_stream));
    std::vector<double> out(n);
    std::size_t resampled = 0;
    for (auto& r : out) {
        double at = a();
        while (std::abs(1.0 - at) < singular_multiplier_tolerance) {
            ++resampled;
            at = a();
        }
        r = e() / (1.0 - at);
    }
    return ReturnSeries(std::move(out), spec_digest(spec), rng, 0, resampled);
}

[[nodiscard]] inline ReturnSeries simulate_kesten_scalar(const KestenScalarSpec& spec, const RngStream& rng,
                                                         std::size_t n, std::size_t burn_in = default_burn_in) {
    validate(spec);
    detail::require(n >= 1, ErrorCode::InvalidParameter, "n must be at least 1");
    LawSampler a(spec.a_law, rng.substream(a_stream));
    LawSampler e(spec.e_law, rng.substream(e_stream));
    std::vector<double> out(n);
    double r = spec.r0;
    const std::size_t total = burn_in + n;
    for (std::size_t t = 0; t < total; ++t) {
        const double at = a();
        r = at * r + e();
        detail::check_overflow(r, t);
        if (t >= burn_in) out[t - burn_in] = r;
    }
    return ReturnSeries(std::move(out), spec_digest(spec), rng, burn_in);
}

[[nodiscard]] inline ReturnSeries simulate_kesten_ar(const KestenArSpec& spec, const RngStream& rng, std::size_t n,
                                                     std::size_t burn_in = default_burn_in) {
    validate(spec);
    detail::require(n >= 1, ErrorCode::InvalidParameter, "n must be at least 1");
    const std::size_t order = spec.order();
    LawSampler a(spec.a_law, rng.substream(a_stream));
    LawSampler e(spec.e_law, rng.substream(e_stream));
    std::vector<LawSampler> weights;
    weights.reserve(order);
    for (std::size_t k = 0; k < order; ++k) weights.emplace_back(spec.weight_laws[k], rng.substream(weight_stream_base + k));

    // history[0] = r_{t-1}, history[K-1] = r_{t-K}
    std::vector<double> history = spec.r_init.empty() ? std::vector<double>(order, 0.0) : spec.r_init;
    std::vector<double> w(order);
    std::vector<double> out(n);
    const std::size_t total = burn_in + n;
    for (std::size_t t = 0; t < total; ++t) {
        const double at = a();
        double weight_sum = 0.0;
        for (std::size_t k = 0; k < order; ++k) {
            w[k] = weights[k]();
            if (!std::isfinite(w[k])) throw Error(ErrorCode::NonFiniteValue, "weight draw is not finite");
            weight_sum += w[k];
        }
        if (spec.normalize_weights) {
            if (std::abs(weight_sum) < 1e-12) {
                throw Error(ErrorCode::ZeroWeightSum, "drawn weights sum to ~0 at step " + std::to_string(t));
            }
            for (auto& wk : w) wk /= weight_sum;
        }
        double pred = 0.0;
        for (std::size_t k = 0; k < order; ++k) pred += w[k] * history[k];
        const double r = at * pred + e();
        detail::check_overflow(r, t);
        for (std::size_t k = order - 1; k > 0; --k) history[k] = history[k - 1];
        history[0] = r;
        if (t >= burn_in) out[t - burn_in] = r;
    }
    return ReturnSeries(std::move(out), spec_digest(spec), rng, burn_in);
}

/// Full GARCH(1,1) path: returns plus the conditional variance and the
/// innovations that drove it (index-aligned, burn-in removed).
struct GarchPath {
    ReturnSeries returns;
    std::vector<double> sigma2;
    std::vector<double> z;
};

[[nodiscard]] inline GarchPath simulate_garch11_path(const Garch11Spec& spec, const RngStream& rng, std::size_t n,
                                                     std::size_t burn_in = default_burn_in) {
    validate(spec);
    detail::require(n >= 1, ErrorCode::InvalidParameter, "n must be at least 1");
    LawSampler z(CoefficientLaw::normal(0.0, 1.0), rng.substream(a_stream));
    std::vector<double> r_out(n);
    std::vector<double> s2_out(n);
    std::vector<double> z_out(n);
    double sigma2 = spec.sigma0 * spec.sigma0;
    double r_prev = 0.0;
    const std::size_t total = burn_in + n;
    for (std::size_t t = 0; t < total; ++t) {
        if (t > 0) sigma2 = spec.omega + spec.alpha * r_prev * r_prev + spec.beta * sigma2;
        detail::check_overflow(sigma2, t);
        const double zt = z();
        const double r = std::sqrt(sigma2) * zt;
        r_prev = r;
        if (t >= burn_in) {
            r_out[t - burn_in] = r;
            s2_out[t - burn_in] = sigma2;
            z_out[t - burn_in] = zt;
        }
    }
    return {ReturnSeries(std::move(r_out), spec_digest(spec), rng, burn_in), std::move(s2_out), std::move(z_out)};
}

[[nodiscard]] inline ReturnSeries simulate_garch11(const Garch11Spec& spec, const RngStream& rng, std::size_t n,
                                                   std::size_t burn_in = default_burn_in) {
    return simulate_garch11_path(spec, rng, n, burn_in).returns;
}

[[nodiscard]] inline ReturnSeries simulate(const ProcessSpec& spec, const RngStream& rng, std::size_t n,
                                           std::size_t burn_in = default_burn_in) {
    return std::visit(
        [&](const auto& s) -> ReturnSeries {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, InverseMultiplierSpec>) return simulate_inverse_multiplier(s, rng, n);
            else if constexpr (std::is_same_v<T, KestenScalarSpec>) return simulate_kesten_scalar(s, rng, n, burn_in);
            else if constexpr (std::is_same_v<T, KestenArSpec>) return simulate_kesten_ar(s, rng, n, burn_in);
            else return simulate_garch11(s, rng, n, burn_in);
        },
        spec);
}

/// The Kesten recursion sigma^2_t = a_t sigma^2_{t-1} + e_t satisfied by the GARCH variance.
struct KestenPair {
    CoefficientLaw a_law;
    CoefficientLaw e_law;
};

[[nodiscard]] inline KestenPair garch_to_kesten(double omega, double alpha, double beta) {
    detail::require(std::isfinite(omega) && omega > 0.0, ErrorCode::InvalidParameter, "omega must be positive");
    detail::require(alpha >= 0.0 && beta >= 0.0, ErrorCode::InvalidParameter, "alpha and beta must be nonnegative");
    if (alpha == 0.0) return {CoefficientLaw::constant(beta), CoefficientLaw::constant(omega)};
    return {CoefficientLaw::garch_coefficient(beta, alpha), CoefficientLaw::constant(omega)};
}

[[nodiscard]] inline KestenPair garch_to_kesten(const Garch11Spec& spec) {
    return garch_to_kesten(spec.omega, spec.alpha, spec.beta);
}

/// K x K companion matrix of the order-K recursion, row-major.
class CompanionMatrix {
public:
    explicit CompanionMatrix(std::size_t order) : order_(order), data_(order * order, 0.0) {}

    [[nodiscard]] std::size_t order() const noexcept { return order_; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return data_[i * order_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * order_ + j]; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const CompanionMatrix&, const CompanionMatrix&) = default;

private:
    std::size_t order_;
    std::vector<double> data_;
};

[[nodiscard]] inline CompanionMatrix build_companion_matrix(double a, std::span<const double> weights) {
    detail::require(!weights.empty(), ErrorCode::InvalidParameter, "companion matrix needs K >= 1 weights");
    CompanionMatrix m(weights.size());
    for (std::size_t k = 0; k < weights.size(); ++k) m(0, k) = a * weights[k];
    for (std::size_t i = 1; i < weights.size(); ++i) m(i, i - 1) = 1.0;
    return m;
}

}  // namespace kesten
