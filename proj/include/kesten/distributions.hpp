#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>

#include "kesten/error.hpp"
#include "kesten/rng.hpp"

namespace kesten {

/// Euler-Mascheroni constant to 15 significant digits.
inline constexpr double euler_gamma = 0.577215664901533;

struct Exponential {
    double mean;
    friend bool operator==(const Exponential&, const Exponential&) = default;
};
struct Uniform {
    double lo;
    double hi;
    friend bool operator==(const Uniform&, const Uniform&) = default;
};
struct Normal {
    double mean;
    double sd;
    friend bool operator==(const Normal&, const Normal&) = default;
};
struct Constant {
    double value;
    friend bool operator==(const Constant&, const Constant&) = default;
};
/// a = beta + alpha * z^2 with z standard normal (the GARCH(1,1) variance multiplier).
struct GarchCoefficient {
    double beta;
    double alpha;
    friend bool operator==(const GarchCoefficient&, const GarchCoefficient&) = default;
};

/// A validated one-dimensional law for a_t, e_t, or an AR weight.
class CoefficientLaw {
public:
    using Variant = std::variant<Exponential, Uniform, Normal, Constant, GarchCoefficient>;

    CoefficientLaw(Variant v) : v_(v) { validate(); }  // NOLINT(google-explicit-constructor)

    static CoefficientLaw exponential(double mean) { return Variant{Exponential{mean}}; }
    static CoefficientLaw uniform(double lo, double hi) { return Variant{Uniform{lo, hi}}; }
    static CoefficientLaw normal(double mean, double sd) { return Variant{Normal{mean, sd}}; }
    static CoefficientLaw constant(double value) { return Variant{Constant{value}}; }
    static CoefficientLaw garch_coefficient(double beta, double alpha) {
        return Variant{GarchCoefficient{beta, alpha}};
    }

    [[nodiscard]] const Variant& variant() const noexcept { return v_; }

    template <typename T>
    [[nodiscard]] const T* get_if() const noexcept {
        return std::get_if<T>(&v_);
    }

    [[nodiscard]] std::string_view kind() const noexcept {
        return std::visit(
            [](const auto& l) -> std::string_view {
                using T = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<T, Exponential>) return "exponential";
                else if constexpr (std::is_same_v<T, Uniform>) return "uniform";
                else if constexpr (std::is_same_v<T, Normal>) return "normal";
                else if constexpr (std::is_same_v<T, Constant>) return "constant";
                else return "garch_coeff";
            },
            v_);
    }

    /// True when the law cannot produce negative values.
    [[nodiscard]] bool nonnegative() const noexcept {
        if (auto* u = get_if<Uniform>()) return u->lo >= 0.0;
        if (auto* c = get_if<Constant>()) return c->value >= 0.0;
        return get_if<Normal>() == nullptr;
    }

    /// True when P(X <= 0) = 0.
    [[nodiscard]] bool positive_almost_surely() const noexcept {
        if (get_if<Exponential>()) return true;
        if (auto* u = get_if<Uniform>()) return u->lo >= 0.0;
        if (auto* c = get_if<Constant>()) return c->value > 0.0;
        if (auto* g = get_if<GarchCoefficient>()) return g->beta > 0.0 || g->alpha > 0.0;
        return false;
    }

    [[nodiscard]] bool is_constant() const noexcept {
        if (get_if<Constant>()) return true;
        if (auto* g = get_if<GarchCoefficient>()) return g->alpha == 0.0;
        return false;
    }

    /// Absolutely continuous laws (everything but point masses).
    [[nodiscard]] bool has_density() const noexcept { return !is_constant(); }

    /// Supremum of the support; +inf for unbounded laws.
    [[nodiscard]] double support_max() const noexcept {
        if (auto* u = get_if<Uniform>()) return u->hi;
        if (auto* c = get_if<Constant>()) return c->value;
        if (auto* g = get_if<GarchCoefficient>(); g && g->alpha == 0.0) return g->beta;
        return std::numeric_limits<double>::infinity();
    }

    friend bool operator==(const CoefficientLaw&, const CoefficientLaw&) = default;

private:
    void validate() const {
        auto finite = [](double x) { return std::isfinite(x); };
        std::visit(
            [&](const auto& l) {
                using T = std::decay_t<decltype(l)>;
                using detail::require;
                constexpr auto bad = ErrorCode::InvalidParameter;
                if constexpr (std::is_same_v<T, Exponential>) {
                    require(finite(l.mean) && l.mean > 0.0, bad, "exponential mean must be positive");
                } else if constexpr (std::is_same_v<T, Uniform>) {
                    require(finite(l.lo) && finite(l.hi) && l.lo < l.hi, bad,
                            "uniform requires finite lo < hi");
                } else if constexpr (std::is_same_v<T, Normal>) {
                    require(finite(l.mean) && finite(l.sd) && l.sd > 0.0, bad,
                            "normal requires finite mean and sd > 0");
                } else if constexpr (std::is_same_v<T, Constant>) {
                    require(finite(l.value), bad, "constant value must be finite");
                } else {
                    require(finite(l.beta) && finite(l.alpha) && l.beta >= 0.0 && l.alpha >= 0.0,
                            bad, "garch coefficient requires beta >= 0 and alpha >= 0");
                }
            },
            v_);
    }

    Variant v_;
};

enum class Method { closed_form, quadrature, monte_carlo };

constexpr std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::closed_form: return "closed-form";
        case Method::quadrature: return "quadrature";
        case Method::monte_carlo: return "monte-carlo";
    }
    return "unknown";
}

/// A numeric value with its provenance; stderr is zero unless sampled.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    Method method = Method::closed_form;
};

struct NumericOptions {
    std::size_t mc_draws = 1'000'000;
    RngStream mc_stream{0x6b657374656eULL, 0};
    double quad_tol = 1e-8;
};

/// Stateful iid sampler for one law. Keeps the engine and distribution state so
/// consecutive calls continue the same stream.
class LawSampler {
public:
    LawSampler(const CoefficientLaw& law, const RngStream& rng) : law_(law), engine_(rng.engine()) {}

    double operator()() {
        return std::visit(
            [&](const auto& l) -> double {
                using T = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<T, Exponential>) {
                    return l.mean * unit_exp_(engine_);
                } else if constexpr (std::is_same_v<T, Uniform>) {
                    return l.lo + (l.hi - l.lo) * unit_uniform_(engine_);
                } else if constexpr (std::is_same_v<T, Normal>) {
                    return l.mean + l.sd * std_normal_(engine_);
                } else if constexpr (std::is_same_v<T, Constant>) {
                    return l.value;
                } else {
                    if (l.alpha == 0.0) return l.beta;
                    const double z = std_normal_(engine_);
                    return l.beta + l.alpha * z * z;
                }
            },
            law_.variant());
    }

    void fill(std::vector<double>& out) {
        for (auto& x : out) x = (*this)();
    }

private:
    CoefficientLaw law_;
    std::mt19937_64 engine_;
    std::exponential_distribution<double> unit_exp_{1.0};
    std::uniform_real_distribution<double> unit_uniform_{0.0, 1.0};
    std::normal_distribution<double> std_normal_{0.0, 1.0};
};

[[nodiscard]] inline std::vector<double> sample(const CoefficientLaw& law, const RngStream& rng,
                                                std::size_t n) {
    detail::require(n >= 1, ErrorCode::InvalidParameter, "sample size must be at least 1");
    std::vector<double> out(n);
    LawSampler sampler(law, rng);
    sampler.fill(out);
    return out;
}

namespace detail {

inline bool is_integer(double x) { return std::isfinite(x) && x == std::floor(x); }

inline double mc_mean(const std::vector<double>& values, double* se_out) {
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t i = 0;
    for (double v : values) {  // Welford
        ++i;
        const double d = v - mean;
        mean += d / static_cast<double>(i);
        m2 += d * (v - mean);
    }
    if (se_out) *se_out = values.size() > 1 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
    return mean;
}

/// log(a) draws for the sampled-moment laws; common to every mu.
inline std::vector<double> garch_log_draws(const GarchCoefficient& g, const NumericOptions& opts) {
    std::vector<double> z = sample(CoefficientLaw::normal(0.0, 1.0), opts.mc_stream, opts.mc_draws);
    for (auto& v : z) v = std::log(g.beta + g.alpha * v * v);
    return z;
}

inline double double_factorial_odd(unsigned k) {  // (2k-1)!!
    double r = 1.0;
    for (unsigned i = 1; i <= k; ++i) r *= static_cast<double>(2 * i - 1);
    return r;
}

inline double binomial(unsigned n, unsigned k) {
    double r = 1.0;
    for (unsigned i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace detail

/// E(X^mu). Closed form where available; fractional moments of the GARCH
/// coefficient are Monte Carlo with a reported standard error.
[[nodiscard]] inline Estimate moment_estimate(const CoefficientLaw& law, double mu,
                                              const NumericOptions& opts = {}) {
    using detail::require;
    require(std::isfinite(mu) && mu > 0.0, ErrorCode::InvalidParameter, "moment order must be positive");
    const bool integral = detail::is_integer(mu);
    if (!law.nonnegative() && !integral) {
        throw Error(ErrorCode::NonnegativityRequired,
                    "fractional moment of a sign-changing " + std::string(law.kind()) + " law");
    }
    return std::visit(
        [&](const auto& l) -> Estimate {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                double v = std::tgamma(mu + 1.0) * std::pow(l.mean, mu);
                if (!std::isfinite(v)) v = std::exp(std::lgamma(mu + 1.0) + mu * std::log(l.mean));
                return {v, 0.0, Method::closed_form};
            } else if constexpr (std::is_same_v<T, Constant>) {
                return {std::pow(l.value, mu), 0.0, Method::closed_form};
            } else if constexpr (std::is_same_v<T, Uniform>) {
                const double v = (std::pow(l.hi, mu + 1.0) - std::pow(l.lo, mu + 1.0)) /
                                 ((mu + 1.0) * (l.hi - l.lo));
                return {v, 0.0, Method::closed_form};
            } else if constexpr (std::is_same_v<T, Normal>) {
                // m_k = mean * m_{k-1} + (k-1) sd^2 m_{k-2}
                const auto order = static_cast<unsigned>(mu);
                double prev = 1.0;
                double cur = l.mean;
                for (unsigned k = 2; k <= order; ++k) {
                    const double next = l.mean * cur + static_cast<double>(k - 1) * l.sd * l.sd * prev;
                    prev = cur;
                    cur = next;
                }
                return {cur, 0.0, Method::closed_form};
            } else {
                if (l.alpha == 0.0) return {std::pow(l.beta, mu), 0.0, Method::closed_form};
                if (integral && mu <= 64.0) {
                    const auto order = static_cast<unsigned>(mu);
                    double v = 0.0;
                    for (unsigned j = 0; j <= order; ++j) {
                        v += detail::binomial(order, j) * std::pow(l.beta, order - j) *
                             std::pow(l.alpha, j) * detail::double_factorial_odd(j);
                    }
                    return {v, 0.0, Method::closed_form};
                }
                auto draws = detail::garch_log_draws(l, opts);
                for (auto& v : draws) v = std::exp(mu * v);
                double se = 0.0;
                const double m = detail::mc_mean(draws, &se);
                return {m, se, Method::monte_carlo};
            }
        },
        law.variant());
}

[[nodiscard]] inline double moment(const CoefficientLaw& law, double mu, const NumericOptions& opts = {}) {
    return moment_estimate(law, mu, opts).value;
}

/// E[log X] for laws that are positive almost surely.
[[nodiscard]] inline Estimate log_moment_estimate(const CoefficientLaw& law, const NumericOptions& opts = {}) {
    if (!law.positive_almost_surely()) {
        throw Error(ErrorCode::PositivityRequired,
                    "E[log X] needs P(X <= 0) = 0; " + std::string(law.kind()) + " law violates it");
    }
    return std::visit(
        [&](const auto& l) -> Estimate {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                return {std::log(l.mean) - euler_gamma, 0.0, Method::closed_form};
            } else if constexpr (std::is_same_v<T, Constant>) {
                return {std::log(l.value), 0.0, Method::closed_form};
            } else if constexpr (std::is_same_v<T, Uniform>) {
                auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
                const double v = (xlogx(l.hi) - l.hi - xlogx(l.lo) + l.lo) / (l.hi - l.lo);
                return {v, 0.0, Method::closed_form};
            } else if constexpr (std::is_same_v<T, GarchCoefficient>) {
                if (l.alpha == 0.0) return {std::log(l.beta), 0.0, Method::closed_form};
                // E log z^2 = -gamma - log 2
                if (l.beta == 0.0) {
                    return {std::log(l.alpha) - euler_gamma - std::numbers::ln2, 0.0, Method::closed_form};
                }
                const auto draws = detail::garch_log_draws(l, opts);
                double se = 0.0;
                const double m = detail::mc_mean(draws, &se);
                return {m, se, Method::monte_carlo};
            } else {
                return {};  // unreachable: normal laws are rejected above
            }
        },
        law.variant());
}

[[nodiscard]] inline double log_moment(const CoefficientLaw& law, const NumericOptions& opts = {}) {
    return log_moment_estimate(law, opts).value;
}

/// Integral of f against the law restricted to lo < X < hi. Point masses are
/// evaluated directly; everything else goes through Boost quadrature, with the
/// GARCH coefficient integrated in the underlying normal variable.
[[nodiscard]] inline double expectation_over(const CoefficientLaw& law, const std::function<double(double)>& f,
                                             double lo, double hi, const NumericOptions& opts = {}) {
    namespace bq = boost::math::quadrature;
    const double inf = std::numeric_limits<double>::infinity();
    const double tol = opts.quad_tol;
    auto finite_range = [&](auto&& g, double a, double b) {
        if (!(a < b)) return 0.0;
        if (std::isinf(a) && std::isinf(b)) {
            bq::sinh_sinh<double> integrator;
            return integrator.integrate(g, tol);
        }
        if (std::isinf(b)) {
            bq::exp_sinh<double> integrator;
            return integrator.integrate(g, a, inf, tol);
        }
        if (std::isinf(a)) {
            bq::exp_sinh<double> integrator;
            return integrator.integrate([&](double x) { return g(-x); }, -b, inf, tol);
        }
        return bq::gauss_kronrod<double, 31>::integrate(g, a, b, 15, tol);
    };
    return std::visit(
        [&](const auto& l) -> double {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return (l.value > lo && l.value < hi) ? f(l.value) : 0.0;
            } else if constexpr (std::is_same_v<T, Exponential>) {
                auto g = [&](double x) {
                    const double dens = std::exp(-x / l.mean) / l.mean;
                    return dens > 0.0 ? f(x) * dens : 0.0;
                };
                return finite_range(g, std::max(lo, 0.0), hi);
            } else if constexpr (std::is_same_v<T, Uniform>) {
                auto g = [&](double x) { return f(x) / (l.hi - l.lo); };
                return finite_range(g, std::max(lo, l.lo), std::min(hi, l.hi));
            } else if constexpr (std::is_same_v<T, Normal>) {
                auto g = [&](double x) {
                    const double dens = detail::normal_pdf((x - l.mean) / l.sd) / l.sd;
                    return dens > 0.0 ? f(x) * dens : 0.0;
                };
                // integrate in standardized units so the peak is resolved
                auto gs = [&](double s) { return g(l.mean + l.sd * s) * l.sd; };
                return finite_range(gs, (lo - l.mean) / l.sd, (hi - l.mean) / l.sd);
            } else {
                if (l.alpha == 0.0) return (l.beta > lo && l.beta < hi) ? f(l.beta) : 0.0;
                auto to_z = [&](double x) {
                    if (x <= l.beta) return 0.0;
                    return std::isinf(x) ? inf : std::sqrt((x - l.beta) / l.alpha);
                };
                auto g = [&](double z) {
                    const double dens = 2.0 * detail::normal_pdf(z);
                    return dens > 0.0 ? f(l.beta + l.alpha * z * z) * dens : 0.0;
                };
                return finite_range(g, to_z(lo), to_z(hi));
            }
        },
        law.variant());
}

[[nodiscard]] inline double expectation(const CoefficientLaw& law, const std::function<double(double)>& f,
                                        const NumericOptions& opts = {}) {
    const double inf = std::numeric_limits<double>::infinity();
    return expectation_over(law, f, -inf, inf, opts);
}

/// E|X|^mu, defined for every law (needed for the noise-moment condition).
[[nodiscard]] inline Estimate abs_moment_estimate(const CoefficientLaw& law, double mu,
                                                  const NumericOptions& opts = {}) {
    detail::require(std::isfinite(mu) && mu > 0.0, ErrorCode::InvalidParameter, "moment order must be positive");
    if (law.nonnegative()) return moment_estimate(law, mu, opts);
    if (auto* c = law.get_if<Constant>()) return {std::pow(std::abs(c->value), mu), 0.0, Method::closed_form};
    if (auto* u = law.get_if<Uniform>()) {
        const double p = mu + 1.0;
        const double a = std::abs(u->lo);
        const double b = std::abs(u->hi);
        const double num = u->hi > 0.0 ? std::pow(a, p) + std::pow(b, p) : std::pow(a, p) - std::pow(b, p);
        return {num / (p * (u->hi - u->lo)), 0.0, Method::closed_form};
    }
    const auto& nrm = *law.get_if<Normal>();
    if (nrm.mean == 0.0) {
        const double v = std::pow(nrm.sd, mu) * std::pow(2.0, mu / 2.0) * std::tgamma((mu + 1.0) / 2.0) /
                         std::sqrt(std::numbers::pi);
        return {v, 0.0, Method::closed_form};
    }
    return {expectation(law, [mu](double x) { return std::pow(std::abs(x), mu); }, opts), 0.0, Method::quadrature};
}

/// One-sided density limits at x: {f(x-), f(x+)}.
struct DensityLimits {
    double left = 0.0;
    double right = 0.0;
};

[[nodiscard]] inline DensityLimits density_limits(const CoefficientLaw& law, double x) {
    if (!law.has_density()) {
        throw Error(ErrorCode::NoDensity, std::string(law.kind()) + " law has no density");
    }
    return std::visit(
        [&](const auto& l) -> DensityLimits {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Exponential>) {
                const double f = std::exp(-x / l.mean) / l.mean;
                if (x > 0.0) return {f, f};
                if (x == 0.0) return {0.0, f};
                return {};
            } else if constexpr (std::is_same_v<T, Uniform>) {
                const double f = 1.0 / (l.hi - l.lo);
                return {(x > l.lo && x <= l.hi) ? f : 0.0, (x >= l.lo && x < l.hi) ? f : 0.0};
            } else if constexpr (std::is_same_v<T, Normal>) {
                const double f = detail::normal_pdf((x - l.mean) / l.sd) / l.sd;
                return {f, f};
            } else if constexpr (std::is_same_v<T, GarchCoefficient>) {
                if (x <= l.beta) return {};
                const double y = (x - l.beta) / l.alpha;
                const double f = detail::normal_pdf(std::sqrt(y)) / (l.alpha * std::sqrt(y));
                return {f, f};
            } else {
                return {};
            }
        },
        law.variant());
}

}  // namespace kesten
