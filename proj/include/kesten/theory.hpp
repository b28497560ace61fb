#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kesten/distributions.hpp"
#include "kesten/error.hpp"
#include "kesten/process_spec.hpp"
#include "kesten/processes.hpp"
#include "kesten/rng.hpp"

namespace kesten {

inline constexpr double cramer_doubling_cap = 64.0;
inline constexpr double stationarity_tolerance = 1e-4;
inline constexpr double regime_tolerance = 1e-9;

namespace detail {

inline std::string fmt(double v, int precision = 6) {
    std::ostringstream os;
    os.precision(precision);
    os << v;
    return os.str();
}

}  // namespace detail

/// mu -> E(a^mu) for one nonnegative law. Sampled laws draw log(a) once and
/// reuse the draws for every mu, so the curve is smooth and bisection is
/// well defined.
class MomentCurve {
public:
    explicit MomentCurve(const CoefficientLaw& law, const NumericOptions& opts = {}) : law_(law), opts_(opts) {
        if (!law.nonnegative()) {
            throw Error(ErrorCode::NonnegativityRequired,
                        "moment curve needs a nonnegative law, got " + std::string(law.kind()));
        }
        if (auto* g = law.get_if<GarchCoefficient>(); g && g->alpha > 0.0) log_draws_ = detail::garch_log_draws(*g, opts);
    }

    [[nodiscard]] bool sampled() const noexcept { return log_draws_.has_value(); }
    [[nodiscard]] Method method() const noexcept { return sampled() ? Method::monte_carlo : Method::closed_form; }

    [[nodiscard]] Estimate at(double mu) const {
        if (!sampled()) return moment_estimate(law_, mu, opts_);
        std::vector<double> v(log_draws_->size());
        std::transform(log_draws_->begin(), log_draws_->end(), v.begin(), [mu](double l) { return std::exp(mu * l); });
        double se = 0.0;
        const double m = detail::mc_mean(v, &se);
        return {m, se, Method::monte_carlo};
    }

    /// d/dmu E(a^mu) = E[a^mu log a].
    [[nodiscard]] double derivative(double mu) const {
        if (!sampled()) {
            const double h = 1e-6 * std::max(1.0, mu);
            return (at(mu + h).value - at(mu - h).value) / (2.0 * h);
        }
        double s = 0.0;
        for (double l : *log_draws_) s += l * std::exp(mu * l);
        return s / static_cast<double>(log_draws_->size());
    }

private:
    CoefficientLaw law_;
    NumericOptions opts_;
    std::optional<std::vector<double>> log_draws_;
};

/// Positive root of E(a^mu) = 1.
struct CramerSolution {
    double mu_star = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double residual = 0.0;
    Method method = Method::closed_form;
    std::optional<double> std_error;
};

enum class Verdict { stationary, boundary, non_stationary };

constexpr std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::stationary: return "stationary";
        case Verdict::boundary: return "boundary";
        case Verdict::non_stationary: return "non-stationary";
    }
    return "unknown";
}

struct StationarityResult {
    Estimate log_moment;
    Verdict verdict = Verdict::non_stationary;
};

[[nodiscard]] inline StationarityResult stationarity_check(const CoefficientLaw& a_law,
                                                           double tolerance = stationarity_tolerance,
                                                           const NumericOptions& opts = {}) {
    const Estimate lm = log_moment_estimate(a_law, opts);
    Verdict v = Verdict::non_stationary;
    if (lm.value < -tolerance) v = Verdict::stationary;
    else if (std::abs(lm.value) <= tolerance) v = Verdict::boundary;
    return {lm, v};
}

[[nodiscard]] inline CramerSolution cramer_root(const CoefficientLaw& a_law, const NumericOptions& opts = {}) {
    if (!a_law.nonnegative()) {
        throw Error(ErrorCode::NonnegativityRequired, "the moment equation needs a nonnegative coefficient law");
    }
    if (a_law.is_constant() && a_law.support_max() == 1.0) {
        throw Error(ErrorCode::Degenerate, "a is identically 1, so E(a^mu) = 1 for every mu");
    }
    if (!a_law.positive_almost_surely()) {
        // a point mass at 0 (or below 1): products vanish, no power law
        throw Error(ErrorCode::NoPositiveRoot, "a has no mass above 1; E(a^mu) < 1 for all mu > 0");
    }
    const Estimate lm = log_moment_estimate(a_law, opts);
    if (lm.value >= 0.0) {
        throw Error(ErrorCode::NonStationary,
                    "E[log a] = " + detail::fmt(lm.value) + " >= 0; the recursion has no stationary solution");
    }
    if (a_law.support_max() <= 1.0) {
        throw Error(ErrorCode::NoPositiveRoot,
                    "P(a > 1) = 0, so E(a^mu) < 1 for all mu > 0 and the tail is thinner than any power law");
    }

    const MomentCurve curve(a_law, opts);
    auto excess = [&](double mu) { return curve.at(mu).value - 1.0; };

    double lo = 0.0;
    double hi = 1.0;
    double f1 = excess(1.0);
    if (f1 == 0.0) {
        lo = hi = 1.0;
    } else if (f1 > 0.0) {
        // root below 1: halve until the moment drops below 1
        double mu = 1.0;
        while (true) {
            const double next = mu / 2.0;
            if (next < 1e-12) throw Error(ErrorCode::NoPositiveRoot, "no mu in (0, 1) with E(a^mu) < 1");
            if (excess(next) < 0.0) {
                lo = next;
                hi = mu;
                break;
            }
            mu = next;
        }
    } else {
        double mu = 1.0;
        while (true) {
            const double next = mu * 2.0;
            if (next > cramer_doubling_cap) {
                throw Error(ErrorCode::NoSignChange, "E(a^mu) stays below 1 up to mu = 64");
            }
            if (excess(next) > 0.0) {
                lo = mu;
                hi = next;
                break;
            }
            mu = next;
        }
    }
    const double b_lo = lo;
    const double b_hi = hi;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = excess(mid);
        if (f == 0.0) {
            lo = hi = mid;
            break;
        }
        (f < 0.0 ? lo : hi) = mid;
    }
    const double root = 0.5 * (lo + hi);
    const Estimate at_root = curve.at(root);
    CramerSolution sol{root, b_lo, b_hi, std::abs(at_root.value - 1.0), curve.method(), std::nullopt};
    if (curve.sampled()) sol.std_error = at_root.std_error / curve.derivative(root);
    return sol;
}

enum class RegimeCase { A, B, C };

constexpr std::string_view to_string(RegimeCase c) noexcept {
    switch (c) {
        case RegimeCase::A: return "A";
        case RegimeCase::B: return "B";
        case RegimeCase::C: return "C";
    }
    return "?";
}

/// Predicted tail regime from the mean coefficient: E(a) = 1 gives mu = 1,
/// E(a) > 1 gives mu < 1, E(a) < 1 gives mu > 1.
struct RegimeClassification {
    RegimeCase regime = RegimeCase::C;
    Estimate mean;
    std::optional<CramerSolution> root;
    bool prediction_holds = true;

    [[nodiscard]] std::string_view predicted_relation() const noexcept {
        switch (regime) {
            case RegimeCase::A: return "mu = 1";
            case RegimeCase::B: return "mu < 1";
            case RegimeCase::C: return "mu > 1";
        }
        return "";
    }
};

[[nodiscard]] inline RegimeCase regime_from_mean(const Estimate& mean) {
    const double tol = mean.method == Method::monte_carlo ? 3.0 * mean.std_error : regime_tolerance;
    if (std::abs(mean.value - 1.0) <= tol) return RegimeCase::A;
    return mean.value > 1.0 ? RegimeCase::B : RegimeCase::C;
}

[[nodiscard]] inline RegimeClassification classify_regime(const CoefficientLaw& a_law, const NumericOptions& opts = {}) {
    RegimeClassification out;
    out.mean = moment_estimate(a_law, 1.0, opts);
    out.regime = regime_from_mean(out.mean);
    out.root = cramer_root(a_law, opts);
    const double mu = out.root->mu_star;
    const double tol = out.root->std_error ? 3.0 * *out.root->std_error : 1e-6;
    switch (out.regime) {
        case RegimeCase::A: out.prediction_holds = std::abs(mu - 1.0) <= tol; break;
        case RegimeCase::B: out.prediction_holds = mu < 1.0; break;
        case RegimeCase::C: out.prediction_holds = mu > 1.0; break;
    }
    return out;
}

enum class ConditionStatus { verified, assumed, violated, not_checkable };

constexpr std::string_view to_string(ConditionStatus s) noexcept {
    switch (s) {
        case ConditionStatus::verified: return "verified";
        case ConditionStatus::assumed: return "assumed";
        case ConditionStatus::violated: return "violated";
        case ConditionStatus::not_checkable: return "not-checkable";
    }
    return "unknown";
}

struct ConditionEntry {
    char id = 'a';
    ConditionStatus status = ConditionStatus::not_checkable;
    std::optional<double> evidence;
    std::string note;
};

/// Checklist for the stationarity and power-law conditions (a)-(h) of the
/// scalar recursion r_t = a_t r_{t-1} + e_t.
struct TheoryReport {
    std::vector<ConditionEntry> conditions;
    std::optional<CramerSolution> cramer;
    std::string cramer_note;
    std::optional<RegimeCase> regime;
    std::optional<double> mean_a;

    [[nodiscard]] const ConditionEntry& condition(char id) const {
        for (const auto& c : conditions)
            if (c.id == id) return c;
        throw Error(ErrorCode::InvalidParameter, std::string("no condition ") + id);
    }

    [[nodiscard]] bool all_verified() const {
        return std::all_of(conditions.begin(), conditions.end(),
                           [](const ConditionEntry& c) { return c.status == ConditionStatus::verified; });
    }
};

[[nodiscard]] inline TheoryReport kesten_conditions_report(const CoefficientLaw& a_law, const CoefficientLaw& e_law,
                                                           const NumericOptions& opts = {}) {
    using S = ConditionStatus;
    const double inf = std::numeric_limits<double>::infinity();
    TheoryReport rep;
    const bool a_nonneg = a_law.nonnegative();

    // (a) E[log a] < 0
    {
        ConditionEntry c{'a', S::not_checkable, std::nullopt, ""};
        if (a_law.positive_almost_surely()) {
            const auto st = stationarity_check(a_law, stationarity_tolerance, opts);
            c.status = st.verdict == Verdict::stationary ? S::verified : S::violated;
            c.evidence = st.log_moment.value;
            c.note = "E[log a] = " + detail::fmt(st.log_moment.value) + " (" + std::string(to_string(st.verdict)) + ")";
        } else {
            c.note = "E[log a] is undefined: a puts mass on values <= 0";
        }
        rep.conditions.push_back(c);
    }
    // (b) E[max(log|e|, 0)] < inf
    {
        auto logabs = [](double x) { return std::log(std::abs(x)); };
        const double v = expectation_over(e_law, logabs, 1.0, inf, opts) + expectation_over(e_law, logabs, -inf, -1.0, opts);
        rep.conditions.push_back({'b', std::isfinite(v) ? S::verified : S::violated, v,
                                  "E[max(log|e|, 0)] = " + detail::fmt(v)});
    }
    // (c) log a non-lattice
    if (a_law.has_density()) {
        rep.conditions.push_back({'c', S::verified, std::nullopt, "a has a density, so log a is non-lattice"});
    } else {
        rep.conditions.push_back({'c', S::assumed, std::nullopt, "point-mass law; non-lattice property assumed"});
    }
    // (d) (1 - a)^-1 e is not a constant
    if (a_law.is_constant() && e_law.is_constant()) {
        const double a = a_law.support_max();
        const double e = e_law.support_max();
        ConditionEntry c{'d', S::violated, std::nullopt, ""};
        if (a != 1.0) {
            c.evidence = e / (1.0 - a);
            c.note = "(1 - a)^-1 e reduces to the constant " + detail::fmt(*c.evidence);
        } else {
            c.note = "a = 1 and e constant: degenerate";
        }
        rep.conditions.push_back(c);
    } else {
        rep.conditions.push_back({'d', S::verified, std::nullopt, "a or e is non-degenerate"});
    }

    // (e) some lambda0 > 0 with E(a^lambda0) < 1; (f) some lambda1 with E(a^lambda1) >= 1
    std::optional<double> lambda1;
    if (a_nonneg) {
        const MomentCurve curve(a_law, opts);
        ConditionEntry e{'e', S::violated, std::nullopt, "no lambda in [2^-30, 1] with E(a^lambda) < 1"};
        for (double lam = 1.0; lam >= 0x1p-30; lam /= 2.0) {
            const double m = curve.at(lam).value;
            if (m < 1.0) {
                e = {'e', S::verified, m, "E(a^" + detail::fmt(lam) + ") = " + detail::fmt(m) + " < 1"};
                break;
            }
        }
        rep.conditions.push_back(e);
        ConditionEntry f{'f', S::violated, std::nullopt, "E(a^lambda) < 1 for every lambda up to 64"};
        if (a_law.support_max() > 1.0) {
            for (double lam = 1.0; lam <= cramer_doubling_cap; lam *= 2.0) {
                const double m = curve.at(lam).value;
                if (m >= 1.0) {
                    lambda1 = lam;
                    f = {'f', S::verified, m, "E(a^" + detail::fmt(lam) + ") = " + detail::fmt(m) + " >= 1"};
                    break;
                }
            }
        } else {
            f.note = "P(a > 1) = 0, so E(a^lambda) < 1 for every lambda > 0";
            f.evidence = a_law.support_max();
        }
        rep.conditions.push_back(f);
    } else {
        rep.conditions.push_back({'e', S::not_checkable, std::nullopt, "a takes negative values"});
        rep.conditions.push_back({'f', S::not_checkable, std::nullopt, "a takes negative values"});
    }

    try {
        rep.cramer = cramer_root(a_law, opts);
        rep.cramer_note = "mu* = " + detail::fmt(rep.cramer->mu_star);
    } catch (const Error& err) {
        rep.cramer_note = err.what();
    }
    if (a_nonneg) {
        const auto mean = moment_estimate(a_law, 1.0, opts);
        rep.mean_a = mean.value;
        rep.regime = regime_from_mean(mean);
    }

    // (g) E[a^lambda1 max(log a, 0)] < inf, evaluated at mu* when it exists
    const std::optional<double> lam_g = rep.cramer ? std::optional<double>(rep.cramer->mu_star) : lambda1;
    if (lam_g && a_nonneg) {
        const double lam = *lam_g;
        const double v = expectation_over(a_law, [lam](double x) { return std::pow(x, lam) * std::log(x); }, 1.0, inf, opts);
        rep.conditions.push_back({'g', std::isfinite(v) ? S::verified : S::violated, v,
                                  "E[a^" + detail::fmt(lam) + " max(log a, 0)] = " + detail::fmt(v)});
    } else {
        rep.conditions.push_back({'g', S::not_checkable, std::nullopt, "no lambda1 available"});
    }
    // (h) E|e|^mu* < inf
    if (rep.cramer) {
        const double mu = rep.cramer->mu_star;
        const double v = abs_moment_estimate(e_law, mu, opts).value;
        rep.conditions.push_back({'h', std::isfinite(v) ? S::verified : S::violated, v,
                                  "E|e|^" + detail::fmt(mu) + " = " + detail::fmt(v)});
    } else {
        rep.conditions.push_back({'h', S::not_checkable, std::nullopt, "no root mu* of E(a^mu) = 1"});
    }
    return rep;
}

/// Autocorrelation [E(a)]^h of the stationary scalar recursion.
[[nodiscard]] inline double expected_acf(const CoefficientLaw& a_law, std::size_t h, const NumericOptions& opts = {}) {
    const double m2 = moment(a_law, 2.0, opts);
    if (m2 >= 1.0) {
        throw Error(ErrorCode::VarianceNotFinite,
                    "E(a^2) = " + detail::fmt(m2) + " >= 1, so the stationary variance is not finite");
    }
    return std::pow(moment(a_law, 1.0, opts), static_cast<double>(h));
}

struct InverseTailPrediction {
    double value = 0.0;          // predicted P(|1 - a|^-1 > x)
    double tail_constant = 0.0;  // f_a(1-) + f_a(1+)
    bool applicable = true;
    std::string note;
};

/// Tail of the multiplier |1 - a|^-1: P(|1 - a| < 1/x) ~ (f_a(1-) + f_a(1+)) / x,
/// i.e. 2 f_a(1) / x when the density is continuous at 1.
[[nodiscard]] inline InverseTailPrediction inverse_tail_prediction(const CoefficientLaw& a_law, double x) {
    detail::require(std::isfinite(x) && x > 0.0, ErrorCode::InvalidParameter, "x must be positive");
    const DensityLimits d = density_limits(a_law, 1.0);
    InverseTailPrediction out;
    out.tail_constant = d.left + d.right;
    if (out.tail_constant == 0.0) {
        out.applicable = false;
        out.note = "NotApplicable: f_a(1) = 0, no unit-exponent tail";
        return out;
    }
    out.value = out.tail_constant / x;
    if (d.left != d.right) out.note = "support boundary at 1: only one side of the density contributes";
    return out;
}

enum class MatrixNorm { infinity, one, frobenius };

namespace detail {

inline double matrix_norm(std::span<const double> m, std::size_t order, MatrixNorm norm) {
    double out = 0.0;
    switch (norm) {
        case MatrixNorm::infinity:
            for (std::size_t i = 0; i < order; ++i) {
                double row = 0.0;
                for (std::size_t j = 0; j < order; ++j) row += std::abs(m[i * order + j]);
                out = std::max(out, row);
            }
            break;
        case MatrixNorm::one:
            for (std::size_t j = 0; j < order; ++j) {
                double col = 0.0;
                for (std::size_t i = 0; i < order; ++i) col += std::abs(m[i * order + j]);
                out = std::max(out, col);
            }
            break;
        case MatrixNorm::frobenius:
            for (double v : m) out += v * v;
            out = std::sqrt(out);
            break;
    }
    return out;
}

inline double vector_norm(std::span<const double> v, MatrixNorm norm) {
    double out = 0.0;
    switch (norm) {
        case MatrixNorm::infinity:
            for (double x : v) out = std::max(out, std::abs(x));
            break;
        case MatrixNorm::one:
            for (double x : v) out += std::abs(x);
            break;
        case MatrixNorm::frobenius:
            for (double x : v) out += x * x;
            out = std::sqrt(out);
            break;
    }
    return out;
}

/// Draws (a_t, weights_t) for one step, applying the normalization flag.
class CoefficientDraws {
public:
    CoefficientDraws(const KestenArSpec& spec, const RngStream& rng)
        : a_(spec.a_law, rng.substream(a_stream)), normalize_(spec.normalize_weights), w_(spec.order()) {
        weights_.reserve(spec.order());
        for (std::size_t k = 0; k < spec.order(); ++k) {
            weights_.emplace_back(spec.weight_laws[k], rng.substream(weight_stream_base + k));
        }
    }

    /// Returns a_t and fills weights(); the top row of A_t is a_t * weights().
    double next() {
        const double a = a_();
        double sum = 0.0;
        for (std::size_t k = 0; k < w_.size(); ++k) {
            w_[k] = weights_[k]();
            sum += w_[k];
        }
        if (normalize_) {
            if (std::abs(sum) < 1e-12) throw Error(ErrorCode::ZeroWeightSum, "drawn weights sum to ~0");
            for (auto& w : w_) w /= sum;
        }
        return a;
    }

    [[nodiscard]] const std::vector<double>& weights() const noexcept { return w_; }

private:
    LawSampler a_;
    std::vector<LawSampler> weights_;
    bool normalize_;
    std::vector<double> w_;
};

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double stderr_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace detail

struct LyapunovEstimate {
    double gamma_hat = 0.0;
    std::size_t t_horizon = 0;
    std::size_t trials = 0;
    double std_error = 0.0;
};

/// Top Lyapunov exponent (1/t) log ||A_1 ... A_t|| of the companion-matrix
/// product, averaged over independent trials. The running product is
/// renormalized every step and the log norms accumulated.
[[nodiscard]] inline LyapunovEstimate lyapunov_top(const KestenArSpec& spec, std::size_t t_horizon, std::size_t trials,
                                                   const RngStream& rng, MatrixNorm norm = MatrixNorm::infinity) {
    validate(spec);
    detail::require(t_horizon >= 100, ErrorCode::InvalidParameter, "t_horizon must be at least 100");
    detail::require(trials >= 10, ErrorCode::InvalidParameter, "trials must be at least 10");
    const std::size_t order = spec.order();
    std::vector<double> per_trial(trials);
    std::vector<double> prod(order * order);
    std::vector<double> next(order * order);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        detail::CoefficientDraws draws(spec, rng.substream(trial));
        std::fill(prod.begin(), prod.end(), 0.0);
        for (std::size_t i = 0; i < order; ++i) prod[i * order + i] = 1.0;
        double log_sum = 0.0;
        for (std::size_t t = 0; t < t_horizon; ++t) {
            const double a = draws.next();
            const auto& w = draws.weights();
            // next = A_t * prod; row 0 is a * w^T prod, row i copies row i-1 of prod
            for (std::size_t j = 0; j < order; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < order; ++k) s += w[k] * prod[k * order + j];
                next[j] = a * s;
            }
            for (std::size_t i = 1; i < order; ++i)
                for (std::size_t j = 0; j < order; ++j) next[i * order + j] = prod[(i - 1) * order + j];
            const double nrm = detail::matrix_norm(next, order, norm);
            if (!(nrm > 0.0) || !std::isfinite(nrm)) {
                throw Error(ErrorCode::DegenerateSpec, "matrix product collapsed to zero or overflowed");
            }
            for (std::size_t i = 0; i < order * order; ++i) prod[i] = next[i] / nrm;
            log_sum += std::log(nrm);
        }
        per_trial[trial] = log_sum / static_cast<double>(t_horizon);
    }
    const double mean = detail::mean_of(per_trial);
    return {mean, t_horizon, trials, detail::stderr_of(per_trial, mean)};
}

[[nodiscard]] inline LyapunovEstimate lyapunov_top(const KestenScalarSpec& spec, std::size_t t_horizon,
                                                   std::size_t trials, const RngStream& rng,
                                                   MatrixNorm norm = MatrixNorm::infinity) {
    return lyapunov_top(embed_scalar(spec), t_horizon, trials, rng, norm);
}

/// Moment Lyapunov function Lambda(mu) = lim (1/t) log E||A_t ... A_1 x||^mu.
///
/// Plain averaging of ||product||^mu over independent trials is dominated by
/// events far in the tail of the log-norm distribution once t is in the
/// hundreds, so the expectation is propagated with an interacting particle
/// system instead: each particle carries a unit direction, is reweighted by
/// ||A x||^mu, and the population is resampled every step. The per-step log
/// mean weight (a log-sum-exp) averages to Lambda(mu).
[[nodiscard]] inline Estimate moment_lyapunov(const KestenArSpec& spec, double mu, std::size_t t_horizon,
                                              std::size_t particles, const RngStream& rng,
                                              MatrixNorm norm = MatrixNorm::infinity) {
    validate(spec);
    detail::require(mu > 0.0, ErrorCode::InvalidParameter, "mu must be positive");
    detail::require(t_horizon >= 10 && particles >= 10, ErrorCode::InvalidParameter,
                    "need t_horizon >= 10 and at least 10 particles");
    const std::size_t order = spec.order();
    const std::size_t warmup = std::max<std::size_t>(20, t_horizon / 5);

    std::vector<double> x(particles * order, 1.0);
    std::vector<double> x_next(particles * order);
    std::vector<double> log_w(particles);
    std::vector<double> weight(particles);
    std::vector<double> y(order);
    {
        const double n0 = detail::vector_norm(std::span<const double>(x.data(), order), norm);
        for (auto& v : x) v /= n0;
    }

    detail::CoefficientDraws draws(spec, rng);
    auto resample_engine = rng.substream(0x7265).engine();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> step_logs;
    step_logs.reserve(t_horizon);

    for (std::size_t t = 0; t < warmup + t_horizon; ++t) {
        double max_lw = -std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < particles; ++p) {
            const double a = draws.next();
            const auto& w = draws.weights();
            double* xp = &x[p * order];
            double s = 0.0;
            for (std::size_t k = 0; k < order; ++k) s += w[k] * xp[k];
            y[0] = a * s;
            for (std::size_t k = 1; k < order; ++k) y[k] = xp[k - 1];
            const double nrm = detail::vector_norm(y, norm);
            if (nrm > 0.0) {
                for (std::size_t k = 0; k < order; ++k) xp[k] = y[k] / nrm;
                log_w[p] = mu * std::log(nrm);
            } else {
                log_w[p] = -std::numeric_limits<double>::infinity();
            }
            max_lw = std::max(max_lw, log_w[p]);
        }
        if (!std::isfinite(max_lw)) throw Error(ErrorCode::DegenerateSpec, "every particle collapsed to zero");
        double total = 0.0;
        for (std::size_t p = 0; p < particles; ++p) {
            weight[p] = std::exp(log_w[p] - max_lw);
            total += weight[p];
        }
        if (t >= warmup) step_logs.push_back(max_lw + std::log(total / static_cast<double>(particles)));

        // systematic resampling
        const double step = total / static_cast<double>(particles);
        double u = unit(resample_engine) * step;
        double cum = weight[0];
        std::size_t src = 0;
        for (std::size_t p = 0; p < particles; ++p) {
            while (u > cum && src + 1 < particles) cum += weight[++src];
            std::copy_n(&x[src * order], order, &x_next[p * order]);
            u += step;
        }
        x.swap(x_next);
    }
    const double mean = detail::mean_of(step_logs);
    return {mean, detail::stderr_of(step_logs, mean), Method::monte_carlo};
}

struct MomentLyapunovSolution {
    CramerSolution solution;
    std::vector<std::pair<double, double>> grid_values;  // (mu, Lambda(mu))
    std::size_t t_horizon = 0;
    std::size_t particles = 0;
    double lambda_at_2t = 0.0;  // Lambda estimated at mu* with twice the horizon
    double finite_t_shift = 0.0;  // implied change of mu* when t doubles
};

[[nodiscard]] inline std::vector<double> linspace(double lo, double hi, std::size_t points) {
    detail::require(points >= 2 && lo < hi, ErrorCode::InvalidParameter, "linspace needs lo < hi and >= 2 points");
    std::vector<double> out(points);
    for (std::size_t i = 0; i < points; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return out;
}

/// Positive zero of the moment Lyapunov function: scans the grid for the
/// negative-to-positive sign change and bisects inside it.
[[nodiscard]] inline MomentLyapunovSolution moment_lyapunov_root(const KestenArSpec& spec, std::vector<double> mu_grid,
                                                                 std::size_t t_horizon, std::size_t particles,
                                                                 const RngStream& rng,
                                                                 MatrixNorm norm = MatrixNorm::infinity,
                                                                 double mu_tolerance = 1e-3) {
    detail::require(mu_grid.size() >= 2, ErrorCode::InvalidParameter, "mu grid needs at least two points");
    std::sort(mu_grid.begin(), mu_grid.end());
    detail::require(mu_grid.front() > 0.0, ErrorCode::InvalidParameter, "mu grid must be positive");
    auto lambda = [&](double mu, std::size_t horizon) { return moment_lyapunov(spec, mu, horizon, particles, rng, norm); };

    MomentLyapunovSolution out;
    out.t_horizon = t_horizon;
    out.particles = particles;
    std::optional<std::size_t> cross;
    bool any_negative = false;
    bool any_positive = false;
    for (double mu : mu_grid) {
        const double v = lambda(mu, t_horizon).value;
        out.grid_values.emplace_back(mu, v);
        any_negative = any_negative || v < 0.0;
        any_positive = any_positive || v >= 0.0;
        const std::size_t i = out.grid_values.size() - 1;
        if (!cross && i > 0 && out.grid_values[i - 1].second < 0.0 && v >= 0.0) {
            cross = i - 1;
            break;
        }
    }
    if (!cross) {
        if (!any_negative) {
            throw Error(ErrorCode::NoSignChange, "Lambda(mu) > 0 across the whole grid; the root is below " +
                                                     detail::fmt(mu_grid.front()) + " or the process is not stationary");
        }
        throw Error(ErrorCode::NoSignChange,
                    "Lambda(mu) < 0 across the whole grid; the root is above " + detail::fmt(mu_grid.back()));
    }
    auto [g_lo, l_lo] = out.grid_values[*cross];
    auto [g_hi, l_hi] = out.grid_values[*cross + 1];
    const double slope = (l_hi - l_lo) / (g_hi - g_lo);
    double lo = g_lo;
    double hi = g_hi;
    while (hi - lo > mu_tolerance) {
        const double mid = 0.5 * (lo + hi);
        (lambda(mid, t_horizon).value < 0.0 ? lo : hi) = mid;
    }
    const double root = 0.5 * (lo + hi);
    const Estimate at_root = lambda(root, t_horizon);
    out.solution = {root, g_lo, g_hi, std::abs(at_root.value), Method::monte_carlo, at_root.std_error / slope};
    out.lambda_at_2t = lambda(root, 2 * t_horizon).value;
    out.finite_t_shift = -out.lambda_at_2t / slope;
    return out;
}

}  // namespace kesten
