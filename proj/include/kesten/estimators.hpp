#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kesten/error.hpp"
#include "kesten/process_spec.hpp"

namespace kesten {

inline constexpr std::size_t min_tail_points = 10;
inline constexpr double default_tail_quantile = 0.95;

[[nodiscard]] inline std::vector<double> returns_from_prices(std::span<const double> prices) {
    detail::require(prices.size() >= 2, ErrorCode::InvalidParameter, "need at least two prices");
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
            throw Error(ErrorCode::NonPositivePrice, "price at index " + std::to_string(i) + " is not positive");
        }
    }
    std::vector<double> r(prices.size() - 1);
    for (std::size_t i = 1; i < prices.size(); ++i) r[i - 1] = (prices[i] - prices[i - 1]) / prices[i - 1];
    return r;
}

struct CcdfPoint {
    double x;
    double p;  // fraction of the sample strictly above x
};

/// Survival function at every distinct sample value; ties collapse to one point.
[[nodiscard]] inline std::vector<CcdfPoint> empirical_ccdf(std::span<const double> series, bool absolute) {
    detail::require(!series.empty(), ErrorCode::InvalidParameter, "empty series");
    std::vector<double> sorted(series.begin(), series.end());
    if (absolute)
        for (auto& v : sorted) v = std::abs(v);
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::vector<CcdfPoint> out;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
        out.push_back({sorted[i], (n - static_cast<double>(i + 1)) / n});
    }
    return out;
}

/// Empirical quantile of |r| (nearest rank).
[[nodiscard]] inline double abs_quantile(std::span<const double> series, double q) {
    detail::require(!series.empty() && q >= 0.0 && q <= 1.0, ErrorCode::InvalidParameter, "bad quantile request");
    std::vector<double> a(series.size());
    std::transform(series.begin(), series.end(), a.begin(), [](double v) { return std::abs(v); });
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(a.size())));
    rank = std::clamp<std::size_t>(rank, 1, a.size()) - 1;
    std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(rank), a.end());
    return a[rank];
}

struct TailFit {
    double threshold = 0.0;
    double exponent = 0.0;  // reported positive: minus the log-log slope
    double intercept = 0.0;
    std::size_t n_tail = 0;
    double std_error = 0.0;  // OLS slope standard error
};

/// Least-squares line through log P(|r| > x) against log x for x above the
/// threshold. The largest observation has survival 0 and is excluded.
/// Without a threshold the 95th percentile of |r| is used.
[[nodiscard]] inline TailFit tail_exponent_ls(std::span<const double> series,
                                              std::optional<double> threshold = std::nullopt) {
    const double thr = threshold ? *threshold : abs_quantile(series, default_tail_quantile);
    detail::require(std::isfinite(thr), ErrorCode::InvalidParameter, "threshold must be finite");

    std::size_t exceed = 0;
    for (double v : series) exceed += std::abs(v) > thr ? 1 : 0;
    if (exceed < min_tail_points) {
        throw Error(ErrorCode::InsufficientTail, std::to_string(exceed) + " exceedances above threshold " +
                                                     std::to_string(thr) + " (need at least 10)");
    }

    const auto ccdf = empirical_ccdf(series, true);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    std::size_t m = 0;
    for (const auto& pt : ccdf) {
        if (pt.x <= thr || pt.p <= 0.0) continue;
        const double x = std::log(pt.x);
        const double y = std::log(pt.p);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        ++m;
    }
    if (m < 3) throw Error(ErrorCode::InsufficientTail, "fewer than three distinct tail points");
    const double nm = static_cast<double>(m);
    const double mx = sx / nm;
    const double my = sy / nm;
    const double cxx = sxx - nm * mx * mx;
    const double cxy = sxy - nm * mx * my;
    const double cyy = syy - nm * my * my;
    if (!(cxx > 0.0)) throw Error(ErrorCode::DegenerateTail, "tail points share a single abscissa");
    const double slope = cxy / cxx;
    const double intercept = my - slope * mx;
    const double rss = std::max(cyy - slope * cxy, 0.0);
    const double se = std::sqrt(rss / (nm - 2.0) / cxx);
    if (!(slope < 0.0)) throw Error(ErrorCode::DegenerateTail, "tail slope is not negative");
    return {thr, -slope, intercept, exceed, se};
}

[[nodiscard]] inline TailFit tail_exponent_ls(const ReturnSeries& series, std::optional<double> threshold = std::nullopt) {
    return tail_exponent_ls(std::span<const double>(series.values()), threshold);
}

struct HillFit {
    std::size_t k = 0;
    double threshold = 0.0;  // x_(n-k), the (k+1)-th largest |r|
    double exponent = 0.0;
    double std_error = 0.0;  // exponent / sqrt(k), asymptotic
};

[[nodiscard]] inline HillFit hill_estimator(std::span<const double> series, std::size_t k) {
    const std::size_t n = series.size();
    if (k < min_tail_points || k >= n) {
        throw Error(ErrorCode::InsufficientTail,
                    "Hill needs 10 <= k < n (k = " + std::to_string(k) + ", n = " + std::to_string(n) + ")");
    }
    std::vector<double> a(n);
    std::transform(series.begin(), series.end(), a.begin(), [](double v) { return std::abs(v); });
    // top k+1 values in descending order at the front
    std::nth_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(k), a.end(), std::greater<>());
    const double base = a[k];
    if (!(base > 0.0)) throw Error(ErrorCode::DegenerateTail, "reference order statistic is zero");
    const double lb = std::log(base);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += std::log(a[i]) - lb;
    const double gamma = sum / static_cast<double>(k);
    if (!(gamma > 0.0)) throw Error(ErrorCode::DegenerateTail, "zero log spacings among the top order statistics");
    const double exponent = 1.0 / gamma;
    return {k, base, exponent, exponent / std::sqrt(static_cast<double>(k))};
}

[[nodiscard]] inline HillFit hill_estimator(const ReturnSeries& series, std::size_t k) {
    return hill_estimator(std::span<const double>(series.values()), k);
}

enum class SeriesKind { raw, absolute };

constexpr std::string_view to_string(SeriesKind k) noexcept { return k == SeriesKind::raw ? "raw" : "absolute"; }

struct AcfResult {
    SeriesKind kind = SeriesKind::raw;
    std::vector<double> values;  // lags 0..H

    [[nodiscard]] std::size_t max_lag() const noexcept { return values.empty() ? 0 : values.size() - 1; }
};

/// Biased sample autocorrelation: sum (x_t - m)(x_{t+h} - m) / sum (x_t - m)^2.
[[nodiscard]] inline AcfResult acf(std::span<const double> series, std::size_t max_lag, bool absolute) {
    const std::size_t n = series.size();
    if (n <= 10 * max_lag || n < 2) {
        throw Error(ErrorCode::SeriesTooShort, "acf needs n > 10 * max_lag (n = " + std::to_string(n) +
                                                   ", max_lag = " + std::to_string(max_lag) + ")");
    }
    std::vector<double> x(series.begin(), series.end());
    if (absolute)
        for (auto& v : x) v = std::abs(v);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    for (auto& v : x) v -= mean;
    double c0 = 0.0;
    for (double v : x) c0 += v * v;
    if (!(c0 > 0.0)) throw Error(ErrorCode::DegenerateSeries, "series has zero variance");
    AcfResult out{absolute ? SeriesKind::absolute : SeriesKind::raw, std::vector<double>(max_lag + 1)};
    out.values[0] = 1.0;
    for (std::size_t h = 1; h <= max_lag; ++h) {
        double c = 0.0;
        for (std::size_t t = 0; t + h < n; ++t) c += x[t] * x[t + h];
        out.values[h] = std::clamp(c / c0, -1.0, 1.0);
    }
    return out;
}

[[nodiscard]] inline AcfResult acf(const ReturnSeries& series, std::size_t max_lag, bool absolute) {
    return acf(std::span<const double>(series.values()), max_lag, absolute);
}

[[nodiscard]] inline double sample_std(std::span<const double> series) {
    detail::require(series.size() >= 2, ErrorCode::SeriesTooShort, "need two values for a standard deviation");
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(series.size());
    double ss = 0.0;
    for (double v : series) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(series.size() - 1));
}

}  // namespace kesten
