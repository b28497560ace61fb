#pragma once

#include <cstdint>
#include <cstdio>
#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

#include "json.hpp"

#include "kesten/distributions.hpp"
#include "kesten/error.hpp"
#include "kesten/process_spec.hpp"

namespace kesten {

using Json = nlohmann::ordered_json;

/// 64-bit FNV-1a over bytes, rendered as 16 hex digits.
[[nodiscard]] inline std::string content_digest(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace detail {

[[noreturn]] inline void config_error(std::string_view path, const std::string& what) {
    throw Error(ErrorCode::ConfigError, std::string(path) + ": " + what);
}

inline void expect_object(const Json& j, std::string_view path) {
    if (!j.is_object()) config_error(path, "expected an object");
}

inline void reject_unknown_keys(const Json& j, std::string_view path, std::initializer_list<std::string_view> allowed) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (auto k : allowed) ok = ok || item.key() == k;
        if (!ok) config_error(path, "unknown key '" + item.key() + "'");
    }
}

inline double get_number(const Json& j, std::string_view key, std::string_view path) {
    auto it = j.find(key);
    if (it == j.end()) config_error(path, "missing key '" + std::string(key) + "'");
    if (!it->is_number()) config_error(path, "'" + std::string(key) + "' must be a number");
    return it->get<double>();
}

inline double get_number_or(const Json& j, std::string_view key, double fallback, std::string_view path) {
    return j.contains(key) ? get_number(j, key, path) : fallback;
}

inline const Json& get_member(const Json& j, std::string_view key, std::string_view path) {
    auto it = j.find(key);
    if (it == j.end()) config_error(path, "missing key '" + std::string(key) + "'");
    return *it;
}

inline std::string get_kind(const Json& j, std::string_view path) {
    const Json& k = get_member(j, "kind", path);
    if (!k.is_string()) config_error(path, "'kind' must be a string");
    return k.get<std::string>();
}

/// Rewraps validation failures from domain constructors as config errors.
template <typename F>
auto with_config_context(std::string_view path, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        config_error(path, e.what());
    }
}

}  // namespace detail

[[nodiscard]] inline Json to_json(const CoefficientLaw& law) {
    return std::visit(
        [](const auto& l) -> Json {
            using T = std::decay_t<decltype(l)>;
            Json j;
            if constexpr (std::is_same_v<T, Exponential>) {
                j["kind"] = "exponential";
                j["mean"] = l.mean;
            } else if constexpr (std::is_same_v<T, Uniform>) {
                j["kind"] = "uniform";
                j["lo"] = l.lo;
                j["hi"] = l.hi;
            } else if constexpr (std::is_same_v<T, Normal>) {
                j["kind"] = "normal";
                j["mean"] = l.mean;
                j["sd"] = l.sd;
            } else if constexpr (std::is_same_v<T, Constant>) {
                j["kind"] = "constant";
                j["value"] = l.value;
            } else {
                j["kind"] = "garch_coeff";
                j["beta"] = l.beta;
                j["alpha"] = l.alpha;
            }
            return j;
        },
        law.variant());
}

[[nodiscard]] inline CoefficientLaw law_from_json(const Json& j, std::string_view path = "law") {
    using namespace detail;
    expect_object(j, path);
    const std::string kind = get_kind(j, path);
    return with_config_context(path, [&]() -> CoefficientLaw {
        if (kind == "exponential") {
            reject_unknown_keys(j, path, {"kind", "mean"});
            return CoefficientLaw::exponential(get_number(j, "mean", path));
        }
        if (kind == "uniform") {
            reject_unknown_keys(j, path, {"kind", "lo", "hi"});
            return CoefficientLaw::uniform(get_number(j, "lo", path), get_number(j, "hi", path));
        }
        if (kind == "normal") {
            reject_unknown_keys(j, path, {"kind", "mean", "sd"});
            return CoefficientLaw::normal(get_number_or(j, "mean", 0.0, path), get_number(j, "sd", path));
        }
        if (kind == "constant") {
            reject_unknown_keys(j, path, {"kind", "value"});
            return CoefficientLaw::constant(get_number(j, "value", path));
        }
        if (kind == "garch_coeff") {
            reject_unknown_keys(j, path, {"kind", "beta", "alpha"});
            return CoefficientLaw::garch_coefficient(get_number(j, "beta", path), get_number(j, "alpha", path));
        }
        config_error(path, "unknown law kind '" + kind + "'");
    });
}

[[nodiscard]] inline Json to_json(const ProcessSpec& spec) {
    return std::visit(
        [](const auto& s) -> Json {
            using T = std::decay_t<decltype(s)>;
            Json j;
            j["kind"] = std::string(process_kind(s));
            if constexpr (std::is_same_v<T, Garch11Spec>) {
                j["omega"] = s.omega;
                j["alpha"] = s.alpha;
                j["beta"] = s.beta;
                j["sigma0"] = s.sigma0;
            } else {
                j["a"] = to_json(s.a_law);
                j["e"] = to_json(s.e_law);
                if constexpr (std::is_same_v<T, KestenScalarSpec>) j["r0"] = s.r0;
                if constexpr (std::is_same_v<T, KestenArSpec>) {
                    Json weights = Json::array();
                    for (const auto& w : s.weight_laws) weights.push_back(to_json(w));
                    j["weights"] = std::move(weights);
                    j["normalize_weights"] = s.normalize_weights;
                    Json init = Json::array();
                    for (double r : s.r_init) init.push_back(r);
                    j["r_init"] = std::move(init);
                }
            }
            return j;
        },
        spec);
}

[[nodiscard]] inline ProcessSpec process_from_json(const Json& j, std::string_view path = "process") {
    using namespace detail;
    expect_object(j, path);
    const std::string kind = get_kind(j, path);
    const std::string p(path);
    ProcessSpec spec = [&]() -> ProcessSpec {
        if (kind == "inverse_multiplier") {
            reject_unknown_keys(j, path, {"kind", "a", "e"});
            return InverseMultiplierSpec{law_from_json(get_member(j, "a", path), p + ".a"),
                                         law_from_json(get_member(j, "e", path), p + ".e")};
        }
        if (kind == "kesten_scalar") {
            reject_unknown_keys(j, path, {"kind", "a", "e", "r0"});
            return KestenScalarSpec{law_from_json(get_member(j, "a", path), p + ".a"),
                                    law_from_json(get_member(j, "e", path), p + ".e"),
                                    get_number_or(j, "r0", 0.0, path)};
        }
        if (kind == "kesten_ar") {
            reject_unknown_keys(j, path, {"kind", "a", "e", "weights", "normalize_weights", "r_init", "K"});
            KestenArSpec s{law_from_json(get_member(j, "a", path), p + ".a"),
                           law_from_json(get_member(j, "e", path), p + ".e"),
                           {},
                           false,
                           {}};
            const Json& weights = get_member(j, "weights", path);
            if (!weights.is_array()) config_error(path, "'weights' must be an array of laws");
            for (std::size_t k = 0; k < weights.size(); ++k) {
                s.weight_laws.push_back(law_from_json(weights[k], p + ".weights[" + std::to_string(k) + "]"));
            }
            if (auto it = j.find("normalize_weights"); it != j.end()) {
                if (!it->is_boolean()) config_error(path, "'normalize_weights' must be a boolean");
                s.normalize_weights = it->get<bool>();
            }
            if (auto it = j.find("r_init"); it != j.end()) {
                if (!it->is_array()) config_error(path, "'r_init' must be an array");
                for (const auto& v : *it) {
                    if (!v.is_number()) config_error(path, "'r_init' entries must be numbers");
                    s.r_init.push_back(v.get<double>());
                }
            }
            if (auto it = j.find("K"); it != j.end()) {
                if (!it->is_number_unsigned() || it->get<std::size_t>() != s.order()) {
                    config_error(path, "'K' must equal the number of weight laws");
                }
            }
            return s;
        }
        if (kind == "garch11") {
            reject_unknown_keys(j, path, {"kind", "omega", "alpha", "beta", "sigma0"});
            return Garch11Spec{get_number(j, "omega", path), get_number(j, "alpha", path),
                               get_number(j, "beta", path), get_number_or(j, "sigma0", 1.0, path)};
        }
        config_error(path, "unknown process kind '" + kind + "'");
    }();
    with_config_context(path, [&] {
        validate(spec);
        return 0;
    });
    return spec;
}

[[nodiscard]] inline std::string spec_digest(const ProcessSpec& spec) {
    return content_digest(to_json(spec).dump());
}

}  // namespace kesten
