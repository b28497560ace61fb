#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "kesten/distributions.hpp"
#include "kesten/error.hpp"
#include "kesten/estimators.hpp"
#include "kesten/io.hpp"
#include "kesten/process_spec.hpp"
#include "kesten/processes.hpp"
#include "kesten/serialization.hpp"
#include "kesten/theory.hpp"

#ifndef KESTEN_VERSION
#define KESTEN_VERSION "0.1.0"
#endif

namespace kesten {

inline constexpr std::string_view toolkit_version = KESTEN_VERSION;
inline constexpr const char* output_root_env = "KESTEN_OUTPUT_ROOT";

struct TailFitAnalysis {
    std::optional<double> threshold;  // none: 95th percentile of |r|
    friend bool operator==(const TailFitAnalysis&, const TailFitAnalysis&) = default;
};
struct HillAnalysis {
    std::size_t k = 10'000;
    friend bool operator==(const HillAnalysis&, const HillAnalysis&) = default;
};
struct AcfAnalysis {
    std::size_t max_lag = 100;
    bool absolute = false;
    friend bool operator==(const AcfAnalysis&, const AcfAnalysis&) = default;
};
struct CramerAnalysis {
    friend bool operator==(const CramerAnalysis&, const CramerAnalysis&) = default;
};
struct ConditionsAnalysis {
    friend bool operator==(const ConditionsAnalysis&, const ConditionsAnalysis&) = default;
};
struct LyapunovAnalysis {
    std::size_t t_horizon = 1000;
    std::size_t trials = 100;
    friend bool operator==(const LyapunovAnalysis&, const LyapunovAnalysis&) = default;
};
struct MomentLyapunovAnalysis {
    std::vector<double> grid{0.5, 6.0};  // two entries expand to `points` evenly spaced values
    std::size_t points = 12;
    std::size_t t_horizon = 200;
    std::size_t particles = 10'000;
    friend bool operator==(const MomentLyapunovAnalysis&, const MomentLyapunovAnalysis&) = default;

    [[nodiscard]] std::vector<double> mu_values() const {
        return grid.size() == 2 ? linspace(grid[0], grid[1], points) : grid;
    }
};

using Analysis = std::variant<TailFitAnalysis, HillAnalysis, AcfAnalysis, CramerAnalysis, ConditionsAnalysis,
                              LyapunovAnalysis, MomentLyapunovAnalysis>;

struct ExperimentConfig {
    ProcessSpec process;
    std::size_t n_samples = 1'000'000;
    std::size_t burn_in = default_burn_in;
    std::uint64_t seed = 0;
    std::vector<Analysis> analyses;
    std::optional<std::string> output_dir;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

[[nodiscard]] inline std::string_view analysis_kind(const Analysis& a) noexcept {
    return std::visit(
        [](const auto& x) -> std::string_view {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, TailFitAnalysis>) return "tail_fit";
            else if constexpr (std::is_same_v<T, HillAnalysis>) return "hill";
            else if constexpr (std::is_same_v<T, AcfAnalysis>) return "acf";
            else if constexpr (std::is_same_v<T, CramerAnalysis>) return "cramer";
            else if constexpr (std::is_same_v<T, ConditionsAnalysis>) return "conditions";
            else if constexpr (std::is_same_v<T, LyapunovAnalysis>) return "lyapunov";
            else return "moment_lyapunov";
        },
        a);
}

[[nodiscard]] inline Json to_json(const Analysis& analysis) {
    Json j;
    j["kind"] = std::string(analysis_kind(analysis));
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, TailFitAnalysis>) {
                j["threshold"] = x.threshold ? Json(*x.threshold) : Json(nullptr);
            } else if constexpr (std::is_same_v<T, HillAnalysis>) {
                j["k"] = x.k;
            } else if constexpr (std::is_same_v<T, AcfAnalysis>) {
                j["max_lag"] = x.max_lag;
                j["absolute"] = x.absolute;
            } else if constexpr (std::is_same_v<T, LyapunovAnalysis>) {
                j["t_horizon"] = x.t_horizon;
                j["trials"] = x.trials;
            } else if constexpr (std::is_same_v<T, MomentLyapunovAnalysis>) {
                j["grid"] = x.grid;
                j["points"] = x.points;
                j["t_horizon"] = x.t_horizon;
                j["particles"] = x.particles;
            }
        },
        analysis);
    return j;
}

namespace detail {

inline std::size_t get_count(const Json& j, std::string_view key, std::size_t fallback, std::string_view path) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number_unsigned()) config_error(path, "'" + std::string(key) + "' must be a nonnegative integer");
    return it->get<std::size_t>();
}

inline bool get_bool(const Json& j, std::string_view key, bool fallback, std::string_view path) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_boolean()) config_error(path, "'" + std::string(key) + "' must be a boolean");
    return it->get<bool>();
}

}  // namespace detail

[[nodiscard]] inline Analysis analysis_from_json(const Json& j, std::string_view path) {
    using namespace detail;
    expect_object(j, path);
    const std::string kind = get_kind(j, path);
    if (kind == "tail_fit") {
        reject_unknown_keys(j, path, {"kind", "threshold"});
        TailFitAnalysis a;
        if (auto it = j.find("threshold"); it != j.end() && !it->is_null()) {
            if (!it->is_number()) config_error(path, "'threshold' must be a number or null");
            a.threshold = it->get<double>();
            if (!(*a.threshold >= 0.0)) config_error(path, "'threshold' must be nonnegative");
        }
        return a;
    }
    if (kind == "hill") {
        reject_unknown_keys(j, path, {"kind", "k"});
        HillAnalysis a;
        a.k = get_count(j, "k", a.k, path);
        if (a.k < min_tail_points) config_error(path, "'k' must be at least 10");
        return a;
    }
    if (kind == "acf") {
        reject_unknown_keys(j, path, {"kind", "max_lag", "absolute"});
        AcfAnalysis a;
        a.max_lag = get_count(j, "max_lag", a.max_lag, path);
        a.absolute = get_bool(j, "absolute", a.absolute, path);
        return a;
    }
    if (kind == "cramer") {
        reject_unknown_keys(j, path, {"kind"});
        return CramerAnalysis{};
    }
    if (kind == "conditions") {
        reject_unknown_keys(j, path, {"kind"});
        return ConditionsAnalysis{};
    }
    if (kind == "lyapunov") {
        reject_unknown_keys(j, path, {"kind", "t_horizon", "trials"});
        LyapunovAnalysis a;
        a.t_horizon = get_count(j, "t_horizon", a.t_horizon, path);
        a.trials = get_count(j, "trials", a.trials, path);
        if (a.t_horizon < 100 || a.trials < 10) config_error(path, "lyapunov needs t_horizon >= 100 and trials >= 10");
        return a;
    }
    if (kind == "moment_lyapunov") {
        reject_unknown_keys(j, path, {"kind", "grid", "points", "t_horizon", "particles"});
        MomentLyapunovAnalysis a;
        if (auto it = j.find("grid"); it != j.end()) {
            if (!it->is_array() || it->size() < 2) config_error(path, "'grid' must list at least two values");
            a.grid.clear();
            for (const auto& v : *it) {
                if (!v.is_number() || !(v.get<double>() > 0.0)) config_error(path, "'grid' values must be positive");
                a.grid.push_back(v.get<double>());
            }
        }
        a.points = get_count(j, "points", a.points, path);
        a.t_horizon = get_count(j, "t_horizon", a.t_horizon, path);
        a.particles = get_count(j, "particles", a.particles, path);
        if (a.points < 2 || a.t_horizon < 10 || a.particles < 10) {
            config_error(path, "moment_lyapunov needs points >= 2, t_horizon >= 10, particles >= 10");
        }
        if (a.grid.size() == 2 && !(a.grid[0] < a.grid[1])) config_error(path, "'grid' bounds must increase");
        return a;
    }
    config_error(path, "unknown analysis kind '" + kind + "'");
}

[[nodiscard]] inline Json to_json(const ExperimentConfig& cfg) {
    Json j;
    j["process"] = to_json(cfg.process);
    j["n_samples"] = cfg.n_samples;
    j["burn_in"] = cfg.burn_in;
    j["seed"] = cfg.seed;
    Json analyses = Json::array();
    for (const auto& a : cfg.analyses) analyses.push_back(to_json(a));
    j["analyses"] = std::move(analyses);
    j["output_dir"] = cfg.output_dir ? Json(*cfg.output_dir) : Json(nullptr);
    return j;
}

/// Canonical text form; parse_config(serialize_config(c)) == c and the text is
/// a fixed point of serialize(parse(.)).
[[nodiscard]] inline std::string serialize_config(const ExperimentConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

[[nodiscard]] inline ExperimentConfig config_from_json(const Json& j) {
    using namespace detail;
    expect_object(j, "config");
    reject_unknown_keys(j, "config", {"process", "n_samples", "burn_in", "seed", "analyses", "output_dir"});
    ExperimentConfig cfg{process_from_json(get_member(j, "process", "config")), 1'000'000, default_burn_in, 0, {}, std::nullopt};
    cfg.n_samples = get_count(j, "n_samples", cfg.n_samples, "config");
    if (cfg.n_samples < 1) config_error("config", "'n_samples' must be at least 1");
    cfg.burn_in = get_count(j, "burn_in", cfg.burn_in, "config");
    cfg.seed = get_count(j, "seed", 0, "config");
    const Json& analyses = get_member(j, "analyses", "config");
    if (!analyses.is_array() || analyses.empty()) config_error("config", "'analyses' must be a non-empty array");
    for (std::size_t i = 0; i < analyses.size(); ++i) {
        cfg.analyses.push_back(analysis_from_json(analyses[i], "config.analyses[" + std::to_string(i) + "]"));
    }
    if (auto it = j.find("output_dir"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) config_error("config", "'output_dir' must be a string");
        cfg.output_dir = it->get<std::string>();
    }
    return cfg;
}

[[nodiscard]] inline ExperimentConfig parse_config(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

[[nodiscard]] inline ExperimentConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_file(path));
}

struct RunManifest {
    std::filesystem::path output_dir;
    std::string config_digest;
    std::string version{toolkit_version};
    std::uint64_t seed = 0;
    std::string started_at;
    std::string finished_at;
    std::vector<std::pair<std::string, std::vector<std::string>>> outputs;  // analysis -> files (relative)
    std::size_t resample_count = 0;
    std::size_t overflow_count = 0;

    [[nodiscard]] std::filesystem::path manifest_path() const { return output_dir / "manifest.json"; }
};

[[nodiscard]] inline Json to_json(const RunManifest& m) {
    Json j;
    j["config_digest"] = m.config_digest;
    j["toolkit_version"] = m.version;
    j["seed"] = m.seed;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    Json outputs = Json::array();
    for (const auto& [name, files] : m.outputs) {
        Json e;
        e["analysis"] = name;
        e["files"] = files;
        outputs.push_back(std::move(e));
    }
    j["outputs"] = std::move(outputs);
    j["counters"] = Json{{"resampled", m.resample_count}, {"overflow", m.overflow_count}};
    return j;
}

[[nodiscard]] inline RunManifest load_manifest(const std::filesystem::path& path) {
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    RunManifest m;
    try {
        m.output_dir = path.parent_path();
        m.config_digest = j.at("config_digest").get<std::string>();
        m.version = j.at("toolkit_version").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.started_at = j.at("started_at").get<std::string>();
        m.finished_at = j.at("finished_at").get<std::string>();
        for (const auto& e : j.at("outputs")) {
            m.outputs.emplace_back(e.at("analysis").get<std::string>(), e.at("files").get<std::vector<std::string>>());
        }
        m.resample_count = j.at("counters").at("resampled").get<std::size_t>();
        m.overflow_count = j.at("counters").at("overflow").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": malformed manifest: " + e.what());
    }
    return m;
}

struct RunOptions {
    std::optional<std::uint64_t> seed_override;
    std::optional<std::filesystem::path> output_dir_override;
    std::string config_name = "run";  // names the default output directory
};

namespace detail {

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg, const RunOptions& opts) {
    if (opts.output_dir_override) return *opts.output_dir_override;
    const char* root_env = std::getenv(output_root_env);
    const std::filesystem::path root = root_env && *root_env ? std::filesystem::path(root_env) : std::filesystem::path("runs");
    if (cfg.output_dir) {
        const std::filesystem::path p(*cfg.output_dir);
        return p.is_absolute() ? p : root / p;
    }
    return root / opts.config_name;
}

/// Coefficient laws of the scalar recursion behind a process, if any.
inline std::optional<KestenPair> recursion_laws(const ProcessSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::optional<KestenPair> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Garch11Spec>) return garch_to_kesten(s);
            else if constexpr (std::is_same_v<T, InverseMultiplierSpec>) return std::nullopt;
            else return KestenPair{s.a_law, s.e_law};
        },
        spec);
}

inline std::optional<KestenArSpec> matrix_form(const ProcessSpec& spec) {
    if (auto* s = std::get_if<KestenScalarSpec>(&spec)) return embed_scalar(*s);
    if (auto* s = std::get_if<KestenArSpec>(&spec)) return *s;
    return std::nullopt;
}

inline std::string signed_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%+.*f", decimals, v);
    return buf;
}

class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::string write(const std::string& stem, const std::string& ext, std::string_view contents) {
        std::string name = stem + ext;
        for (int i = 2; used(name); ++i) name = stem + "_" + std::to_string(i) + ext;
        write_file_atomic(dir_ / name, contents);
        names_.push_back(name);
        return name;
    }

private:
    bool used(const std::string& name) const {
        for (const auto& n : names_)
            if (n == name) return true;
        return false;
    }

    std::filesystem::path dir_;
    std::vector<std::string> names_;
};

}  // namespace detail

/// Simulates the configured process once, runs every analysis on that single
/// path, writes the result bundle and finally the manifest.
inline RunManifest run(ExperimentConfig cfg, const RunOptions& opts = {}) {
    if (opts.seed_override) cfg.seed = *opts.seed_override;
    validate(cfg.process);
    detail::require(!cfg.analyses.empty(), ErrorCode::ConfigError, "config lists no analyses");

    RunManifest manifest;
    manifest.started_at = detail::utc_timestamp();
    manifest.seed = cfg.seed;
    manifest.config_digest = content_digest(serialize_config(cfg));
    manifest.output_dir = detail::resolve_output_dir(cfg, opts);

    // Refuse to simulate a scalar recursion that has no stationary solution.
    const auto laws = detail::recursion_laws(cfg.process);
    Json stationarity = nullptr;
    if (laws && laws->a_law.positive_almost_surely()) {
        const auto st = stationarity_check(laws->a_law);
        stationarity = Json{{"log_moment", st.log_moment.value}, {"verdict", std::string(to_string(st.verdict))}};
        const bool scalar = !std::holds_alternative<KestenArSpec>(cfg.process);
        if (scalar && st.verdict != Verdict::stationary) {
            const char* rel = st.verdict == Verdict::boundary ? " ~ 0" : " > 0";
            throw Error(ErrorCode::NonStationary, "E[log a] = " + detail::signed_fixed(st.log_moment.value, 3) + rel +
                                                      ": the recursion has no stationary solution");
        }
    }

    std::error_code ec;
    std::filesystem::create_directories(manifest.output_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + manifest.output_dir.string() + ": " + ec.message());
    std::filesystem::remove(manifest.manifest_path(), ec);

    const RngStream sim_rng{cfg.seed, 0};
    const ReturnSeries series = simulate(cfg.process, sim_rng, cfg.n_samples, cfg.burn_in);
    manifest.resample_count = series.resample_count();
    const std::span<const double> r(series.values());

    detail::OutputSet out(manifest.output_dir);
    {
        Json meta;
        meta["spec_digest"] = series.spec_digest();
        meta["seed"] = series.seed().seed;
        meta["stream_id"] = series.seed().stream_id;
        meta["burn_in"] = series.burn_in_dropped();
        meta["resample_count"] = series.resample_count();
        meta["n"] = series.size();
        manifest.outputs.push_back({"series", {out.write("series", ".csv", series_csv(r)),
                                               out.write("series.meta", ".json", meta.dump(2) + "\n")}});
    }

    Json summary;
    summary["process"] = std::string(process_kind(cfg.process));
    summary["n_samples"] = cfg.n_samples;
    summary["burn_in"] = std::holds_alternative<InverseMultiplierSpec>(cfg.process) ? 0 : cfg.burn_in;
    summary["seed"] = cfg.seed;
    summary["spec_digest"] = series.spec_digest();
    summary["sample_std"] = sample_std(r);
    summary["resample_count"] = series.resample_count();
    summary["stationarity"] = stationarity;

    // headline theory numbers
    Json predicted = nullptr;
    std::string predicted_source;
    if (laws && laws->a_law.nonnegative()) {
        const auto mean = moment_estimate(laws->a_law, 1.0);
        summary["mean_a"] = mean.value;
        summary["regime"] = std::string(to_string(regime_from_mean(mean)));
        if (!std::holds_alternative<KestenArSpec>(cfg.process)) {
            try {
                const double mu = cramer_root(laws->a_law).mu_star;
                const bool garch = std::holds_alternative<Garch11Spec>(cfg.process);
                predicted = garch ? 2.0 * mu : mu;
                predicted_source = garch ? "twice the variance-recursion root" : "moment equation root";
            } catch (const Error& e) {
                predicted_source = e.what();
            }
        }
    } else if (auto* inv = std::get_if<InverseMultiplierSpec>(&cfg.process)) {
        summary["regime"] = "inverse_multiplier";
        if (inv->a_law.has_density()) {
            const auto p = inverse_tail_prediction(inv->a_law, 1.0);
            summary["inverse_tail_constant"] = p.tail_constant;
            if (p.applicable) {
                predicted = 1.0;
                predicted_source = "density of a at 1 is positive";
            } else {
                predicted_source = p.note;
            }
        }
    }

    for (std::size_t i = 0; i < cfg.analyses.size(); ++i) {
        const Analysis& analysis = cfg.analyses[i];
        const RngStream mc_rng{cfg.seed, 100 + i};
        const std::string kind(analysis_kind(analysis));
        std::vector<std::string> files;
        std::visit(
            [&](const auto& a) {
                using T = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<T, TailFitAnalysis>) {
                    const TailFit fit = tail_exponent_ls(r, a.threshold);
                    files.push_back(out.write("tail_fit", ".json", to_json(fit).dump(2) + "\n"));
                    files.push_back(out.write("ccdf", ".csv", ccdf_csv(empirical_ccdf(r, true))));
                    if (!summary.contains("fitted_mu")) {
                        summary["fitted_mu"] = fit.exponent;
                        summary["fitted_mu_stderr"] = fit.std_error;
                        summary["tail_threshold"] = fit.threshold;
                        summary["n_tail"] = fit.n_tail;
                    }
                } else if constexpr (std::is_same_v<T, HillAnalysis>) {
                    const HillFit fit = hill_estimator(r, a.k);
                    files.push_back(out.write("hill", ".json", to_json(fit).dump(2) + "\n"));
                    if (!summary.contains("hill_mu")) {
                        summary["hill_mu"] = fit.exponent;
                        summary["hill_k"] = fit.k;
                    }
                } else if constexpr (std::is_same_v<T, AcfAnalysis>) {
                    const AcfResult res = acf(r, a.max_lag, a.absolute);
                    const std::string stem = a.absolute ? "acf_abs" : "acf_raw";
                    files.push_back(out.write(stem, ".csv", acf_csv(res)));
                    for (std::size_t lag : {std::size_t{1}, std::size_t{2}, std::size_t{50}}) {
                        const std::string key = stem + "_lag" + std::to_string(lag);
                        if (lag <= a.max_lag && !summary.contains(key)) summary[key] = res.values[lag];
                    }
                } else if constexpr (std::is_same_v<T, CramerAnalysis>) {
                    if (!laws) throw Error(ErrorCode::ConfigError, "cramer analysis needs a recursive process");
                    const CramerSolution sol = cramer_root(laws->a_law);
                    files.push_back(out.write("cramer", ".json", to_json(sol).dump(2) + "\n"));
                } else if constexpr (std::is_same_v<T, ConditionsAnalysis>) {
                    if (!laws) throw Error(ErrorCode::ConfigError, "conditions analysis needs a recursive process");
                    const TheoryReport rep = kesten_conditions_report(laws->a_law, laws->e_law);
                    files.push_back(out.write("conditions", ".json", to_json(rep).dump(2) + "\n"));
                    files.push_back(out.write("conditions", ".txt", conditions_table(rep)));
                } else if constexpr (std::is_same_v<T, LyapunovAnalysis>) {
                    const auto ar = detail::matrix_form(cfg.process);
                    if (!ar) throw Error(ErrorCode::ConfigError, "lyapunov analysis needs a kesten_scalar or kesten_ar process");
                    const LyapunovEstimate est = lyapunov_top(*ar, a.t_horizon, a.trials, mc_rng);
                    files.push_back(out.write("lyapunov", ".json", to_json(est).dump(2) + "\n"));
                    if (!summary.contains("lyapunov_gamma")) summary["lyapunov_gamma"] = est.gamma_hat;
                } else {
                    const auto ar = detail::matrix_form(cfg.process);
                    if (!ar) {
                        throw Error(ErrorCode::ConfigError,
                                    "moment_lyapunov analysis needs a kesten_scalar or kesten_ar process");
                    }
                    const MomentLyapunovSolution sol =
                        moment_lyapunov_root(*ar, a.mu_values(), a.t_horizon, a.particles, mc_rng);
                    files.push_back(out.write("moment_lyapunov", ".json", to_json(sol).dump(2) + "\n"));
                    if (predicted.is_null()) {
                        predicted = sol.solution.mu_star;
                        predicted_source = "moment Lyapunov root";
                    }
                }
            },
            analysis);
        manifest.outputs.emplace_back(kind, std::move(files));
    }
    summary["predicted_mu"] = predicted;
    summary["predicted_mu_source"] = predicted_source;
    manifest.outputs.push_back({"summary", {out.write("summary", ".json", summary.dump(2) + "\n")}});

    manifest.finished_at = detail::utc_timestamp();
    write_file_atomic(manifest.manifest_path(), to_json(manifest).dump(2) + "\n");
    return manifest;
}

/// One-screen text summary of a finished run.
[[nodiscard]] inline std::string report(const RunManifest& manifest) {
    std::optional<std::string> summary_file;
    for (const auto& [name, files] : manifest.outputs) {
        for (const auto& f : files) {
            if (!std::filesystem::exists(manifest.output_dir / f)) {
                throw Error(ErrorCode::MissingArtifacts, "run output '" + f + "' listed in the manifest is missing");
            }
            if (name == "summary") summary_file = f;
        }
    }
    if (!summary_file) throw Error(ErrorCode::MissingArtifacts, "manifest lists no summary");
    const Json s = Json::parse(read_file(manifest.output_dir / *summary_file));
    auto num = [](const Json& v, int precision = 4) { return detail::fmt(v.get<double>(), precision); };
    auto fixed = [](double v, int decimals) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
        return std::string(buf);
    };

    std::ostringstream os;
    const std::string process = s.at("process").get<std::string>();
    os << "process: " << process << " (n = " << s.at("n_samples").get<std::size_t>()
       << ", burn-in " << s.at("burn_in").get<std::size_t>() << ", seed " << s.at("seed").get<std::uint64_t>() << ")\n";
    if (process == "inverse_multiplier") {
        if (!s.at("predicted_mu").is_null()) {
            os << "unit-exponent regime (inverse multiplier), predicted μ = 1\n";
        } else {
            os << "inverse multiplier: " << s.at("predicted_mu_source").get<std::string>() << "\n";
        }
    } else if (s.contains("regime")) {
        const std::string regime = s.at("regime").get<std::string>();
        const std::string mean = num(s.at("mean_a"));
        const char* rel = regime == "A" ? "= 1" : regime == "B" ? "> 1" : "< 1";
        os << "regime: " << regime << " (E(a) = " << mean << (regime == "A" ? "" : std::string(" ") + rel) << ")\n";
    }
    if (const auto& st = s.at("stationarity"); !st.is_null()) {
        os << "stationarity: " << st.at("verdict").get<std::string>() << " (E[log a] = " << num(st.at("log_moment"))
           << ")\n";
    }
    if (process != "inverse_multiplier") {
        if (!s.at("predicted_mu").is_null()) {
            os << "predicted μ ≈ " << fixed(s.at("predicted_mu").get<double>(), 2) << " ("
               << s.at("predicted_mu_source").get<std::string>() << ")\n";
        } else {
            os << "predicted μ: unavailable (" << s.at("predicted_mu_source").get<std::string>() << ")\n";
        }
    }
    if (s.contains("fitted_mu")) {
        os << "fitted μ = " << fixed(s.at("fitted_mu").get<double>(), 3) << " (least squares above "
           << num(s.at("tail_threshold")) << ", " << s.at("n_tail").get<std::size_t>() << " exceedances)\n";
    }
    if (s.contains("hill_mu")) {
        os << "hill μ = " << fixed(s.at("hill_mu").get<double>(), 3) << " (k = " << s.at("hill_k").get<std::size_t>()
           << ")\n";
    }
    if (s.contains("lyapunov_gamma")) os << "top Lyapunov exponent = " << num(s.at("lyapunov_gamma")) << "\n";
    std::vector<std::string> acf_parts;
    const std::pair<const char*, const char*> acf_keys[] = {{"acf_raw_lag1", "raw lag 1"},
                                                            {"acf_raw_lag2", "raw lag 2"},
                                                            {"acf_abs_lag1", "|r| lag 1"},
                                                            {"acf_abs_lag50", "|r| lag 50"}};
    for (const auto& [key, label] : acf_keys) {
        if (s.contains(key)) acf_parts.push_back(std::string(label) + " = " + fixed(s.at(key).get<double>(), 4));
    }
    if (!acf_parts.empty()) {
        os << "acf:";
        for (std::size_t i = 0; i < acf_parts.size(); ++i) os << (i ? ", " : " ") << acf_parts[i];
        os << "\n";
    }
    os << "sample std = " << num(s.at("sample_std")) << "\n";
    return os.str();
}

[[nodiscard]] inline std::string report(const std::filesystem::path& manifest_path) {
    if (!std::filesystem::exists(manifest_path)) {
        throw Error(ErrorCode::MissingArtifacts, "no manifest at " + manifest_path.string());
    }
    return report(load_manifest(manifest_path));
}

/// CLI exit status for an error: 2 configuration, 3 numerical, 4 I/O.
[[nodiscard]] constexpr int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ConfigError:
        case ErrorCode::InvalidParameter:
        case ErrorCode::ParseError:
        case ErrorCode::NonPositivePrice:
            return 2;
        case ErrorCode::IoError:
        case ErrorCode::MissingArtifacts:
            return 4;
        default:
            return 3;
    }
}

}  // namespace kesten
