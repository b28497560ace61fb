// Command-line front end: simulate from a config, fit tails, compute ACFs,
// solve the moment equation and summarize finished runs.
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kesten/kesten.hpp"

namespace fs = std::filesystem;
using namespace kesten;

namespace {

void emit(const std::string& text, const std::optional<fs::path>& out) {
    if (out) write_file_atomic(*out, text);
    else std::cout << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random-coefficient return models: simulation, tail and ACF estimation, stability theory"};
    app.set_version_flag("--version", std::string(toolkit_version));
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "Simulate a config and write its result bundle");
    std::string run_config;
    std::optional<std::uint64_t> run_seed;
    std::optional<std::string> run_out;
    run_cmd->add_option("config", run_config, "Experiment config (JSON)")->required();
    run_cmd->add_option("--seed", run_seed, "Override the config seed");
    run_cmd->add_option("--output-dir", run_out, "Result directory (default: $KESTEN_OUTPUT_ROOT/<config name>)");

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "Convert a price CSV to a t,r return series");
    std::string ingest_csv;
    std::optional<std::string> price_col;
    std::optional<fs::path> ingest_out;
    ingest_cmd->add_option("csv", ingest_csv, "Price file with a header row")->required();
    ingest_cmd->add_option("--price-col", price_col, "Price column name");
    ingest_cmd->add_option("-o,--output", ingest_out, "Write the series here instead of stdout");

    // fit-tail
    auto* fit_cmd = app.add_subcommand("fit-tail", "Least-squares and Hill tail exponents of a series");
    std::string fit_series;
    std::optional<double> fit_threshold;
    std::size_t fit_hill_k = 0;
    fit_cmd->add_option("series", fit_series, "Series CSV (t,r)")->required();
    fit_cmd->add_option("--threshold", fit_threshold, "Lower cutoff on |r| (default: 95th percentile)");
    fit_cmd->add_option("--hill-k", fit_hill_k, "Also report the Hill estimate from the top k values");

    // acf
    auto* acf_cmd = app.add_subcommand("acf", "Sample autocorrelation of a series");
    std::string acf_series;
    std::size_t acf_lag = 0;
    bool acf_abs = false;
    acf_cmd->add_option("series", acf_series, "Series CSV (t,r)")->required();
    acf_cmd->add_option("--max-lag", acf_lag, "Largest lag")->required();
    acf_cmd->add_flag("--absolute", acf_abs, "Use |r|");

    // cramer
    auto* cramer_cmd = app.add_subcommand("cramer", "Positive root of E(a^mu) = 1 and the condition report");
    std::string cramer_law;
    std::optional<std::string> cramer_e;
    cramer_cmd->add_option("--law", cramer_law, "Coefficient law as JSON, inline or a file path")->required();
    cramer_cmd->add_option("--noise", cramer_e, "Noise law as JSON; adds the condition table");

    // lyapunov
    auto* lyap_cmd = app.add_subcommand("lyapunov", "Top Lyapunov exponent of the config's coefficient matrices");
    std::string lyap_config;
    std::size_t lyap_t = 1000;
    std::size_t lyap_trials = 100;
    std::optional<std::uint64_t> lyap_seed;
    lyap_cmd->add_option("--config", lyap_config, "Experiment config (JSON)")->required();
    lyap_cmd->add_option("--t-horizon", lyap_t, "Product length")->capture_default_str();
    lyap_cmd->add_option("--trials", lyap_trials, "Independent products")->capture_default_str();
    lyap_cmd->add_option("--seed", lyap_seed, "Override the config seed");

    // report
    auto* report_cmd = app.add_subcommand("report", "Summarize a finished run");
    std::string report_manifest;
    report_cmd->add_option("manifest", report_manifest, "manifest.json or its directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    auto load_law = [](const std::string& text_or_path) {
        const std::string text = fs::exists(text_or_path) ? read_file(text_or_path) : text_or_path;
        Json j;
        try {
            j = Json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::ConfigError, std::string("law is not valid JSON: ") + e.what());
        }
        return law_from_json(j);
    };

    try {
        if (*run_cmd) {
            RunOptions opts;
            opts.seed_override = run_seed;
            if (run_out) opts.output_dir_override = fs::path(*run_out);
            opts.config_name = fs::path(run_config).stem().string();
            const RunManifest m = run(load_config(run_config), opts);
            std::cerr << "wrote " << m.manifest_path().string() << "\n";
            std::cout << report(m);
        } else if (*ingest_cmd) {
            const ReturnSeries s = ingest_prices(ingest_csv, price_col);
            std::cerr << "ingested " << *s.source_rows << " price rows, digest " << s.spec_digest() << "\n";
            emit(series_csv(s.values()), ingest_out);
        } else if (*fit_cmd) {
            const auto r = read_series_csv(fit_series);
            Json j;
            j["least_squares"] = to_json(tail_exponent_ls(r, fit_threshold));
            if (fit_hill_k > 0) j["hill"] = to_json(hill_estimator(r, fit_hill_k));
            std::cout << j.dump(2) << "\n";
        } else if (*acf_cmd) {
            std::cout << acf_csv(acf(read_series_csv(acf_series), acf_lag, acf_abs));
        } else if (*cramer_cmd) {
            const CoefficientLaw a = load_law(cramer_law);
            if (cramer_e) {
                const TheoryReport rep = kesten_conditions_report(a, load_law(*cramer_e));
                std::cerr << conditions_table(rep);
                std::cout << to_json(rep).dump(2) << "\n";
            } else {
                std::cout << to_json(cramer_root(a)).dump(2) << "\n";
            }
        } else if (*lyap_cmd) {
            const ExperimentConfig cfg = load_config(lyap_config);
            std::optional<KestenArSpec> ar;
            if (auto* s = std::get_if<KestenScalarSpec>(&cfg.process)) ar = embed_scalar(*s);
            if (auto* s = std::get_if<KestenArSpec>(&cfg.process)) ar = *s;
            if (!ar) throw Error(ErrorCode::ConfigError, "lyapunov needs a kesten_scalar or kesten_ar process");
            const LyapunovEstimate est = lyapunov_top(*ar, lyap_t, lyap_trials, RngStream{lyap_seed.value_or(cfg.seed), 100});
            std::cout << to_json(est).dump(2) << "\n";
        } else if (*report_cmd) {
            fs::path p(report_manifest);
            if (fs::is_directory(p)) p /= "manifest.json";
            std::cout << report(p);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
