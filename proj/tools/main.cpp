// Command line front end: fit / infer / simulate.
#include "boostinf/run.hpp"
#include "boostinf/sim.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

int run_fit_or_infer(const std::string& config_path, const std::string& data_override,
                     const std::string& out_path, const std::string& tables_prefix,
                     std::optional<std::uint64_t> seed, std::optional<int> threads,
                     bool with_inference) {
    boostinf::RunConfig cfg = boostinf::load_config(config_path);
    if (!data_override.empty()) cfg.data_path = data_override;
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    if (cfg.data_path.empty()) throw std::runtime_error("no data file given");

    const boostinf::Dataset data = boostinf::read_csv_file(cfg.data_path);
    const boostinf::RunOutput out = boostinf::run_pipeline(cfg, data, with_inference);

    std::cout << boostinf::report_text(out);
    if (!out_path.empty()) write_file(out_path, boostinf::report_json(out).dump(2) + "\n");
    for (const auto& t : out.targets)
        if (t.decl.kind == boostinf::TargetDecl::Kind::pointwise && !t.pointwise.empty())
            write_file(tables_prefix + t.decl.learner + ".csv", boostinf::effect_table_csv(t));
    for (const auto& t : out.targets)
        if (!t.ok)
            std::cerr << "target " << t.decl.learner << " (" << int(t.decl.kind)
                      << "): " << t.error << "\n";
    return out.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"additive model boosting with selective inference"};
    app.require_subcommand(1);

    std::string config_path, data_override, out_path = "report.json", tables_prefix = "effects_";
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    app.add_option("--config", config_path, "model configuration file")->envname("BOOSTINF_CONFIG");
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--threads", threads, "worker pool cap (0 = hardware)");
    app.fallthrough();

    auto* fit = app.add_subcommand("fit", "fit and report the selected model");
    fit->add_option("--data", data_override, "override the data path");
    fit->add_option("--out", out_path, "report JSON path");

    auto* infer = app.add_subcommand("infer", "fit plus selective inference for the targets");
    infer->add_option("--data", data_override, "override the data path");
    infer->add_option("--out", out_path, "report JSON path");
    infer->add_option("--tables", tables_prefix, "prefix for pointwise effect CSV tables");

    auto* simulate = app.add_subcommand("simulate", "run a simulation study preset");
    std::string preset = "linear-n25-p8-snr1";
    std::string records_path, summary_path;
    std::string method = "sampling", stopping = "fixed", variance = "known";
    int replications = 0, samples = 0, mstop = 0;
    simulate->add_option("--preset", preset, "scenario preset")
        ->check(CLI::IsMember(boostinf::scenario_preset_names()));
    simulate->add_option("--replications", replications, "number of replications");
    simulate->add_option("--samples", samples, "Monte Carlo samples B per hypothesis");
    simulate->add_option("--mstop", mstop, "override fixed stopping iteration");
    simulate->add_option("--method", method, "sampling | polyhedron | both | all")
        ->check(CLI::IsMember({"sampling", "polyhedron", "both", "all"}));
    simulate->add_option("--stopping", stopping, "fixed | cv")
        ->check(CLI::IsMember({"fixed", "cv"}));
    simulate->add_option("--variance", variance, "known | boost_residual | response | ols_refit")
        ->check(CLI::IsMember({"known", "boost_residual", "response", "ols_refit"}));
    simulate->add_option("--records", records_path, "per-hypothesis records CSV");
    simulate->add_option("--summary", summary_path, "aggregate summary JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed() || infer->parsed()) {
            if (config_path.empty()) {
                std::cerr << "error: --config is required\n";
                return 1;
            }
            return run_fit_or_infer(config_path, data_override, out_path, tables_prefix, seed,
                                    threads, infer->parsed());
        }

        boostinf::ScenarioConfig cfg = boostinf::scenario_preset(preset);
        if (replications > 0) cfg.replications = replications;
        if (samples > 0) cfg.num_samples = samples;
        if (mstop > 0) cfg.stopping.mstop = mstop;
        if (seed) cfg.base_seed = *seed;
        if (threads) cfg.threads = *threads;
        if (stopping == "cv") cfg.stopping.kind = boostinf::StoppingChoice::Kind::cv;
        cfg.run_sampling = method != "polyhedron";
        cfg.run_polyhedron = method != "sampling";
        if (variance == "known") cfg.variance = boostinf::VarianceMode::known;
        else if (variance == "boost_residual") cfg.variance = boostinf::VarianceMode::boost_residual;
        else if (variance == "response") cfg.variance = boostinf::VarianceMode::response;
        else cfg.variance = boostinf::VarianceMode::ols_refit;

        const boostinf::StudyResult study = boostinf::run_study(cfg);
        const auto& agg = study.aggregates;
        nlohmann::ordered_json summary;
        summary["preset"] = preset;
        summary["replications"] = agg.n_replications;
        summary["admissible"] = agg.n_admissible;
        summary["null_records"] = agg.n_null_records;
        auto put = [&](const char* key, double v) {
            summary[key] = std::isnan(v) ? nlohmann::ordered_json(nullptr)
                                         : nlohmann::ordered_json(v);
        };
        put("ks_noise_sampling", agg.ks_noise_sampling);
        put("ks_noise_polyhedron", agg.ks_noise_polyhedron);
        put("ks_noise_naive", agg.ks_noise_naive);
        put("rejection_noise_sampling", agg.rejection_noise_sampling);
        put("coverage_noise", agg.coverage_noise);
        put("coverage_signal", agg.coverage_signal);
        put("infinite_ci_fraction", agg.infinite_ci_fraction);
        std::cout << summary.dump(2) << "\n";
        if (!summary_path.empty()) write_file(summary_path, summary.dump(2) + "\n");
        if (!records_path.empty()) {
            std::ofstream rec(records_path, std::ios::binary);
            if (!rec) throw std::runtime_error("cannot write " + records_path);
            boostinf::write_records_csv(study, rec);
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
