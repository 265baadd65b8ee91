// Command-line front end: run one experiment, sweep a PDR x NIR x defense
// grid, or re-render stored reports.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedward/config.hpp"
#include "fedward/experiment.hpp"
#include "fedward/report.hpp"

namespace {

void print_error(const std::string& code, const std::string& message) {
    nlohmann::ordered_json err;
    err["error"] = code;
    err["message"] = message;
    std::cerr << err.dump() << std::endl;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::optional<std::uint64_t>& seed_override) {
    fedward::ExperimentConfig cfg = fedward::load_experiment_config(config_path);
    if (seed_override) cfg.seed = *seed_override;

    fedward::RunSummary summary = fedward::run_experiment(cfg);
    fedward::write_run_outputs(out_dir, summary);
    std::cout << fedward::summary_to_json(summary);
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              const std::optional<std::uint64_t>& seed_override) {
    fedward::SweepSpec spec = fedward::load_sweep_config(config_path);
    if (seed_override) spec.base.seed = *seed_override;

    auto grid = fedward::expand_sweep(spec);
    auto rows = fedward::sweep(grid);

    std::filesystem::create_directories(out_dir);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].error.empty()) {
            std::cerr << "sweep row " << i << " failed: " << rows[i].error << '\n';
            continue;
        }
        char name[32];
        std::snprintf(name, sizeof(name), "run_%03zu", i);
        fedward::write_run_outputs((std::filesystem::path(out_dir) / name).string(),
                                   *rows[i].summary);
    }

    const auto csv_path = std::filesystem::path(out_dir) / "sweep.csv";
    std::ofstream f(csv_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + csv_path.string());
    std::string csv = fedward::sweep_to_csv(rows);
    f << csv;
    std::cout << csv;
    return 0;
}

int cmd_report(const std::string& in_dir, const std::string& format) {
    namespace fs = std::filesystem;
    if (format == "json") {
        std::cout << fedward::read_text_file((fs::path(in_dir) / "summary.json").string());
        return 0;
    }
    auto rounds = fedward::read_rounds_jsonl((fs::path(in_dir) / "rounds.jsonl").string());
    std::cout << fedward::rounds_to_csv(rounds);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated-learning backdoor defense simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, in_dir;
    std::string format = "csv";
    std::optional<std::uint64_t> seed_override;

    auto add_seed = [&](CLI::App* sub) {
        sub->add_option("--seed", seed_override, "Override the config seed");
    };

    CLI::App* run = app.add_subcommand("run", "Run a single experiment");
    run->add_option("--config", config_path, "Experiment config JSON")->required();
    run->add_option("--out", out_dir, "Output directory")->required();
    add_seed(run);

    CLI::App* sw = app.add_subcommand("sweep", "Run a PDR x NIR x defense grid");
    sw->add_option("--config", config_path, "Sweep config JSON")->required();
    sw->add_option("--out", out_dir, "Output directory")->required();
    add_seed(sw);

    CLI::App* rep = app.add_subcommand("report", "Render stored reports");
    rep->add_option("--in", in_dir, "Directory with rounds.jsonl/summary.json")->required();
    rep->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        print_error("usage", e.what());
        return 1;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, seed_override);
        if (sw->parsed()) return cmd_sweep(config_path, out_dir, seed_override);
        return cmd_report(in_dir, format);
    } catch (const std::invalid_argument& e) {
        print_error("config_invalid", e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("runtime_error", e.what());
        return 1;
    }
}
