#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semcom/experiments.hpp"
#include "semcom/federated.hpp"
#include "semcom/harness.hpp"

namespace fs = std::filesystem;
using namespace semcom;

namespace {

std::ofstream open_output(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw ValidationError("cannot open output file '" + path.string() + "'");
    }
    std::cout << "writing " << path.string() << "\n";
    return f;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale multi-user generative semantic communication simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    uint64_t seed_override = 0;
    std::vector<CLI::Option*> seed_opts;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON scenario configuration file");
        sub->add_option("--out", out_dir, "output directory (created if missing)");
        seed_opts.push_back(
            sub->add_option("--seed-override", seed_override, "replace the master seed"));
    };

    CLI::App* cmd_train =
        app.add_subcommand("train", "train and checkpoint the cluster and user models");
    CLI::App* cmd_case =
        app.add_subcommand("case-study", "run the seed x user x snr x offload metric grid");
    CLI::App* cmd_fl = app.add_subcommand("fl", "federated training loss curves");
    CLI::App* cmd_sched =
        app.add_subcommand("scheduler", "brute-force vs sequential assignment benchmark");
    CLI::App* cmd_off =
        app.add_subcommand("encode-offload", "train and evaluate the encoder split policy");
    CLI::App* cmd_plot = app.add_subcommand("plot", "render result CSVs as SVG line charts");

    for (CLI::App* sub : {cmd_train, cmd_case, cmd_fl, cmd_sched, cmd_off, cmd_plot}) {
        add_common(sub);
    }
    std::vector<std::string> plot_inputs;
    cmd_plot->add_option("csv", plot_inputs, "result CSV files to render")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        harness::ScenarioConfig cfg;
        if (!config_path.empty()) {
            cfg = harness::load_config(config_path);
        }
        for (const CLI::Option* o : seed_opts) {
            if (o->count() > 0) {
                cfg.seed = seed_override;
            }
        }
        cfg.validate();
        fs::create_directories(out_dir);
        const fs::path out(out_dir);

        if (cmd_train->parsed()) {
            if (cfg.checkpoint_dir.empty()) {
                cfg.checkpoint_dir = (out / "checkpoints").string();
            }
            experiments::train_models(cfg);
            std::cout << "checkpoints in " << cfg.checkpoint_dir << "\n";
        } else if (cmd_case->parsed()) {
            const auto models = experiments::prepare_models(cfg);
            const auto rows = experiments::run_case_study(cfg, models);
            auto f = open_output(out / "case_study.csv");
            experiments::write_case_study_csv(rows, f);
        } else if (cmd_fl->parsed()) {
            const auto records = experiments::run_fl_experiment(cfg);
            auto f = open_output(out / "fl_losses.csv");
            federated::write_loss_csv(records, f);
        } else if (cmd_sched->parsed()) {
            const auto rows = experiments::run_scheduler_experiment(cfg);
            auto f = open_output(out / "scheduler.csv");
            experiments::write_scheduler_csv(rows, f);
        } else if (cmd_off->parsed()) {
            const auto result = experiments::run_offload_experiment(cfg);
            {
                auto f = open_output(out / "offload_eval.csv");
                experiments::write_offload_csv(result.rows, f);
            }
            auto q = open_output(out / "qtable.csv");
            result.qtable.write_csv(q);
        } else if (cmd_plot->parsed()) {
            for (const std::string& input : plot_inputs) {
                std::ifstream csv(input, std::ios::binary);
                if (!csv) {
                    throw ValidationError("cannot open input CSV '" + input + "'");
                }
                const std::string stem = fs::path(input).stem().string();
                auto svg = open_output(out / (stem + ".svg"));
                experiments::plot_csv(csv, stem, svg);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
