// sensreach run <config.json> | sensreach suite paper

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "sensreach/bench.hpp"

namespace fs = std::filesystem;
using namespace sensreach;

namespace {

struct Common {
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    bool quiet = false;
    bool no_timings = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--out", c.out_dir, "Directory for result JSON and plot CSVs");
    cmd->add_option("--seed", c.seed, "Random seed (overrides the config)");
    cmd->add_option("--samples", c.samples, "Monte-Carlo successor count (overrides mc_samples)")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--quiet", c.quiet, "Print nothing but errors");
    cmd->add_flag("--no-timings", c.no_timings, "Omit timings so that outputs are reproducible byte for byte");
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

int run_one(const std::string& config_path, const Common& c) {
    nlohmann::json doc;
    {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open " << config_path << '\n';
            return 2;
        }
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            std::cerr << "error: " << config_path << " is not valid JSON: " << e.what() << '\n';
            return 2;
        }
    }
    if (c.seed) doc["seed"] = *c.seed;
    if (c.samples) doc["mc_samples"] = *c.samples;

    ExperimentConfig cfg;
    try {
        cfg = experiment_config_from_json(doc);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    auto emit = [&](const nlohmann::json& j) {
        if (c.out_dir.empty()) {
            std::cout << j.dump(2) << '\n';
        } else {
            write_json(fs::path(c.out_dir) / (cfg.name + ".json"), j);
        }
    };

    try {
        const ExperimentResult r = run_experiment(cfg);
        emit(to_json(r, !c.no_timings));
        if (!c.out_dir.empty()) {
            (void)emit_plot_data(r, r.plot_dims, c.out_dir, cfg.name);
            if (!c.quiet) {
                std::vector<SuiteEntry> one{{cfg.name, r, {}, {}}};
                std::cout << suite_summary(one);
            }
        }
        return 0;
    } catch (const InfeasibleTaylorOrder& e) {
        std::cerr << "error: " << e.what() << '\n';
        emit({{"name", cfg.name}, {"error", e.what()}, {"minimal_taylor_order", e.minimal_order()}});
        return 3;
    } catch (const IntegrationError& e) {
        std::cerr << "integration error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

int run_suite_cmd(const std::string& name, const Common& c) {
    SuiteOptions opts;
    opts.seed = c.seed;
    opts.mc_samples = c.samples;
    std::vector<SuiteEntry> entries;
    try {
        entries = run_suite(name, opts);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    const nlohmann::json doc = to_json(entries, !c.no_timings);
    if (c.out_dir.empty()) {
        if (c.quiet) std::cout << doc.dump(2) << '\n';
    } else {
        const fs::path dir(c.out_dir);
        write_json(dir / ("suite_" + name + ".json"), doc);
        for (const auto& e : entries) {
            if (!e.result) continue;
            write_json(dir / (e.name + ".json"), to_json(*e.result, !c.no_timings));
            (void)emit_plot_data(*e.result, e.result->plot_dims, dir, e.name);
        }
    }
    if (!c.quiet) std::cout << suite_summary(entries);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interval reachability from sensitivity bounds"};
    app.require_subcommand(1);

    Common run_opts;
    std::string config_path;
    auto* run = app.add_subcommand("run", "Run one experiment from a JSON config");
    run->add_option("config", config_path, "Config file")->required();
    add_common(run, run_opts);

    Common suite_opts;
    std::string suite_name;
    auto* suite = app.add_subcommand("suite", "Run a built-in experiment suite");
    suite->add_option("name", suite_name, "Suite name")->required()->check(CLI::IsMember({"paper"}));
    add_common(suite, suite_opts);

    CLI11_PARSE(app, argc, argv);
    if (*run) return run_one(config_path, run_opts);
    return run_suite_cmd(suite_name, suite_opts);
}
