#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "vrc/bench.hpp"
#include "vrc/error.hpp"
#include "vrc/experiment.hpp"
#include "vrc/parallel.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
    std::string config;
    std::string preset;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

vrc::experiment::ExperimentConfig resolve(const Options& o) {
    if (!o.config.empty() && !o.preset.empty()) throw vrc::ConfigError("use either --config or --preset, not both");
    if (!o.preset.empty()) return vrc::experiment::parse_config(vrc::experiment::preset(o.preset), o.seed);
    if (o.config.empty()) throw vrc::ConfigError("--config <path> or --preset <name> is required");
    return vrc::experiment::load_config(o.config, o.seed);
}

void add_common(CLI::App* cmd, Options& o, bool needs_config = true) {
    auto* cfg = cmd->add_option("--config", o.config, "experiment config (JSON)");
    auto* pre = cmd->add_option("--preset", o.preset, "built-in replication preset");
    if (needs_config) {
        cfg->excludes(pre);
    }
    cmd->add_option("--out", o.out, "artifact directory")->capture_default_str();
    cmd->add_option("--seed", o.seed, "master seed, overrides the config");
    cmd->add_option("--threads", o.threads, "worker thread cap (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel and NG-RC time-series forecasting experiments"};
    app.require_subcommand(1);
    Options o;

    using Stage = void (*)(const vrc::experiment::ExperimentConfig&, const vrc::experiment::fs::path&);
    struct Entry {
        const char* name;
        const char* help;
        Stage stage;
    };
    const Entry stages[] = {
        {"simulate", "generate the dataset and its train/test split", vrc::experiment::cmd_simulate},
        {"fit", "fit the configured estimator on the training split", vrc::experiment::cmd_fit},
        {"cv", "grid search with time-series folds", vrc::experiment::cmd_cv},
        {"forecast", "path continuation or open-loop prediction on the test split", vrc::experiment::cmd_forecast},
        {"eval", "score a forecast: pointwise errors, T_valid, PSDE, W1", vrc::experiment::cmd_eval},
        {"run", "simulate, fit, forecast and eval in one go", vrc::experiment::run_pipeline},
    };
    Stage chosen = nullptr;
    for (const auto& e : stages) {
        auto* cmd = app.add_subcommand(e.name, e.help);
        add_common(cmd, o);
        cmd->callback([&chosen, stage = e.stage] { chosen = stage; });
    }
    bool bench = false;
    auto* bench_cmd = app.add_subcommand("bench", "time training, Gram construction and per-step prediction");
    add_common(bench_cmd, o, false);
    bench_cmd->callback([&bench] { bench = true; });

    bool list = false;
    std::string dump;
    auto* presets_cmd = app.add_subcommand("presets", "list built-in presets or print one");
    presets_cmd->add_option("--show", dump, "print the named preset as JSON");
    presets_cmd->callback([&list] { list = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        vrc::set_max_threads(o.threads);
        if (list) {
            if (!dump.empty()) {
                std::cout << vrc::experiment::preset(dump).dump(2) << '\n';
            } else {
                for (const auto& n : vrc::experiment::preset_names()) std::cout << n << '\n';
            }
            return 0;
        }
        if (bench) {
            vrc::serialize::Json doc = vrc::serialize::Json::object();
            if (!o.config.empty()) {
                try {
                    doc = vrc::serialize::read_json(o.config);
                } catch (const vrc::Error& e) {
                    throw vrc::ConfigError(e.what());
                }
            }
            if (o.seed) doc["seed"] = *o.seed;
            const auto config = vrc::bench::parse_bench(doc);
            const auto rows = vrc::bench::run_bench(config);
            vrc::experiment::fs::create_directories(o.out);
            vrc::bench::write_bench_csv(rows, vrc::experiment::fs::path(o.out) / "bench.csv");
            vrc::bench::write_bench_csv(rows, "/dev/stdout");
            return 0;
        }
        const auto config = resolve(o);
        chosen(config, o.out);
        return 0;
    } catch (const vrc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const vrc::DependencyError& e) {
        std::cerr << "missing dependency: " << e.what() << '\n';
        return kExitConfig;
    } catch (const vrc::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const vrc::Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
