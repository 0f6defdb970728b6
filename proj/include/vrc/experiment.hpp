#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vrc/cv.hpp"
#include "vrc/estimator.hpp"
#include "vrc/forecast.hpp"
#include "vrc/metrics.hpp"
#include "vrc/serialize.hpp"
#include "vrc/timeseries.hpp"

namespace vrc::experiment {

namespace fs = std::filesystem;
using serialize::Json;

inline constexpr const char* kSchema = "vrc-experiment/1";

struct DatasetConfig {
    std::string kind;  // lorenz | mackey-glass | bekk | csv
    Index n_train = 0;
    // lorenz
    double dt = 0.005;
    Index n_points = 15001;
    std::vector<double> initial{0.0, 1.0, 1.05};
    // mackey-glass
    double dt_fine = 0.02;
    double delay = 17.0;
    Index n_fine = 382500;
    Index splice = 50;
    // bekk
    Index bekk_d = 5;
    Index bekk_n = 3760;
    // csv
    std::string path;
    std::string outputs_path;
};

struct CvConfig {
    cv::FoldMode mode = cv::FoldMode::overlapping;
    Index fold_len = 0, val_len = 0, stride = 0;  // overlapping
    Index k = 5;                                  // expanding
};

struct TaskConfig {
    forecast::Mode mode = forecast::Mode::path_continuation;
    double lyapunov_exponent = 0;  // required for path continuation
    double threshold = 0.2;
    Index horizon = 0;  // 0 = the whole test block
};

struct MetricsConfig {
    Index nperseg = 256;
    double overlap = 0.5;
    std::optional<double> f_cut;
    Index w1_cap = metrics::kDefaultW1Cap;
    double mape_eps = 1e-8;
    // Horizon for pointwise metrics in Lyapunov times; unset = ceil(own T_valid).
    std::optional<double> pointwise_lyapunov_times;
};

struct ExperimentConfig {
    Json document;  // after overrides; hashed
    std::string hash;
    std::string name;
    std::uint64_t seed = 0;
    DatasetConfig dataset;
    estimator::EstimatorSpec estimator;
    std::optional<cv::Grid> grid;
    CvConfig cv;
    TaskConfig task;
    MetricsConfig metrics;
};

/// Validates and decodes a config document; errors are ConfigError with field paths.
ExperimentConfig parse_config(Json document, std::optional<std::uint64_t> seed_override = {});
ExperimentConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed_override = {});

std::vector<std::string> preset_names();
/// Built-in replication presets for the nine estimator/dataset pairs.
Json preset(const std::string& name);

struct Dataset {
    TimeSeries inputs;                 // the series itself for path continuation
    std::optional<TimeSeries> outputs;  // open-loop targets
    Index n_train = 0;
    bool bekk_fallback_start = false;
};

Dataset generate_dataset(const ExperimentConfig& config);

struct MetricReport {
    double nmse = 0, mae = 0, mdae = 0, mape = 0, psde = 0, w1 = 0;
    Index pointwise_steps = 0;
    Index psde_skipped_bins = 0;
    Index w1_samples = 0;
    std::optional<forecast::ValidTime> valid;
    bool truncated = false;
    std::vector<std::string> flags;

    Json to_json() const;
};

/// Metrics for a prediction against a reference; `valid` is filled for path
/// continuation when lyapunov_exponent > 0.
MetricReport evaluate(const Matrix& reference, const Matrix& predicted, double dt, const TaskConfig& task,
                      const MetricsConfig& metrics, std::uint64_t seed, bool truncated = false);

// Stages. Each reads its upstream manifest from `out` and writes its own.
void cmd_simulate(const ExperimentConfig& config, const fs::path& out);
void cmd_fit(const ExperimentConfig& config, const fs::path& out);
void cmd_cv(const ExperimentConfig& config, const fs::path& out);
void cmd_forecast(const ExperimentConfig& config, const fs::path& out);
void cmd_eval(const ExperimentConfig& config, const fs::path& out);

/// simulate, fit, forecast and eval in sequence.
void run_pipeline(const ExperimentConfig& config, const fs::path& out);

}  // namespace vrc::experiment
