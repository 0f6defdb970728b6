#pragma once

#include <cstdint>
#include <functional>
#include <filesystem>
#include <string>
#include <vector>

#include "vrc/serialize.hpp"

namespace vrc::bench {

struct BenchConfig {
    std::vector<Index> ns{1000, 2000};
    std::vector<int> ps{2, 3, 4, 5};
    int tau = 4;
    int d = 2;
    int repeats = 5;
    int prediction_steps = 200;
    std::uint64_t seed = 0;
};

/// Reads the optional "bench" block of a config document.
BenchConfig parse_bench(const serialize::Json& document);

struct BenchRow {
    std::string task;  // ngrc_train | poly_gram | volterra_gram | ngrc_step | poly_step | volterra_step
    Index n = 0;
    int tau = 0, d = 0, p = 0;
    double median_seconds = 0;
    std::string complexity;  // asymptotic cost of the task, for reference
};

/// Median of `repeats` timed runs after one warm-up run.
double time_median(const std::function<void()>& body, int repeats);

double time_ngrc_training(Index n, int tau, int d, int p, int repeats, std::uint64_t seed);
double time_poly_gram(Index n, int tau, int d, int p, int repeats, std::uint64_t seed);
double time_volterra_gram(Index n, int d, int repeats, std::uint64_t seed);

std::vector<BenchRow> run_bench(const BenchConfig& config);
void write_bench_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& path);

}  // namespace vrc::bench
