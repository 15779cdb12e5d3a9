#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dropkan/data.hpp"
#include "dropkan/layer.hpp"
#include "dropkan/train.hpp"

namespace dropkan {

/// One drop setting under comparison: a name for output tables plus the
/// network drop regime.
struct DropSetting {
    std::string name;
    DropSpec spec;
};

/// The five benchmark settings: no_drop, dropout without/with scaling,
/// dropkan_ps (unscaled), dropkan_pa (scaled). `rates` has one entry per
/// maskable layer, broadcast from a single value.
std::vector<DropSetting> benchmark_settings(const std::vector<double>& rates);

/// The forward-pass study settings: no_drop, dropout with/without scaling,
/// dropkan_pa with/without scaling.
std::vector<DropSetting> forward_study_settings(const std::vector<double>& rates);

struct ExperimentConfig {
    std::string dataset_path;
    std::vector<std::size_t> architecture;  // empty = [n_in, 10, n_classes]
    std::vector<DropSetting> settings;
    std::size_t repeats = 5;
    std::size_t steps = 100;
    std::size_t eval_every = 10;
    std::size_t passes = 5;  // forward passes per setting per eval point
    double rate = 0.5;
    std::uint64_t seed = 0;
    TrainConfig train;  // steps/eval_every above override the train fields where relevant
    GridSpec grid;
    NetworkInit init;

    void validate(std::size_t n_layers) const;
};

/// One measurement row of the forward-pass study.
struct Exp1Row {
    std::size_t step = 0;
    std::string setting;
    std::size_t repeat = 0;
    std::size_t pass = 0;
    double mean_output = 0.0;
};

struct Exp1Result {
    std::vector<Exp1Row> rows;
    /// Stable schema: header `step,setting,repeat,pass,mean_output`.
    std::string to_csv() const;
};

/// Forward-pass expectation study: train a no-drop network, and at every
/// eval point run `passes` training-mode forward passes over the validation
/// split under each setting, recording the mean value of output neuron 0.
/// The whole protocol runs `repeats` times. Deterministic in config.seed.
Exp1Result run_exp1(const ExperimentConfig& config, const DatasetSplits& data);

struct SearchSpec {
    std::size_t evaluations = 50;
    double rate_lo = 0.05;
    double rate_hi = 0.5;

    void validate() const;
};

struct SearchEval {
    std::size_t index = 0;
    std::vector<double> rates;
    double valid_accuracy = 0.0;
    bool failed = false;  // training aborted (non-finite loss)
};

struct Exp2SettingResult {
    std::string setting;
    std::vector<double> best_rates;
    double search_valid_accuracy = 0.0;
    std::vector<double> test_accuracies;   // one per final run
    std::vector<double> valid_accuracies;  // one per final run
    double test_mean = 0.0;
    double test_std = 0.0;  // sample standard deviation over the final runs
    double valid_mean = 0.0;
    std::vector<SearchEval> evaluations;
    std::size_t failed_evaluations = 0;
};

struct Exp2Result {
    std::vector<Exp2SettingResult> settings;
    std::string to_csv() const;         // exp2_results.csv
    std::string search_to_csv() const;  // per-evaluation search log
};

/// Classification benchmark: for every setting, random-search the drop
/// rates (`evaluations` samples, uniform per maskable layer), pick the best
/// by validation accuracy, retrain `final_runs` times with fresh seeds and
/// report test accuracy mean +- std. The no-drop setting degenerates to a
/// single evaluation. Runs execute in a worker pool; aggregation is sorted,
/// so results do not depend on scheduling.
Exp2Result run_exp2(const ExperimentConfig& config, const SearchSpec& search,
                    const DatasetSplits& data, std::size_t final_runs = 5,
                    std::size_t n_workers = 0);

/// Run `fn(i)` for i in [0, n) on up to `n_workers` threads (0 = hardware
/// concurrency). Exceptions propagate after all workers join.
void parallel_for(std::size_t n, std::size_t n_workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace dropkan
