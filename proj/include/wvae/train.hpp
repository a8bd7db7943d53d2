#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "wvae/config.hpp"
#include "wvae/dataset.hpp"
#include "wvae/eval.hpp"
#include "wvae/net.hpp"

namespace wvae {

struct StepRecord {
    std::size_t step = 0;
    double reconstruction = 0.0;
    double regularizer = 0.0;
    double total = 0.0;
    double s_approx = 0.0;  // after this step's update
    double s_detail = 0.0;
};

struct EpochRecord {
    std::size_t epoch = 0;
    std::size_t first_step = 0;  // first step that draws from this permutation
    std::vector<std::size_t> order;
};

/// Mean loss and metrics of a trained network over a dataset.
struct Evaluation {
    double reconstruction = 0.0;
    double regularizer = 0.0;
    double total = 0.0;
    MetricReport metrics;
};

struct RunLog {
    std::vector<StepRecord> steps;
    std::vector<EpochRecord> epochs;
    Evaluation final_eval;
};

// One JSON object per line: epoch permutations, step records, final report.
void write_runlog(std::ostream& out, const RunLog& log);
void save_runlog(const std::string& path, const RunLog& log);

struct TrainResult {
    Network network;
    OptimizerState optimizer;
    RunLog log;
};

Architecture architecture_for(const TrainConfig& config, const Dataset& data);

// Mean loss/metrics of `net` over every image, one noise seed per image
// derived from `seed`.
Evaluation evaluate_dataset(const Network& net, const Dataset& data, const LossSettings& settings,
                            std::uint64_t seed);

// Seeded minibatch Adam loop; throws NumericalError if any loss or parameter
// becomes non-finite.
TrainResult train(const TrainConfig& config, const Dataset& data);
TrainResult train(const TrainConfig& config);

// Trains and writes runlog.jsonl, checkpoint.wvn and config.txt to config.out.
TrainResult train_and_save(const TrainConfig& config, const Dataset& data);

struct AblationRun {
    NoiseMode noise;
    double final_mse = 0.0;
    double final_total = 0.0;
    double s_approx = 0.0;
    double s_detail = 0.0;
};

struct AblationReport {
    AblationRun fixed;
    AblationRun learnable;
    // (fixed MSE - learnable MSE) / learnable MSE
    double relative_mse_difference = 0.0;
};

inline constexpr double kAblationNoiseScale = 0.01;

// Trains the fixed-scale and learnable-scale variants on identical seed and
// data; writes each run under <out>/fixed and <out>/learnable when `save`.
AblationReport ablate_noise_scale(const TrainConfig& base, const Dataset& data, bool save = false);
nlohmann::json to_json(const AblationReport& report);

}  // namespace wvae
