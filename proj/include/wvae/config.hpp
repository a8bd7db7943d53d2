#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wvae/dataset.hpp"
#include "wvae/latent.hpp"
#include "wvae/net.hpp"

namespace wvae {

struct NoiseMode {
    bool learnable = true;
    double value = 0.01;  // initial scale when learnable, frozen scale otherwise
};

NoiseMode parse_noise_mode(const std::string& text);  // "learnable" | "fixed:<v>"
std::string to_string(const NoiseMode& mode);

struct DataSpec {
    enum class Source { cifar10, synth } source = Source::synth;
    std::string path;                                // cifar10
    SynthKind synth_kind = SynthKind::gaussian_blobs;  // synth
};

DataSpec parse_data_spec(const std::string& text);  // "cifar10:<path>" | "synth:<kind>"
std::string to_string(const DataSpec& spec);

struct TrainConfig {
    ModelKind model = ModelKind::wvae;
    int levels = 2;
    double lambda = 1e-3;
    double beta = 1.0;
    double learning_rate = 1e-3;
    std::size_t batch = 32;
    std::size_t steps = 1000;
    std::uint64_t seed = 0;
    NoiseMode noise;
    DataSpec data;
    std::string out = "run";
    ReconstructionLoss reconstruction = ReconstructionLoss::mse;
    std::vector<std::size_t> hidden = {256, 256};
    std::size_t latent_dim = 64;
    std::size_t synth_count = 64;
    std::size_t synth_size = 16;
    std::size_t synth_channels = 1;
    int upscale = 1;        // bicubic factor applied to loaded CIFAR images (1, 2 or 4)
    std::size_t limit = 0;  // use only the first N dataset images; 0 = all
};

// Keys match the long CLI flag names without the leading dashes.
void apply_setting(TrainConfig& config, const std::string& key, const std::string& value);

// Flat "key = value" text; blank lines and '#' comments are ignored.
void apply_config_text(TrainConfig& config, const std::string& text);
void apply_config_file(TrainConfig& config, const std::string& path);

std::map<std::string, std::string> to_settings(const TrainConfig& config);
std::string to_config_text(const TrainConfig& config);

// Throws ConfigError on violated invariants.
void validate(const TrainConfig& config);

Dataset load_dataset(const TrainConfig& config);

}  // namespace wvae
