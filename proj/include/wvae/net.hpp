#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wvae/latent.hpp"
#include "wvae/wavelet.hpp"

namespace wvae {

enum class ModelKind { wvae, vae };
enum class Activation { identity, tanh, sigmoid };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);
std::string to_string(Activation act);
Activation activation_from_string(const std::string& name);

/// Shape of the model. The WVAE encoder maps the flattened image to one
/// output per wavelet coefficient; the baseline maps it to (mu, logvar) and
/// decodes through a mirrored stack ending in a sigmoid.
struct Architecture {
    ModelKind kind = ModelKind::wvae;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 1;
    int levels = 2;
    std::vector<std::size_t> hidden = {256, 256};
    std::size_t latent_dim = 64;

    std::size_t input_dim() const { return height * width * channels; }
    std::size_t head_dim() const { return kind == ModelKind::wvae ? input_dim() : 2 * latent_dim; }

    bool operator==(const Architecture&) const = default;
};

// Throws ShapeError/DomainError for unusable dimensions.
void validate(const Architecture& arch);

struct AffineLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    Activation activation = Activation::identity;
    std::vector<double> weight;  // out x in, row-major
    std::vector<double> bias;
};

struct Network {
    Architecture arch;
    std::vector<AffineLayer> encoder;
    std::vector<AffineLayer> decoder;  // empty for the WVAE (its decoder is the IDWT)
    NoiseScale noise;
    PyramidLayout layout;              // coefficient layout of the WVAE head
    std::uint64_t version = 0;         // bumped whenever parameters change
};

// Uniform weights in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero biases, s = 0.01.
Network init_network(const Architecture& arch, std::uint64_t seed);

struct ParamBlock {
    std::string name;
    std::span<double> values;
    bool noise_scale = false;
};

// Every parameter tensor in a fixed order: encoder layers (weight, bias),
// decoder layers, then rho_approx and rho_detail.
std::vector<ParamBlock> parameter_blocks(Network& net);
std::size_t parameter_count(const Network& net);

struct LayerGrad {
    std::vector<double> weight;
    std::vector<double> bias;
};

struct Gradients {
    std::vector<LayerGrad> encoder;
    std::vector<LayerGrad> decoder;
    double rho_approx = 0.0;
    double rho_detail = 0.0;

    static Gradients zeros_like(const Network& net);
    // Same order as parameter_blocks().
    std::vector<std::span<double>> blocks();
    std::vector<std::span<const double>> blocks() const;
    bool all_finite() const;
};

/// Intermediates of one forward pass, sufficient for the backward pass.
struct Tape {
    const Network* network = nullptr;
    std::uint64_t network_version = 0;
    ModelKind kind = ModelKind::wvae;
    bool encoder_bypassed = false;

    Image x;
    // encoder_acts[0] is the input, encoder_acts[k + 1] the output of layer k.
    std::vector<std::vector<double>> encoder_acts;
    std::vector<std::vector<double>> decoder_acts;

    LatentSample latent;          // WVAE
    GaussianPosterior posterior;  // baseline VAE
    GaussianSample z;

    Image x_hat;
};

// Deterministic encoder output c_NN (WVAE) or concatenated (mu, logvar).
std::vector<double> encode(const Network& net, const Image& x);

Tape forward_wvae(const Network& net, const Image& x, std::uint64_t seed);

// Skips the encoder and feeds the given coefficients to the reparameterisation
// and IDWT stages; backward then stops at c_NN.
Tape forward_wvae_from_coefficients(const Network& net, const Image& x, std::span<const double> c_nn,
                                    std::uint64_t seed);

Tape forward_vae_baseline(const Network& net, const Image& x, std::uint64_t seed);

struct LossSettings {
    double lambda = 1e-3;
    double beta = 1.0;
    ReconstructionLoss reconstruction = ReconstructionLoss::mse;
};

// Loss of a recorded forward pass (WVAE or baseline objective by tape kind).
LossBreakdown compute_loss(const Tape& tape, const LossSettings& settings);

// Adds weight * d(loss.total)/d(parameters) into `grads`. Throws UsageError if
// the tape no longer matches its network.
void backward(const Tape& tape, const LossBreakdown& loss, Gradients& grads, double weight = 1.0);
Gradients backward(const Tape& tape, const LossBreakdown& loss);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct OptimizerState {
    AdamConfig config;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;

    static OptimizerState for_network(const Network& net, const AdamConfig& config);
};

// One bias-corrected Adam update. Noise-scale blocks are left untouched when
// the network's noise scale is not learnable.
void adam_step(Network& net, const Gradients& grads, OptimizerState& state);

}  // namespace wvae
