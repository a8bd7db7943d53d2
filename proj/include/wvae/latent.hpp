#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wvae/wavelet.hpp"

namespace wvae {

/// Diagonal Gaussian posterior parameterised by mean and log-variance.
struct GaussianPosterior {
    std::vector<double> mu;
    std::vector<double> logvar;
};

/// Noise scales for the wavelet reparameterisation, stored as log-scales so
/// that s = exp(rho) stays positive.
struct NoiseScale {
    double rho_approx = std::log(0.01);
    double rho_detail = std::log(0.01);
    bool learnable = true;

    double s_approx() const { return std::exp(rho_approx); }
    double s_detail() const { return std::exp(rho_detail); }

    static NoiseScale from_scale(double s, bool learnable) {
        return {std::log(s), std::log(s), learnable};
    }
};

struct LatentSample {
    std::vector<double> c_nn;
    std::vector<double> noise;
    std::vector<double> c_tilde;
    std::vector<std::uint8_t> detail_mask;
};

struct GaussianSample {
    std::vector<double> z;
    std::vector<double> noise;
};

enum class ReconstructionLoss { mse, bce };
enum class Objective { wvae, vae };

std::string to_string(ReconstructionLoss kind);
ReconstructionLoss reconstruction_loss_from_string(const std::string& name);

struct LossBreakdown {
    double reconstruction = 0.0;
    double regularizer = 0.0;  // L1 detail penalty (already scaled by lambda) or KL
    double total = 0.0;
    double lambda = 0.0;
    double beta = 0.0;
    Objective objective = Objective::wvae;
    ReconstructionLoss reconstruction_kind = ReconstructionLoss::mse;
};

GaussianSample reparameterize_gaussian(const GaussianPosterior& post, std::uint64_t seed);
GaussianSample reparameterize_gaussian(const GaussianPosterior& post, std::span<const double> noise);

LatentSample reparameterize_wavelet(std::span<const double> c_nn, std::span<const std::uint8_t> detail_mask,
                                    const NoiseScale& scales, std::uint64_t seed);
LatentSample reparameterize_wavelet(std::span<const double> c_nn, std::span<const std::uint8_t> detail_mask,
                                    const NoiseScale& scales, std::span<const double> noise);

// Closed form sum_i 0.5 (mu^2 + sigma^2 - log sigma^2 - 1).
double kl_gaussian_standard(const GaussianPosterior& post);

// sum_i [log(lambda/2) - lambda |c_i|]; lambda must be positive.
double laplace_log_prior(std::span<const double> c, double lambda);

// lambda * sum over detail entries of |c_i|.
double l1_detail_penalty(std::span<const double> c_nn, std::span<const std::uint8_t> detail_mask, double lambda);

double reconstruction_loss(const Image& x, const Image& x_hat, ReconstructionLoss kind);

LossBreakdown wvae_loss(const Image& x, const Image& x_hat, std::span<const double> c_nn,
                        std::span<const std::uint8_t> detail_mask, double lambda,
                        ReconstructionLoss kind = ReconstructionLoss::mse);

LossBreakdown vae_loss(const Image& x, const Image& x_hat, const GaussianPosterior& post, double beta,
                       ReconstructionLoss kind = ReconstructionLoss::mse);

// Derivatives of the loss terms, used by the backward pass.

// d(reconstruction)/d(x_hat). BCE clamps predictions and has zero slope where
// the clamp is active.
std::vector<double> reconstruction_loss_grad(const Image& x, const Image& x_hat, ReconstructionLoss kind);

// Adds lambda * sign(c_i) to grad for detail entries; sign(0) = 0.
void add_l1_detail_grad(std::span<const double> c_nn, std::span<const std::uint8_t> detail_mask, double lambda,
                        std::span<double> grad);

// Adds beta * dKL/dmu and beta * dKL/dlogvar.
void add_kl_grad(const GaussianPosterior& post, double beta, std::span<double> grad_mu,
                 std::span<double> grad_logvar);

}  // namespace wvae
