#include "wvae/latent.hpp"

#include <algorithm>
#include <string>

#include "wvae/errors.hpp"
#include "wvae/eval.hpp"
#include "wvae/random.hpp"

namespace wvae {

namespace {

void check_posterior(const GaussianPosterior& post) {
    if (post.mu.size() != post.logvar.size()) {
        throw ShapeError("posterior mu has " + std::to_string(post.mu.size()) + " entries, logvar has " +
                         std::to_string(post.logvar.size()));
    }
}

void check_mask(std::size_t values, std::size_t mask) {
    if (values != mask) {
        throw ShapeError("detail mask has " + std::to_string(mask) + " entries for " + std::to_string(values) +
                         " coefficients");
    }
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::string to_string(ReconstructionLoss kind) { return kind == ReconstructionLoss::mse ? "mse" : "bce"; }

ReconstructionLoss reconstruction_loss_from_string(const std::string& name) {
    if (name == "mse") return ReconstructionLoss::mse;
    if (name == "bce") return ReconstructionLoss::bce;
    throw ConfigError("unknown reconstruction loss '" + name + "' (expected mse or bce)");
}

GaussianSample reparameterize_gaussian(const GaussianPosterior& post, std::span<const double> noise) {
    check_posterior(post);
    if (noise.size() != post.mu.size()) throw ShapeError("noise length does not match posterior dimension");
    GaussianSample out{std::vector<double>(post.mu.size()), {noise.begin(), noise.end()}};
    for (std::size_t i = 0; i < post.mu.size(); ++i) {
        out.z[i] = post.mu[i] + std::exp(0.5 * post.logvar[i]) * noise[i];
    }
    return out;
}

GaussianSample reparameterize_gaussian(const GaussianPosterior& post, std::uint64_t seed) {
    check_posterior(post);
    std::vector<double> noise(post.mu.size());
    Rng rng(seed);
    rng.fill_normal(noise);
    return reparameterize_gaussian(post, noise);
}

LatentSample reparameterize_wavelet(std::span<const double> c_nn, std::span<const std::uint8_t> detail_mask,
                                    const NoiseScale& scales, std::span<const double> noise) {
    check_mask(c_nn.size(), detail_mask.size());
    if (noise.size() != c_nn.size()) throw ShapeError("noise length does not match coefficient count");
    LatentSample out{{c_nn.begin(), c_nn.end()},
                     {noise.begin(), noise.end()},
                     std::vector<double>(c_nn.size()),
                     {detail_mask.begin(), detail_mask.end()}};
    const double s_approx = scales.s_approx();
    const double s_detail = scales.s_detail();
    for (std::size_t i = 0; i < c_nn.size(); ++i) {
        out.c_tilde[i] = c_nn[i] + (detail_mask[i] ? s_detail : s_approx) * noise[i];
    }
    return out;
}

LatentSample reparameterize_wavelet(std::span<const double> c_nn, std::span<const std::uint8_t> detail_mask,
                                    const NoiseScale& scales, std::uint64_t seed) {
    std::vector<double> noise(c_nn.size());
    Rng rng(seed);
    rng.fill_normal(noise);
    return reparameterize_wavelet(c_nn, detail_mask, scales, noise);
}

double kl_gaussian_standard(const GaussianPosterior& post) {
    check_posterior(post);
    double kl = 0.0;
    for (std::size_t i = 0; i < post.mu.size(); ++i) {
        // expm1(lv) - lv keeps the sigma^2 - log sigma^2 - 1 part exact near lv = 0.
        const double lv = post.logvar[i];
        kl += 0.5 * (post.mu[i] * post.mu[i] + (std::expm1(lv) - lv));
    }
    return kl;
}

double laplace_log_prior(std::span<const double> c, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("Laplace rate lambda must be positive");
    const double log_norm = std::log(lambda / 2.0);
    double total = 0.0;
    for (double v : c) total += log_norm - lambda * std::abs(v);
    return total;
}

double l1_detail_penalty(std::span<const double> c_nn, std::span<const std::uint8_t> detail_mask, double lambda) {
    check_mask(c_nn.size(), detail_mask.size());
    if (lambda < 0.0) throw DomainError("sparsity weight lambda must be non-negative");
    double sum = 0.0;
    for (std::size_t i = 0; i < c_nn.size(); ++i) {
        if (detail_mask[i]) sum += std::abs(c_nn[i]);
    }
    return lambda * sum;
}

double reconstruction_loss(const Image& x, const Image& x_hat, ReconstructionLoss kind) {
    return kind == ReconstructionLoss::mse ? mse(x, x_hat) : bce(x, x_hat);
}

LossBreakdown wvae_loss(const Image& x, const Image& x_hat, std::span<const double> c_nn,
                        std::span<const std::uint8_t> detail_mask, double lambda, ReconstructionLoss kind) {
    LossBreakdown loss;
    loss.objective = Objective::wvae;
    loss.reconstruction_kind = kind;
    loss.lambda = lambda;
    loss.reconstruction = reconstruction_loss(x, x_hat, kind);
    loss.regularizer = l1_detail_penalty(c_nn, detail_mask, lambda);
    loss.total = loss.reconstruction + loss.regularizer;
    return loss;
}

LossBreakdown vae_loss(const Image& x, const Image& x_hat, const GaussianPosterior& post, double beta,
                       ReconstructionLoss kind) {
    if (beta < 0.0) throw DomainError("KL weight beta must be non-negative");
    LossBreakdown loss;
    loss.objective = Objective::vae;
    loss.reconstruction_kind = kind;
    loss.beta = beta;
    loss.reconstruction = reconstruction_loss(x, x_hat, kind);
    loss.regularizer = kl_gaussian_standard(post);
    loss.total = loss.reconstruction + beta * loss.regularizer;
    return loss;
}

std::vector<double> reconstruction_loss_grad(const Image& x, const Image& x_hat, ReconstructionLoss kind) {
    if (!x.same_shape(x_hat)) throw ShapeError("reconstruction and target differ in shape");
    const std::size_t n = x.size();
    std::vector<double> grad(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    if (kind == ReconstructionLoss::mse) {
        for (std::size_t i = 0; i < n; ++i) grad[i] = 2.0 * (x_hat.values[i] - x.values[i]) * inv_n;
        return grad;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double y = x_hat.values[i];
        if (y <= kBceClamp || y >= 1.0 - kBceClamp) {
            grad[i] = 0.0;
            continue;
        }
        const double t = x.values[i];
        grad[i] = (-t / y + (1.0 - t) / (1.0 - y)) * inv_n;
    }
    return grad;
}

void add_l1_detail_grad(std::span<const double> c_nn, std::span<const std::uint8_t> detail_mask, double lambda,
                        std::span<double> grad) {
    check_mask(c_nn.size(), detail_mask.size());
    check_mask(c_nn.size(), grad.size());
    for (std::size_t i = 0; i < c_nn.size(); ++i) {
        if (detail_mask[i]) grad[i] += lambda * sign(c_nn[i]);
    }
}

void add_kl_grad(const GaussianPosterior& post, double beta, std::span<double> grad_mu,
                 std::span<double> grad_logvar) {
    check_posterior(post);
    if (grad_mu.size() != post.mu.size() || grad_logvar.size() != post.mu.size()) {
        throw ShapeError("KL gradient buffers do not match posterior dimension");
    }
    for (std::size_t i = 0; i < post.mu.size(); ++i) {
        grad_mu[i] += beta * post.mu[i];
        grad_logvar[i] += beta * 0.5 * std::expm1(post.logvar[i]);
    }
}

}  // namespace wvae
