#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <json.hpp>

#include "wvae/wavelet.hpp"

namespace wvae {

inline constexpr double kBceClamp = 1e-7;
inline constexpr std::size_t kSsimWindow = 8;
inline constexpr double kSsimDynamicRange = 1.0;
inline constexpr double kNearZeroThreshold = 1e-3;

double mse(const Image& x, const Image& y);

// Mean of -[x log y + (1 - x) log(1 - y)] with y clamped to [1e-7, 1 - 1e-7].
double bce(const Image& x, const Image& y);

// Mean SSIM over all 8x8 windows (stride 1) of the channel-mean grayscale
// images, uniform weights, C1 = (0.01 DR)^2, C2 = (0.03 DR)^2 with DR = 1.
double ssim(const Image& x, const Image& y);

struct SparsityStats {
    double detail_l1_mean = 0.0;
    double near_zero_fraction = 0.0;
};

SparsityStats sparsity_stats(const Pyramid2D& pyramid, double threshold = kNearZeroThreshold);

// Detail energy over total energy of the L-level decomposition; 0 for an
// all-zero image.
double hf_energy_ratio(const Image& img, int levels);

struct MetricReport {
    double mse = 0.0;
    std::optional<double> bce;
    std::optional<double> ssim;  // absent for images smaller than the SSIM window
    double detail_l1_mean = 0.0;
    double detail_near_zero_fraction = 0.0;
    double hf_energy_ratio = 0.0;
};

// Compares reference x with reconstruction y. Sparsity statistics come from
// `latent` (e.g. encoder coefficients); hf_energy_ratio is measured on y.
MetricReport evaluate(const Image& x, const Image& y, const Pyramid2D& latent, int levels,
                      double threshold = kNearZeroThreshold);

// As above, using the decomposition of y as the latent.
MetricReport evaluate(const Image& x, const Image& y, int levels, double threshold = kNearZeroThreshold);

// Element-wise mean of several reports (optional fields kept only if present in all).
MetricReport average(std::span<const MetricReport> reports);

nlohmann::json to_json(const MetricReport& report);

}  // namespace wvae
