#include "wvae/eval.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wvae/errors.hpp"

namespace wvae {

namespace {

void check_same_shape(const Image& x, const Image& y, const char* what) {
    if (!x.same_shape(y)) {
        throw ShapeError(std::string(what) + ": images differ in shape (" + std::to_string(x.height) + "x" +
                         std::to_string(x.width) + "x" + std::to_string(x.channels) + " vs " +
                         std::to_string(y.height) + "x" + std::to_string(y.width) + "x" +
                         std::to_string(y.channels) + ")");
    }
    if (x.size() == 0) throw ShapeError(std::string(what) + ": empty image");
}

std::vector<double> grayscale(const Image& img) {
    std::vector<double> gray(img.plane_size(), 0.0);
    for (std::size_t c = 0; c < img.channels; ++c) {
        const auto plane = img.plane(c);
        for (std::size_t i = 0; i < gray.size(); ++i) gray[i] += plane[i];
    }
    const double inv = 1.0 / static_cast<double>(img.channels);
    for (auto& v : gray) v *= inv;
    return gray;
}

}  // namespace

double mse(const Image& x, const Image& y) {
    check_same_shape(x, y, "mse");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x.values[i] - y.values[i];
        sum += d * d;
    }
    return sum / static_cast<double>(x.size());
}

double bce(const Image& x, const Image& y) {
    check_same_shape(x, y, "bce");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double p = std::clamp(y.values[i], kBceClamp, 1.0 - kBceClamp);
        const double t = x.values[i];
        sum -= t * std::log(p) + (1.0 - t) * std::log1p(-p);
    }
    return sum / static_cast<double>(x.size());
}

double ssim(const Image& x, const Image& y) {
    check_same_shape(x, y, "ssim");
    const std::size_t win = kSsimWindow;
    if (x.height < win || x.width < win) {
        throw ShapeError("ssim needs images of at least " + std::to_string(win) + "x" + std::to_string(win));
    }
    const auto gx = grayscale(x);
    const auto gy = grayscale(y);
    const double c1 = (0.01 * kSsimDynamicRange) * (0.01 * kSsimDynamicRange);
    const double c2 = (0.03 * kSsimDynamicRange) * (0.03 * kSsimDynamicRange);
    const double n = static_cast<double>(win * win);
    const std::size_t w = x.width;

    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t top = 0; top + win <= x.height; ++top) {
        for (std::size_t left = 0; left + win <= x.width; ++left) {
            double sx = 0, sy = 0;
            for (std::size_t r = top; r < top + win; ++r) {
                for (std::size_t c = left; c < left + win; ++c) {
                    sx += gx[r * w + c];
                    sy += gy[r * w + c];
                }
            }
            const double mx = sx / n, my = sy / n;
            double vx = 0, vy = 0, cov = 0;
            for (std::size_t r = top; r < top + win; ++r) {
                for (std::size_t c = left; c < left + win; ++c) {
                    const double dx = gx[r * w + c] - mx;
                    const double dy = gy[r * w + c] - my;
                    vx += dx * dx;
                    vy += dy * dy;
                    cov += dx * dy;
                }
            }
            vx /= n;
            vy /= n;
            cov /= n;
            total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

SparsityStats sparsity_stats(const Pyramid2D& pyramid, double threshold) {
    if (!(threshold > 0.0)) throw DomainError("near-zero threshold must be positive");
    double sum = 0.0;
    std::size_t count = 0, near_zero = 0;
    for (const auto& level : pyramid.details) {
        for (const Image* band : {&level.hl, &level.lh, &level.hh}) {
            for (double v : band->values) {
                const double a = std::abs(v);
                sum += a;
                if (a < threshold) ++near_zero;
                ++count;
            }
        }
    }
    if (count == 0) return {0.0, 1.0};
    return {sum / static_cast<double>(count), static_cast<double>(near_zero) / static_cast<double>(count)};
}

double hf_energy_ratio(const Image& img, int levels) {
    const auto pyramid = dwt2d_multi(img, levels);
    double approx = 0.0, detail = 0.0;
    for (double v : pyramid.approx.values) approx += v * v;
    for (const auto& level : pyramid.details) {
        for (const Image* band : {&level.hl, &level.lh, &level.hh}) {
            for (double v : band->values) detail += v * v;
        }
    }
    const double total = approx + detail;
    return total > 0.0 ? detail / total : 0.0;
}

MetricReport evaluate(const Image& x, const Image& y, const Pyramid2D& latent, int levels, double threshold) {
    MetricReport r;
    r.mse = mse(x, y);
    r.bce = bce(x, y);
    if (x.height >= kSsimWindow && x.width >= kSsimWindow) r.ssim = ssim(x, y);
    const auto stats = sparsity_stats(latent, threshold);
    r.detail_l1_mean = stats.detail_l1_mean;
    r.detail_near_zero_fraction = stats.near_zero_fraction;
    r.hf_energy_ratio = hf_energy_ratio(y, levels);
    return r;
}

MetricReport evaluate(const Image& x, const Image& y, int levels, double threshold) {
    return evaluate(x, y, dwt2d_multi(y, levels), levels, threshold);
}

MetricReport average(std::span<const MetricReport> reports) {
    MetricReport mean;
    if (reports.empty()) return mean;
    bool all_bce = true, all_ssim = true;
    double bce_sum = 0.0, ssim_sum = 0.0;
    for (const auto& r : reports) {
        mean.mse += r.mse;
        if (r.ssim) {
            ssim_sum += *r.ssim;
        } else {
            all_ssim = false;
        }
        mean.detail_l1_mean += r.detail_l1_mean;
        mean.detail_near_zero_fraction += r.detail_near_zero_fraction;
        mean.hf_energy_ratio += r.hf_energy_ratio;
        if (r.bce) {
            bce_sum += *r.bce;
        } else {
            all_bce = false;
        }
    }
    const double n = static_cast<double>(reports.size());
    mean.mse /= n;
    mean.detail_l1_mean /= n;
    mean.detail_near_zero_fraction /= n;
    mean.hf_energy_ratio /= n;
    if (all_bce) mean.bce = bce_sum / n;
    if (all_ssim) mean.ssim = ssim_sum / n;
    return mean;
}

nlohmann::json to_json(const MetricReport& report) {
    nlohmann::json j = {{"mse", report.mse},
                        {"detail_l1_mean", report.detail_l1_mean},
                        {"detail_near_zero_fraction", report.detail_near_zero_fraction},
                        {"hf_energy_ratio", report.hf_energy_ratio}};
    j["bce"] = report.bce ? nlohmann::json(*report.bce) : nlohmann::json(nullptr);
    j["ssim"] = report.ssim ? nlohmann::json(*report.ssim) : nlohmann::json(nullptr);
    return j;
}

}  // namespace wvae
