#include "wvae/export.hpp"

#include <algorithm>
#include <cmath>

#include "wvae/errors.hpp"
#include "wvae/image_io.hpp"
#include "wvae/random.hpp"

namespace wvae {

namespace {

void place(std::vector<double>& mosaic, std::size_t mosaic_width, const Image& band, std::size_t top,
           std::size_t left) {
    const double inv = 1.0 / static_cast<double>(band.channels);
    for (std::size_t y = 0; y < band.height; ++y) {
        for (std::size_t x = 0; x < band.width; ++x) {
            double m = 0.0;
            for (std::size_t c = 0; c < band.channels; ++c) m += std::abs(band.at(c, y, x));
            mosaic[(top + y) * mosaic_width + left + x] = m * inv;
        }
    }
}

}  // namespace

Heatmap coefficient_heatmap(const Pyramid2D& p) {
    const auto layout = make_layout(p.height, p.width, p.channels, p.levels);
    std::vector<double> magnitude(p.height * p.width, 0.0);
    for (const auto& slot : layout.bands) {
        const std::size_t h = slot.height, w = slot.width;
        switch (slot.band) {
            case Band::LL: place(magnitude, p.width, p.approx, 0, 0); break;
            case Band::HL: place(magnitude, p.width, p.detail(slot.level).hl, 0, w); break;
            case Band::LH: place(magnitude, p.width, p.detail(slot.level).lh, h, 0); break;
            case Band::HH: place(magnitude, p.width, p.detail(slot.level).hh, h, w); break;
        }
    }
    Heatmap map{p.height, p.width, std::vector<std::uint8_t>(magnitude.size(), 0)};
    const double peak = *std::max_element(magnitude.begin(), magnitude.end());
    if (peak > 0.0) {
        for (std::size_t i = 0; i < magnitude.size(); ++i) {
            map.pixels[i] = static_cast<std::uint8_t>(std::floor(magnitude[i] / peak * 255.0 + 0.5));
        }
    }
    return map;
}

Heatmap heatmap(const Network& net, const Image& image) {
    if (net.arch.kind != ModelKind::wvae) throw UsageError("coefficient heatmaps need a wvae checkpoint");
    return coefficient_heatmap(pyramid_unflatten(encode(net, image), net.layout));
}

void save_heatmap(const std::string& path, const Heatmap& map) { save_pgm_bytes(path, map.height, map.width, map.pixels); }

Reconstruction reconstruct(const Network& net, const std::vector<Image>& images, std::uint64_t seed) {
    Reconstruction out;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto& x = images[i];
        const std::uint64_t s = derive_seed(seed, i);
        if (net.arch.kind == ModelKind::wvae) {
            const Tape tape = forward_wvae(net, x, s);
            out.reports.push_back(evaluate(x, tape.x_hat, pyramid_unflatten(tape.latent.c_nn, net.layout), net.arch.levels));
            out.images.push_back(tape.x_hat);
        } else {
            const Tape tape = forward_vae_baseline(net, x, s);
            out.reports.push_back(evaluate(x, tape.x_hat, net.arch.levels));
            out.images.push_back(tape.x_hat);
        }
    }
    out.mean = average(out.reports);
    return out;
}

}  // namespace wvae
