#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wvae/checkpoint.hpp"
#include "wvae/dataset.hpp"
#include "wvae/eval.hpp"

namespace wvae {

struct Heatmap {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> pixels;  // row-major, 8-bit
};

// Renders |c| of every coefficient into the usual wavelet mosaic: LL_L in
// the top-left corner, and for each level s the HL_s, LH_s, HH_s bands in
// the top-right, bottom-left and bottom-right quadrants of the
// (H / 2^(s-1)) x (W / 2^(s-1)) region. Channels are averaged; the largest
// magnitude maps to 255 (round half up). All-zero input renders all-zero.
Heatmap coefficient_heatmap(const Pyramid2D& pyramid);

// Encoder coefficients of `image` under a WVAE checkpoint, rendered as above.
Heatmap heatmap(const Network& net, const Image& image);
void save_heatmap(const std::string& path, const Heatmap& map);

struct Reconstruction {
    std::vector<Image> images;
    std::vector<MetricReport> reports;
    MetricReport mean;
};

// Runs the model forward on each image with noise seed derive_seed(seed, i).
Reconstruction reconstruct(const Network& net, const std::vector<Image>& images, std::uint64_t seed);

}  // namespace wvae
