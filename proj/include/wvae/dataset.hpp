#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wvae/wavelet.hpp"

namespace wvae {

struct Dataset {
    std::vector<Image> images;
    std::vector<int> labels;  // empty when the source has no labels
    std::string source;

    std::size_t size() const { return images.size(); }
    bool empty() const { return images.empty(); }
};

inline constexpr std::size_t kCifarSide = 32;
inline constexpr std::size_t kCifarPixels = kCifarSide * kCifarSide * 3;
inline constexpr std::size_t kCifarRecord = 1 + kCifarPixels;

// Parses CIFAR-10 binary batches: 3073-byte records of one label byte and
// three 1024-byte channel planes. `path` may be a single batch file or a
// directory, in which case every *.bin file is read in name order.
Dataset load_cifar10(const std::string& path);
Dataset parse_cifar10(const std::vector<std::uint8_t>& bytes, const std::string& source = "memory");

enum class SynthKind { constant, checkerboard, gaussian_blobs, edges };

std::string to_string(SynthKind kind);
SynthKind synth_kind_from_string(const std::string& name);

// Deterministic synthetic images in [0,1]; `size` must be a power of two.
Dataset synth_dataset(SynthKind kind, std::size_t n, std::size_t size, std::uint64_t seed,
                      std::size_t channels = 1);

// Keys cubic convolution (a = -0.5) with clamped borders; factor 2 or 4.
Image upscale_bicubic(const Image& img, int factor);

}  // namespace wvae
