#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wvae/wavelet.hpp"

namespace wvae {

// Quantises [0,1] intensities to 8 bits: clamp, then round half up.
std::uint8_t to_byte(double v);

// Binary PGM (P5) for 1 channel, PPM (P6) for 3 channels, maxval 255.
void write_pnm(std::ostream& out, const Image& img);
void save_pnm(const std::string& path, const Image& img);

// Reads P5/P6 with maxval <= 255; values scaled to [0,1].
Image read_pnm(std::istream& in);
Image load_pnm(const std::string& path);

void save_pgm_bytes(const std::string& path, std::size_t height, std::size_t width,
                    const std::vector<std::uint8_t>& pixels);

}  // namespace wvae
