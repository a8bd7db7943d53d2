#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace wvae {

using Signal = std::vector<double>;

/// Multi-channel image stored as channel planes, each plane row-major.
struct Image {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<double> values;

    Image() = default;
    Image(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
        : height(h), width(w), channels(c), values(h * w * c, fill) {}

    std::size_t size() const { return values.size(); }
    std::size_t plane_size() const { return height * width; }

    double& at(std::size_t c, std::size_t y, std::size_t x) {
        return values[(c * height + y) * width + x];
    }
    double at(std::size_t c, std::size_t y, std::size_t x) const {
        return values[(c * height + y) * width + x];
    }

    std::span<double> plane(std::size_t c) {
        return {values.data() + c * plane_size(), plane_size()};
    }
    std::span<const double> plane(std::size_t c) const {
        return {values.data() + c * plane_size(), plane_size()};
    }

    bool same_shape(const Image& other) const {
        return height == other.height && width == other.width && channels == other.channels;
    }
};

/// Analysis taps (h, g) and synthesis taps (time-reversed analysis taps).
struct FilterPair {
    std::array<double, 2> low;
    std::array<double, 2> high;
    std::array<double, 2> synth_low;
    std::array<double, 2> synth_high;
};

FilterPair haar_filters();

struct Pyramid1D {
    int levels = 0;
    Signal approx;
    // details[s - 1] holds the level-s detail coefficients (finest first).
    std::vector<Signal> details;

    const Signal& detail(int level) const { return details.at(static_cast<std::size_t>(level - 1)); }
    std::size_t coefficient_count() const;
};

enum class Band : std::uint8_t { LL, HL, LH, HH };

std::string to_string(Band band);
Band band_from_string(const std::string& name);

struct Subbands {
    Image ll;
    Image hl;  // g along rows, then h along columns
    Image lh;  // h along rows, then g along columns
    Image hh;
};

struct DetailBands {
    Image hl;
    Image lh;
    Image hh;

    const Image& get(Band band) const;
    Image& get(Band band);
};

struct Pyramid2D {
    int levels = 0;
    std::size_t height = 0;  // dimensions of the analysed image
    std::size_t width = 0;
    std::size_t channels = 0;
    Image approx;  // LL at the coarsest level
    // details[s - 1] holds the level-s bands (finest first).
    std::vector<DetailBands> details;

    const DetailBands& detail(int level) const { return details.at(static_cast<std::size_t>(level - 1)); }
    DetailBands& detail(int level) { return details.at(static_cast<std::size_t>(level - 1)); }
    std::size_t coefficient_count() const;
};

// 1D transforms (pairwise Haar form, no boundary extension).
struct Level1D {
    Signal approx;
    Signal detail;
};

Level1D dwt1d_level(std::span<const double> x);
Signal idwt1d_level(std::span<const double> approx, std::span<const double> detail);
Pyramid1D dwt1d_multi(std::span<const double> x, int levels);
Signal idwt1d_multi(const Pyramid1D& pyramid);

// 2D separable transforms, applied independently per channel.
Subbands dwt2d_level(const Image& img);
Image idwt2d_level(const Image& ll, const Image& hl, const Image& lh, const Image& hh);
Pyramid2D dwt2d_multi(const Image& img, int levels);
Image idwt2d_multi(const Pyramid2D& pyramid);

/// Position of one band inside a flattened coefficient vector. Within a band
/// the values are channel-major, then row-major.
struct BandSlot {
    int level = 0;
    Band band = Band::LL;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t offset = 0;

    bool operator==(const BandSlot&) const = default;
};

/// Flattened coefficient layout: LL_L first, then levels L..1, each as HL, LH, HH.
struct PyramidLayout {
    int levels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<BandSlot> bands;

    std::size_t total() const { return height * width * channels; }
    std::size_t band_size(const BandSlot& slot) const { return slot.height * slot.width * channels; }

    // 1 for detail coefficients, 0 for the approximation band.
    std::vector<std::uint8_t> detail_mask() const;

    bool operator==(const PyramidLayout&) const = default;
};

// Throws ShapeError unless both dimensions are divisible by 2^levels.
PyramidLayout make_layout(std::size_t height, std::size_t width, std::size_t channels, int levels);

struct FlatPyramid {
    std::vector<double> values;
    PyramidLayout layout;
};

FlatPyramid pyramid_flatten(const Pyramid2D& pyramid);
Pyramid2D pyramid_unflatten(std::span<const double> values, const PyramidLayout& layout);

// Coefficient dump: one JSON header line (magic "WVP1") then little-endian doubles.
void write_pyramid_dump(std::ostream& out, const Pyramid2D& pyramid);
Pyramid2D read_pyramid_dump(std::istream& in);
void save_pyramid_dump(const std::string& path, const Pyramid2D& pyramid);
Pyramid2D load_pyramid_dump(const std::string& path);

}  // namespace wvae
