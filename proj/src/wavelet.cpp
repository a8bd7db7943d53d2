#include "wvae/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <utility>

#include "wvae/binary_io.hpp"
#include "wvae/errors.hpp"

namespace wvae {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

void check_levels(int levels) {
    if (levels < 1) throw DomainError("decomposition levels must be >= 1, got " + std::to_string(levels));
}

bool divisible_by_pow2(std::size_t n, int levels) {
    return n > 0 && levels < 63 && n % (std::size_t{1} << levels) == 0;
}

// One analysis step over a strided sequence: pairs (x[2k], x[2k+1]).
void analyse(const double* in, std::size_t stride, std::size_t half, double* lo, double* hi,
             std::size_t out_stride) {
    for (std::size_t k = 0; k < half; ++k) {
        const double a = in[(2 * k) * stride];
        const double b = in[(2 * k + 1) * stride];
        lo[k * out_stride] = (a + b) * kInvSqrt2;
        hi[k * out_stride] = (a - b) * kInvSqrt2;
    }
}

void synthesise(const double* lo, const double* hi, std::size_t in_stride, std::size_t half, double* out,
                std::size_t stride) {
    for (std::size_t k = 0; k < half; ++k) {
        const double a = lo[k * in_stride];
        const double d = hi[k * in_stride];
        out[(2 * k) * stride] = (a + d) * kInvSqrt2;
        out[(2 * k + 1) * stride] = (a - d) * kInvSqrt2;
    }
}

}  // namespace

FilterPair haar_filters() {
    FilterPair f;
    f.low = {kInvSqrt2, kInvSqrt2};
    f.high = {kInvSqrt2, -kInvSqrt2};
    // Time reversal h~[n] = h[-n], stored with index 0 at n = 0, 1 at n = -1.
    f.synth_low = {f.low[0], f.low[1]};
    f.synth_high = {f.high[0], f.high[1]};
    return f;
}

std::string to_string(Band band) {
    switch (band) {
        case Band::LL: return "LL";
        case Band::HL: return "HL";
        case Band::LH: return "LH";
        case Band::HH: return "HH";
    }
    return "?";
}

Band band_from_string(const std::string& name) {
    if (name == "LL") return Band::LL;
    if (name == "HL") return Band::HL;
    if (name == "LH") return Band::LH;
    if (name == "HH") return Band::HH;
    throw FormatError("unknown band name '" + name + "'");
}

const Image& DetailBands::get(Band band) const {
    switch (band) {
        case Band::HL: return hl;
        case Band::LH: return lh;
        case Band::HH: return hh;
        default: throw UsageError("detail bands hold HL, LH and HH only");
    }
}

Image& DetailBands::get(Band band) {
    return const_cast<Image&>(std::as_const(*this).get(band));
}

std::size_t Pyramid1D::coefficient_count() const {
    std::size_t n = approx.size();
    for (const auto& d : details) n += d.size();
    return n;
}

std::size_t Pyramid2D::coefficient_count() const {
    std::size_t n = approx.size();
    for (const auto& d : details) n += d.hl.size() + d.lh.size() + d.hh.size();
    return n;
}

// ---------------------------------------------------------------------------
// 1D

Level1D dwt1d_level(std::span<const double> x) {
    if (x.empty() || x.size() % 2 != 0) {
        throw ShapeError("dwt1d_level needs a non-empty even-length signal, got " + std::to_string(x.size()));
    }
    const std::size_t half = x.size() / 2;
    Level1D out{Signal(half), Signal(half)};
    analyse(x.data(), 1, half, out.approx.data(), out.detail.data(), 1);
    return out;
}

Signal idwt1d_level(std::span<const double> approx, std::span<const double> detail) {
    if (approx.size() != detail.size()) {
        throw ShapeError("idwt1d_level: approximation has " + std::to_string(approx.size()) +
                         " coefficients, detail has " + std::to_string(detail.size()));
    }
    Signal x(2 * approx.size());
    synthesise(approx.data(), detail.data(), 1, approx.size(), x.data(), 1);
    return x;
}

Pyramid1D dwt1d_multi(std::span<const double> x, int levels) {
    check_levels(levels);
    if (!divisible_by_pow2(x.size(), levels)) {
        throw ShapeError("signal length " + std::to_string(x.size()) + " is not divisible by 2^" +
                         std::to_string(levels));
    }
    Pyramid1D p;
    p.levels = levels;
    p.approx.assign(x.begin(), x.end());
    for (int s = 1; s <= levels; ++s) {
        auto step = dwt1d_level(p.approx);
        p.details.push_back(std::move(step.detail));
        p.approx = std::move(step.approx);
    }
    return p;
}

Signal idwt1d_multi(const Pyramid1D& p) {
    check_levels(p.levels);
    if (p.details.size() != static_cast<std::size_t>(p.levels)) {
        throw ShapeError("pyramid has " + std::to_string(p.details.size()) + " detail levels, expected " +
                         std::to_string(p.levels));
    }
    Signal approx = p.approx;
    for (int s = p.levels; s >= 1; --s) {
        const Signal& d = p.detail(s);
        if (d.size() != approx.size()) throw ShapeError("detail level " + std::to_string(s) + " has wrong length");
        approx = idwt1d_level(approx, d);
    }
    return approx;
}

// ---------------------------------------------------------------------------
// 2D

Subbands dwt2d_level(const Image& img) {
    if (img.height == 0 || img.width == 0 || img.height % 2 || img.width % 2) {
        throw ShapeError("dwt2d_level needs even non-zero dimensions, got " + std::to_string(img.height) + "x" +
                         std::to_string(img.width));
    }
    const std::size_t h = img.height, w = img.width, hh = h / 2, hw = w / 2;
    Subbands out{Image(hh, hw, img.channels), Image(hh, hw, img.channels), Image(hh, hw, img.channels),
                 Image(hh, hw, img.channels)};

    Image row_lo(h, hw, 1), row_hi(h, hw, 1);
    for (std::size_t c = 0; c < img.channels; ++c) {
        const double* src = img.plane(c).data();
        // Rows: h and g along x.
        for (std::size_t y = 0; y < h; ++y) {
            analyse(src + y * w, 1, hw, row_lo.values.data() + y * hw, row_hi.values.data() + y * hw, 1);
        }
        // Columns: h and g along y.
        double* ll = out.ll.plane(c).data();
        double* lh = out.lh.plane(c).data();
        double* hl = out.hl.plane(c).data();
        double* hhb = out.hh.plane(c).data();
        for (std::size_t x = 0; x < hw; ++x) {
            analyse(row_lo.values.data() + x, hw, hh, ll + x, lh + x, hw);
            analyse(row_hi.values.data() + x, hw, hh, hl + x, hhb + x, hw);
        }
    }
    return out;
}

Image idwt2d_level(const Image& ll, const Image& hl, const Image& lh, const Image& hh) {
    if (!ll.same_shape(hl) || !ll.same_shape(lh) || !ll.same_shape(hh)) {
        throw ShapeError("idwt2d_level: sub-bands must share one shape");
    }
    const std::size_t bh = ll.height, bw = ll.width, h = 2 * bh, w = 2 * bw;
    Image out(h, w, ll.channels);
    Image row_lo(h, bw, 1), row_hi(h, bw, 1);
    for (std::size_t c = 0; c < ll.channels; ++c) {
        for (std::size_t x = 0; x < bw; ++x) {
            synthesise(ll.plane(c).data() + x, lh.plane(c).data() + x, bw, bh, row_lo.values.data() + x, bw);
            synthesise(hl.plane(c).data() + x, hh.plane(c).data() + x, bw, bh, row_hi.values.data() + x, bw);
        }
        double* dst = out.plane(c).data();
        for (std::size_t y = 0; y < h; ++y) {
            synthesise(row_lo.values.data() + y * bw, row_hi.values.data() + y * bw, 1, bw, dst + y * w, 1);
        }
    }
    return out;
}

Pyramid2D dwt2d_multi(const Image& img, int levels) {
    check_levels(levels);
    if (!divisible_by_pow2(img.height, levels) || !divisible_by_pow2(img.width, levels)) {
        throw ShapeError("image " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                         " is not divisible by 2^" + std::to_string(levels));
    }
    Pyramid2D p;
    p.levels = levels;
    p.height = img.height;
    p.width = img.width;
    p.channels = img.channels;
    p.approx = img;
    for (int s = 1; s <= levels; ++s) {
        auto bands = dwt2d_level(p.approx);
        p.details.push_back({std::move(bands.hl), std::move(bands.lh), std::move(bands.hh)});
        p.approx = std::move(bands.ll);
    }
    return p;
}

Image idwt2d_multi(const Pyramid2D& p) {
    // Validates every band against the halving schedule.
    (void)make_layout(p.height, p.width, p.channels, p.levels);
    if (p.details.size() != static_cast<std::size_t>(p.levels)) throw ShapeError("pyramid detail level count mismatch");
    const std::size_t ah = p.height >> p.levels, aw = p.width >> p.levels;
    if (p.approx.height != ah || p.approx.width != aw || p.approx.channels != p.channels) {
        throw ShapeError("approximation band has the wrong shape");
    }
    Image approx = p.approx;
    for (int s = p.levels; s >= 1; --s) {
        const auto& d = p.detail(s);
        if (!approx.same_shape(d.hl) || !approx.same_shape(d.lh) || !approx.same_shape(d.hh)) {
            throw ShapeError("detail bands at level " + std::to_string(s) + " have the wrong shape");
        }
        approx = idwt2d_level(approx, d.hl, d.lh, d.hh);
    }
    return approx;
}

// ---------------------------------------------------------------------------
// Flattening

std::vector<std::uint8_t> PyramidLayout::detail_mask() const {
    std::vector<std::uint8_t> mask(total(), 0);
    for (const auto& slot : bands) {
        if (slot.band == Band::LL) continue;
        std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(slot.offset), band_size(slot), std::uint8_t{1});
    }
    return mask;
}

PyramidLayout make_layout(std::size_t height, std::size_t width, std::size_t channels, int levels) {
    check_levels(levels);
    if (channels == 0) throw ShapeError("image must have at least one channel");
    if (!divisible_by_pow2(height, levels) || !divisible_by_pow2(width, levels)) {
        throw ShapeError("dimensions " + std::to_string(height) + "x" + std::to_string(width) +
                         " are not divisible by 2^" + std::to_string(levels));
    }
    PyramidLayout layout{levels, height, width, channels, {}};
    std::size_t offset = 0;
    auto push = [&](int level, Band band) {
        BandSlot slot{level, band, height >> level, width >> level, offset};
        offset += layout.band_size(slot);
        layout.bands.push_back(slot);
    };
    push(levels, Band::LL);
    for (int s = levels; s >= 1; --s) {
        push(s, Band::HL);
        push(s, Band::LH);
        push(s, Band::HH);
    }
    return layout;
}

FlatPyramid pyramid_flatten(const Pyramid2D& p) {
    FlatPyramid flat{{}, make_layout(p.height, p.width, p.channels, p.levels)};
    flat.values.resize(flat.layout.total());
    for (const auto& slot : flat.layout.bands) {
        const Image& band = slot.band == Band::LL ? p.approx : p.detail(slot.level).get(slot.band);
        if (band.height != slot.height || band.width != slot.width || band.channels != p.channels) {
            throw ShapeError(to_string(slot.band) + " band at level " + std::to_string(slot.level) +
                             " has the wrong shape");
        }
        std::copy(band.values.begin(), band.values.end(),
                  flat.values.begin() + static_cast<std::ptrdiff_t>(slot.offset));
    }
    return flat;
}

Pyramid2D pyramid_unflatten(std::span<const double> values, const PyramidLayout& layout) {
    if (values.size() != layout.total()) {
        throw ShapeError("coefficient vector has " + std::to_string(values.size()) + " entries, layout expects " +
                         std::to_string(layout.total()));
    }
    Pyramid2D p;
    p.levels = layout.levels;
    p.height = layout.height;
    p.width = layout.width;
    p.channels = layout.channels;
    p.details.resize(static_cast<std::size_t>(layout.levels));
    for (const auto& slot : layout.bands) {
        if (slot.level < 1 || slot.level > layout.levels || slot.offset + layout.band_size(slot) > values.size()) {
            throw ShapeError("layout slot out of range");
        }
        Image band(slot.height, slot.width, layout.channels);
        auto first = values.begin() + static_cast<std::ptrdiff_t>(slot.offset);
        std::copy(first, first + static_cast<std::ptrdiff_t>(band.size()), band.values.begin());
        if (slot.band == Band::LL) {
            p.approx = std::move(band);
        } else {
            p.detail(slot.level).get(slot.band) = std::move(band);
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Dump format

void write_pyramid_dump(std::ostream& out, const Pyramid2D& pyramid) {
    const auto flat = pyramid_flatten(pyramid);
    nlohmann::json layout = nlohmann::json::array();
    for (const auto& slot : flat.layout.bands) {
        layout.push_back({{"level", slot.level},
                          {"band", to_string(slot.band)},
                          {"h", slot.height},
                          {"w", slot.width},
                          {"offset", slot.offset}});
    }
    nlohmann::json header = {{"magic", "WVP1"},
                             {"levels", pyramid.levels},
                             {"height", pyramid.height},
                             {"width", pyramid.width},
                             {"channels", pyramid.channels},
                             {"layout", layout}};
    binary::write_header(out, header);
    binary::write_doubles(out, flat.values);
}

Pyramid2D read_pyramid_dump(std::istream& in) {
    const auto header = binary::read_header(in);
    PyramidLayout layout;
    try {
        if (header.at("magic").get<std::string>() != "WVP1") throw FormatError("not a coefficient dump (bad magic)");
        layout = make_layout(header.at("height").get<std::size_t>(), header.at("width").get<std::size_t>(),
                             header.at("channels").get<std::size_t>(), header.at("levels").get<int>());
        const auto& bands = header.at("layout");
        if (bands.size() != layout.bands.size()) throw FormatError("layout has the wrong number of bands");
        for (std::size_t i = 0; i < bands.size(); ++i) {
            BandSlot slot{bands[i].at("level").get<int>(), band_from_string(bands[i].at("band").get<std::string>()),
                          bands[i].at("h").get<std::size_t>(), bands[i].at("w").get<std::size_t>(),
                          bands[i].at("offset").get<std::size_t>()};
            if (!(slot == layout.bands[i])) throw FormatError("layout entry " + std::to_string(i) + " is not canonical");
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed dump header: ") + e.what());
    } catch (const ShapeError& e) {
        throw FormatError(std::string("inconsistent dump header: ") + e.what());
    } catch (const DomainError& e) {
        throw FormatError(std::string("inconsistent dump header: ") + e.what());
    }
    const auto values = binary::read_doubles(in, layout.total());
    binary::expect_end(in);
    return pyramid_unflatten(values, layout);
}

void save_pyramid_dump(const std::string& path, const Pyramid2D& pyramid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_pyramid_dump(out, pyramid);
}

Pyramid2D load_pyramid_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    return read_pyramid_dump(in);
}

}  // namespace wvae
