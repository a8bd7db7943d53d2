#include "wvae/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "wvae/errors.hpp"

namespace wvae {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string token;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!token.empty()) return token;
            continue;
        }
        token.push_back(static_cast<char>(ch));
    }
    if (token.empty()) throw FormatError("unexpected end of PNM header");
    return token;
}

std::size_t parse_size(const std::string& token) {
    if (token.empty() || !std::all_of(token.begin(), token.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        throw FormatError("invalid PNM header field '" + token + "'");
    }
    return std::stoul(token);
}

}  // namespace

std::uint8_t to_byte(double v) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::floor(clamped * 255.0 + 0.5));
}

void write_pnm(std::ostream& out, const Image& img) {
    if (img.channels != 1 && img.channels != 3) {
        throw ShapeError("PNM output supports 1 or 3 channels, got " + std::to_string(img.channels));
    }
    out << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << "\n255\n";
    std::vector<char> bytes(img.size());
    std::size_t k = 0;
    for (std::size_t y = 0; y < img.height; ++y) {
        for (std::size_t x = 0; x < img.width; ++x) {
            for (std::size_t c = 0; c < img.channels; ++c) bytes[k++] = static_cast<char>(to_byte(img.at(c, y, x)));
        }
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void save_pnm(const std::string& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_pnm(out, img);
}

Image read_pnm(std::istream& in) {
    const auto magic = next_token(in);
    std::size_t channels;
    if (magic == "P5") {
        channels = 1;
    } else if (magic == "P6") {
        channels = 3;
    } else {
        throw FormatError("unsupported PNM magic '" + magic + "' (expected P5 or P6)");
    }
    const auto width = parse_size(next_token(in));
    const auto height = parse_size(next_token(in));
    const auto maxval = parse_size(next_token(in));
    if (width == 0 || height == 0) throw FormatError("PNM image has zero size");
    if (maxval == 0 || maxval > 255) throw FormatError("only 8-bit PNM files are supported");

    Image img(height, width, channels);
    std::vector<unsigned char> bytes(img.size());
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) throw FormatError("PNM pixel data truncated");
    std::size_t k = 0;
    const double scale = 1.0 / static_cast<double>(maxval);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            for (std::size_t c = 0; c < channels; ++c) img.at(c, y, x) = bytes[k++] * scale;
        }
    }
    return img;
}

Image load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open image " + path);
    return read_pnm(in);
}

void save_pgm_bytes(const std::string& path, std::size_t height, std::size_t width,
                    const std::vector<std::uint8_t>& pixels) {
    if (pixels.size() != height * width) throw ShapeError("pixel buffer does not match PGM dimensions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

}  // namespace wvae
