#include "wvae/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "wvae/errors.hpp"
#include "wvae/random.hpp"

namespace wvae {

namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double cubic_weight(double t) {
    constexpr double a = -0.5;
    t = std::abs(t);
    if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
    if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
    return 0.0;
}

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

}  // namespace

Dataset parse_cifar10(const std::vector<std::uint8_t>& bytes, const std::string& source) {
    if (bytes.size() % kCifarRecord != 0) {
        throw FormatError(source + ": size " + std::to_string(bytes.size()) + " is not a multiple of " +
                          std::to_string(kCifarRecord) + "-byte CIFAR-10 records");
    }
    Dataset ds;
    ds.source = "cifar10:" + source;
    const std::size_t count = bytes.size() / kCifarRecord;
    ds.images.reserve(count);
    ds.labels.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
        const std::uint8_t* rec = bytes.data() + r * kCifarRecord;
        if (rec[0] > 9) {
            throw FormatError(source + ": record " + std::to_string(r) + " has label " + std::to_string(rec[0]));
        }
        ds.labels.push_back(rec[0]);
        Image img(kCifarSide, kCifarSide, 3);
        for (std::size_t i = 0; i < kCifarPixels; ++i) img.values[i] = rec[1 + i] / 255.0;
        ds.images.push_back(std::move(img));
    }
    return ds;
}

Dataset load_cifar10(const std::string& path) {
    const fs::path root(path);
    if (!fs::exists(root)) throw FormatError("CIFAR-10 path does not exist: " + path);
    if (!fs::is_directory(root)) return parse_cifar10(read_file(root), path);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().extension() == ".bin") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    Dataset all;
    all.source = "cifar10:" + path;
    for (const auto& f : files) {
        auto part = parse_cifar10(read_file(f), f.string());
        std::move(part.images.begin(), part.images.end(), std::back_inserter(all.images));
        all.labels.insert(all.labels.end(), part.labels.begin(), part.labels.end());
    }
    return all;
}

std::string to_string(SynthKind kind) {
    switch (kind) {
        case SynthKind::constant: return "constant";
        case SynthKind::checkerboard: return "checkerboard";
        case SynthKind::gaussian_blobs: return "gaussian-blobs";
        case SynthKind::edges: return "edges";
    }
    return "?";
}

SynthKind synth_kind_from_string(const std::string& name) {
    if (name == "constant") return SynthKind::constant;
    if (name == "checkerboard") return SynthKind::checkerboard;
    if (name == "gaussian-blobs" || name == "blobs") return SynthKind::gaussian_blobs;
    if (name == "edges") return SynthKind::edges;
    throw ConfigError("unknown synthetic dataset '" + name + "'");
}

Dataset synth_dataset(SynthKind kind, std::size_t n, std::size_t size, std::uint64_t seed, std::size_t channels) {
    if (!is_power_of_two(size)) throw ShapeError("synthetic image size must be a power of two, got " + std::to_string(size));
    if (channels == 0) throw ShapeError("synthetic images need at least one channel");
    Dataset ds;
    ds.source = "synth:" + to_string(kind);
    const auto side = static_cast<double>(size);
    const std::size_t periods = static_cast<std::size_t>(std::log2(side));

    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, i));
        Image img(size, size, channels);
        switch (kind) {
            case SynthKind::constant:
                for (std::size_t c = 0; c < channels; ++c) {
                    const double v = rng.uniform(0.1, 0.9);
                    for (auto& p : img.plane(c)) p = v;
                }
                break;
            case SynthKind::checkerboard: {
                // Period cycles through 1, 2, 4, ...; every other cycle is inverted.
                const std::size_t period = std::size_t{1} << (i % periods);
                const std::size_t phase = (i / periods) % 2;
                for (std::size_t c = 0; c < channels; ++c) {
                    for (std::size_t y = 0; y < size; ++y) {
                        for (std::size_t x = 0; x < size; ++x) {
                            img.at(c, y, x) = static_cast<double>((x / period + y / period + phase) % 2);
                        }
                    }
                }
                break;
            }
            case SynthKind::gaussian_blobs: {
                const std::size_t blobs = 1 + rng.below(3);
                std::vector<double> cx(blobs), cy(blobs), sigma(blobs), amp(blobs);
                for (std::size_t b = 0; b < blobs; ++b) {
                    cx[b] = rng.uniform(0.0, side);
                    cy[b] = rng.uniform(0.0, side);
                    sigma[b] = rng.uniform(side / 8.0, side / 3.0);
                    amp[b] = rng.uniform(0.5, 1.0);
                }
                std::vector<double> tint(channels);
                for (auto& t : tint) t = rng.uniform(0.6, 1.0);
                for (std::size_t y = 0; y < size; ++y) {
                    for (std::size_t x = 0; x < size; ++x) {
                        double v = 0.0;
                        for (std::size_t b = 0; b < blobs; ++b) {
                            const double dx = x + 0.5 - cx[b], dy = y + 0.5 - cy[b];
                            v += amp[b] * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma[b] * sigma[b]));
                        }
                        for (std::size_t c = 0; c < channels; ++c) img.at(c, y, x) = std::min(1.0, v * tint[c]);
                    }
                }
                break;
            }
            case SynthKind::edges: {
                const double angle = rng.uniform(0.0, 6.283185307179586);
                const double px = rng.uniform(0.25 * side, 0.75 * side);
                const double py = rng.uniform(0.25 * side, 0.75 * side);
                const double lo = rng.uniform(0.0, 0.4), hi = rng.uniform(0.6, 1.0);
                const double nx = std::cos(angle), ny = std::sin(angle);
                for (std::size_t y = 0; y < size; ++y) {
                    for (std::size_t x = 0; x < size; ++x) {
                        const double side_of_edge = (x + 0.5 - px) * nx + (y + 0.5 - py) * ny;
                        for (std::size_t c = 0; c < channels; ++c) img.at(c, y, x) = side_of_edge >= 0.0 ? hi : lo;
                    }
                }
                break;
            }
        }
        ds.images.push_back(std::move(img));
    }
    return ds;
}

Image upscale_bicubic(const Image& img, int factor) {
    if (factor != 2 && factor != 4) throw DomainError("bicubic upscale supports factors 2 and 4, got " + std::to_string(factor));
    const auto f = static_cast<std::size_t>(factor);
    const std::size_t h = img.height, w = img.width;
    Image out(h * f, w * f, img.channels);
    const auto clamp_index = [](std::ptrdiff_t i, std::size_t n) {
        return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1));
    };

    // Horizontal pass then vertical pass; taps and weights depend only on the output coordinate.
    struct Taps {
        std::array<std::size_t, 4> index;
        std::array<double, 4> weight;
    };
    const auto make_taps = [&](std::size_t dst, std::size_t n) {
        const double src = (static_cast<double>(dst) + 0.5) / factor - 0.5;
        const double base = std::floor(src);
        Taps t;
        for (int k = 0; k < 4; ++k) {
            const double pos = base - 1.0 + k;
            t.index[k] = clamp_index(static_cast<std::ptrdiff_t>(pos), n);
            t.weight[k] = cubic_weight(src - pos);
        }
        return t;
    };
    std::vector<Taps> xtaps(w * f), ytaps(h * f);
    for (std::size_t x = 0; x < w * f; ++x) xtaps[x] = make_taps(x, w);
    for (std::size_t y = 0; y < h * f; ++y) ytaps[y] = make_taps(y, h);

    Image rows(h, w * f, 1);
    for (std::size_t c = 0; c < img.channels; ++c) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w * f; ++x) {
                double v = 0.0;
                for (int k = 0; k < 4; ++k) v += xtaps[x].weight[k] * img.at(c, y, xtaps[x].index[k]);
                rows.at(0, y, x) = v;
            }
        }
        for (std::size_t y = 0; y < h * f; ++y) {
            for (std::size_t x = 0; x < w * f; ++x) {
                double v = 0.0;
                for (int k = 0; k < 4; ++k) v += ytaps[y].weight[k] * rows.at(0, ytaps[y].index[k], x);
                out.at(c, y, x) = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return out;
}

}  // namespace wvae
