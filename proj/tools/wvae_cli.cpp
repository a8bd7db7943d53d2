#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wvae/checkpoint.hpp"
#include "wvae/config.hpp"
#include "wvae/errors.hpp"
#include "wvae/eval.hpp"
#include "wvae/export.hpp"
#include "wvae/image_io.hpp"
#include "wvae/train.hpp"
#include "wvae/wavelet.hpp"

namespace fs = std::filesystem;
using namespace wvae;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kFormat = 3, kNumerical = 4 };

// Training/data flags. Values stay as text and go through the same parser
// as config files, so a flag and a config line behave identically.
struct SettingFlags {
    std::optional<std::string> config_path;
    std::vector<std::pair<std::string, std::optional<std::string>>> values;

    void bind(CLI::App& app, const std::vector<std::pair<std::string, std::string>>& keys) {
        values.clear();
        values.reserve(keys.size());
        for (const auto& [key, help] : keys) {
            values.emplace_back(key, std::nullopt);
            app.add_option("--" + key, values.back().second, help);
        }
        app.add_option("--config", config_path, "key=value file; flags given on the command line win");
    }

    TrainConfig resolve() const {
        TrainConfig config;
        if (config_path) apply_config_file(config, *config_path);
        for (const auto& [key, value] : values) {
            if (value) apply_setting(config, key, *value);
        }
        return config;
    }
};

const std::vector<std::pair<std::string, std::string>> kTrainKeys = {
    {"model", "wvae or vae"},
    {"levels", "wavelet decomposition depth"},
    {"lambda", "L1 weight on detail coefficients"},
    {"beta", "KL weight of the baseline VAE"},
    {"noise", "learnable or fixed:<s>"},
    {"steps", "optimizer steps"},
    {"batch", "minibatch size"},
    {"lr", "Adam learning rate"},
    {"seed", "base seed"},
    {"data", "cifar10:<path> or synth:<kind>"},
    {"out", "output directory"},
    {"recon", "mse or bce"},
    {"hidden", "comma-separated hidden widths, or none"},
    {"latent-dim", "baseline VAE latent size"},
    {"synth-n", "synthetic image count"},
    {"synth-size", "synthetic image side (power of two)"},
    {"synth-channels", "synthetic image channels"},
    {"upscale", "bicubic factor for CIFAR images (1, 2 or 4)"},
    {"limit", "use only the first N images (0 = all)"},
};

const std::vector<std::pair<std::string, std::string>> kDataKeys = {
    {"data", "cifar10:<path> or synth:<kind>"},
    {"seed", "base seed"},
    {"synth-n", "synthetic image count"},
    {"synth-size", "synthetic image side (power of two)"},
    {"synth-channels", "synthetic image channels"},
    {"upscale", "bicubic factor for CIFAR images (1, 2 or 4)"},
    {"limit", "use only the first N images (0 = all)"},
};

std::string image_name(std::size_t index, std::size_t channels) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04zu.%s", index, channels == 1 ? "pgm" : "ppm");
    return buf;
}

std::vector<Image> gather_images(const std::vector<std::string>& files, const TrainConfig& config) {
    std::vector<Image> images;
    for (const auto& f : files) images.push_back(load_pnm(f));
    if (images.empty()) images = load_dataset(config).images;
    return images;
}

int run_dwt(const std::string& in, const std::string& out, int levels) {
    const Image img = load_pnm(in);
    save_pyramid_dump(out, dwt2d_multi(img, levels));
    return kOk;
}

int run_idwt(const std::string& in, const std::string& out) {
    save_pnm(out, idwt2d_multi(load_pyramid_dump(in)));
    return kOk;
}

int run_train(const TrainConfig& config) {
    const auto result = train_and_save(config, load_dataset(config));
    const auto& f = result.log.final_eval;
    std::cout << nlohmann::json{{"out", config.out},
                                {"steps", result.log.steps.size()},
                                {"reconstruction", f.reconstruction},
                                {"total", f.total},
                                {"metrics", to_json(f.metrics)}}
                     .dump()
              << '\n';
    return kOk;
}

int run_ablate(const TrainConfig& config) {
    const auto data = load_dataset(config);
    const auto report = ablate_noise_scale(config, data, true);
    const auto j = to_json(report);
    fs::create_directories(config.out);
    std::ofstream(fs::path(config.out) / "ablation.json") << j.dump(2) << '\n';
    std::cout << j.dump() << '\n';
    return kOk;
}

int run_reconstruct(const std::string& checkpoint, const std::vector<std::string>& files, const TrainConfig& config,
                    const std::string& out) {
    const auto ck = load_checkpoint(checkpoint);
    const auto images = gather_images(files, config);
    const auto result = reconstruct(ck.network, images, config.seed);
    if (!out.empty()) {
        fs::create_directories(out);
        for (std::size_t i = 0; i < result.images.size(); ++i) {
            const Image& img = result.images[i];
            if (img.channels == 1 || img.channels == 3) save_pnm((fs::path(out) / image_name(i, img.channels)).string(), img);
        }
    }
    for (std::size_t i = 0; i < result.reports.size(); ++i) {
        auto j = to_json(result.reports[i]);
        j["index"] = i;
        std::cout << j.dump() << '\n';
    }
    auto mean = to_json(result.mean);
    mean["index"] = "mean";
    std::cout << mean.dump() << '\n';
    return kOk;
}

int run_metrics(const std::string& reference, const std::vector<std::string>& candidates, int levels) {
    const Image x = load_pnm(reference);
    for (const auto& path : candidates) {
        auto j = to_json(evaluate(x, load_pnm(path), levels));
        j["candidate"] = path;
        std::cout << j.dump() << '\n';
    }
    return kOk;
}

int run_heatmap(const std::string& checkpoint, const std::string& in, std::size_t index, const TrainConfig& config,
                const std::string& out) {
    const auto ck = load_checkpoint(checkpoint);
    Image image;
    if (!in.empty()) {
        image = load_pnm(in);
    } else {
        const auto data = load_dataset(config);
        if (index >= data.size()) throw ConfigError("image index " + std::to_string(index) + " is out of range");
        image = data.images[index];
    }
    const auto map = heatmap(ck.network, image);
    save_heatmap(out, map);
    std::cout << nlohmann::json{{"out", out}, {"height", map.height}, {"width", map.width}}.dump() << '\n';
    return kOk;
}

int run_synth(const std::string& kind, std::size_t n, std::size_t size, std::size_t channels, std::uint64_t seed,
              const std::string& out) {
    if (channels != 1 && channels != 3) throw ConfigError("synth images are written as PGM or PPM: channels must be 1 or 3");
    const auto data = synth_dataset(synth_kind_from_string(kind), n, size, seed, channels);
    fs::create_directories(out);
    for (std::size_t i = 0; i < data.size(); ++i) save_pnm((fs::path(out) / image_name(i, channels)).string(), data.images[i]);
    std::cout << nlohmann::json{{"out", out}, {"count", data.size()}}.dump() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wavelet-domain variational autoencoder toolkit"};
    app.require_subcommand(1);

    std::string in, out, checkpoint, reference, kind = "gaussian-blobs";
    std::vector<std::string> files;
    int levels = 2;
    std::size_t index = 0, count = 16, size = 16, channels = 1;
    std::uint64_t seed = 0;

    auto* dwt = app.add_subcommand("dwt", "image file -> coefficient dump");
    dwt->add_option("input", in, "PGM/PPM image")->required();
    dwt->add_option("output", out, "coefficient dump")->required();
    dwt->add_option("--levels", levels)->check(CLI::PositiveNumber);

    auto* idwt = app.add_subcommand("idwt", "coefficient dump -> image file");
    idwt->add_option("input", in, "coefficient dump")->required();
    idwt->add_option("output", out, "PGM/PPM image")->required();

    SettingFlags train_flags, ablate_flags, recon_flags, heat_flags;
    auto* train_cmd = app.add_subcommand("train", "train a model; writes runlog.jsonl, checkpoint.wvn, config.txt");
    train_flags.bind(*train_cmd, kTrainKeys);

    auto* ablate = app.add_subcommand("ablate", "fixed vs learnable noise scale on identical data and seed");
    ablate_flags.bind(*ablate, kTrainKeys);

    std::string recon_out;
    auto* recon = app.add_subcommand("reconstruct", "run a checkpoint over images; prints metrics per image");
    recon->add_option("--checkpoint", checkpoint)->required();
    recon->add_option("--image", files, "PGM/PPM inputs (default: the --data dataset)");
    recon->add_option("--out", recon_out, "directory for reconstructed images");
    recon_flags.bind(*recon, kDataKeys);

    auto* metrics = app.add_subcommand("metrics", "compare images; one JSON object per candidate");
    metrics->add_option("reference", reference)->required();
    metrics->add_option("candidates", files)->required();
    metrics->add_option("--levels", levels)->check(CLI::PositiveNumber);

    std::string heat_out;
    auto* heat = app.add_subcommand("heatmap", "render encoder coefficient magnitudes as a PGM mosaic");
    heat->add_option("--checkpoint", checkpoint)->required();
    heat->add_option("--image", in, "PGM/PPM input (default: --index into the --data dataset)");
    heat->add_option("--index", index);
    heat->add_option("--out", heat_out)->required();
    heat_flags.bind(*heat, kDataKeys);

    auto* synth = app.add_subcommand("synth", "write a synthetic dataset as image files");
    synth->add_option("--kind", kind, "constant, checkerboard, gaussian-blobs or edges");
    synth->add_option("--n", count);
    synth->add_option("--size", size);
    synth->add_option("--channels", channels);
    synth->add_option("--seed", seed);
    synth->add_option("--out", out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (dwt->parsed()) return run_dwt(in, out, levels);
        if (idwt->parsed()) return run_idwt(in, out);
        if (train_cmd->parsed()) return run_train(train_flags.resolve());
        if (ablate->parsed()) return run_ablate(ablate_flags.resolve());
        if (recon->parsed()) return run_reconstruct(checkpoint, files, recon_flags.resolve(), recon_out);
        if (metrics->parsed()) return run_metrics(reference, files, levels);
        if (heat->parsed()) return run_heatmap(checkpoint, in, index, heat_flags.resolve(), heat_out);
        if (synth->parsed()) return run_synth(kind, count, size, channels, seed, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const ShapeError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << '\n';
        return kFormat;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
