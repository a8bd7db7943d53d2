#include "wvae/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "wvae/errors.hpp"
#include "wvae/random.hpp"

namespace wvae {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ConfigError("invalid value '" + text + "' for " + key);
    return value;
}

double parse_real(const std::string& key, const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
        throw ConfigError("invalid value '" + text + "' for " + key);
    }
    return v;
}

std::string format_real(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

std::vector<std::size_t> parse_widths(const std::string& key, const std::string& text) {
    std::vector<std::size_t> widths;
    if (trim(text).empty() || text == "none") return widths;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) widths.push_back(parse_number<std::size_t>(key, trim(item)));
    return widths;
}

}  // namespace

NoiseMode parse_noise_mode(const std::string& text) {
    if (text == "learnable") return {true, 0.01};
    if (text.rfind("fixed:", 0) == 0) {
        const double v = parse_real("noise", text.substr(6));
        if (!(v > 0.0)) throw ConfigError("fixed noise scale must be positive");
        return {false, v};
    }
    throw ConfigError("invalid noise mode '" + text + "' (expected learnable or fixed:<value>)");
}

std::string to_string(const NoiseMode& mode) {
    return mode.learnable ? "learnable" : "fixed:" + format_real(mode.value);
}

DataSpec parse_data_spec(const std::string& text) {
    DataSpec spec;
    if (text.rfind("cifar10:", 0) == 0) {
        spec.source = DataSpec::Source::cifar10;
        spec.path = text.substr(8);
        if (spec.path.empty()) throw ConfigError("cifar10 data needs a path");
        return spec;
    }
    if (text.rfind("synth:", 0) == 0) {
        spec.source = DataSpec::Source::synth;
        spec.synth_kind = synth_kind_from_string(text.substr(6));
        return spec;
    }
    throw ConfigError("invalid data source '" + text + "' (expected cifar10:<path> or synth:<kind>)");
}

std::string to_string(const DataSpec& spec) {
    return spec.source == DataSpec::Source::cifar10 ? "cifar10:" + spec.path : "synth:" + to_string(spec.synth_kind);
}

void apply_setting(TrainConfig& c, const std::string& key, const std::string& value) {
    if (key == "model") c.model = model_kind_from_string(value);
    else if (key == "levels") c.levels = parse_number<int>(key, value);
    else if (key == "lambda") c.lambda = parse_real(key, value);
    else if (key == "beta") c.beta = parse_real(key, value);
    else if (key == "lr") c.learning_rate = parse_real(key, value);
    else if (key == "batch") c.batch = parse_number<std::size_t>(key, value);
    else if (key == "steps") c.steps = parse_number<std::size_t>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "noise") c.noise = parse_noise_mode(value);
    else if (key == "data") c.data = parse_data_spec(value);
    else if (key == "out") c.out = value;
    else if (key == "recon") c.reconstruction = reconstruction_loss_from_string(value);
    else if (key == "hidden") c.hidden = parse_widths(key, value);
    else if (key == "latent-dim") c.latent_dim = parse_number<std::size_t>(key, value);
    else if (key == "synth-n") c.synth_count = parse_number<std::size_t>(key, value);
    else if (key == "synth-size") c.synth_size = parse_number<std::size_t>(key, value);
    else if (key == "synth-channels") c.synth_channels = parse_number<std::size_t>(key, value);
    else if (key == "upscale") c.upscale = parse_number<int>(key, value);
    else if (key == "limit") c.limit = parse_number<std::size_t>(key, value);
    else throw ConfigError("unknown configuration key '" + key + "'");
}

void apply_config_text(TrainConfig& config, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void apply_config_file(TrainConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    apply_config_text(config, buffer.str());
}

std::map<std::string, std::string> to_settings(const TrainConfig& c) {
    std::string hidden;
    for (std::size_t i = 0; i < c.hidden.size(); ++i) hidden += (i ? "," : "") + std::to_string(c.hidden[i]);
    return {{"model", to_string(c.model)},
            {"levels", std::to_string(c.levels)},
            {"lambda", format_real(c.lambda)},
            {"beta", format_real(c.beta)},
            {"lr", format_real(c.learning_rate)},
            {"batch", std::to_string(c.batch)},
            {"steps", std::to_string(c.steps)},
            {"seed", std::to_string(c.seed)},
            {"noise", to_string(c.noise)},
            {"data", to_string(c.data)},
            {"out", c.out},
            {"recon", to_string(c.reconstruction)},
            {"hidden", hidden.empty() ? "none" : hidden},
            {"latent-dim", std::to_string(c.latent_dim)},
            {"synth-n", std::to_string(c.synth_count)},
            {"synth-size", std::to_string(c.synth_size)},
            {"synth-channels", std::to_string(c.synth_channels)},
            {"upscale", std::to_string(c.upscale)},
            {"limit", std::to_string(c.limit)}};
}

std::string to_config_text(const TrainConfig& config) {
    std::string text;
    for (const auto& [k, v] : to_settings(config)) text += k + " = " + v + "\n";
    return text;
}

void validate(const TrainConfig& c) {
    if (c.levels < 1) throw ConfigError("levels must be >= 1");
    if (c.steps < 1) throw ConfigError("steps must be >= 1");
    if (c.batch < 1) throw ConfigError("batch must be >= 1");
    if (c.lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (c.beta < 0.0) throw ConfigError("beta must be >= 0");
    if (!(c.learning_rate > 0.0)) throw ConfigError("lr must be > 0");
    if (c.model == ModelKind::vae && c.latent_dim == 0) throw ConfigError("latent-dim must be > 0");
    if (c.upscale != 1 && c.upscale != 2 && c.upscale != 4) throw ConfigError("upscale must be 1, 2 or 4");
    for (auto h : c.hidden) {
        if (h == 0) throw ConfigError("hidden widths must be positive");
    }
}

Dataset load_dataset(const TrainConfig& c) {
    Dataset ds = c.data.source == DataSpec::Source::cifar10
                     ? load_cifar10(c.data.path)
                     : synth_dataset(c.data.synth_kind, c.synth_count, c.synth_size, derive_seed(c.seed, 0x5EED),
                                     c.synth_channels);
    if (c.limit > 0 && ds.images.size() > c.limit) {
        ds.images.resize(c.limit);
        if (!ds.labels.empty()) ds.labels.resize(c.limit);
    }
    if (c.upscale > 1) {
        for (auto& img : ds.images) img = upscale_bicubic(img, c.upscale);
    }
    return ds;
}

}  // namespace wvae
