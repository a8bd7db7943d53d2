#include "wvae/train.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "wvae/checkpoint.hpp"
#include "wvae/errors.hpp"
#include "wvae/random.hpp"

namespace wvae {

namespace {

// Stream identifiers for derive_seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
constexpr std::uint64_t kEvalStream = 4;

void check_dataset(const Dataset& data) {
    if (data.empty()) throw ConfigError("dataset is empty");
    const Image& first = data.images.front();
    for (const auto& img : data.images) {
        if (!img.same_shape(first)) throw ConfigError("dataset images do not share one shape");
    }
}

bool parameters_finite(Network& net) {
    for (const auto& block : parameter_blocks(net)) {
        for (double v : block.values) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

Tape forward(const Network& net, const Image& x, std::uint64_t seed) {
    return net.arch.kind == ModelKind::wvae ? forward_wvae(net, x, seed) : forward_vae_baseline(net, x, seed);
}

LossSettings loss_settings(const TrainConfig& config) {
    return {config.lambda, config.beta, config.reconstruction};
}

// Index stream over successive seeded permutations of the dataset.
class BatchSampler {
public:
    BatchSampler(std::size_t n, std::uint64_t seed, RunLog& log) : n_(n), seed_(seed), log_(log) {}

    std::vector<std::size_t> next(std::size_t batch, std::size_t step) {
        std::vector<std::size_t> out;
        out.reserve(batch);
        while (out.size() < batch) {
            if (cursor_ == order_.size()) start_epoch(step);
            out.push_back(order_[cursor_++]);
        }
        return out;
    }

private:
    void start_epoch(std::size_t step) {
        order_.resize(n_);
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        Rng rng(derive_seed(seed_, kShuffleStream, epoch_));
        shuffle(std::span<std::size_t>(order_), rng);
        log_.epochs.push_back({epoch_, step, order_});
        ++epoch_;
        cursor_ = 0;
    }

    std::size_t n_;
    std::uint64_t seed_;
    RunLog& log_;
    std::vector<std::size_t> order_;
    std::size_t cursor_ = 0;
    std::size_t epoch_ = 0;
};

nlohmann::json step_json(const StepRecord& r) {
    return {{"type", "step"},         {"step", r.step},         {"reconstruction", r.reconstruction},
            {"regularizer", r.regularizer}, {"total", r.total}, {"s_approx", r.s_approx},
            {"s_detail", r.s_detail}};
}

}  // namespace

void write_runlog(std::ostream& out, const RunLog& log) {
    std::size_t next_epoch = 0;
    for (const auto& step : log.steps) {
        while (next_epoch < log.epochs.size() && log.epochs[next_epoch].first_step <= step.step) {
            const auto& e = log.epochs[next_epoch++];
            out << nlohmann::json{{"type", "epoch"}, {"epoch", e.epoch}, {"first_step", e.first_step}, {"order", e.order}}.dump()
                << '\n';
        }
        out << step_json(step).dump() << '\n';
    }
    const auto& f = log.final_eval;
    out << nlohmann::json{{"type", "final"},
                          {"reconstruction", f.reconstruction},
                          {"regularizer", f.regularizer},
                          {"total", f.total},
                          {"metrics", to_json(f.metrics)}}
               .dump()
        << '\n';
}

void save_runlog(const std::string& path, const RunLog& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_runlog(out, log);
}

Architecture architecture_for(const TrainConfig& config, const Dataset& data) {
    check_dataset(data);
    const Image& first = data.images.front();
    Architecture arch;
    arch.kind = config.model;
    arch.height = first.height;
    arch.width = first.width;
    arch.channels = first.channels;
    arch.levels = config.levels;
    arch.hidden = config.hidden;
    arch.latent_dim = config.latent_dim;
    try {
        validate(arch);
        // Metrics decompose reconstructions with the same depth for both models.
        (void)make_layout(arch.height, arch.width, arch.channels, arch.levels);
    } catch (const ShapeError& e) {
        throw ConfigError(e.what());
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    return arch;
}

Evaluation evaluate_dataset(const Network& net, const Dataset& data, const LossSettings& settings,
                            std::uint64_t seed) {
    Evaluation eval;
    std::vector<MetricReport> reports;
    reports.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Tape tape = forward(net, data.images[i], derive_seed(seed, i));
        const auto loss = compute_loss(tape, settings);
        eval.reconstruction += loss.reconstruction;
        eval.regularizer += loss.regularizer;
        eval.total += loss.total;
        if (net.arch.kind == ModelKind::wvae) {
            reports.push_back(evaluate(tape.x, tape.x_hat, pyramid_unflatten(tape.latent.c_nn, net.layout),
                                       net.arch.levels));
        } else {
            reports.push_back(evaluate(tape.x, tape.x_hat, net.arch.levels));
        }
    }
    const double n = static_cast<double>(data.size());
    eval.reconstruction /= n;
    eval.regularizer /= n;
    eval.total /= n;
    eval.metrics = average(reports);
    return eval;
}

TrainResult train(const TrainConfig& config, const Dataset& data) {
    validate(config);
    const Architecture arch = architecture_for(config, data);
    const LossSettings settings = loss_settings(config);

    TrainResult result;
    result.network = init_network(arch, derive_seed(config.seed, kInitStream));
    Network& net = result.network;
    net.noise = NoiseScale::from_scale(config.noise.value, config.noise.learnable);
    result.optimizer = OptimizerState::for_network(net, AdamConfig{config.learning_rate});

    BatchSampler sampler(data.size(), config.seed, result.log);
    const double weight = 1.0 / static_cast<double>(config.batch);
    const std::uint64_t noise_seed = derive_seed(config.seed, kNoiseStream);

    for (std::size_t step = 1; step <= config.steps; ++step) {
        const auto batch = sampler.next(config.batch, step);
        auto grads = Gradients::zeros_like(net);
        StepRecord record;
        record.step = step;
        for (std::size_t b = 0; b < batch.size(); ++b) {
            const Tape tape = forward(net, data.images[batch[b]], derive_seed(noise_seed, step, b));
            const auto loss = compute_loss(tape, settings);
            backward(tape, loss, grads, weight);
            record.reconstruction += weight * loss.reconstruction;
            record.regularizer += weight * loss.regularizer;
            record.total += weight * loss.total;
        }
        if (!net.noise.learnable) grads.rho_approx = grads.rho_detail = 0.0;

        if (!std::isfinite(record.total) || !grads.all_finite()) {
            throw NumericalError("non-finite loss or gradient at step " + std::to_string(step));
        }
        adam_step(net, grads, result.optimizer);
        if (!parameters_finite(net)) throw NumericalError("non-finite parameters after step " + std::to_string(step));

        record.s_approx = net.noise.s_approx();
        record.s_detail = net.noise.s_detail();
        result.log.steps.push_back(record);
    }

    result.log.final_eval = evaluate_dataset(net, data, settings, derive_seed(config.seed, kEvalStream));
    if (!std::isfinite(result.log.final_eval.total)) throw NumericalError("non-finite final evaluation loss");
    return result;
}

TrainResult train(const TrainConfig& config) {
    validate(config);
    return train(config, load_dataset(config));
}

TrainResult train_and_save(const TrainConfig& config, const Dataset& data) {
    auto result = train(config, data);
    const std::filesystem::path dir(config.out);
    std::filesystem::create_directories(dir);
    save_runlog((dir / "runlog.jsonl").string(), result.log);
    save_checkpoint((dir / "checkpoint.wvn").string(), result.network, result.optimizer);
    std::ofstream cfg(dir / "config.txt", std::ios::binary);
    cfg << to_config_text(config);
    return result;
}

AblationReport ablate_noise_scale(const TrainConfig& base, const Dataset& data, bool save) {
    if (base.model != ModelKind::wvae) throw ConfigError("the noise-scale ablation needs the wvae model");
    AblationReport report;
    auto run = [&](bool learnable, const std::string& name) {
        TrainConfig cfg = base;
        cfg.noise = {learnable, kAblationNoiseScale};
        cfg.out = (std::filesystem::path(base.out) / name).string();
        const auto result = save ? train_and_save(cfg, data) : train(cfg, data);
        return AblationRun{cfg.noise, result.log.final_eval.metrics.mse, result.log.final_eval.total,
                           result.network.noise.s_approx(), result.network.noise.s_detail()};
    };
    report.fixed = run(false, "fixed");
    report.learnable = run(true, "learnable");
    report.relative_mse_difference = (report.fixed.final_mse - report.learnable.final_mse) / report.learnable.final_mse;
    return report;
}

nlohmann::json to_json(const AblationReport& report) {
    auto run_json = [](const AblationRun& r) {
        return nlohmann::json{{"noise", to_string(r.noise)},
                              {"final_mse", r.final_mse},
                              {"final_total", r.final_total},
                              {"s_approx", r.s_approx},
                              {"s_detail", r.s_detail}};
    };
    return {{"fixed", run_json(report.fixed)},
            {"learnable", run_json(report.learnable)},
            {"relative_mse_difference", report.relative_mse_difference}};
}

}  // namespace wvae
