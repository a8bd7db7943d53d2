#include "wvae/net.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wvae/errors.hpp"
#include "wvae/random.hpp"

namespace wvae {

namespace {

double activate(Activation act, double v) {
    switch (act) {
        case Activation::tanh: return std::tanh(v);
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-v));
        case Activation::identity: break;
    }
    return v;
}

// Derivative expressed through the activation output a.
double activation_slope(Activation act, double a) {
    switch (act) {
        case Activation::tanh: return 1.0 - a * a;
        case Activation::sigmoid: return a * (1.0 - a);
        case Activation::identity: break;
    }
    return 1.0;
}

std::vector<double> apply_layer(const AffineLayer& layer, std::span<const double> in) {
    std::vector<double> out(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
        const double* row = layer.weight.data() + o * layer.in;
        double acc = layer.bias[o];
        for (std::size_t i = 0; i < layer.in; ++i) acc += row[i] * in[i];
        out[o] = activate(layer.activation, acc);
    }
    return out;
}

// acts[0] must hold the stack input; appends one output per layer.
void run_stack(const std::vector<AffineLayer>& layers, std::vector<std::vector<double>>& acts) {
    for (const auto& layer : layers) acts.push_back(apply_layer(layer, acts.back()));
}

// Given dL/d(stack output), accumulates weight * parameter gradients and
// returns dL/d(stack input).
std::vector<double> backprop_stack(const std::vector<AffineLayer>& layers,
                                   const std::vector<std::vector<double>>& acts, std::vector<double> grad_out,
                                   std::vector<LayerGrad>& grads, double weight) {
    for (std::size_t k = layers.size(); k-- > 0;) {
        const auto& layer = layers[k];
        const auto& input = acts[k];
        const auto& output = acts[k + 1];
        auto& g = grads[k];
        std::vector<double> grad_in(layer.in, 0.0);
        for (std::size_t o = 0; o < layer.out; ++o) {
            const double delta = grad_out[o] * activation_slope(layer.activation, output[o]);
            if (delta == 0.0) continue;
            const double scaled = weight * delta;
            g.bias[o] += scaled;
            double* grow = g.weight.data() + o * layer.in;
            const double* wrow = layer.weight.data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) {
                grow[i] += scaled * input[i];
                grad_in[i] += wrow[i] * delta;
            }
        }
        grad_out = std::move(grad_in);
    }
    return grad_out;
}

AffineLayer make_layer(std::size_t in, std::size_t out, Activation act, Rng& rng) {
    AffineLayer layer{in, out, act, std::vector<double>(in * out), std::vector<double>(out, 0.0)};
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (auto& w : layer.weight) w = rng.uniform(-bound, bound);
    return layer;
}

void check_input(const Network& net, const Image& x) {
    const auto& a = net.arch;
    if (x.height != a.height || x.width != a.width || x.channels != a.channels) {
        throw ShapeError("input is " + std::to_string(x.height) + "x" + std::to_string(x.width) + "x" +
                         std::to_string(x.channels) + ", network expects " + std::to_string(a.height) + "x" +
                         std::to_string(a.width) + "x" + std::to_string(a.channels));
    }
}

void check_kind(const Network& net, ModelKind kind) {
    if (net.arch.kind != kind) {
        throw UsageError("network is a " + to_string(net.arch.kind) + " model, not " + to_string(kind));
    }
}

Tape begin_tape(const Network& net, const Image& x, ModelKind kind) {
    Tape tape;
    tape.network = &net;
    tape.network_version = net.version;
    tape.kind = kind;
    tape.x = x;
    return tape;
}

void decode_wavelet(const Network& net, Tape& tape, std::span<const double> c_nn, std::uint64_t seed) {
    const auto mask = net.layout.detail_mask();
    tape.latent = reparameterize_wavelet(c_nn, mask, net.noise, seed);
    tape.x_hat = idwt2d_multi(pyramid_unflatten(tape.latent.c_tilde, net.layout));
}

}  // namespace

std::string to_string(ModelKind kind) { return kind == ModelKind::wvae ? "wvae" : "vae"; }

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "wvae") return ModelKind::wvae;
    if (name == "vae") return ModelKind::vae;
    throw ConfigError("unknown model '" + name + "' (expected wvae or vae)");
}

std::string to_string(Activation act) {
    switch (act) {
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
        case Activation::identity: break;
    }
    return "identity";
}

Activation activation_from_string(const std::string& name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "identity") return Activation::identity;
    throw FormatError("unknown activation '" + name + "'");
}

void validate(const Architecture& arch) {
    if (arch.height == 0 || arch.width == 0 || arch.channels == 0) throw ShapeError("input dimensions must be positive");
    for (auto h : arch.hidden) {
        if (h == 0) throw ShapeError("hidden widths must be positive");
    }
    if (arch.kind == ModelKind::wvae) {
        (void)make_layout(arch.height, arch.width, arch.channels, arch.levels);
    } else if (arch.latent_dim == 0) {
        throw ShapeError("latent dimension must be positive");
    }
}

Network init_network(const Architecture& arch, std::uint64_t seed) {
    validate(arch);
    Network net;
    net.arch = arch;
    Rng rng(seed);

    std::size_t width = arch.input_dim();
    for (auto h : arch.hidden) {
        net.encoder.push_back(make_layer(width, h, Activation::tanh, rng));
        width = h;
    }
    net.encoder.push_back(make_layer(width, arch.head_dim(), Activation::identity, rng));

    if (arch.kind == ModelKind::vae) {
        width = arch.latent_dim;
        for (auto it = arch.hidden.rbegin(); it != arch.hidden.rend(); ++it) {
            net.decoder.push_back(make_layer(width, *it, Activation::tanh, rng));
            width = *it;
        }
        net.decoder.push_back(make_layer(width, arch.input_dim(), Activation::sigmoid, rng));
    } else {
        net.layout = make_layout(arch.height, arch.width, arch.channels, arch.levels);
    }
    net.noise = NoiseScale::from_scale(0.01, true);
    return net;
}

std::vector<ParamBlock> parameter_blocks(Network& net) {
    std::vector<ParamBlock> blocks;
    auto add_stack = [&](std::vector<AffineLayer>& layers, const std::string& prefix) {
        for (std::size_t k = 0; k < layers.size(); ++k) {
            blocks.push_back({prefix + "." + std::to_string(k) + ".weight", layers[k].weight, false});
            blocks.push_back({prefix + "." + std::to_string(k) + ".bias", layers[k].bias, false});
        }
    };
    add_stack(net.encoder, "encoder");
    add_stack(net.decoder, "decoder");
    blocks.push_back({"rho_approx", std::span<double>(&net.noise.rho_approx, 1), true});
    blocks.push_back({"rho_detail", std::span<double>(&net.noise.rho_detail, 1), true});
    return blocks;
}

std::size_t parameter_count(const Network& net) {
    std::size_t n = 2;
    for (const auto* stack : {&net.encoder, &net.decoder}) {
        for (const auto& l : *stack) n += l.weight.size() + l.bias.size();
    }
    return n;
}

Gradients Gradients::zeros_like(const Network& net) {
    Gradients g;
    for (const auto& l : net.encoder) g.encoder.push_back({std::vector<double>(l.weight.size()), std::vector<double>(l.bias.size())});
    for (const auto& l : net.decoder) g.decoder.push_back({std::vector<double>(l.weight.size()), std::vector<double>(l.bias.size())});
    return g;
}

std::vector<std::span<double>> Gradients::blocks() {
    std::vector<std::span<double>> out;
    for (auto* stack : {&encoder, &decoder}) {
        for (auto& l : *stack) {
            out.emplace_back(l.weight);
            out.emplace_back(l.bias);
        }
    }
    out.emplace_back(&rho_approx, 1);
    out.emplace_back(&rho_detail, 1);
    return out;
}

std::vector<std::span<const double>> Gradients::blocks() const {
    auto mutable_blocks = const_cast<Gradients*>(this)->blocks();
    return {mutable_blocks.begin(), mutable_blocks.end()};
}

bool Gradients::all_finite() const {
    for (auto block : blocks()) {
        for (double v : block) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

std::vector<double> encode(const Network& net, const Image& x) {
    check_input(net, x);
    std::vector<std::vector<double>> acts{x.values};
    run_stack(net.encoder, acts);
    return std::move(acts.back());
}

Tape forward_wvae(const Network& net, const Image& x, std::uint64_t seed) {
    check_kind(net, ModelKind::wvae);
    check_input(net, x);
    Tape tape = begin_tape(net, x, ModelKind::wvae);
    tape.encoder_acts.push_back(x.values);
    run_stack(net.encoder, tape.encoder_acts);
    decode_wavelet(net, tape, tape.encoder_acts.back(), seed);
    return tape;
}

Tape forward_wvae_from_coefficients(const Network& net, const Image& x, std::span<const double> c_nn,
                                    std::uint64_t seed) {
    check_kind(net, ModelKind::wvae);
    check_input(net, x);
    if (c_nn.size() != net.layout.total()) throw ShapeError("coefficient vector does not match the network layout");
    Tape tape = begin_tape(net, x, ModelKind::wvae);
    tape.encoder_bypassed = true;
    decode_wavelet(net, tape, c_nn, seed);
    return tape;
}

Tape forward_vae_baseline(const Network& net, const Image& x, std::uint64_t seed) {
    check_kind(net, ModelKind::vae);
    check_input(net, x);
    Tape tape = begin_tape(net, x, ModelKind::vae);
    tape.encoder_acts.push_back(x.values);
    run_stack(net.encoder, tape.encoder_acts);

    const auto& head = tape.encoder_acts.back();
    const auto latent = static_cast<std::ptrdiff_t>(net.arch.latent_dim);
    tape.posterior.mu.assign(head.begin(), head.begin() + latent);
    tape.posterior.logvar.assign(head.begin() + latent, head.end());
    tape.z = reparameterize_gaussian(tape.posterior, seed);

    tape.decoder_acts.push_back(tape.z.z);
    run_stack(net.decoder, tape.decoder_acts);
    tape.x_hat = Image(x.height, x.width, x.channels);
    tape.x_hat.values = tape.decoder_acts.back();
    return tape;
}

LossBreakdown compute_loss(const Tape& tape, const LossSettings& settings) {
    if (tape.kind == ModelKind::wvae) {
        return wvae_loss(tape.x, tape.x_hat, tape.latent.c_nn, tape.latent.detail_mask, settings.lambda,
                         settings.reconstruction);
    }
    return vae_loss(tape.x, tape.x_hat, tape.posterior, settings.beta, settings.reconstruction);
}

void backward(const Tape& tape, const LossBreakdown& loss, Gradients& grads, double weight) {
    if (tape.network == nullptr) throw UsageError("backward called on an empty tape");
    const Network& net = *tape.network;
    if (tape.network_version != net.version) {
        throw UsageError("tape was recorded against parameters that have since been updated");
    }
    if (grads.encoder.size() != net.encoder.size() || grads.decoder.size() != net.decoder.size()) {
        throw UsageError("gradient container does not match the network");
    }
    if ((loss.objective == Objective::wvae) != (tape.kind == ModelKind::wvae)) {
        throw UsageError("loss objective does not match the recorded model");
    }

    const auto grad_xhat = reconstruction_loss_grad(tape.x, tape.x_hat, loss.reconstruction_kind);

    if (tape.kind == ModelKind::wvae) {
        // The IDWT is orthonormal, so its adjoint is the forward DWT.
        Image grad_img(tape.x_hat.height, tape.x_hat.width, tape.x_hat.channels);
        grad_img.values = grad_xhat;
        auto grad_c = pyramid_flatten(dwt2d_multi(grad_img, net.layout.levels)).values;

        const auto& lat = tape.latent;
        const double s_approx = net.noise.s_approx();
        const double s_detail = net.noise.s_detail();
        double d_rho_approx = 0.0, d_rho_detail = 0.0;
        for (std::size_t i = 0; i < grad_c.size(); ++i) {
            // d c~/d rho = eps * s since s = exp(rho).
            if (lat.detail_mask[i]) {
                d_rho_detail += grad_c[i] * lat.noise[i] * s_detail;
            } else {
                d_rho_approx += grad_c[i] * lat.noise[i] * s_approx;
            }
        }
        grads.rho_approx += weight * d_rho_approx;
        grads.rho_detail += weight * d_rho_detail;

        add_l1_detail_grad(lat.c_nn, lat.detail_mask, loss.lambda, grad_c);
        if (!tape.encoder_bypassed) backprop_stack(net.encoder, tape.encoder_acts, std::move(grad_c), grads.encoder, weight);
        return;
    }

    auto grad_z = backprop_stack(net.decoder, tape.decoder_acts, grad_xhat, grads.decoder, weight);
    const std::size_t latent = net.arch.latent_dim;
    std::vector<double> grad_head(2 * latent, 0.0);
    std::span<double> grad_mu(grad_head.data(), latent);
    std::span<double> grad_logvar(grad_head.data() + latent, latent);
    for (std::size_t i = 0; i < latent; ++i) {
        grad_mu[i] = grad_z[i];
        grad_logvar[i] = grad_z[i] * tape.z.noise[i] * 0.5 * std::exp(0.5 * tape.posterior.logvar[i]);
    }
    add_kl_grad(tape.posterior, loss.beta, grad_mu, grad_logvar);
    backprop_stack(net.encoder, tape.encoder_acts, std::move(grad_head), grads.encoder, weight);
}

Gradients backward(const Tape& tape, const LossBreakdown& loss) {
    if (tape.network == nullptr) throw UsageError("backward called on an empty tape");
    auto grads = Gradients::zeros_like(*tape.network);
    backward(tape, loss, grads, 1.0);
    return grads;
}

OptimizerState OptimizerState::for_network(const Network& net, const AdamConfig& config) {
    OptimizerState state;
    state.config = config;
    for (const auto& block : parameter_blocks(const_cast<Network&>(net))) {
        state.first_moment.emplace_back(block.values.size(), 0.0);
        state.second_moment.emplace_back(block.values.size(), 0.0);
    }
    return state;
}

void adam_step(Network& net, const Gradients& grads, OptimizerState& state) {
    auto params = parameter_blocks(net);
    const auto g = grads.blocks();
    if (g.size() != params.size() || state.first_moment.size() != params.size()) {
        throw ShapeError("optimizer state, gradients and parameters are not congruent");
    }
    ++state.step;
    const auto& cfg = state.config;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t b = 0; b < params.size(); ++b) {
        auto& p = params[b];
        if (p.values.size() != g[b].size() || p.values.size() != state.first_moment[b].size()) {
            throw ShapeError("block '" + p.name + "' is not congruent with its gradient");
        }
        if (p.noise_scale && !net.noise.learnable) continue;
        auto& m = state.first_moment[b];
        auto& v = state.second_moment[b];
        for (std::size_t i = 0; i < p.values.size(); ++i) {
            const double gi = g[b][i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            p.values[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
    }
    ++net.version;
}

}  // namespace wvae
