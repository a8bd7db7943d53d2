#include "wvae/checkpoint.hpp"

#include <fstream>

#include "wvae/binary_io.hpp"
#include "wvae/errors.hpp"

namespace wvae {

namespace {

nlohmann::json architecture_json(const Architecture& a) {
    return {{"kind", to_string(a.kind)}, {"height", a.height},         {"width", a.width},
            {"channels", a.channels},    {"levels", a.levels},         {"hidden", a.hidden},
            {"latent_dim", a.latent_dim}};
}

Architecture architecture_from_json(const nlohmann::json& j) {
    Architecture a;
    a.kind = model_kind_from_string(j.at("kind").get<std::string>());
    a.height = j.at("height").get<std::size_t>();
    a.width = j.at("width").get<std::size_t>();
    a.channels = j.at("channels").get<std::size_t>();
    a.levels = j.at("levels").get<int>();
    a.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    a.latent_dim = j.at("latent_dim").get<std::size_t>();
    return a;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Network& net, const OptimizerState& state) {
    Network& mutable_net = const_cast<Network&>(net);
    const auto blocks = parameter_blocks(mutable_net);
    if (state.first_moment.size() != blocks.size()) throw ShapeError("optimizer state does not match the network");

    nlohmann::json tensors = nlohmann::json::array();
    std::size_t offset = 0;
    for (const auto& b : blocks) {
        tensors.push_back({{"name", b.name}, {"size", b.values.size()}, {"offset", offset}});
        offset += b.values.size();
    }
    nlohmann::json activations = nlohmann::json::array();
    for (const auto* stack : {&net.encoder, &net.decoder}) {
        for (const auto& l : *stack) activations.push_back(to_string(l.activation));
    }
    nlohmann::json header = {
        {"magic", "WVN1"},
        {"architecture", architecture_json(net.arch)},
        {"activations", activations},
        {"noise", {{"learnable", net.noise.learnable},
                   {"rho_approx", net.noise.rho_approx},
                   {"rho_detail", net.noise.rho_detail}}},
        {"optimizer", {{"learning_rate", state.config.learning_rate},
                       {"beta1", state.config.beta1},
                       {"beta2", state.config.beta2},
                       {"epsilon", state.config.epsilon},
                       {"step", state.step}}},
        {"parameter_count", offset},
        {"tensors", tensors}};
    binary::write_header(out, header);
    for (const auto& b : blocks) binary::write_doubles(out, b.values);
    for (const auto& m : state.first_moment) binary::write_doubles(out, m);
    for (const auto& v : state.second_moment) binary::write_doubles(out, v);
}

Checkpoint read_checkpoint(std::istream& in) {
    const auto header = binary::read_header(in);
    Checkpoint ckpt;
    std::vector<std::size_t> sizes;
    try {
        if (header.at("magic").get<std::string>() != "WVN1") throw FormatError("not a checkpoint (bad magic)");
        const auto arch = architecture_from_json(header.at("architecture"));
        ckpt.network = init_network(arch, 0);
        ckpt.network.noise.learnable = header.at("noise").at("learnable").get<bool>();

        const auto& opt = header.at("optimizer");
        AdamConfig cfg{opt.at("learning_rate").get<double>(), opt.at("beta1").get<double>(),
                       opt.at("beta2").get<double>(), opt.at("epsilon").get<double>()};
        ckpt.optimizer = OptimizerState::for_network(ckpt.network, cfg);
        ckpt.optimizer.step = opt.at("step").get<std::uint64_t>();

        const auto blocks = parameter_blocks(ckpt.network);
        const auto& tensors = header.at("tensors");
        if (tensors.size() != blocks.size()) throw FormatError("tensor table does not match the architecture");
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            if (tensors[i].at("name").get<std::string>() != blocks[i].name ||
                tensors[i].at("size").get<std::size_t>() != blocks[i].values.size()) {
                throw FormatError("tensor '" + blocks[i].name + "' does not match the architecture");
            }
            sizes.push_back(blocks[i].values.size());
        }
        const auto& acts = header.at("activations");
        std::size_t k = 0;
        for (auto* stack : {&ckpt.network.encoder, &ckpt.network.decoder}) {
            for (auto& l : *stack) {
                if (k >= acts.size()) throw FormatError("activation list too short");
                l.activation = activation_from_string(acts[k++].get<std::string>());
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed checkpoint header: ") + e.what());
    } catch (const ShapeError& e) {
        throw FormatError(std::string("invalid checkpoint architecture: ") + e.what());
    } catch (const DomainError& e) {
        throw FormatError(std::string("invalid checkpoint architecture: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("invalid checkpoint architecture: ") + e.what());
    }

    auto blocks = parameter_blocks(ckpt.network);
    for (auto& b : blocks) {
        const auto values = binary::read_doubles(in, b.values.size());
        std::copy(values.begin(), values.end(), b.values.begin());
    }
    for (auto& m : ckpt.optimizer.first_moment) m = binary::read_doubles(in, m.size());
    for (auto& v : ckpt.optimizer.second_moment) v = binary::read_doubles(in, v.size());
    binary::expect_end(in);
    return ckpt;
}

void save_checkpoint(const std::string& path, const Network& net, const OptimizerState& state) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_checkpoint(out, net, state);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint " + path);
    return read_checkpoint(in);
}

}  // namespace wvae
