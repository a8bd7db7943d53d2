#pragma once

#include <iosfwd>
#include <string>

#include "wvae/net.hpp"

namespace wvae {

struct Checkpoint {
    Network network;
    OptimizerState optimizer;
};

// "WVN1" files: JSON header line (architecture, tensor table, optimizer
// settings, step count) followed by little-endian doubles: all parameter
// tensors, then the first and second Adam moments in the same order.
void write_checkpoint(std::ostream& out, const Network& net, const OptimizerState& state);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const Network& net, const OptimizerState& state);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace wvae
