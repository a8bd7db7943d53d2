#pragma once

#include <stdexcept>
#include <string>

namespace wvae {

// Array extents that do not fit an operation (odd lengths, non-dyadic
// images, mismatched bands).
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Scalar arguments outside their admissible range.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Malformed input files (CIFAR records, dumps, checkpoints, PNM images).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid or inconsistent run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A loss or parameter became NaN/Inf.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// API misuse, e.g. backpropagating a tape recorded against older weights.
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace wvae
