#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

namespace wvae::binary {

// Header line shared by the coefficient dump and checkpoint files: compact
// JSON terminated by '\n'.
void write_header(std::ostream& out, const nlohmann::json& header);
nlohmann::json read_header(std::istream& in);

void write_doubles(std::ostream& out, std::span<const double> values);
std::vector<double> read_doubles(std::istream& in, std::size_t count);

// Throws FormatError if any bytes remain in the stream.
void expect_end(std::istream& in);

}  // namespace wvae::binary
