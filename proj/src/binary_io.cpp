#include "wvae/binary_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "wvae/errors.hpp"

namespace wvae::binary {

namespace {

std::uint64_t to_little_endian(std::uint64_t bits) {
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t swapped = 0;
        for (int i = 0; i < 8; ++i) {
            swapped = (swapped << 8) | (bits & 0xFF);
            bits >>= 8;
        }
        return swapped;
    }
    return bits;
}

}  // namespace

void write_header(std::ostream& out, const nlohmann::json& header) {
    out << header.dump() << '\n';
}

nlohmann::json read_header(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("missing header line");
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("invalid header JSON: ") + e.what());
    }
}

void write_doubles(std::ostream& out, std::span<const double> values) {
    std::vector<unsigned char> bytes(values.size() * 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto bits = to_little_endian(std::bit_cast<std::uint64_t>(values[i]));
        std::memcpy(bytes.data() + 8 * i, &bits, 8);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<double> read_doubles(std::istream& in, std::size_t count) {
    std::vector<unsigned char> bytes(count * 8);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
        throw FormatError("payload truncated: expected " + std::to_string(count) + " doubles");
    }
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, bytes.data() + 8 * i, 8);
        values[i] = std::bit_cast<double>(to_little_endian(bits));
    }
    return values;
}

void expect_end(std::istream& in) {
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after payload");
}

}  // namespace wvae::binary
