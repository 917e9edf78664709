#include "commitlink/common/binary_io.hpp"

#include "commitlink/common/errors.hpp"

#include <istream>
#include <ostream>

namespace commitlink::binio {

void write_bytes(std::ostream& out, const void* data, std::size_t size) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) {
        throw IoError("binary write failed");
    }
}

void read_bytes(std::istream& in, void* data, std::size_t size) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
    if (static_cast<std::size_t>(in.gcount()) != size) {
        throw DataError("unexpected end of binary stream");
    }
}

void write_string(std::ostream& out, std::string_view s) {
    write<std::uint64_t>(out, s.size());
    write_bytes(out, s.data(), s.size());
}

std::string read_string(std::istream& in) {
    const auto n = read<std::uint64_t>(in);
    if (n > (std::uint64_t{1} << 32)) {
        throw DataError("corrupt string length in binary stream");
    }
    std::string s(n, '\0');
    read_bytes(in, s.data(), n);
    return s;
}

void write_strings(std::ostream& out, const std::vector<std::string>& values) {
    write<std::uint64_t>(out, values.size());
    for (const auto& v : values) {
        write_string(out, v);
    }
}

std::vector<std::string> read_strings(std::istream& in) {
    const auto n = read<std::uint64_t>(in);
    std::vector<std::string> values;
    values.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        values.push_back(read_string(in));
    }
    return values;
}

void write_header(std::ostream& out, std::string_view magic, std::uint32_t version) {
    char tag[8] = {};
    for (std::size_t i = 0; i < magic.size() && i < 8; ++i) {
        tag[i] = magic[i];
    }
    write_bytes(out, tag, 8);
    write(out, version);
}

std::uint32_t read_header(std::istream& in, std::string_view magic, std::uint32_t max_version) {
    char tag[8] = {};
    read_bytes(in, tag, 8);
    for (std::size_t i = 0; i < 8; ++i) {
        const char expected = i < magic.size() ? magic[i] : '\0';
        if (tag[i] != expected) {
            throw DataError("not a " + std::string(magic) + " file");
        }
    }
    const auto version = read<std::uint32_t>(in);
    if (version == 0 || version > max_version) {
        throw DataError(std::string(magic) + ": unsupported format version " + std::to_string(version));
    }
    return version;
}

} // namespace commitlink::binio
