#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace commitlink::binio {

// Little-endian host assumed; index files are not meant to move between
// architectures.

void write_bytes(std::ostream& out, const void* data, std::size_t size);
void read_bytes(std::istream& in, void* data, std::size_t size);

template <class T>
    requires std::is_trivially_copyable_v<T>
void write(std::ostream& out, const T& value) {
    write_bytes(out, &value, sizeof(T));
}

template <class T>
    requires std::is_trivially_copyable_v<T>
T read(std::istream& in) {
    T value{};
    read_bytes(in, &value, sizeof(T));
    return value;
}

template <class T>
    requires std::is_trivially_copyable_v<T>
void write_vector(std::ostream& out, const std::vector<T>& values) {
    write<std::uint64_t>(out, values.size());
    if (!values.empty()) {
        write_bytes(out, values.data(), values.size() * sizeof(T));
    }
}

template <class T>
    requires std::is_trivially_copyable_v<T>
std::vector<T> read_vector(std::istream& in) {
    const auto n = read<std::uint64_t>(in);
    std::vector<T> values(n);
    if (n > 0) {
        read_bytes(in, values.data(), n * sizeof(T));
    }
    return values;
}

void write_string(std::ostream& out, std::string_view s);
std::string read_string(std::istream& in);

void write_strings(std::ostream& out, const std::vector<std::string>& values);
std::vector<std::string> read_strings(std::istream& in);

/// Writes an 8-byte magic tag followed by a format version.
void write_header(std::ostream& out, std::string_view magic, std::uint32_t version);

/// Throws DataError when the tag differs or the version is unsupported.
std::uint32_t read_header(std::istream& in, std::string_view magic, std::uint32_t max_version);

} // namespace commitlink::binio
