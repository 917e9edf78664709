#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace commitlink {

/// 64-bit FNV-1a. Stable across platforms, used wherever a hash feeds a
/// persisted or compared value.
constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL) {
    std::uint64_t h = basis;
    for (const char c : data) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's contents. Throws IoError when unreadable.
std::string sha256_file(const std::filesystem::path& path);

} // namespace commitlink
