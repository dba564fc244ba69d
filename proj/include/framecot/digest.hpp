#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace framecot {

// Lowercase hex SHA-256. This is the project-wide frame content hash.
std::string sha256_hex(std::string_view bytes);

inline constexpr std::size_t kContentHashHexLength = 64;

bool is_content_hash(std::string_view s) noexcept;

std::string base64_encode(std::string_view bytes);
// Throws Error(ProtocolError) on invalid input.
std::string base64_decode(std::string_view text);

// 64-bit FNV-1a. Used for hashed feature buckets and seed mixing; not for identity.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace framecot
