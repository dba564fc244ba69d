#include "framecot/digest.hpp"

#include "framecot/error.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <array>

namespace framecot {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MalformedTag: return "MalformedTag";
        case ErrorCode::MissingThink: return "MissingThink";
        case ErrorCode::DanglingFrames: return "DanglingFrames";
        case ErrorCode::EmptyVideo: return "EmptyVideo";
        case ErrorCode::EmptyList: return "EmptyList";
        case ErrorCode::BadManifest: return "BadManifest";
        case ErrorCode::UnknownVideo: return "UnknownVideo";
        case ErrorCode::UnknownFrame: return "UnknownFrame";
        case ErrorCode::BackendUnavailable: return "BackendUnavailable";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::ProtocolError: return "ProtocolError";
        case ErrorCode::NoMatch: return "NoMatch";
        case ErrorCode::GenerationFailed: return "GenerationFailed";
        case ErrorCode::ToolInRound2: return "ToolInRound2";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::AmbiguousMatch: return "AmbiguousMatch";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
}

bool is_content_hash(std::string_view s) noexcept {
    if (s.size() != kContentHashHexLength) return false;
    for (char c : s) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    }
    return true;
}

std::string base64_encode(std::string_view bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) fail(ErrorCode::ProtocolError, "base64 length not a multiple of 4");
    std::string out(3 * text.size() / 4, '\0');
    int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
    if (n < 0) fail(ErrorCode::ProtocolError, "invalid base64");
    // EVP_DecodeBlock keeps the zero bytes produced by '=' padding.
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

}  // namespace framecot
