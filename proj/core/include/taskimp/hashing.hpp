#pragma once

#include <cstdint>
#include <string_view>

namespace taskimp {

/// 64-bit FNV-1a. Used by the fallback embedder for token bucketing and by
/// the CLI for config provenance hashes.
constexpr std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace taskimp
