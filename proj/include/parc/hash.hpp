#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace parc {

inline constexpr std::uint64_t kFnvBasis = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

// FNV-1a over raw bytes. `basis` lets callers chain hashes or fold a seed in.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = kFnvBasis) {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t basis = kFnvBasis) {
    return fnv1a64(std::string_view(static_cast<const char*>(data), size), basis);
}

// splitmix64 step; drives the mock embedding generator.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::string to_hex16(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

}  // namespace parc
