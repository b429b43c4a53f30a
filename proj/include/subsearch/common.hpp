#pragma once

#include <algorithm>
#include <cstdint>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace subsearch {

// FNV-1a, 64 bit. Used for feature hashing and state hashing; the constant
// is part of the on-disk model contract, so results must not depend on the
// platform or standard library.
inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t seed = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = kFnvOffset) {
    return fnv1a(s.data(), s.size(), seed);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
    return fnv1a(bytes, 8, h);
}

// Deterministic RNG helpers. std::uniform_int_distribution is
// implementation-defined, so seeded reproducibility across toolchains goes
// through these instead.
using Rng = std::mt19937_64;

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: empty range");
    const auto x = static_cast<unsigned __int128>(rng());
    return static_cast<std::size_t>((x * n) >> 64);
}

inline double uniform_real(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename T>
void deterministic_shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = uniform_index(rng, i);
        std::swap(v[i - 1], v[j]);
    }
}

// Choose m of n indices without replacement, order-stable in the original
// sequence. Used for seeded subsampling of datasets.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t m, Rng& rng) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (m >= n) return idx;
    deterministic_shuffle(idx, rng);
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace subsearch
