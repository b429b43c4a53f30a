#pragma once

#include <cstdint>
#include <vector>

#include "subsearch/common.hpp"
#include "subsearch/env.hpp"

namespace subsearch {

// Hashed one-hot features over a fixed dimension D (default 2^18).
//
// Single-state vector: one active index per (position, content) atom of the
// canonical encoding, hashed as ('s', position, content).
// Pair vector (policy and verifier inputs): the first state's atoms under
// tag 'a', the second's under tag 'b', plus one difference feature
// ('d', position, content_a, content_b) for every position whose content
// differs. All indices are FNV-1a mod D, stable across processes.
inline constexpr std::uint32_t kDefaultFeatureDim = 1u << 18;

namespace detail {

inline std::uint32_t feature_index(char tag, std::uint16_t pos, std::uint8_t a,
                                   std::uint8_t b, std::uint32_t dim) {
    unsigned char bytes[5] = {static_cast<unsigned char>(tag),
                              static_cast<unsigned char>(pos & 0xff),
                              static_cast<unsigned char>(pos >> 8), a, b};
    return static_cast<std::uint32_t>(fnv1a(bytes, 5) % dim);
}

} // namespace detail

template <Environment Env>
std::vector<std::uint32_t> state_features(const typename Env::State& s,
                                          std::uint32_t dim = kDefaultFeatureDim) {
    std::vector<std::pair<std::uint16_t, std::uint8_t>> atoms;
    Env::feature_atoms(s, atoms);
    std::vector<std::uint32_t> out;
    out.reserve(atoms.size());
    for (auto [pos, code] : atoms)
        out.push_back(detail::feature_index('s', pos, code, 0, dim));
    return out;
}

template <Environment Env>
std::vector<std::uint32_t> pair_features(const typename Env::State& s,
                                         const typename Env::State& s_prime,
                                         std::uint32_t dim = kDefaultFeatureDim) {
    std::vector<std::pair<std::uint16_t, std::uint8_t>> a, b;
    Env::feature_atoms(s, a);
    Env::feature_atoms(s_prime, b);
    std::vector<std::uint32_t> out;
    out.reserve(a.size() + b.size() + 16);
    for (auto [pos, code] : a)
        out.push_back(detail::feature_index('a', pos, code, 0, dim));
    for (auto [pos, code] : b)
        out.push_back(detail::feature_index('b', pos, code, 0, dim));
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].second != b[i].second)
            out.push_back(detail::feature_index('d', a[i].first, a[i].second,
                                                b[i].second, dim));
    }
    return out;
}

} // namespace subsearch
