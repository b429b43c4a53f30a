#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <unordered_map>
#include <stdexcept>
#include <string>
#include <vector>

#include "subsearch/common.hpp"
#include "subsearch/env.hpp"
#include "subsearch/linear_model.hpp"

namespace subsearch {

// A k-subgoal generator realized as mined macro operators: fixed-length
// action sequences ranked by frequency, keyed by a coarse context bucket of
// the state (FNV of the canonical encoding mod num_buckets). States whose
// bucket holds no entry fall back to the globally most frequent macros.
// Applying a macro replays its k actions through the model, so a macro
// subgoal is always reachable in exactly k environment steps even when the
// low-level policy later fails to find that path.
struct MacroParams {
    std::uint32_t num_buckets = 1u << 20;
    int max_macros_per_key = 16;
};

struct MacroEntry {
    std::vector<std::uint8_t> actions; // action indices, length k
    std::uint64_t count = 0;
};

struct MacroTable {
    int k = 0;
    std::uint32_t num_buckets = 0;
    std::map<std::uint32_t, std::vector<MacroEntry>> buckets;
    std::vector<MacroEntry> global;
};

namespace detail {

inline void rank_entries(std::vector<MacroEntry>& entries, int cap) {
    std::sort(entries.begin(), entries.end(), [](const MacroEntry& a, const MacroEntry& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.actions < b.actions;
    });
    if (cap >= 0 && entries.size() > static_cast<std::size_t>(cap))
        entries.resize(static_cast<std::size_t>(cap));
}

} // namespace detail

template <Environment Env>
std::uint32_t macro_bucket(const typename Env::State& s, std::uint32_t num_buckets) {
    return static_cast<std::uint32_t>(fnv1a(Env::macro_key(s)) % num_buckets);
}

template <Environment Env>
MacroTable train_macro_generator(
    const std::vector<std::pair<typename Env::State, std::vector<typename Env::Action>>>&
        dataset,
    int k, const MacroParams& params) {
    if (k < 1 || k > 15)
        throw std::invalid_argument("train_macro_generator: k must be in [1,15]");
    MacroTable table;
    table.k = k;
    table.num_buckets = params.num_buckets;

    // sequences are packed 4 bits per action for fast counting
    auto pack = [&](const std::vector<typename Env::Action>& actions) {
        std::uint64_t bits = 0;
        for (std::size_t i = 0; i < actions.size(); ++i) {
            const int idx = Env::action_index(actions[i]);
            if (idx < 0 || idx > 15)
                throw std::invalid_argument("train_macro_generator: action index > 15");
            bits |= static_cast<std::uint64_t>(idx) << (4 * i);
        }
        return bits;
    };
    auto unpack = [&](std::uint64_t bits) {
        std::vector<std::uint8_t> seq(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) seq[i] = static_cast<std::uint8_t>((bits >> (4 * i)) & 0xf);
        return seq;
    };

    std::unordered_map<std::uint32_t, std::unordered_map<std::uint64_t, std::uint64_t>>
        counts;
    std::unordered_map<std::uint64_t, std::uint64_t> global_counts;
    for (const auto& [state, actions] : dataset) {
        if (static_cast<int>(actions.size()) != k)
            throw std::invalid_argument("train_macro_generator: sequence length != k");
        const std::uint64_t bits = pack(actions);
        ++counts[macro_bucket<Env>(state, params.num_buckets)][bits];
        ++global_counts[bits];
    }
    for (const auto& [bucket, seqs] : counts) {
        auto& entries = table.buckets[bucket];
        entries.reserve(seqs.size());
        for (const auto& [bits, count] : seqs) entries.push_back({unpack(bits), count});
        detail::rank_entries(entries, params.max_macros_per_key);
    }
    for (const auto& [bits, count] : global_counts)
        table.global.push_back({unpack(bits), count});
    detail::rank_entries(table.global, params.max_macros_per_key);
    return table;
}

// Apply the top-ranked macros for the state's bucket, then fill remaining
// slots from the globally most frequent macros (states with no bucket entry
// use the global list alone); emit distinct resulting states, never the
// input. Macros whose replay hits an illegal action are skipped.
template <Environment Env>
std::vector<typename Env::State> generate_macro_subgoals(const MacroTable& table,
                                                         const typename Env::State& s,
                                                         int count) {
    std::vector<typename Env::State> out;
    if (count < 1) return out;
    auto apply_from = [&](const std::vector<MacroEntry>& entries) {
        for (const auto& entry : entries) {
            if (static_cast<int>(out.size()) >= count) return;
            typename Env::State cur = s;
            bool ok = true;
            for (auto ai : entry.actions) {
                const auto a = Env::action_from_index(static_cast<int>(ai));
                if (!Env::is_legal(cur, a)) {
                    ok = false;
                    break;
                }
                cur = Env::next_state(cur, a);
            }
            if (!ok || cur == s) continue;
            if (std::find(out.begin(), out.end(), cur) != out.end()) continue;
            out.push_back(cur);
        }
    };
    if (table.num_buckets > 0) {
        auto it = table.buckets.find(macro_bucket<Env>(s, table.num_buckets));
        if (it != table.buckets.end()) apply_from(it->second);
    }
    if (static_cast<int>(out.size()) < count) apply_from(table.global);
    return out;
}

// --- persistence ------------------------------------------------------------
// magic "SSMT" | u32 version=1 | u32 k | u32 num_buckets | u64 n_buckets |
//   per bucket: u32 id | u32 n | n * (u64 count, k * u8 actions) |
// u32 n_global | global entries in the same shape.

inline void save_macro_table(const MacroTable& t, std::ostream& os) {
    os.write("SSMT", 4);
    detail::put<std::uint32_t>(os, 1);
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(t.k));
    detail::put<std::uint32_t>(os, t.num_buckets);
    auto put_entries = [&](const std::vector<MacroEntry>& entries) {
        detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(entries.size()));
        for (const auto& e : entries) {
            detail::put<std::uint64_t>(os, e.count);
            os.write(reinterpret_cast<const char*>(e.actions.data()),
                     static_cast<std::streamsize>(e.actions.size()));
        }
    };
    detail::put<std::uint64_t>(os, t.buckets.size());
    for (const auto& [id, entries] : t.buckets) {
        detail::put<std::uint32_t>(os, id);
        put_entries(entries);
    }
    put_entries(t.global);
}

inline MacroTable load_macro_table(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string_view(magic, 4) != "SSMT")
        throw std::runtime_error("macro load: bad magic");
    if (detail::get<std::uint32_t>(is) != 1)
        throw std::runtime_error("macro load: unsupported version");
    MacroTable t;
    t.k = static_cast<int>(detail::get<std::uint32_t>(is));
    t.num_buckets = detail::get<std::uint32_t>(is);
    auto get_entries = [&](std::vector<MacroEntry>& entries) {
        const auto n = detail::get<std::uint32_t>(is);
        entries.resize(n);
        for (auto& e : entries) {
            e.count = detail::get<std::uint64_t>(is);
            e.actions.resize(static_cast<std::size_t>(t.k));
            is.read(reinterpret_cast<char*>(e.actions.data()), t.k);
            if (!is) throw std::runtime_error("macro load: truncated file");
        }
    };
    const auto nb = detail::get<std::uint64_t>(is);
    for (std::uint64_t i = 0; i < nb; ++i) {
        const auto id = detail::get<std::uint32_t>(is);
        get_entries(t.buckets[id]);
    }
    get_entries(t.global);
    return t;
}

inline void save_macro_table_file(const MacroTable& t, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("macro save: cannot open " + path);
    save_macro_table(t, os);
}

inline MacroTable load_macro_table_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("macro load: cannot open " + path);
    return load_macro_table(is);
}

} // namespace subsearch
