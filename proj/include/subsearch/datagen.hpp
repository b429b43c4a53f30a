#pragma once

#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "subsearch/search.hpp"

namespace subsearch {

// Offline trajectories and the training datasets carved from them. Every
// emitted pair is replay-consistent with the environment model by
// construction; `audit_trajectory` re-checks it.

template <Environment Env>
struct Trajectory {
    std::vector<typename Env::State> states;   // s_0 .. s_n
    std::vector<typename Env::Action> actions; // a_0 .. a_{n-1}
};

template <Environment Env>
bool audit_trajectory(const Trajectory<Env>& t) {
    if (t.states.size() != t.actions.size() + 1) return false;
    for (std::size_t i = 0; i < t.actions.size(); ++i) {
        if (!Env::is_legal(t.states[i], t.actions[i])) return false;
        if (!(Env::next_state(t.states[i], t.actions[i]) == t.states[i + 1])) return false;
    }
    return Env::solved(t.states.back());
}

// Reversed random walks: scramble from solved, then walk back along the
// inverted moves. States run scrambled -> solved.
inline std::vector<Trajectory<RubikEnv>> gen_rubik_trajectories(std::size_t n,
                                                                std::size_t scramble_len,
                                                                std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_rubik_trajectories: n >= 1");
    std::vector<Trajectory<RubikEnv>> out;
    out.reserve(n);
    Rng seeder(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t inst_seed = seeder();
        auto [state, moves] = rubik::scramble(scramble_len, inst_seed);
        Trajectory<RubikEnv> t;
        t.states.push_back(state);
        for (auto it = moves.rbegin(); it != moves.rend(); ++it) {
            const auto inv = rubik::inverse(*it);
            t.actions.push_back(inv);
            t.states.push_back(rubik::next_state(t.states.back(), inv));
        }
        out.push_back(std::move(t));
    }
    return out;
}

// One trajectory per solvable corpus board; unsolvable or trivially solved
// boards are skipped (ids reported through `skipped` when given).
inline std::vector<Trajectory<SokobanEnv>> gen_sokoban_trajectories(
    const std::vector<sokoban::Board>& corpus, std::size_t node_limit,
    std::vector<std::size_t>* skipped = nullptr) {
    std::vector<Trajectory<SokobanEnv>> out;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        auto res = sokoban::exhaustive_solve(corpus[i], node_limit);
        if (res.status != sokoban::SolveStatus::Solved || res.path.empty()) {
            if (skipped) skipped->push_back(i);
            continue;
        }
        Trajectory<SokobanEnv> t;
        t.states.push_back(corpus[i]);
        for (auto a : res.path) {
            t.actions.push_back(a);
            t.states.push_back(sokoban::next_state(t.states.back(), a));
        }
        out.push_back(std::move(t));
    }
    return out;
}

// (s_i, a_i..a_{i+k-1}) for every window that fits.
template <Environment Env>
std::vector<std::pair<typename Env::State, std::vector<typename Env::Action>>>
build_subgoal_pairs(const std::vector<Trajectory<Env>>& trajs, int k) {
    if (k < 1) throw std::invalid_argument("build_subgoal_pairs: k >= 1");
    std::vector<std::pair<typename Env::State, std::vector<typename Env::Action>>> out;
    for (const auto& t : trajs) {
        const int n = static_cast<int>(t.actions.size());
        for (int i = 0; i + k <= n; ++i) {
            out.emplace_back(t.states[i],
                             std::vector<typename Env::Action>(
                                 t.actions.begin() + i, t.actions.begin() + i + k));
        }
    }
    return out;
}

// ((s_i, s_{i+d}), a_i) for all 1 <= d <= d_max, optionally subsampled to a
// cap with a seeded uniform draw.
template <Environment Env>
struct PolicySample {
    typename Env::State state;
    typename Env::State goal;
    typename Env::Action action;
};

template <Environment Env>
std::vector<PolicySample<Env>> build_policy_samples(
    const std::vector<Trajectory<Env>>& trajs, int d_max,
    std::size_t cap = 0, std::uint64_t seed = 0) {
    if (d_max < 1) throw std::invalid_argument("build_policy_samples: d_max >= 1");
    std::vector<PolicySample<Env>> out;
    for (const auto& t : trajs) {
        const int n = static_cast<int>(t.actions.size());
        for (int d = 1; d <= d_max; ++d)
            for (int i = 0; i + d <= n; ++i)
                out.push_back({t.states[i], t.states[i + d], t.actions[i]});
    }
    if (cap > 0 && out.size() > cap) {
        Rng rng(seed);
        auto keep = sample_indices(out.size(), cap, rng);
        std::vector<PolicySample<Env>> sub;
        sub.reserve(cap);
        for (auto i : keep) sub.push_back(std::move(out[i]));
        out = std::move(sub);
    }
    return out;
}

// (s_i, i - n): the negative number of steps remaining in the trajectory.
template <Environment Env>
std::vector<std::pair<typename Env::State, double>> build_value_samples(
    const std::vector<Trajectory<Env>>& trajs) {
    std::vector<std::pair<typename Env::State, double>> out;
    for (const auto& t : trajs) {
        const int n = static_cast<int>(t.actions.size());
        for (int i = 0; i <= n; ++i)
            out.emplace_back(t.states[i], static_cast<double>(i - n));
    }
    return out;
}

// Seeded split at trajectory granularity: disjoint, exhaustive, and stable
// under re-runs with the same seed.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_dataset(const std::vector<T>& items,
                                                        double fraction,
                                                        std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw std::invalid_argument("split_dataset: fraction in [0,1]");
    std::vector<std::size_t> idx(items.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(seed);
    deterministic_shuffle(idx, rng);
    const auto cut = static_cast<std::size_t>(
        fraction * static_cast<double>(items.size()) + 0.5);
    std::pair<std::vector<T>, std::vector<T>> out;
    for (std::size_t i = 0; i < idx.size(); ++i)
        (i < cut ? out.first : out.second).push_back(items[idx[i]]);
    return out;
}

// --- verifier dataset ---------------------------------------------------------

template <Environment Env>
struct VerifierSample {
    typename Env::State start;
    typename Env::State candidate;
    int k = 0;          // generator distance; fixes the CLLP step limit
    bool label = false; // CLLP reachability under the collecting bundle
    std::size_t source_instance = 0;
};

struct VerifierDatasetReport {
    std::size_t positives = 0;
    std::size_t negatives = 0;
    std::size_t instances_run = 0;
};

// Runs the planner with the verifier disabled ((t_lo, t_hi) = (0, 1), so
// reachability is decided solely by CLLP) on each instance; every CLLP check
// becomes one labeled sample. At most cap_per_instance samples are kept per
// instance (seeded uniform subsample).
template <Environment Env>
std::vector<VerifierSample<Env>> collect_verifier_dataset(
    const std::vector<typename Env::State>& instances,
    const ComponentBundle<Env>& bundle, const PlannerConfig& config,
    std::size_t cap_per_instance, std::uint64_t seed,
    VerifierDatasetReport* report = nullptr) {
    if (config.verifier_active())
        throw std::invalid_argument(
            "collect_verifier_dataset: config must disable the verifier (t_lo=0, t_hi=1)");
    std::vector<VerifierSample<Env>> out;
    Rng seeder(seed);
    for (std::size_t inst = 0; inst < instances.size(); ++inst) {
        const std::uint64_t sub_seed = seeder();
        std::vector<VerifierSample<Env>> local;
        SolveHooks<Env> hooks;
        hooks.on_cllp_check = [&](const typename Env::State& s,
                                  const typename Env::State& cand, int k, bool ok) {
            local.push_back({s, cand, k, ok, inst});
        };
        (void)solve<Env>(instances[inst], bundle, config, &hooks);
        if (cap_per_instance > 0 && local.size() > cap_per_instance) {
            Rng rng(sub_seed);
            auto keep = sample_indices(local.size(), cap_per_instance, rng);
            std::vector<VerifierSample<Env>> sub;
            sub.reserve(keep.size());
            for (auto i : keep) sub.push_back(std::move(local[i]));
            local = std::move(sub);
        }
        if (report) {
            ++report->instances_run;
            for (const auto& s : local) (s.label ? report->positives : report->negatives)++;
        }
        out.insert(out.end(), local.begin(), local.end());
    }
    return out;
}

// --- line-oriented dataset files ----------------------------------------------
//
// Trajectory files ("subsearch-trajectories v1"): one trajectory per line,
//   states joined by ';' (single-line state codec), then TAB, then actions
//   joined by ','.
// Verifier sample files ("subsearch-verifier-samples v1"): one sample per
//   line: instance TAB k TAB label TAB start TAB candidate.

template <Environment Env>
void save_trajectories(const std::vector<Trajectory<Env>>& trajs, std::ostream& os) {
    os << "# subsearch-trajectories v1 env=" << Env::name() << "\n";
    for (const auto& t : trajs) {
        for (std::size_t i = 0; i < t.states.size(); ++i)
            os << (i ? ";" : "") << Env::encode_line(t.states[i]);
        os << '\t';
        for (std::size_t i = 0; i < t.actions.size(); ++i)
            os << (i ? "," : "") << Env::encode_action(t.actions[i]);
        os << '\n';
    }
}

template <Environment Env>
std::vector<Trajectory<Env>> load_trajectories(std::istream& is) {
    std::string header;
    std::getline(is, header);
    const std::string want = "# subsearch-trajectories v1 env=" + Env::name();
    if (header != want)
        throw std::runtime_error("trajectory file: bad header '" + header + "'");
    std::vector<Trajectory<Env>> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("trajectory file: missing field separator");
        Trajectory<Env> t;
        std::stringstream states(line.substr(0, tab));
        std::string tok;
        while (std::getline(states, tok, ';')) t.states.push_back(Env::decode_line(tok));
        std::stringstream actions(line.substr(tab + 1));
        while (std::getline(actions, tok, ','))
            if (!tok.empty()) t.actions.push_back(Env::decode_action(tok));
        if (t.states.size() != t.actions.size() + 1)
            throw std::runtime_error("trajectory file: inconsistent record");
        out.push_back(std::move(t));
    }
    return out;
}

template <Environment Env>
void save_verifier_samples(const std::vector<VerifierSample<Env>>& samples,
                           std::ostream& os) {
    os << "# subsearch-verifier-samples v1 env=" << Env::name() << "\n";
    for (const auto& s : samples) {
        os << s.source_instance << '\t' << s.k << '\t' << (s.label ? 1 : 0) << '\t'
           << Env::encode_line(s.start) << '\t' << Env::encode_line(s.candidate) << '\n';
    }
}

template <Environment Env>
std::vector<VerifierSample<Env>> load_verifier_samples(std::istream& is) {
    std::string header;
    std::getline(is, header);
    const std::string want = "# subsearch-verifier-samples v1 env=" + Env::name();
    if (header != want)
        throw std::runtime_error("verifier sample file: bad header '" + header + "'");
    std::vector<VerifierSample<Env>> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string inst, k, label, start, cand;
        if (!std::getline(ss, inst, '\t') || !std::getline(ss, k, '\t') ||
            !std::getline(ss, label, '\t') || !std::getline(ss, start, '\t') ||
            !std::getline(ss, cand, '\t'))
            throw std::runtime_error("verifier sample file: short record");
        VerifierSample<Env> s;
        s.source_instance = std::stoull(inst);
        s.k = std::stoi(k);
        s.label = label == "1";
        s.start = Env::decode_line(start);
        s.candidate = Env::decode_line(cand);
        out.push_back(std::move(s));
    }
    return out;
}

// --- sokoban board generation ---------------------------------------------------

struct BoardGenParams {
    int width = 7;
    int height = 7;
    int boxes = 2;
    double wall_density = 0.12; // interior wall probability
    std::size_t solver_node_limit = 400000;
    int max_attempts_per_board = 200;
};

// Rejection sampling: bordered random rooms, boxes/targets/agent placed on
// distinct floor cells, kept only when the exhaustive solver finds a
// nontrivial solution.
inline std::vector<sokoban::Board> generate_boards(std::size_t count,
                                                   const BoardGenParams& p,
                                                   std::uint64_t seed) {
    std::vector<sokoban::Board> out;
    Rng rng(seed);
    while (out.size() < count) {
        bool made = false;
        for (int attempt = 0; attempt < p.max_attempts_per_board && !made; ++attempt) {
            sokoban::Board b;
            b.width = p.width;
            b.height = p.height;
            const int n = p.width * p.height;
            b.walls.assign(n, 0);
            b.targets.assign(n, 0);
            b.boxes.assign(n, 0);
            std::vector<int> floor_cells;
            for (int y = 0; y < p.height; ++y) {
                for (int x = 0; x < p.width; ++x) {
                    const int i = b.cell(x, y);
                    const bool border =
                        x == 0 || y == 0 || x == p.width - 1 || y == p.height - 1;
                    if (border || uniform_real(rng) < p.wall_density)
                        b.walls[i] = 1;
                    else
                        floor_cells.push_back(i);
                }
            }
            if (static_cast<int>(floor_cells.size()) < 2 * p.boxes + 1) continue;
            deterministic_shuffle(floor_cells, rng);
            std::size_t pos = 0;
            for (int i = 0; i < p.boxes; ++i) b.boxes[floor_cells[pos++]] = 1;
            for (int i = 0; i < p.boxes; ++i) b.targets[floor_cells[pos++]] = 1;
            b.agent = floor_cells[pos++];
            if (sokoban::solved(b)) continue;
            auto res = sokoban::exhaustive_solve(b, p.solver_node_limit);
            if (res.status != sokoban::SolveStatus::Solved || res.path.size() < 2)
                continue;
            out.push_back(std::move(b));
            made = true;
        }
        if (!made)
            throw std::runtime_error("generate_boards: exhausted attempts; relax params");
    }
    return out;
}

} // namespace subsearch
