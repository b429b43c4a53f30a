#pragma once

#include <algorithm>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "subsearch/search.hpp"

namespace subsearch {

// Ground-truth components built on brute-force distance computation. Queries
// outside the precomputed range raise; the oracle never returns a silently
// wrong answer. All mutable caches are mutex-guarded so trained-free bundles
// can be shared across concurrent solves.

// --- Rubik ------------------------------------------------------------------

class RubikOracle {
public:
    using State = rubik::CubeState;

    // max_depth bounds solved-distance queries (feasible up to 6);
    // pair_radius bounds state-to-state queries (the verifier/CLLP horizon).
    RubikOracle(int max_depth, int pair_radius)
        : max_depth_(max_depth), pair_radius_(pair_radius), memo_(max_depth) {
        if (max_depth < 0 || max_depth > 6)
            throw std::invalid_argument("rubik oracle: max_depth must be in [0,6]");
        memo_.ensure_depth(max_depth);
    }

    int max_depth() const { return max_depth_; }
    int pair_radius() const { return pair_radius_; }

    int solved_distance(const State& s) {
        auto d = memo_.distance(s, max_depth_);
        if (!d)
            throw std::runtime_error(
                "rubik oracle: state beyond max_depth (oracle out of range)");
        return *d;
    }

    std::optional<int> solved_distance_opt(const State& s) {
        return memo_.distance(s, max_depth_);
    }

    // Distance from s to goal, absence when > pair_radius.
    std::optional<int> pair_distance(const State& s, const State& goal) {
        auto ball = goal_ball(goal);
        auto it = ball->find(s);
        if (it == ball->end()) return std::nullopt;
        return it->second;
    }

    // All states at solved-distance max(0, d(s)-k) reachable within k steps,
    // sorted by canonical encoding, truncated to count.
    std::vector<State> subgoals(const State& s, int k, int count) {
        const int d = solved_distance(s);
        const int target = std::max(0, d - k);
        std::unordered_map<State, int, rubik::CubeHash> ball;
        ball.emplace(s, 0);
        std::vector<State> frontier{s};
        std::vector<State> hits;
        for (int depth = 0; depth < k && !frontier.empty(); ++depth) {
            std::vector<State> next;
            for (const auto& cur : frontier) {
                for (int m = 0; m < rubik::kMoves; ++m) {
                    State t = rubik::next_state(cur, static_cast<rubik::Move>(m));
                    if (!ball.emplace(t, depth + 1).second) continue;
                    next.push_back(t);
                    if (t == s) continue;
                    auto dt = memo_.distance(t, max_depth_);
                    if (dt && *dt == target) hits.push_back(t);
                }
            }
            frontier = std::move(next);
        }
        std::sort(hits.begin(), hits.end(), [](const State& a, const State& b) {
            return rubik::serialize(a) < rubik::serialize(b);
        });
        hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
        if (static_cast<int>(hits.size()) > count) hits.resize(count);
        return hits;
    }

    rubik::Move policy_action(const State& s, const State& goal) {
        auto ball = goal_ball(goal);
        int best = std::numeric_limits<int>::max();
        rubik::Move best_move = rubik::Move::U;
        for (int m = 0; m < rubik::kMoves; ++m) {
            State t = rubik::next_state(s, static_cast<rubik::Move>(m));
            auto it = ball->find(t);
            const int d = it == ball->end() ? std::numeric_limits<int>::max() : it->second;
            if (d < best) {
                best = d;
                best_move = static_cast<rubik::Move>(m);
            }
        }
        return best_move;
    }

private:
    using Ball = std::unordered_map<State, int, rubik::CubeHash>;

    std::shared_ptr<const Ball> goal_ball(const State& goal) {
        {
            std::lock_guard lock(mutex_);
            auto it = cache_.find(goal);
            if (it != cache_.end()) return it->second;
        }
        auto ball = std::make_shared<Ball>();
        ball->emplace(goal, 0);
        std::vector<State> frontier{goal};
        for (int depth = 0; depth < pair_radius_; ++depth) {
            std::vector<State> next;
            for (const auto& cur : frontier) {
                for (int m = 0; m < rubik::kMoves; ++m) {
                    State t = rubik::next_state(cur, static_cast<rubik::Move>(m));
                    if (ball->emplace(t, depth + 1).second) next.push_back(t);
                }
            }
            frontier = std::move(next);
        }
        std::lock_guard lock(mutex_);
        if (cache_.size() >= kCacheCap) cache_.clear();
        cache_.emplace(goal, ball);
        return ball;
    }

    static constexpr std::size_t kCacheCap = 128;
    int max_depth_;
    int pair_radius_;
    rubik::DistanceMemo memo_;
    std::mutex mutex_;
    std::unordered_map<State, std::shared_ptr<const Ball>, rubik::CubeHash> cache_;
};

// Oracle bundle for the cube: generator emits exact-distance subgoals, value
// is -d(s) (hard error beyond max_depth), policy greedily descends the exact
// pair distance, verifier is 1.0 iff the goal lies within the pair radius.
inline ComponentBundle<RubikEnv> make_rubik_oracle_bundle(
    std::shared_ptr<RubikOracle> oracle, const std::vector<int>& distances) {
    ComponentBundle<RubikEnv> b;
    for (int k : distances) {
        b.generators[k] = [oracle, k](const rubik::CubeState& s, int count) {
            return oracle->subgoals(s, k, count);
        };
    }
    b.policy = [oracle](const rubik::CubeState& s, const rubik::CubeState& goal) {
        return oracle->policy_action(s, goal);
    };
    b.value = [oracle](const rubik::CubeState& s) {
        return -static_cast<double>(oracle->solved_distance(s));
    };
    b.verifier = [oracle](const rubik::CubeState& s, const rubik::CubeState& g) {
        return oracle->pair_distance(s, g) ? 1.0 : 0.0;
    };
    return b;
}

// --- Sokoban ----------------------------------------------------------------

// Per-instance oracle: the full configuration graph reachable from the
// instance root. Solved distance comes from a multi-source backward sweep;
// goal distances are computed on demand per goal and cached. Reachable
// configurations with no path to a solved state (deadlocks) report the
// finite sentinel value kUnsolvableValue instead of a hard error so that
// one-step expansions can still be scored.
class SokobanOracle {
public:
    using State = sokoban::Board;
    static constexpr double kUnsolvableValue = -1e6;
    static constexpr int kUnreachable = std::numeric_limits<int>::max();

    explicit SokobanOracle(const State& root, std::size_t node_limit = 2'000'000) {
        states_.push_back(root);
        preds_.emplace_back();
        id_of_.emplace(root, 0);
        for (std::size_t head = 0; head < states_.size(); ++head) {
            if (states_.size() > node_limit)
                throw std::runtime_error("sokoban oracle: instance graph too large");
            const State cur = states_[head];
            for (int a = 0; a < sokoban::kActions; ++a) {
                const auto act = static_cast<sokoban::AgentAction>(a);
                if (!sokoban::is_legal(cur, act)) continue;
                State nxt = sokoban::next_state(cur, act);
                auto [it, fresh] = id_of_.emplace(nxt, states_.size());
                if (fresh) {
                    states_.push_back(nxt);
                    preds_.emplace_back();
                }
                preds_[it->second].push_back(static_cast<std::int32_t>(head));
            }
        }
        solved_dist_.assign(states_.size(), kUnreachable);
        std::vector<std::int32_t> frontier;
        for (std::size_t i = 0; i < states_.size(); ++i) {
            if (sokoban::solved(states_[i])) {
                solved_dist_[i] = 0;
                frontier.push_back(static_cast<std::int32_t>(i));
            }
        }
        backward_sweep(solved_dist_, frontier);
    }

    std::size_t graph_size() const { return states_.size(); }

    int state_id(const State& s) const {
        auto it = id_of_.find(s);
        if (it == id_of_.end())
            throw std::runtime_error(
                "sokoban oracle: state outside instance graph (oracle out of range)");
        return static_cast<int>(it->second);
    }

    int solved_distance(const State& s) const { return solved_dist_[state_id(s)]; }

    std::optional<int> pair_distance(const State& s, const State& goal) {
        const int sid = state_id(s);
        auto dist = goal_dist(state_id(goal));
        if ((*dist)[sid] == kUnreachable) return std::nullopt;
        return (*dist)[sid];
    }

    std::vector<State> subgoals(const State& s, int k, int count) {
        const int d = solved_distance(s);
        if (d == kUnreachable) return {};
        const int target = std::max(0, d - k);
        // forward ball of radius k in the instance graph
        std::unordered_map<int, int> depth;
        depth.emplace(state_id(s), 0);
        std::vector<int> frontier{state_id(s)};
        std::vector<State> hits;
        for (int step = 0; step < k && !frontier.empty(); ++step) {
            std::vector<int> next;
            for (int cur : frontier) {
                for (int a = 0; a < sokoban::kActions; ++a) {
                    const auto act = static_cast<sokoban::AgentAction>(a);
                    if (!sokoban::is_legal(states_[cur], act)) continue;
                    const int nid = state_id(sokoban::next_state(states_[cur], act));
                    if (!depth.emplace(nid, step + 1).second) continue;
                    next.push_back(nid);
                    if (solved_dist_[nid] == target) hits.push_back(states_[nid]);
                }
            }
            frontier = std::move(next);
        }
        std::sort(hits.begin(), hits.end(), [](const State& a, const State& b) {
            return sokoban::serialize_xsb(a) < sokoban::serialize_xsb(b);
        });
        hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
        if (static_cast<int>(hits.size()) > count) hits.resize(count);
        return hits;
    }

    sokoban::AgentAction policy_action(const State& s, const State& goal) {
        auto dist = goal_dist(state_id(goal));
        int best = kUnreachable;
        auto best_act = sokoban::AgentAction::Up;
        bool found = false;
        for (int a = 0; a < sokoban::kActions; ++a) {
            const auto act = static_cast<sokoban::AgentAction>(a);
            if (!sokoban::is_legal(s, act)) continue;
            const int nid = state_id(sokoban::next_state(s, act));
            if (!found || (*dist)[nid] < best) {
                best = (*dist)[nid];
                best_act = act;
                found = true;
            }
        }
        return best_act; // Up when nothing is legal; callers treat it as failure
    }

private:
    void backward_sweep(std::vector<int>& dist, std::vector<std::int32_t> frontier) const {
        for (std::size_t head = 0; head < frontier.size(); ++head) {
            const auto cur = frontier[head];
            for (auto p : preds_[cur]) {
                if (dist[p] != kUnreachable) continue;
                dist[p] = dist[cur] + 1;
                frontier.push_back(p);
            }
        }
    }

    std::shared_ptr<const std::vector<int>> goal_dist(int goal_id) {
        {
            std::lock_guard lock(mutex_);
            auto it = goal_cache_.find(goal_id);
            if (it != goal_cache_.end()) return it->second;
        }
        auto dist = std::make_shared<std::vector<int>>(states_.size(), kUnreachable);
        (*dist)[goal_id] = 0;
        backward_sweep(*dist, {goal_id});
        std::lock_guard lock(mutex_);
        if (goal_cache_.size() >= kCacheCap) goal_cache_.clear();
        goal_cache_.emplace(goal_id, dist);
        return dist;
    }

    static constexpr std::size_t kCacheCap = 256;
    std::vector<State> states_;
    std::unordered_map<State, std::size_t, sokoban::BoardHash> id_of_;
    std::vector<std::vector<std::int32_t>> preds_; // reversed edges (with duplicates)
    std::vector<int> solved_dist_;
    std::mutex mutex_;
    std::unordered_map<int, std::shared_ptr<const std::vector<int>>> goal_cache_;
};

// verify_limit is the CLLP step budget the verifier answers for; pass the
// largest configured C2 so the verifier and the rollouts agree.
inline ComponentBundle<SokobanEnv> make_sokoban_oracle_bundle(
    std::shared_ptr<SokobanOracle> oracle, const std::vector<int>& distances,
    int verify_limit) {
    ComponentBundle<SokobanEnv> b;
    for (int k : distances) {
        b.generators[k] = [oracle, k](const sokoban::Board& s, int count) {
            return oracle->subgoals(s, k, count);
        };
    }
    b.policy = [oracle](const sokoban::Board& s, const sokoban::Board& goal) {
        return oracle->policy_action(s, goal);
    };
    b.value = [oracle](const sokoban::Board& s) {
        const int d = oracle->solved_distance(s);
        if (d == SokobanOracle::kUnreachable) return SokobanOracle::kUnsolvableValue;
        return -static_cast<double>(d);
    };
    b.verifier = [oracle, verify_limit](const sokoban::Board& s, const sokoban::Board& g) {
        auto d = oracle->pair_distance(s, g);
        return d && *d <= verify_limit ? 1.0 : 0.0;
    };
    return b;
}

} // namespace subsearch
