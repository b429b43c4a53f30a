#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "subsearch/env.hpp"

namespace subsearch {

// ---------------------------------------------------------------------------
// Budget accounting contract (shared by every strategy; the reference
// implementations in the tests mirror it line by line):
//
//   * graph_size counts state-evaluation events:
//       +1 for the root when its value is computed,
//       +1 for each subgoal candidate entering evaluation (after the
//          self-loop / seen / capacity skips, before verification),
//       +1 per CLLP policy step (the intermediate state it visits),
//     A state reached through several distinct events counts once per event.
//   * Each component invocation increments exactly one call counter.
//     policy calls made while reconstructing the final path are additionally
//     mirrored in policy_calls_reconstruction.
//   * high_level_nodes is the size of the seen set (root + accepted
//     subgoals); it never exceeds C1.
//   * The verifier is skipped entirely when (t_lo, t_hi) = (0, 1): scores in
//     [0,1] can never clear the strict thresholds, so the call would be dead
//     weight and the configuration must report zero verifier calls.
//   * graph_size_cap is checked at the loop head and before each candidate;
//     a CLLP rollout in flight may overshoot the cap by at most its step
//     limit.
// ---------------------------------------------------------------------------

enum class Strategy {
    LongestFirst,
    StrongestFirst,
    MixSubS,
    IterativeMixing,
    BestFS,
};

inline std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::LongestFirst: return "longest-first";
        case Strategy::StrongestFirst: return "strongest-first";
        case Strategy::MixSubS: return "mixsubs";
        case Strategy::IterativeMixing: return "iterative-mixing";
        default: return "bestfs";
    }
}

inline std::optional<Strategy> parse_strategy(std::string_view s) {
    for (auto v : {Strategy::LongestFirst, Strategy::StrongestFirst, Strategy::MixSubS,
                   Strategy::IterativeMixing, Strategy::BestFS})
        if (strategy_name(v) == s) return v;
    return std::nullopt;
}

// Max-priority key, lexicographic on (k, v), ties broken newest-first by
// insertion counter. Value-ordered strategies use k = 0 for every entry so
// the order degenerates to (v, counter).
struct PriorityKey {
    int k = 0;
    double v = 0.0;
    std::uint64_t counter = 0;

    friend bool operator<(const PriorityKey& a, const PriorityKey& b) {
        if (a.k != b.k) return a.k < b.k;
        if (a.v != b.v) return a.v < b.v;
        return a.counter < b.counter;
    }
};

struct SearchStats {
    std::uint64_t generator_calls = 0;
    std::uint64_t verifier_calls = 0;
    std::uint64_t policy_calls = 0;
    std::uint64_t value_calls = 0;
    std::uint64_t high_level_nodes = 0;
    std::uint64_t graph_size = 0;
    std::uint64_t verifier_false_positives = 0;
    // Subset of policy_calls spent in final-path reconstruction.
    std::uint64_t policy_calls_reconstruction = 0;

    bool operator==(const SearchStats&) const = default;

    std::uint64_t total_calls() const {
        return generator_calls + verifier_calls + policy_calls + value_calls;
    }
};

struct PlannerConfig {
    Strategy strategy = Strategy::LongestFirst;
    std::vector<int> generator_distances;      // strictly descending
    int subgoals_per_generator = 1;
    std::uint64_t max_nodes = 5000;            // C1, bound on seen-set size
    std::map<int, int> cllp_step_limit;        // C2 per generator distance
    double t_hi = 1.0;
    double t_lo = 0.0;
    // (generator index, iterations) blocks, required iff IterativeMixing.
    std::vector<std::pair<int, int>> iteration_schedule;
    std::uint64_t graph_size_cap = std::numeric_limits<std::uint64_t>::max();

    bool verifier_active() const { return !(t_lo <= 0.0 && t_hi >= 1.0); }

    int step_limit_for(int k) const {
        auto it = cllp_step_limit.find(k);
        if (it == cllp_step_limit.end())
            throw std::invalid_argument("planner config: no CLLP step limit for k=" +
                                        std::to_string(k));
        return it->second;
    }

    void validate() const {
        if (!(0.0 <= t_lo && t_lo <= t_hi && t_hi <= 1.0))
            throw std::invalid_argument("planner config: need 0 <= t_lo <= t_hi <= 1");
        if (max_nodes < 1)
            throw std::invalid_argument("planner config: max_nodes must be >= 1");
        if (graph_size_cap < 1)
            throw std::invalid_argument("planner config: graph_size_cap must be >= 1");
        if (subgoals_per_generator < 1)
            throw std::invalid_argument("planner config: subgoals_per_generator >= 1");
        if (strategy != Strategy::BestFS) {
            if (generator_distances.empty())
                throw std::invalid_argument("planner config: no generator distances");
            for (std::size_t i = 0; i < generator_distances.size(); ++i) {
                const int k = generator_distances[i];
                if (k < 1)
                    throw std::invalid_argument("planner config: distances must be >= 1");
                if (i && generator_distances[i - 1] <= k)
                    throw std::invalid_argument(
                        "planner config: distances must be strictly descending");
                if (step_limit_for(k) < k)
                    throw std::invalid_argument(
                        "planner config: CLLP step limit below k for k=" +
                        std::to_string(k));
            }
        }
        if (strategy == Strategy::IterativeMixing) {
            if (iteration_schedule.empty())
                throw std::invalid_argument(
                    "planner config: iterative-mixing requires a schedule");
            for (auto [gi, n] : iteration_schedule) {
                if (gi < 0 || gi >= static_cast<int>(generator_distances.size()))
                    throw std::invalid_argument("planner config: schedule generator index");
                if (n < 1)
                    throw std::invalid_argument("planner config: schedule counts >= 1");
            }
        } else if (!iteration_schedule.empty()) {
            throw std::invalid_argument(
                "planner config: schedule only valid for iterative-mixing");
        }
    }
};

template <Environment Env>
struct ComponentBundle {
    using State = typename Env::State;
    using Action = typename Env::Action;
    using GeneratorFn = std::function<std::vector<State>(const State&, int)>;
    using PolicyFn = std::function<Action(const State&, const State&)>;
    using ValueFn = std::function<double(const State&)>;
    using VerifierFn = std::function<double(const State&, const State&)>;

    std::map<int, GeneratorFn> generators; // keyed by subgoal distance k
    PolicyFn policy;
    ValueFn value;
    VerifierFn verifier; // may be empty when thresholds disable it
};

enum class SolveStatus {
    Solved,
    BudgetExhausted,
    QueueEmpty,
    VerifierFalsePositive,
};

inline std::string solve_status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Solved: return "solved";
        case SolveStatus::BudgetExhausted: return "budget-exhausted";
        case SolveStatus::QueueEmpty: return "queue-empty";
        default: return "verifier-false-positive";
    }
}

template <Environment Env>
struct SolveOutcome {
    SolveStatus status = SolveStatus::QueueEmpty;
    std::vector<typename Env::Action> action_path; // empty unless Solved
    std::vector<typename Env::State> subgoal_chain; // root..goal when Solved
    SearchStats stats;
};

// Optional per-solve instrumentation. All hooks may be left empty.
template <Environment Env>
struct SolveHooks {
    std::function<void(const PriorityKey&)> on_push;
    std::function<void(const PriorityKey&, const typename Env::State&)> on_extract;
    std::function<void(const typename Env::State&, int node_id)> on_accept;
    // Fired for every CLLP reachability check performed inside verification
    // (not for reconstruction rollouts): start, candidate, k, success.
    std::function<void(const typename Env::State&, const typename Env::State&, int, bool)>
        on_cllp_check;
};

// Conditional rollout: query the policy for (current, subgoal),
// advance the model, stop on canonical equality. Equality is tested before
// the first step, so s0 == subgoal succeeds with an empty path and zero
// policy calls. Absence means the limit ran out (or the policy emitted an
// illegal action). Every policy call costs one graph event.
template <Environment Env>
std::optional<std::vector<typename Env::Action>> run_cllp(
    const typename Env::State& s0, const typename Env::State& subgoal,
    const typename ComponentBundle<Env>::PolicyFn& policy, int step_limit,
    SearchStats& stats) {
    if (step_limit < 1) throw std::invalid_argument("run_cllp: step_limit must be >= 1");
    if (s0 == subgoal) return std::vector<typename Env::Action>{};
    typename Env::State cur = s0;
    std::vector<typename Env::Action> path;
    for (int step = 0; step < step_limit; ++step) {
        const typename Env::Action a = policy(cur, subgoal);
        ++stats.policy_calls;
        ++stats.graph_size;
        if (!Env::is_legal(cur, a)) return std::nullopt;
        cur = Env::next_state(cur, a);
        path.push_back(a);
        if (cur == subgoal) return path;
    }
    return std::nullopt;
}

// Verification gate: early accept above t_hi, early reject below t_lo
// (strict comparisons), otherwise fall back on a CLLP rollout with the step
// limit configured for the generator distance k.
template <Environment Env>
bool verify_subgoal(const typename Env::State& s, const typename Env::State& s_prime,
                    const ComponentBundle<Env>& components, const PlannerConfig& config,
                    int k, SearchStats& stats,
                    const SolveHooks<Env>* hooks = nullptr) {
    if (config.verifier_active()) {
        if (!components.verifier)
            throw std::invalid_argument("verify_subgoal: thresholds active but no verifier");
        const double score = components.verifier(s, s_prime);
        ++stats.verifier_calls;
        if (score > config.t_hi) return true;
        if (score < config.t_lo) return false;
    }
    auto path = run_cllp<Env>(s, s_prime, components.policy, config.step_limit_for(k),
                              stats);
    if (hooks && hooks->on_cllp_check)
        hooks->on_cllp_check(s, s_prime, k, path.has_value());
    return path.has_value();
}

namespace detail {

template <Environment Env>
struct NodeRec {
    typename Env::State state;
    std::int32_t parent = -1;
    double value = 0.0;
    int link_k = -1;                 // generator distance of the inbound link
    typename Env::Action link_action{}; // set instead when link_k == -1 (1-step)
    int next_gen_slot = 0;           // strongest-first bookkeeping
};

struct QueueEntry {
    PriorityKey key;
    std::int32_t node = 0;
    int gen_slot = 0;
};

// Binary max-heap over QueueEntry. Deterministic: the key order is total
// (insertion counters are unique).
class MaxHeap {
public:
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

    void push(QueueEntry e) {
        heap_.push_back(e);
        std::size_t i = heap_.size() - 1;
        while (i > 0) {
            std::size_t p = (i - 1) / 2;
            if (!(heap_[p].key < heap_[i].key)) break;
            std::swap(heap_[p], heap_[i]);
            i = p;
        }
    }

    QueueEntry pop() {
        QueueEntry top = heap_.front();
        heap_.front() = heap_.back();
        heap_.pop_back();
        std::size_t i = 0;
        const std::size_t n = heap_.size();
        while (true) {
            std::size_t l = 2 * i + 1, r = l + 1, best = i;
            if (l < n && heap_[best].key < heap_[l].key) best = l;
            if (r < n && heap_[best].key < heap_[r].key) best = r;
            if (best == i) break;
            std::swap(heap_[i], heap_[best]);
            i = best;
        }
        return top;
    }

private:
    std::vector<QueueEntry> heap_;
};

} // namespace detail

// Walk goal -> root through the parent links, rebuilding each link with a
// CLLP rollout (links recorded from one-step expansions replay their stored
// action instead). Returns absence when any rollout fails: the verifier
// accepted a subgoal the policy cannot reach. Rollout costs are counted in
// stats and mirrored in policy_calls_reconstruction.
template <Environment Env>
std::optional<std::vector<typename Env::Action>> reconstruct_low_level_path(
    std::int32_t goal_node, std::span<const detail::NodeRec<Env>> nodes,
    const ComponentBundle<Env>& components, const PlannerConfig& config,
    SearchStats& stats) {
    std::vector<typename Env::Action> path;
    std::size_t hops = 0;
    for (std::int32_t cur = goal_node; nodes[cur].parent >= 0;
         cur = nodes[cur].parent) {
        if (++hops > nodes.size())
            throw std::logic_error("reconstruct: cycle in parent links");
        const auto& node = nodes[cur];
        const auto& parent = nodes[node.parent];
        std::vector<typename Env::Action> segment;
        if (node.link_k < 0) {
            segment.push_back(node.link_action);
        } else {
            const std::uint64_t before = stats.policy_calls;
            auto rolled = run_cllp<Env>(parent.state, node.state, components.policy,
                                        config.step_limit_for(node.link_k), stats);
            stats.policy_calls_reconstruction += stats.policy_calls - before;
            if (!rolled) return std::nullopt;
            segment = std::move(*rolled);
        }
        path.insert(path.end(), segment.rbegin(), segment.rend());
    }
    std::reverse(path.begin(), path.end());
    return path;
}

// One search tree over verified subgoals. Strategy semantics:
//   longest-first    every node is queued once per configured distance with
//                    key (k, value); extraction expands with that k only, so
//                    shorter horizons are touched only when no longer-horizon
//                    entry remains.
//   mixsubs          value-keyed; an extracted node is expanded by all
//                    generators in configured order.
//   strongest-first  value-keyed; an extracted node is expanded with its
//                    longest unused generator and re-queued while generators
//                    remain.
//   iterative-mixing value-keyed; the iteration schedule picks the generator
//                    in round-robin blocks, one extraction per iteration.
//   bestfs           value-keyed; expansion enumerates the exact one-step
//                    successors, verification is bypassed (children are
//                    correct by construction) and links replay the recorded
//                    action during reconstruction.
// On a solved subgoal whose reconstruction fails (a verifier false positive),
// the event is counted and the search resumes from the intact frontier; the
// final status is then VerifierFalsePositive if nothing better is found.
template <Environment Env>
class Solver {
public:
    using State = typename Env::State;
    using Action = typename Env::Action;

    Solver(const ComponentBundle<Env>& components, const PlannerConfig& config,
           const SolveHooks<Env>* hooks = nullptr)
        : comp_(components), cfg_(config), hooks_(hooks) {
        cfg_.validate();
        if (cfg_.strategy != Strategy::BestFS) {
            if (comp_.generators.size() != cfg_.generator_distances.size())
                throw std::invalid_argument("solve: bundle generators != config distances");
            for (int k : cfg_.generator_distances)
                if (!comp_.generators.contains(k))
                    throw std::invalid_argument("solve: bundle missing generator k=" +
                                                std::to_string(k));
            if (!comp_.policy) throw std::invalid_argument("solve: bundle missing policy");
        }
        if (!comp_.value) throw std::invalid_argument("solve: bundle missing value");
    }

    SolveOutcome<Env> solve(const State& initial) {
        if (!Env::valid_state(initial))
            throw std::invalid_argument("solve: initial state fails legality check");
        SolveOutcome<Env> out;
        if (Env::solved(initial)) {
            out.status = SolveStatus::Solved;
            out.subgoal_chain = {initial};
            return out;
        }

        const double v0 = comp_.value(initial);
        ++out.stats.value_calls;
        ++out.stats.graph_size;
        nodes_.push_back({initial, -1, v0, 0, Action{}, 0});
        seen_.insert(initial);
        out.stats.high_level_nodes = 1;
        push_node(0, v0);

        bool budget_hit = false;
        while (!queue_.empty()) {
            if (out.stats.high_level_nodes >= cfg_.max_nodes ||
                out.stats.graph_size >= cfg_.graph_size_cap) {
                budget_hit = true;
                break;
            }
            const detail::QueueEntry entry = queue_.pop();
            if (hooks_ && hooks_->on_extract)
                hooks_->on_extract(entry.key, nodes_[entry.node].state);

            if (expand(entry, out)) return out;
            if (halt_) {
                budget_hit = true;
                break;
            }
            ++iteration_;
        }

        if (out.stats.verifier_false_positives > 0)
            out.status = SolveStatus::VerifierFalsePositive;
        else
            out.status = budget_hit ? SolveStatus::BudgetExhausted
                                    : SolveStatus::QueueEmpty;
        return out;
    }

private:
    // Returns true when a verified solution was produced.
    bool expand(const detail::QueueEntry& entry, SolveOutcome<Env>& out) {
        const auto node_id = entry.node;
        switch (cfg_.strategy) {
            case Strategy::LongestFirst:
                return expand_with(node_id, cfg_.generator_distances[entry.gen_slot], out);
            case Strategy::MixSubS: {
                for (int k : cfg_.generator_distances) {
                    if (expand_with(node_id, k, out)) return true;
                    if (halt_) break;
                }
                return false;
            }
            case Strategy::StrongestFirst: {
                const int k = cfg_.generator_distances[entry.gen_slot];
                const bool done = expand_with(node_id, k, out);
                if (done) return true;
                const int next = entry.gen_slot + 1;
                if (!halt_ && next < static_cast<int>(cfg_.generator_distances.size()))
                    push_entry({{0, nodes_[node_id].value, counter_++}, node_id, next});
                return false;
            }
            case Strategy::IterativeMixing:
                return expand_with(node_id, scheduled_distance(), out);
            default:
                return expand_bestfs(node_id, out);
        }
    }

    int scheduled_distance() const {
        std::uint64_t total = 0;
        for (auto [gi, n] : cfg_.iteration_schedule) total += static_cast<std::uint64_t>(n);
        std::uint64_t t = iteration_ % total;
        for (auto [gi, n] : cfg_.iteration_schedule) {
            if (t < static_cast<std::uint64_t>(n)) return cfg_.generator_distances[gi];
            t -= static_cast<std::uint64_t>(n);
        }
        return cfg_.generator_distances.front();
    }

    bool expand_with(std::int32_t node_id, int k, SolveOutcome<Env>& out) {
        const State parent_state = nodes_[node_id].state; // nodes_ may grow
        auto candidates =
            comp_.generators.at(k)(parent_state, cfg_.subgoals_per_generator);
        ++out.stats.generator_calls;
        for (const State& cand : candidates) {
            if (cand == parent_state) continue; // self-loop guard
            if (seen_.contains(cand)) continue;
            if (out.stats.high_level_nodes >= cfg_.max_nodes ||
                out.stats.graph_size >= cfg_.graph_size_cap) {
                halt_ = true;
                return false;
            }
            ++out.stats.graph_size; // candidate evaluation event
            if (!verify_subgoal<Env>(parent_state, cand, comp_, cfg_, k, out.stats,
                                     hooks_))
                continue;
            if (admit(node_id, cand, k, std::nullopt, out)) return true;
        }
        return false;
    }

    bool expand_bestfs(std::int32_t node_id, SolveOutcome<Env>& out) {
        const State parent_state = nodes_[node_id].state;
        ++out.stats.generator_calls; // one successor-enumeration per expansion
        for (const Action& a : Env::legal_actions(parent_state)) {
            State cand = Env::next_state(parent_state, a);
            if (cand == parent_state) continue;
            if (seen_.contains(cand)) continue;
            if (out.stats.high_level_nodes >= cfg_.max_nodes ||
                out.stats.graph_size >= cfg_.graph_size_cap) {
                halt_ = true;
                return false;
            }
            ++out.stats.graph_size;
            if (admit(node_id, cand, -1, a, out)) return true;
        }
        return false;
    }

    // Shared tail of candidate processing: value, node creation, pushes,
    // solved test, reconstruction on success.
    bool admit(std::int32_t parent_id, const State& cand, int link_k,
               std::optional<Action> link_action, SolveOutcome<Env>& out) {
        const double v = comp_.value(cand);
        ++out.stats.value_calls;
        const auto id = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back({cand, parent_id, v, link_k,
                          link_action ? *link_action : Action{}, 0});
        seen_.insert(cand);
        ++out.stats.high_level_nodes;
        if (hooks_ && hooks_->on_accept) hooks_->on_accept(cand, id);
        push_node(id, v);
        if (!Env::solved(cand)) return false;

        auto path = reconstruct_low_level_path<Env>(
            id, std::span<const detail::NodeRec<Env>>(nodes_), comp_, cfg_, out.stats);
        if (!path) {
            ++out.stats.verifier_false_positives;
            return false; // resume searching from the intact frontier
        }
        out.status = SolveStatus::Solved;
        out.action_path = std::move(*path);
        for (std::int32_t cur = id; cur >= 0; cur = nodes_[cur].parent)
            out.subgoal_chain.push_back(nodes_[cur].state);
        std::reverse(out.subgoal_chain.begin(), out.subgoal_chain.end());
        return true;
    }

    void push_node(std::int32_t id, double v) {
        switch (cfg_.strategy) {
            case Strategy::LongestFirst:
                for (std::size_t slot = 0; slot < cfg_.generator_distances.size(); ++slot)
                    push_entry({{cfg_.generator_distances[slot], v, counter_++},
                                id,
                                static_cast<int>(slot)});
                break;
            default:
                push_entry({{0, v, counter_++}, id, 0});
                break;
        }
    }

    void push_entry(const detail::QueueEntry& e) {
        queue_.push(e);
        if (hooks_ && hooks_->on_push) hooks_->on_push(e.key);
    }

    ComponentBundle<Env> comp_;
    PlannerConfig cfg_;
    const SolveHooks<Env>* hooks_;
    std::vector<detail::NodeRec<Env>> nodes_;
    std::unordered_set<State> seen_;
    detail::MaxHeap queue_;
    std::uint64_t counter_ = 0;
    std::uint64_t iteration_ = 0;
    bool halt_ = false;
};

template <Environment Env>
SolveOutcome<Env> solve(const typename Env::State& initial,
                        const ComponentBundle<Env>& components,
                        const PlannerConfig& config,
                        const SolveHooks<Env>* hooks = nullptr) {
    return Solver<Env>(components, config, hooks).solve(initial);
}

// Replays a solved outcome against the model: the action path must be legal
// throughout, end in a solved state, and pass through the subgoal chain in
// order.
template <Environment Env>
bool validate_outcome(const typename Env::State& initial, const SolveOutcome<Env>& out) {
    if (out.status != SolveStatus::Solved) return true;
    typename Env::State cur = initial;
    std::size_t chain_pos = 0;
    auto advance_chain = [&](const typename Env::State& s) {
        while (chain_pos < out.subgoal_chain.size() && out.subgoal_chain[chain_pos] == s)
            ++chain_pos;
    };
    advance_chain(cur);
    for (const auto& a : out.action_path) {
        if (!Env::is_legal(cur, a)) return false;
        cur = Env::next_state(cur, a);
        advance_chain(cur);
    }
    return Env::solved(cur) && chain_pos == out.subgoal_chain.size();
}

} // namespace subsearch
