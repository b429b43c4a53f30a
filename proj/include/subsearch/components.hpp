#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "subsearch/features.hpp"
#include "subsearch/linear_model.hpp"
#include "subsearch/macro_table.hpp"
#include "subsearch/search.hpp"

namespace subsearch {

// Learned component set: one macro table per generator distance plus three
// hashed linear models. predict_* are the inference entry points; the bundle
// wraps them as closures for the planner.

template <Environment Env>
std::vector<typename Env::State> generate_subgoals(const MacroTable& table,
                                                   const typename Env::State& s,
                                                   int count) {
    return generate_macro_subgoals<Env>(table, s, count);
}

// Argmax over legal actions of the multiclass model on pair features; ties
// break toward the smaller action index. With no legal action (boxed-in
// Sokoban agent) the first action is returned and the rollout layer treats
// it as a failed step.
template <Environment Env>
typename Env::Action predict_action(const LinearModel& policy,
                                    const typename Env::State& s,
                                    const typename Env::State& goal) {
    if (policy.kind != ModelKind::Multiclass)
        throw std::invalid_argument("predict_action: model is not multiclass");
    const auto features = pair_features<Env>(s, goal, policy.dim);
    auto legal = Env::legal_actions(s);
    if (legal.empty()) return Env::action_from_index(0);
    typename Env::Action best = legal.front();
    float best_score = -std::numeric_limits<float>::infinity();
    for (const auto& a : legal) {
        const float sc = policy.score(static_cast<std::uint32_t>(Env::action_index(a)),
                                      features);
        if (sc > best_score) {
            best_score = sc;
            best = a;
        }
    }
    return best;
}

template <Environment Env>
double predict_value(const LinearModel& value, const typename Env::State& s) {
    if (value.kind != ModelKind::Regression)
        throw std::invalid_argument("predict_value: model is not a regression");
    return value.score(0, state_features<Env>(s, value.dim));
}

template <Environment Env>
double predict_reachability(const LinearModel& verifier, const typename Env::State& s,
                            const typename Env::State& s_prime) {
    if (verifier.kind != ModelKind::Logistic)
        throw std::invalid_argument("predict_reachability: model is not logistic");
    return verifier.probability(pair_features<Env>(s, s_prime, verifier.dim));
}

template <Environment Env>
struct LearnedComponents {
    std::map<int, MacroTable> generators; // keyed by k
    LinearModel policy;
    LinearModel value;
    LinearModel verifier;     // may be empty (classes == 0 weights) if unused
    bool has_verifier = false;
};

template <Environment Env>
ComponentBundle<Env> make_learned_bundle(std::shared_ptr<const LearnedComponents<Env>> lc) {
    ComponentBundle<Env> b;
    for (const auto& [k, table] : lc->generators) {
        b.generators[k] = [lc, k](const typename Env::State& s, int count) {
            return generate_macro_subgoals<Env>(lc->generators.at(k), s, count);
        };
    }
    b.policy = [lc](const typename Env::State& s, const typename Env::State& goal) {
        return predict_action<Env>(lc->policy, s, goal);
    };
    b.value = [lc](const typename Env::State& s) {
        return predict_value<Env>(lc->value, s);
    };
    if (lc->has_verifier) {
        b.verifier = [lc](const typename Env::State& s, const typename Env::State& g) {
            return predict_reachability<Env>(lc->verifier, s, g);
        };
    }
    return b;
}

} // namespace subsearch
