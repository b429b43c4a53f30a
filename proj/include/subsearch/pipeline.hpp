#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "subsearch/components.hpp"
#include "subsearch/datagen.hpp"

namespace subsearch {

// End-to-end training: D1 trajectories feed the macro generators, the
// conditional policy and the value model; the verifier is trained later from
// CLLP-labeled samples collected with those components (never from D1).

// The value regression runs on ~54 simultaneously active features, so its
// learning rate must stay well under 2/55 or SGD diverges.
struct CoreTrainParams {
    std::uint32_t feature_dim = kDefaultFeatureDim;
    MacroParams macro;
    std::size_t policy_sample_cap = 400000;
    TrainParams policy_train{8, 0.08, 0.85, 11};
    TrainParams value_train{6, 0.008, 0.8, 12};
    std::uint64_t seed = 1;
};

// Two verifier presets. "Calibrated" balances classes and stops early,
// which maximizes held-out ranking quality (thresholds around 0.5).
// "Gating" trains long on the natural class mix so scores develop the
// confident tails that tight thresholds such as (0.995, 0.0005) need.
struct VerifierTrainParams {
    std::uint32_t feature_dim = kDefaultFeatureDim;
    TrainParams train{24, 0.08, 0.9, 13};
    bool upsample_positives = true;

    static VerifierTrainParams calibrated() { return {}; }
    static VerifierTrainParams gating() {
        VerifierTrainParams p;
        p.train = {30, 0.15, 1.0, 13};
        p.upsample_positives = false;
        return p;
    }
};

template <Environment Env>
LearnedComponents<Env> train_core_components(const std::vector<Trajectory<Env>>& d1,
                                             const std::vector<int>& distances,
                                             const CoreTrainParams& params) {
    LearnedComponents<Env> lc;
    int k_max = 1;
    for (int k : distances) {
        k_max = std::max(k_max, k);
        lc.generators[k] =
            train_macro_generator<Env>(build_subgoal_pairs<Env>(d1, k), k, params.macro);
    }

    auto policy_pairs =
        build_policy_samples<Env>(d1, k_max, params.policy_sample_cap, params.seed);
    std::vector<TrainSample> policy_samples;
    policy_samples.reserve(policy_pairs.size());
    for (const auto& p : policy_pairs) {
        policy_samples.push_back(
            {pair_features<Env>(p.state, p.goal, params.feature_dim),
             static_cast<double>(Env::action_index(p.action))});
    }
    lc.policy = train_linear_model(policy_samples, ModelKind::Multiclass,
                                   params.feature_dim,
                                   static_cast<std::uint32_t>(Env::action_count()),
                                   params.policy_train);

    std::vector<TrainSample> value_samples;
    for (const auto& [state, target] : build_value_samples<Env>(d1))
        value_samples.push_back({state_features<Env>(state, params.feature_dim), target});
    lc.value = train_linear_model(value_samples, ModelKind::Regression,
                                  params.feature_dim, 1, params.value_train);
    return lc;
}

template <Environment Env>
LinearModel train_verifier_model(const std::vector<VerifierSample<Env>>& samples,
                                 const VerifierTrainParams& params) {
    std::vector<TrainSample> train;
    train.reserve(samples.size());
    std::size_t positives = 0;
    for (const auto& s : samples) {
        positives += s.label;
        train.push_back({pair_features<Env>(s.start, s.candidate, params.feature_dim),
                         s.label ? 1.0 : 0.0});
    }
    if (params.upsample_positives && positives > 0 && positives < samples.size()) {
        const std::size_t copies = (samples.size() - positives) / positives;
        const std::size_t base = train.size();
        for (std::size_t i = 0; i < base; ++i)
            if (train[i].target == 1.0)
                for (std::size_t c = 1; c < copies; ++c) train.push_back(train[i]);
    }
    return train_linear_model(train, ModelKind::Logistic, params.feature_dim, 1,
                              params.train);
}

// --- model directory layout -----------------------------------------------------
// <dir>/<env>_macro_<k>.ssmt, <env>_policy.sslm, <env>_value.sslm and, when
// trained, <env>_verifier.sslm.

template <Environment Env>
void save_learned_components(const LearnedComponents<Env>& lc, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const std::string base = dir + "/" + Env::name();
    for (const auto& [k, table] : lc.generators)
        save_macro_table_file(table, base + "_macro_" + std::to_string(k) + ".ssmt");
    save_linear_model_file(lc.policy, base + "_policy.sslm");
    save_linear_model_file(lc.value, base + "_value.sslm");
    if (lc.has_verifier) save_linear_model_file(lc.verifier, base + "_verifier.sslm");
}

template <Environment Env>
LearnedComponents<Env> load_learned_components(const std::string& dir,
                                               const std::vector<int>& distances,
                                               bool need_verifier) {
    LearnedComponents<Env> lc;
    const std::string base = dir + "/" + Env::name();
    for (int k : distances)
        lc.generators[k] =
            load_macro_table_file(base + "_macro_" + std::to_string(k) + ".ssmt");
    lc.policy = load_linear_model_file(base + "_policy.sslm");
    lc.value = load_linear_model_file(base + "_value.sslm");
    const std::string vpath = base + "_verifier.sslm";
    if (std::filesystem::exists(vpath)) {
        lc.verifier = load_linear_model_file(vpath);
        lc.has_verifier = true;
    } else if (need_verifier) {
        throw std::runtime_error("load_learned_components: missing " + vpath);
    }
    return lc;
}

} // namespace subsearch
