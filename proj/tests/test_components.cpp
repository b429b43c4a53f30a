#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "subsearch/oracle.hpp"
#include "subsearch/pipeline.hpp"

using namespace subsearch;
using rubik::CubeState;
using rubik::Move;

namespace {

std::shared_ptr<RubikOracle> deep_oracle() {
    static auto oracle = std::make_shared<RubikOracle>(6, 4);
    return oracle;
}

struct LearnedFixture {
    LearnedComponents<RubikEnv> core;
    LinearModel verifier;
    std::vector<Trajectory<RubikEnv>> d2;
    std::vector<VerifierSample<RubikEnv>> verifier_train;
    std::vector<VerifierSample<RubikEnv>> verifier_test;
};

PlannerConfig collection_config() {
    PlannerConfig cfg;
    cfg.strategy = Strategy::LongestFirst;
    cfg.generator_distances = {4, 3, 2};
    cfg.subgoals_per_generator = 6;
    cfg.cllp_step_limit = {{4, 6}, {3, 5}, {2, 4}};
    cfg.t_hi = 1.0;
    cfg.t_lo = 0.0;
    cfg.max_nodes = 250;
    cfg.graph_size_cap = 4000;
    return cfg;
}

const LearnedFixture& learned_fixture() {
    static const LearnedFixture fix = [] {
        LearnedFixture f;
        auto trajs = gen_rubik_trajectories(12000, 20, 501);
        auto [d1, d2] = split_dataset(trajs, 0.5, 502);
        f.d2 = d2;

        CoreTrainParams params;
        params.policy_sample_cap = 300000;
        f.core = train_core_components<RubikEnv>(d1, {4, 3, 2}, params);

        // verifier data: planner runs with the verifier disabled on fresh
        // instances, labels from the learned CLLP
        std::vector<CubeState> instances;
        Rng rng(503);
        for (int i = 0; i < 1500; ++i)
            instances.push_back(rubik::scramble(8 + i % 3, rng()).first);
        auto bundle = make_learned_bundle<RubikEnv>(
            std::make_shared<LearnedComponents<RubikEnv>>(f.core));
        auto samples = collect_verifier_dataset<RubikEnv>(instances, bundle,
                                                          collection_config(), 100, 504);
        auto [train, test] = split_dataset(samples, 0.7, 505);
        f.verifier_train = train;
        f.verifier_test = test;
        f.verifier = train_verifier_model<RubikEnv>(train, VerifierTrainParams::calibrated());
        return f;
    }();
    return fix;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return v[i] < v[j]; });
        std::vector<double> r(v.size());
        std::size_t i = 0;
        while (i < idx.size()) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0;
            for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
            i = j + 1;
        }
        return r;
    };
    auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    return num / std::sqrt(da * db);
}

double roc_auc(const std::vector<std::pair<double, bool>>& scored) {
    std::vector<std::pair<double, bool>> s = scored;
    std::sort(s.begin(), s.end());
    // rank-sum with average ranks for ties
    double pos = 0, neg = 0, rank_sum = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t j = i;
        while (j + 1 < s.size() && s[j + 1].first == s[i].first) ++j;
        const double avg_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t)
            if (s[t].second) rank_sum += avg_rank;
        i = j + 1;
    }
    for (const auto& [sc, label] : s) (label ? pos : neg) += 1.0;
    if (pos == 0 || neg == 0) return 0.5;
    return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

} // namespace

TEST_CASE("oracle consistency: value, subgoal distances, verifier vs rollout") {
    auto oracle = deep_oracle();
    auto bundle = make_rubik_oracle_bundle(oracle, {3, 2, 1});
    Rng rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        auto [s, walk] = rubik::scramble(uniform_index(rng, 7), rng());
        const int d = oracle->solved_distance(s);
        CHECK(bundle.value(s) == -static_cast<double>(d));
        for (int k : {3, 2, 1}) {
            auto subs = bundle.generators.at(k)(s, 6);
            for (const auto& g : subs)
                CHECK(oracle->solved_distance(g) == std::max(0, d - k));
        }
    }
    // verifier agrees with oracle-CLLP success at the same step bound
    SearchStats stats;
    for (int trial = 0; trial < 25; ++trial) {
        auto [a, wa] = rubik::scramble(uniform_index(rng, 6), rng());
        auto [b, wb] = rubik::scramble(uniform_index(rng, 6), rng());
        const double score = bundle.verifier(a, b);
        auto path = run_cllp<RubikEnv>(a, b, bundle.policy, oracle->pair_radius(), stats);
        CHECK((score > 0.5) == path.has_value());
    }
}

TEST_CASE("oracle generator: trivial cases and solved-at-distance-k") {
    auto oracle = deep_oracle();
    auto bundle = make_rubik_oracle_bundle(oracle, {2});
    // d(s) = 2: solved must be among the k=2 candidates
    const auto s = rubik::next_state(rubik::next_state(rubik::solved_cube(), Move::U),
                                     Move::R);
    REQUIRE(oracle->solved_distance(s) == 2);
    auto subs = bundle.generators.at(2)(s, 12);
    CHECK(std::find(subs.begin(), subs.end(), rubik::solved_cube()) != subs.end());
    // d(s) = 0: self-loop guard leaves nothing to emit
    CHECK(bundle.generators.at(2)(rubik::solved_cube(), 4).empty());
    // out of range is a hard error, never a silent answer
    const auto far = rubik::scramble(12, 9).first;
    if (!oracle->solved_distance_opt(far))
        CHECK_THROWS_AS(bundle.value(far), std::runtime_error);
}

TEST_CASE("generator outputs are distinct and never the input") {
    auto oracle = deep_oracle();
    auto bundle = make_rubik_oracle_bundle(oracle, {3, 2, 1});
    const auto& fix = learned_fixture();
    Rng rng(77);
    for (int trial = 0; trial < 15; ++trial) {
        auto [s, walk] = rubik::scramble(4 + uniform_index(rng, 3), rng());
        for (int k : {3, 2, 1}) {
            auto subs = bundle.generators.at(k)(s, 8);
            std::set<std::string> uniq;
            for (const auto& g : subs) {
                CHECK(!(g == s));
                uniq.insert(rubik::serialize(g));
            }
            CHECK(uniq.size() == subs.size());
        }
        for (int k : {4, 3, 2}) {
            auto subs = generate_macro_subgoals<RubikEnv>(fix.core.generators.at(k), s, 6);
            std::set<std::string> uniq;
            for (const auto& g : subs) {
                CHECK(!(g == s));
                uniq.insert(rubik::serialize(g));
            }
            CHECK(uniq.size() == subs.size());
        }
    }
}

TEST_CASE("macro training: counting, ranking, caps") {
    using Sample = std::pair<CubeState, std::vector<Move>>;
    const auto s0 = rubik::solved_cube();
    const auto s1 = rubik::next_state(s0, Move::F);

    SECTION("single sample gives a single unit-frequency entry") {
        std::vector<Sample> data{{s0, {Move::U, Move::R}}};
        auto t = train_macro_generator<RubikEnv>(data, 2, {});
        REQUIRE(t.buckets.size() == 1);
        REQUIRE(t.buckets.begin()->second.size() == 1);
        CHECK(t.buckets.begin()->second[0].count == 1);
        CHECK(t.global.size() == 1);
    }
    SECTION("frequencies rank (2,1) with stable order") {
        std::vector<Sample> data{
            {s0, {Move::U, Move::R}}, {s0, {Move::U, Move::R}}, {s0, {Move::F, Move::D}}};
        auto t = train_macro_generator<RubikEnv>(data, 2, {});
        const auto& entries = t.buckets.begin()->second;
        REQUIRE(entries.size() == 2);
        CHECK(entries[0].count == 2);
        CHECK(entries[0].actions ==
              std::vector<std::uint8_t>{static_cast<std::uint8_t>(Move::U),
                                        static_cast<std::uint8_t>(Move::R)});
        CHECK(entries[1].count == 1);
    }
    SECTION("wrong-length sequence is rejected") {
        std::vector<Sample> data{{s0, {Move::U}}};
        CHECK_THROWS_AS(train_macro_generator<RubikEnv>(data, 2, {}),
                        std::invalid_argument);
    }
    SECTION("per-key cap and the quarter-turn-triple bound") {
        auto trajs = gen_rubik_trajectories(10000, 20, 881);
        auto pairs = build_subgoal_pairs<RubikEnv>(trajs, 3);
        MacroParams params;
        params.max_macros_per_key = 8;
        auto t = train_macro_generator<RubikEnv>(pairs, 3, params);
        std::set<std::vector<std::uint8_t>> distinct;
        for (const auto& [bucket, entries] : t.buckets) {
            CHECK(entries.size() <= 8);
            for (const auto& e : entries) distinct.insert(e.actions);
        }
        CHECK(distinct.size() <= 12u * 12u * 12u);
    }
    SECTION("empty dataset trains an empty table that emits nothing") {
        auto t = train_macro_generator<RubikEnv>({}, 2, {});
        CHECK(t.buckets.empty());
        CHECK(generate_macro_subgoals<RubikEnv>(t, s1, 4).empty());
    }
}

TEST_CASE("macro subgoals are reachable in exactly k steps by construction") {
    const auto& fix = learned_fixture();
    auto oracle = deep_oracle();
    Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        auto [s, walk] = rubik::scramble(5, rng());
        for (int k : {4, 3, 2}) {
            auto subs = generate_macro_subgoals<RubikEnv>(fix.core.generators.at(k), s, 4);
            for (const auto& g : subs) {
                // reachable within k moves (the generating macro itself)
                bool within = false;
                std::vector<CubeState> layer{s};
                std::unordered_set<CubeState> seen{s};
                for (int d = 0; d < k && !within; ++d) {
                    std::vector<CubeState> next;
                    for (const auto& cur : layer)
                        for (int m = 0; m < rubik::kMoves; ++m) {
                            auto t = rubik::next_state(cur, static_cast<Move>(m));
                            if (t == g) within = true;
                            if (seen.insert(t).second) next.push_back(t);
                        }
                    layer = std::move(next);
                }
                CHECK(within);
            }
        }
    }
}

TEST_CASE("macro fallback: unseen bucket uses the global list") {
    const auto s0 = rubik::solved_cube();
    const auto other = rubik::scramble(6, 321).first;
    MacroTable t;
    t.k = 2;
    t.num_buckets = 1u << 20; // wide bucket space: the two states land apart
    REQUIRE(macro_bucket<RubikEnv>(s0, t.num_buckets) !=
            macro_bucket<RubikEnv>(other, t.num_buckets));
    t.buckets[macro_bucket<RubikEnv>(s0, t.num_buckets)] = {
        {{static_cast<std::uint8_t>(Move::U), static_cast<std::uint8_t>(Move::R)}, 5}};
    t.global = {
        {{static_cast<std::uint8_t>(Move::F), static_cast<std::uint8_t>(Move::D)}, 9}};
    auto subs = generate_macro_subgoals<RubikEnv>(t, other, 4);
    REQUIRE(subs.size() == 1);
    CHECK(subs[0] ==
          rubik::next_state(rubik::next_state(other, Move::F), Move::D));
}

TEST_CASE("macro replay skips macros that turn illegal") {
    auto b = sokoban::parse_xsb("######\n#@$ .#\n######");
    MacroTable t;
    t.k = 2;
    t.num_buckets = 0; // force global list
    t.global = {
        {{static_cast<std::uint8_t>(sokoban::AgentAction::Up),
          static_cast<std::uint8_t>(sokoban::AgentAction::Up)},
         7},
        {{static_cast<std::uint8_t>(sokoban::AgentAction::Right),
          static_cast<std::uint8_t>(sokoban::AgentAction::Right)},
         3}};
    auto subs = generate_macro_subgoals<SokobanEnv>(t, b, 4);
    REQUIRE(subs.size() == 1); // Up/Up starts illegal; Right/Right pushes to goal
    CHECK(sokoban::solved(subs[0]));
}

TEST_CASE("linear model: separable logistic, near-exact regression, determinism") {
    SECTION("two linearly separable samples end on the right sides of 0.5") {
        std::vector<TrainSample> data{{{1}, 1.0}, {{2}, 0.0}};
        auto m = train_linear_model(data, ModelKind::Logistic, 8, 1, {});
        CHECK(m.probability({1}) > 0.5);
        CHECK(m.probability({2}) < 0.5);
    }
    SECTION("regression on y = 2x recovers the weight within 5%") {
        // single active feature repeated: target twice the multiplicity
        std::vector<TrainSample> data;
        for (int i = 0; i < 50; ++i) data.push_back({{3}, 2.0});
        TrainParams p;
        p.epochs = 200;
        p.learning_rate = 0.05;
        p.lr_decay = 1.0;
        auto m = train_linear_model(data, ModelKind::Regression, 8, 1, p);
        CHECK(std::abs(m.score(0, {3}) - 2.0) < 0.1);
    }
    SECTION("same data and seed give bit-identical weights") {
        std::vector<TrainSample> data;
        Rng rng(5);
        for (int i = 0; i < 200; ++i) {
            std::vector<std::uint32_t> f{static_cast<std::uint32_t>(uniform_index(rng, 16)),
                                         static_cast<std::uint32_t>(uniform_index(rng, 16))};
            data.push_back({f, static_cast<double>(i % 2)});
        }
        auto a = train_linear_model(data, ModelKind::Logistic, 16, 1, {});
        auto b = train_linear_model(data, ModelKind::Logistic, 16, 1, {});
        CHECK(a.weights == b.weights);
        CHECK(a.bias == b.bias);
    }
    SECTION("non-finite targets are a hard error") {
        std::vector<TrainSample> bad{{{1}, std::numeric_limits<double>::quiet_NaN()}};
        CHECK_THROWS_AS(train_linear_model(bad, ModelKind::Regression, 8, 1, {}),
                        std::invalid_argument);
        std::vector<TrainSample> oob{{{99}, 1.0}};
        CHECK_THROWS_AS(train_linear_model(oob, ModelKind::Regression, 8, 1, {}),
                        std::invalid_argument);
    }
}

TEST_CASE("prediction surfaces: legality mask, ranges, tie-break") {
    LinearModel zero;
    zero.kind = ModelKind::Multiclass;
    zero.dim = 64;
    zero.classes = static_cast<std::uint32_t>(RubikEnv::action_count());
    zero.weights.assign(static_cast<std::size_t>(zero.dim) * zero.classes, 0.0f);
    zero.bias.assign(zero.classes, 0.0f);
    // all-equal logits: the smallest action index wins
    auto a = predict_action<RubikEnv>(zero, rubik::solved_cube(),
                                      rubik::next_state(rubik::solved_cube(), Move::U));
    CHECK(RubikEnv::action_index(a) == 0);

    // sokoban: the argmax is masked to legal actions
    LinearModel biased = zero;
    biased.classes = static_cast<std::uint32_t>(SokobanEnv::action_count());
    biased.weights.assign(static_cast<std::size_t>(biased.dim) * biased.classes, 0.0f);
    biased.bias = {5.0f, 0.0f, 0.0f, 0.0f}; // loves Up, but Up is a wall
    auto board = sokoban::parse_xsb("#####\n#@$.#\n#####");
    auto act = predict_action<SokobanEnv>(biased, board, board);
    CHECK(sokoban::is_legal(board, act));

    const auto& fix = learned_fixture();
    auto [s, w] = rubik::scramble(6, 9);
    const double v = predict_value<RubikEnv>(fix.core.value, s);
    CHECK(std::isfinite(v));
    const double r = predict_reachability<RubikEnv>(fix.verifier, s, rubik::solved_cube());
    CHECK(r > 0.0);
    CHECK(r < 1.0);
}

TEST_CASE("feature hashing is stable and frozen") {
    const auto s = rubik::solved_cube();
    auto f1 = state_features<RubikEnv>(s);
    auto f2 = state_features<RubikEnv>(s);
    CHECK(f1 == f2);
    REQUIRE(f1.size() == 54);
    // frozen indices pin the hash function: FNV-1a of ('s', pos, color, 0)
    // mod 2^18, computed once and fixed
    const std::vector<std::uint32_t> frozen{124368u, 238177u, 89842u, 203651u};
    CHECK(std::vector<std::uint32_t>(f1.begin(), f1.begin() + 4) == frozen);

    auto p_same = pair_features<RubikEnv>(s, s);
    CHECK(p_same.size() == 108); // no difference features
    auto p_diff = pair_features<RubikEnv>(s, rubik::next_state(s, Move::U));
    // on the solved cube U recolors only the 12 side stickers (the U face
    // stays monochrome)
    CHECK(p_diff.size() == 108 + 12);
    auto [mixed, mixed_walk] = rubik::scramble(8, 5);
    auto p_mixed = pair_features<RubikEnv>(mixed, rubik::next_state(mixed, Move::U));
    CHECK(p_mixed.size() <= 108 + 20);
    CHECK(p_mixed.size() > 108);
}

TEST_CASE("persistence: linear and macro round trips are lossless") {
    const auto& fix = learned_fixture();
    SECTION("linear model") {
        std::stringstream ss;
        save_linear_model(fix.core.policy, ss);
        auto back = load_linear_model(ss);
        CHECK(back.kind == fix.core.policy.kind);
        CHECK(back.dim == fix.core.policy.dim);
        CHECK(back.classes == fix.core.policy.classes);
        CHECK(back.seed == fix.core.policy.seed);
        CHECK(back.weights == fix.core.policy.weights);
        CHECK(back.bias == fix.core.policy.bias);
    }
    SECTION("macro table") {
        std::stringstream ss;
        save_macro_table(fix.core.generators.at(3), ss);
        auto back = load_macro_table(ss);
        const auto& orig = fix.core.generators.at(3);
        CHECK(back.k == orig.k);
        CHECK(back.num_buckets == orig.num_buckets);
        REQUIRE(back.buckets.size() == orig.buckets.size());
        for (const auto& [id, entries] : orig.buckets) {
            const auto& loaded = back.buckets.at(id);
            REQUIRE(loaded.size() == entries.size());
            for (std::size_t i = 0; i < entries.size(); ++i) {
                CHECK(loaded[i].count == entries[i].count);
                CHECK(loaded[i].actions == entries[i].actions);
            }
        }
    }
    SECTION("corrupted magic is rejected") {
        std::stringstream ss("XXXXgarbage");
        CHECK_THROWS_AS(load_linear_model(ss), std::runtime_error);
    }
}

TEST_CASE("learned policy beats the one-step baseline on held-out pairs") {
    const auto& fix = learned_fixture();
    std::size_t hits = 0, total = 0;
    for (const auto& t : fix.d2) {
        for (std::size_t i = 0; i + 1 < t.states.size() && total < 4000; ++i) {
            auto a = predict_action<RubikEnv>(fix.core.policy, t.states[i],
                                              t.states[i + 1]);
            hits += a == t.actions[i];
            ++total;
        }
        if (total >= 4000) break;
    }
    REQUIRE(total >= 1000);
    const double acc = static_cast<double>(hits) / static_cast<double>(total);
    INFO("held-out 1-step accuracy " << acc);
    CHECK(acc >= 0.5); // far above the 1/12 uniform baseline
}

TEST_CASE("learned value ranks held-out distances with Spearman >= 0.5") {
    const auto& fix = learned_fixture();
    auto oracle = deep_oracle();
    std::vector<double> pred, truth;
    Rng rng(1009);
    for (int d = 1; d <= 6; ++d) {
        for (int i = 0; i < 40; ++i) {
            auto s = rubik::scramble(d, rng()).first;
            auto dist = oracle->solved_distance_opt(s);
            if (!dist) continue;
            pred.push_back(predict_value<RubikEnv>(fix.core.value, s));
            truth.push_back(-static_cast<double>(*dist));
        }
    }
    REQUIRE(pred.size() > 150);
    const double rho = spearman(pred, truth);
    INFO("spearman " << rho);
    CHECK(rho >= 0.5);
}

TEST_CASE("learned verifier separates held-out reachability with AUC >= 0.7") {
    const auto& fix = learned_fixture();
    std::size_t pos = 0, neg = 0;
    for (const auto& s : fix.verifier_train) (s.label ? pos : neg)++;
    INFO("train labels +" << pos << " -" << neg);
    CHECK(pos > 0);
    CHECK(neg > 0);

    std::vector<std::pair<double, bool>> scored;
    for (const auto& s : fix.verifier_test)
        scored.push_back(
            {predict_reachability<RubikEnv>(fix.verifier, s.start, s.candidate), s.label});
    REQUIRE(scored.size() > 100);
    const double auc = roc_auc(scored);
    INFO("held-out AUC " << auc << " over " << scored.size() << " samples");
    CHECK(auc >= 0.7);
}

TEST_CASE("mixed bundle: learned generators with oracle scoring components") {
    // longest-first, [4,3,2], thresholds (0.995, 0.0005), C1 = 5000
    const auto& fix = learned_fixture();
    auto oracle = deep_oracle();
    ComponentBundle<RubikEnv> mixed;
    for (int k : {4, 3, 2}) {
        mixed.generators[k] = [&fix, k](const CubeState& s, int count) {
            return generate_macro_subgoals<RubikEnv>(fix.core.generators.at(k), s, count);
        };
    }
    auto oracle_side = make_rubik_oracle_bundle(oracle, {4, 3, 2});
    mixed.policy = oracle_side.policy;
    // learned value: macro candidates can drift beyond the oracle's memo ball
    mixed.value = [&fix](const CubeState& s) {
        return predict_value<RubikEnv>(fix.core.value, s);
    };
    mixed.verifier = oracle_side.verifier;

    PlannerConfig cfg;
    cfg.strategy = Strategy::LongestFirst;
    cfg.generator_distances = {4, 3, 2};
    cfg.subgoals_per_generator = 6;
    cfg.cllp_step_limit = {{4, 4}, {3, 3}, {2, 2}};
    cfg.t_hi = 0.995;
    cfg.t_lo = 0.0005;
    cfg.max_nodes = 5000;
    cfg.graph_size_cap = 6000;
    cfg.validate();

    std::size_t solved = 0;
    for (std::uint64_t seed = 60; seed < 66; ++seed) {
        auto [s, walk] = rubik::scramble(4, seed);
        auto out = solve<RubikEnv>(s, mixed, cfg);
        REQUIRE(validate_outcome<RubikEnv>(s, out));
        solved += out.status == SolveStatus::Solved;
    }
    CHECK(solved > 0); // macro generators reach the snap zone from depth 4
}

TEST_CASE("learned training is deterministic end to end") {
    auto trajs = gen_rubik_trajectories(300, 12, 90);
    auto [d1, d2] = split_dataset(trajs, 0.5, 91);
    CoreTrainParams params;
    params.policy_sample_cap = 20000;
    auto a = train_core_components<RubikEnv>(d1, {3, 2}, params);
    auto b = train_core_components<RubikEnv>(d1, {3, 2}, params);
    CHECK(a.policy.weights == b.policy.weights);
    CHECK(a.value.weights == b.value.weights);
    REQUIRE(a.generators.size() == b.generators.size());
    for (const auto& [k, t] : a.generators) {
        const auto& tb = b.generators.at(k);
        CHECK(t.global.size() == tb.global.size());
        CHECK(t.buckets.size() == tb.buckets.size());
    }
}
