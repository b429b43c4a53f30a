// Command-line experiment runner: component training, dataset generation,
// evaluation sweeps and report emission. Subcommands: datagen, train, run,
// report. Relative output paths are resolved against $SUBSEARCH_OUTPUT_ROOT
// when it is set. Exit codes: 0 success, 1 configuration error, 2 runtime
// failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "subsearch/bench.hpp"
#include "subsearch/oracle.hpp"
#include "subsearch/pipeline.hpp"

using json = nlohmann::json;
using namespace subsearch;

namespace {

namespace fs = std::filesystem;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string resolve_out(const std::string& path) {
    if (path.empty() || fs::path(path).is_absolute()) return path;
    if (const char* root = std::getenv("SUBSEARCH_OUTPUT_ROOT"))
        return (fs::path(root) / path).string();
    return path;
}

void ensure_parent(const std::string& path) {
    const auto dir = fs::path(path).parent_path();
    if (!dir.empty()) fs::create_directories(dir);
}

std::string slurp_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stoi(tok));
    return out;
}

// --- datagen ---------------------------------------------------------------

int cmd_datagen_rubik(std::size_t count, std::size_t len, std::uint64_t seed,
                      const std::string& out) {
    auto trajs = gen_rubik_trajectories(count, len, seed);
    ensure_parent(out);
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write " + out);
    save_trajectories<RubikEnv>(trajs, os);
    std::cout << "wrote " << trajs.size() << " trajectories to " << out << "\n";
    return 0;
}

int cmd_datagen_sokoban(const std::string& corpus, std::size_t node_limit,
                        const std::string& out) {
    auto boards = sokoban::parse_corpus(slurp_file(corpus));
    std::vector<std::size_t> skipped;
    auto trajs = gen_sokoban_trajectories(boards, node_limit, &skipped);
    ensure_parent(out);
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write " + out);
    save_trajectories<SokobanEnv>(trajs, os);
    std::cout << "wrote " << trajs.size() << " trajectories to " << out << " ("
              << skipped.size() << " boards skipped)\n";
    return 0;
}

int cmd_datagen_boards(std::size_t count, const BoardGenParams& params,
                       std::uint64_t seed, const std::string& out) {
    auto boards = generate_boards(count, params, seed);
    ensure_parent(out);
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write " + out);
    os << serialize_corpus(
        boards,
        {"subsearch board corpus v1",
         "params: width=" + std::to_string(params.width) +
             " height=" + std::to_string(params.height) +
             " boxes=" + std::to_string(params.boxes) +
             " wall_density=" + std::to_string(params.wall_density) +
             " seed=" + std::to_string(seed) + " count=" + std::to_string(count),
         "regenerate: subsearch datagen boards --count " + std::to_string(count) +
             " --width " + std::to_string(params.width) + " --height " +
             std::to_string(params.height) + " --boxes " + std::to_string(params.boxes) +
             " --seed " + std::to_string(seed)});
    std::cout << "wrote " << boards.size() << " boards to " << out << "\n";
    return 0;
}

// --- planner config assembly -------------------------------------------------

PlannerConfig planner_from_json(const json& j) {
    PlannerConfig cfg;
    const std::string name = j.value("strategy", "longest-first");
    auto strat = parse_strategy(name);
    if (!strat) throw ConfigError("unknown strategy '" + name + "'");
    cfg.strategy = *strat;
    cfg.generator_distances = j.value("distances", std::vector<int>{});
    std::vector<int> c2 = j.value("c2", std::vector<int>{});
    if (c2.empty())
        for (int k : cfg.generator_distances) c2.push_back(k + 2);
    if (c2.size() != cfg.generator_distances.size())
        throw ConfigError("c2 list must match distances");
    for (std::size_t i = 0; i < c2.size(); ++i)
        cfg.cllp_step_limit[cfg.generator_distances[i]] = c2[i];
    cfg.subgoals_per_generator = j.value("subgoals", 6);
    cfg.t_hi = j.value("t_hi", 1.0);
    cfg.t_lo = j.value("t_lo", 0.0);
    cfg.max_nodes = j.value("max_nodes", std::uint64_t{5000});
    if (j.contains("schedule"))
        for (const auto& pair : j["schedule"])
            cfg.iteration_schedule.emplace_back(pair[0].get<int>(), pair[1].get<int>());
    return cfg;
}

struct Experiment {
    std::string environment;
    std::string bundle_kind; // oracle | learned
    std::string models_dir;
    std::size_t instance_count = 1;
    std::size_t scramble_len = 6;
    std::uint64_t instance_seed = 1;
    std::string corpus;
    std::vector<std::uint64_t> budgets;
    int oracle_max_depth = 6;
    std::vector<StrategySpec> strategies;
    std::string output_dir;
};

Experiment experiment_from_json(const json& j) {
    Experiment e;
    e.environment = j.value("environment", "");
    if (e.environment != "rubik" && e.environment != "sokoban")
        throw ConfigError("environment must be rubik or sokoban");
    e.bundle_kind = j.value("bundle", "learned");
    if (e.bundle_kind != "learned" && e.bundle_kind != "oracle")
        throw ConfigError("bundle must be learned or oracle");
    e.models_dir = j.value("models_dir", "");
    if (j.contains("instances")) {
        const auto& inst = j["instances"];
        e.instance_count = inst.value("count", std::size_t{1});
        e.scramble_len = inst.value("scramble_len", std::size_t{6});
        e.instance_seed = inst.value("seed", std::uint64_t{1});
        e.corpus = inst.value("corpus", "");
    }
    e.budgets = j.value("budgets", std::vector<std::uint64_t>{});
    if (e.budgets.empty()) throw ConfigError("budgets must be a non-empty list");
    for (std::size_t i = 1; i < e.budgets.size(); ++i)
        if (e.budgets[i] <= e.budgets[i - 1])
            throw ConfigError("budgets must be strictly increasing");
    if (e.instance_count < 1) throw ConfigError("instance count must be >= 1");
    e.oracle_max_depth = j.value("oracle_max_depth", 6);
    if (!j.contains("strategies") || j["strategies"].empty())
        throw ConfigError("strategies must be a non-empty list");
    for (const auto& s : j["strategies"]) {
        StrategySpec spec;
        spec.label = s.value("label", std::string(s.value("strategy", "strategy")));
        spec.config = planner_from_json(s);
        spec.config.graph_size_cap = e.budgets.back();
        try {
            spec.config.validate();
        } catch (const std::exception& ex) {
            throw ConfigError("strategy '" + spec.label + "': " + ex.what());
        }
        e.strategies.push_back(std::move(spec));
    }
    e.output_dir = j.value("output_dir", "runs/experiment");
    return e;
}

std::vector<int> all_distances(const Experiment& e) {
    std::set<int> ks;
    for (const auto& s : e.strategies)
        for (int k : s.config.generator_distances) ks.insert(k);
    return {ks.rbegin(), ks.rend()};
}

int max_c2(const Experiment& e) {
    int m = 1;
    for (const auto& s : e.strategies)
        for (const auto& [k, c2] : s.config.cllp_step_limit) m = std::max(m, c2);
    return m;
}

bool any_verifier_active(const Experiment& e) {
    for (const auto& s : e.strategies)
        if (s.config.verifier_active()) return true;
    return false;
}

template <Environment Env>
std::vector<RunRecord> run_cells(const Experiment& e,
                                 const std::vector<typename Env::State>& instances,
                                 const BundleFactory<Env>& bundles, int jobs) {
    const std::string dir = resolve_out(e.output_dir);
    fs::create_directories(dir);
    auto records = run_experiment<Env>(instances, e.strategies, bundles,
                                       dir + "/results.csv", jobs,
                                       dir + "/timings.csv");
    std::ofstream summary(dir + "/summary.txt");
    summary << "instances " << instances.size() << ", strategies " << e.strategies.size()
            << "\n";
    for (const auto& s : e.strategies) {
        std::size_t solved = 0, n = 0;
        for (const auto& r : records) {
            if (r.strategy != s.label) continue;
            ++n;
            solved += r.status == SolveStatus::Solved;
        }
        summary << s.label << ": solved " << solved << "/" << n << "\n";
    }
    return records;
}

int cmd_run(const std::string& config_path, int jobs) {
    const json j = json::parse(slurp_file(config_path));
    const Experiment e = experiment_from_json(j);

    if (e.environment == "rubik") {
        std::vector<rubik::CubeState> instances;
        Rng rng(e.instance_seed);
        for (std::size_t i = 0; i < e.instance_count; ++i)
            instances.push_back(rubik::scramble(e.scramble_len, rng()).first);

        BundleFactory<RubikEnv> factory;
        if (e.bundle_kind == "oracle") {
            auto oracle = std::make_shared<RubikOracle>(e.oracle_max_depth, max_c2(e));
            oracle->solved_distance(rubik::solved_cube()); // pre-populate before workers
            auto bundle = make_rubik_oracle_bundle(oracle, all_distances(e));
            factory = [bundle](std::size_t, const rubik::CubeState&) { return bundle; };
        } else {
            auto lc = std::make_shared<LearnedComponents<RubikEnv>>(
                load_learned_components<RubikEnv>(e.models_dir, all_distances(e),
                                                  any_verifier_active(e)));
            auto bundle = make_learned_bundle<RubikEnv>(lc);
            factory = [bundle](std::size_t, const rubik::CubeState&) { return bundle; };
        }
        run_cells<RubikEnv>(e, instances, factory, jobs);
    } else {
        if (e.corpus.empty()) throw ConfigError("sokoban experiments need instances.corpus");
        auto instances = sokoban::parse_corpus(slurp_file(e.corpus));
        if (e.instance_count < instances.size()) instances.resize(e.instance_count);

        BundleFactory<SokobanEnv> factory;
        if (e.bundle_kind == "oracle") {
            const auto ks = all_distances(e);
            const int limit = max_c2(e);
            factory = [ks, limit](std::size_t, const sokoban::Board& b) {
                return make_sokoban_oracle_bundle(std::make_shared<SokobanOracle>(b), ks,
                                                  limit);
            };
        } else {
            auto lc = std::make_shared<LearnedComponents<SokobanEnv>>(
                load_learned_components<SokobanEnv>(e.models_dir, all_distances(e),
                                                    any_verifier_active(e)));
            auto bundle = make_learned_bundle<SokobanEnv>(lc);
            factory = [bundle](std::size_t, const sokoban::Board&) { return bundle; };
        }
        run_cells<SokobanEnv>(e, instances, factory, jobs);
    }
    std::cout << "results in " << resolve_out(e.output_dir) << "\n";
    return 0;
}

int cmd_report(const std::string& records_path, const std::string& out_dir,
               std::vector<std::uint64_t> budgets, std::size_t per_episodes) {
    auto records = load_run_records(records_path);
    if (budgets.empty()) throw ConfigError("report needs --budgets");
    const std::string dir = resolve_out(out_dir);
    fs::create_directories(dir);

    std::vector<std::string> labels;
    for (const auto& r : records)
        if (std::find(labels.begin(), labels.end(), r.strategy) == labels.end())
            labels.push_back(r.strategy);

    std::vector<NamedCurve> curves;
    for (const auto& label : labels)
        curves.push_back({label, compute_success_curve(records, label, budgets)});
    emit_plot_data(curves, dir + "/curves.csv");

    auto table = call_count_table(records, per_episodes);
    std::ofstream calls(dir + "/calls.csv");
    calls << "strategy,generator_calls,verifier_calls,policy_calls,value_calls,"
             "total_calls\n";
    char buf[160];
    for (const auto& row : table) {
        std::snprintf(buf, sizeof buf, "%s,%.1f,%.1f,%.1f,%.1f,%.1f",
                      row.strategy.c_str(), row.generator, row.verifier, row.policy,
                      row.value, row.total());
        calls << buf << '\n';
    }

    std::cout << "per " << per_episodes << " episodes:\n";
    for (const auto& row : table) {
        std::snprintf(buf, sizeof buf,
                      "  %-16s gen %12.0f  ver %10.0f  pol %12.0f  val %10.0f  total %12.0f",
                      row.strategy.c_str(), row.generator, row.verifier, row.policy,
                      row.value, row.total());
        std::cout << buf << "\n";
    }
    std::cout << "curves in " << dir << "/curves.csv\n";
    return 0;
}

// --- train -------------------------------------------------------------------

template <Environment Env>
int train_core_cmd(const std::string& traj_path, const std::string& models_dir,
                   const std::vector<int>& distances, double split_fraction,
                   std::uint64_t split_seed, const std::string& d2_out,
                   CoreTrainParams params) {
    std::ifstream is(traj_path);
    if (!is) throw ConfigError("cannot open " + traj_path);
    auto trajs = load_trajectories<Env>(is);
    auto [d1, d2] = split_dataset(trajs, split_fraction, split_seed);
    std::cout << "training on " << d1.size() << " trajectories (of " << trajs.size()
              << ")\n";
    auto core = train_core_components<Env>(d1, distances, params);
    save_learned_components<Env>(core, resolve_out(models_dir));
    if (!d2_out.empty()) {
        ensure_parent(resolve_out(d2_out));
        std::ofstream os(resolve_out(d2_out));
        save_trajectories<Env>(d2, os);
        std::cout << "held-out split (" << d2.size() << " trajectories) in " << d2_out
                  << "\n";
    }
    std::cout << "models in " << models_dir << "\n";
    return 0;
}

template <Environment Env>
int train_verifier_cmd(const std::string& samples_path, const std::string& models_dir,
                       const VerifierTrainParams& params) {
    std::ifstream is(samples_path);
    if (!is) throw ConfigError("cannot open " + samples_path);
    auto samples = load_verifier_samples<Env>(is);
    std::size_t pos = 0;
    for (const auto& s : samples) pos += s.label;
    std::cout << "training verifier on " << samples.size() << " samples (" << pos
              << " positive)\n";
    auto model = train_verifier_model<Env>(samples, params);
    save_linear_model_file(model, resolve_out(models_dir) + "/" + Env::name() +
                                      "_verifier.sslm");
    return 0;
}

template <Environment Env>
int datagen_verifier_cmd(const std::string& models_dir, const std::vector<int>& distances,
                         const std::vector<int>& c2, int subgoals,
                         std::uint64_t max_nodes, std::uint64_t graph_cap,
                         const std::vector<typename Env::State>& instances,
                         std::size_t cap, std::uint64_t seed, const std::string& out) {
    auto lc = std::make_shared<LearnedComponents<Env>>(
        load_learned_components<Env>(resolve_out(models_dir), distances, false));
    auto bundle = make_learned_bundle<Env>(lc);
    PlannerConfig cfg;
    cfg.strategy = Strategy::LongestFirst;
    cfg.generator_distances = distances;
    for (std::size_t i = 0; i < distances.size(); ++i)
        cfg.cllp_step_limit[distances[i]] =
            i < c2.size() ? c2[i] : distances[i] + 2;
    cfg.subgoals_per_generator = subgoals;
    cfg.t_hi = 1.0;
    cfg.t_lo = 0.0;
    cfg.max_nodes = max_nodes;
    cfg.graph_size_cap = graph_cap;
    cfg.validate();
    VerifierDatasetReport report;
    auto samples =
        collect_verifier_dataset<Env>(instances, bundle, cfg, cap, seed, &report);
    ensure_parent(resolve_out(out));
    std::ofstream os(resolve_out(out));
    save_verifier_samples<Env>(samples, os);
    std::cout << "collected " << samples.size() << " samples (+" << report.positives
              << " / -" << report.negatives << ") from " << report.instances_run
              << " instances\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"subgoal search benchmark harness"};
    app.require_subcommand(1);

    // ---- datagen
    auto* datagen = app.add_subcommand("datagen", "generate datasets");
    datagen->require_subcommand(1);

    std::size_t dg_count = 1000, dg_len = 20;
    std::uint64_t dg_seed = 1;
    std::string dg_out;
    auto* dg_rubik = datagen->add_subcommand("rubik", "reversed random cube walks");
    dg_rubik->add_option("--count", dg_count, "number of trajectories");
    dg_rubik->add_option("--scramble-len", dg_len, "scramble length");
    dg_rubik->add_option("--seed", dg_seed, "rng seed");
    dg_rubik->add_option("--out", dg_out, "output file")->required();

    std::string dg_corpus;
    std::size_t dg_node_limit = 400000;
    auto* dg_sok = datagen->add_subcommand("sokoban", "solver trajectories for a corpus");
    dg_sok->add_option("--corpus", dg_corpus, "XSB corpus file")->required();
    dg_sok->add_option("--node-limit", dg_node_limit, "solver node limit");
    dg_sok->add_option("--out", dg_out, "output file")->required();

    BoardGenParams bg;
    std::size_t bg_count = 200;
    auto* dg_boards = datagen->add_subcommand("boards", "random solvable sokoban boards");
    dg_boards->add_option("--count", bg_count, "number of boards");
    dg_boards->add_option("--width", bg.width, "board width");
    dg_boards->add_option("--height", bg.height, "board height");
    dg_boards->add_option("--boxes", bg.boxes, "boxes per board");
    dg_boards->add_option("--wall-density", bg.wall_density, "interior wall probability");
    dg_boards->add_option("--seed", dg_seed, "rng seed");
    dg_boards->add_option("--out", dg_out, "output file")->required();

    std::string dv_env, dv_models, dv_corpus;
    std::string dv_distances = "4,3,2", dv_c2;
    int dv_subgoals = 6;
    std::size_t dv_instances = 500, dv_scramble = 10, dv_cap = 100;
    std::uint64_t dv_seed = 1, dv_max_nodes = 250, dv_graph_cap = 4000;
    auto* dg_ver = datagen->add_subcommand(
        "verifier", "CLLP-labeled subgoal dataset via a no-verifier planner run");
    dg_ver->add_option("--env", dv_env, "rubik or sokoban")->required();
    dg_ver->add_option("--models", dv_models, "trained core models dir")->required();
    dg_ver->add_option("--distances", dv_distances, "generator distances, descending");
    dg_ver->add_option("--c2", dv_c2, "CLLP step limits per distance");
    dg_ver->add_option("--subgoals", dv_subgoals, "subgoals per generator call");
    dg_ver->add_option("--instances", dv_instances, "instance count (rubik)");
    dg_ver->add_option("--scramble-len", dv_scramble, "instance difficulty (rubik)");
    dg_ver->add_option("--corpus", dv_corpus, "instance boards (sokoban)");
    dg_ver->add_option("--cap", dv_cap, "max samples kept per instance");
    dg_ver->add_option("--seed", dv_seed, "rng seed");
    dg_ver->add_option("--max-nodes", dv_max_nodes, "planner C1");
    dg_ver->add_option("--graph-cap", dv_graph_cap, "planner graph-size cap");
    dg_ver->add_option("--out", dg_out, "output file")->required();

    // ---- train
    auto* train = app.add_subcommand("train", "train learned components");
    train->require_subcommand(1);

    std::string tr_env, tr_traj, tr_models, tr_d2_out;
    std::string tr_distances = "4,3,2";
    double tr_fraction = 0.5;
    std::uint64_t tr_split_seed = 7, tr_seed = 1;
    std::size_t tr_policy_cap = 400000;
    int tr_policy_epochs = 10;
    auto* tr_core = train->add_subcommand("core", "macro generators, policy, value");
    tr_core->add_option("--env", tr_env, "rubik or sokoban")->required();
    tr_core->add_option("--traj", tr_traj, "trajectory file")->required();
    tr_core->add_option("--models", tr_models, "output models dir")->required();
    tr_core->add_option("--distances", tr_distances, "generator distances, descending");
    tr_core->add_option("--split-fraction", tr_fraction, "fraction used for training");
    tr_core->add_option("--split-seed", tr_split_seed, "split seed");
    tr_core->add_option("--d2-out", tr_d2_out, "write the held-out split here");
    tr_core->add_option("--policy-cap", tr_policy_cap, "policy sample cap");
    tr_core->add_option("--policy-epochs", tr_policy_epochs, "policy SGD epochs");
    tr_core->add_option("--seed", tr_seed, "training seed");

    std::string tv_env, tv_samples, tv_models, tv_preset = "calibrated";
    auto* tr_ver = train->add_subcommand("verifier", "reachability scorer");
    tr_ver->add_option("--env", tv_env, "rubik or sokoban")->required();
    tr_ver->add_option("--samples", tv_samples, "verifier sample file")->required();
    tr_ver->add_option("--models", tv_models, "models dir")->required();
    tr_ver->add_option("--preset", tv_preset, "calibrated or gating");

    // ---- run / report
    std::string run_config;
    int run_jobs = 4;
    auto* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("--config", run_config, "experiment JSON")->required();
    run->add_option("--jobs", run_jobs, "worker threads");

    std::string rp_records, rp_out = "report";
    std::string rp_budgets;
    std::size_t rp_per = 1000;
    auto* report = app.add_subcommand("report", "curves and call tables from results");
    report->add_option("--records", rp_records, "results.csv path")->required();
    report->add_option("--out-dir", rp_out, "report output dir");
    report->add_option("--budgets", rp_budgets, "comma-separated budget grid")->required();
    report->add_option("--per-episodes", rp_per, "normalization for call counts");

    CLI11_PARSE(app, argc, argv);

    try {
        if (dg_rubik->parsed())
            return cmd_datagen_rubik(dg_count, dg_len, dg_seed, resolve_out(dg_out));
        if (dg_sok->parsed())
            return cmd_datagen_sokoban(dg_corpus, dg_node_limit, resolve_out(dg_out));
        if (dg_boards->parsed())
            return cmd_datagen_boards(bg_count, bg, dg_seed, resolve_out(dg_out));
        if (dg_ver->parsed()) {
            auto distances = parse_int_list(dv_distances);
            auto c2 = parse_int_list(dv_c2);
            if (dv_env == "rubik") {
                std::vector<rubik::CubeState> instances;
                Rng rng(dv_seed);
                for (std::size_t i = 0; i < dv_instances; ++i)
                    instances.push_back(rubik::scramble(dv_scramble, rng()).first);
                return datagen_verifier_cmd<RubikEnv>(dv_models, distances, c2,
                                                      dv_subgoals, dv_max_nodes,
                                                      dv_graph_cap, instances, dv_cap,
                                                      dv_seed, dg_out);
            }
            if (dv_env == "sokoban") {
                if (dv_corpus.empty())
                    throw ConfigError("sokoban verifier datagen needs --corpus");
                auto instances = sokoban::parse_corpus(slurp_file(dv_corpus));
                return datagen_verifier_cmd<SokobanEnv>(dv_models, distances, c2,
                                                        dv_subgoals, dv_max_nodes,
                                                        dv_graph_cap, instances, dv_cap,
                                                        dv_seed, dg_out);
            }
            throw ConfigError("--env must be rubik or sokoban");
        }
        if (tr_core->parsed()) {
            CoreTrainParams params;
            params.policy_sample_cap = tr_policy_cap;
            params.policy_train.epochs = tr_policy_epochs;
            params.policy_train.learning_rate = 0.1;
            params.policy_train.lr_decay = 0.9;
            params.seed = tr_seed;
            auto distances = parse_int_list(tr_distances);
            if (tr_env == "rubik")
                return train_core_cmd<RubikEnv>(tr_traj, tr_models, distances,
                                                tr_fraction, tr_split_seed, tr_d2_out,
                                                params);
            if (tr_env == "sokoban")
                return train_core_cmd<SokobanEnv>(tr_traj, tr_models, distances,
                                                  tr_fraction, tr_split_seed, tr_d2_out,
                                                  params);
            throw ConfigError("--env must be rubik or sokoban");
        }
        if (tr_ver->parsed()) {
            VerifierTrainParams params = tv_preset == "gating"
                                             ? VerifierTrainParams::gating()
                                             : VerifierTrainParams::calibrated();
            if (tv_preset != "gating" && tv_preset != "calibrated")
                throw ConfigError("--preset must be calibrated or gating");
            if (tv_env == "rubik")
                return train_verifier_cmd<RubikEnv>(tv_samples, tv_models, params);
            if (tv_env == "sokoban")
                return train_verifier_cmd<SokobanEnv>(tv_samples, tv_models, params);
            throw ConfigError("--env must be rubik or sokoban");
        }
        if (run->parsed()) return cmd_run(run_config, run_jobs);
        if (report->parsed())
            return cmd_report(rp_records, rp_out,
                              [&] {
                                  std::vector<std::uint64_t> budgets;
                                  for (int b : parse_int_list(rp_budgets))
                                      budgets.push_back(static_cast<std::uint64_t>(b));
                                  return budgets;
                              }(),
                              rp_per);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
