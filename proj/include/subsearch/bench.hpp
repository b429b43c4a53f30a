#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "subsearch/search.hpp"

namespace subsearch {

// Experiment runner: one solve per (instance, strategy) cell at the maximum
// budget; smaller budgets are scored afterwards by the graph size at
// solution time, which makes success monotone in the budget by construction.
// Rows are committed to the CSV in cell order regardless of worker timing,
// so identical configs produce byte-identical files. Wall-clock times go to
// a sidecar file that is excluded from the determinism contract.

struct StrategySpec {
    std::string label;
    PlannerConfig config;
};

struct RunRecord {
    std::size_t instance = 0;
    std::string strategy;
    SolveStatus status = SolveStatus::QueueEmpty;
    SearchStats stats;
    std::size_t path_length = 0;
    double wall_ms = 0.0;
};

inline std::string run_record_header() {
    return "instance,strategy,status,path_len,graph_size,high_level_nodes,"
           "generator_calls,verifier_calls,policy_calls,value_calls,"
           "reconstruction_policy_calls,false_positives";
}

inline std::string run_record_csv(const RunRecord& r) {
    std::ostringstream os;
    os << r.instance << ',' << r.strategy << ',' << solve_status_name(r.status) << ','
       << r.path_length << ',' << r.stats.graph_size << ',' << r.stats.high_level_nodes
       << ',' << r.stats.generator_calls << ',' << r.stats.verifier_calls << ','
       << r.stats.policy_calls << ',' << r.stats.value_calls << ','
       << r.stats.policy_calls_reconstruction << ','
       << r.stats.verifier_false_positives;
    return os.str();
}

inline RunRecord parse_run_record(const std::string& line) {
    std::stringstream ss(line);
    std::string tok;
    auto next = [&] {
        if (!std::getline(ss, tok, ',')) throw std::runtime_error("records csv: short row");
        return tok;
    };
    RunRecord r;
    r.instance = std::stoull(next());
    r.strategy = next();
    const std::string status = next();
    bool known = false;
    for (auto s : {SolveStatus::Solved, SolveStatus::BudgetExhausted,
                   SolveStatus::QueueEmpty, SolveStatus::VerifierFalsePositive}) {
        if (solve_status_name(s) == status) {
            r.status = s;
            known = true;
        }
    }
    if (!known) throw std::runtime_error("records csv: bad status " + status);
    r.path_length = std::stoull(next());
    r.stats.graph_size = std::stoull(next());
    r.stats.high_level_nodes = std::stoull(next());
    r.stats.generator_calls = std::stoull(next());
    r.stats.verifier_calls = std::stoull(next());
    r.stats.policy_calls = std::stoull(next());
    r.stats.value_calls = std::stoull(next());
    r.stats.policy_calls_reconstruction = std::stoull(next());
    r.stats.verifier_false_positives = std::stoull(next());
    return r;
}

inline std::vector<RunRecord> load_run_records(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("records csv: cannot open " + path);
    std::string line;
    std::getline(is, line);
    if (line != run_record_header())
        throw std::runtime_error("records csv: unexpected header");
    std::vector<RunRecord> out;
    while (std::getline(is, line))
        if (!line.empty()) out.push_back(parse_run_record(line));
    return out;
}

// Per-instance bundle supplier; shared bundles just return a copy of the
// same closures.
template <Environment Env>
using BundleFactory =
    std::function<ComponentBundle<Env>(std::size_t, const typename Env::State&)>;

template <Environment Env>
std::vector<RunRecord> run_experiment(const std::vector<typename Env::State>& instances,
                                      const std::vector<StrategySpec>& strategies,
                                      const BundleFactory<Env>& bundles,
                                      const std::string& csv_path, int jobs = 1,
                                      const std::string& timing_path = {}) {
    struct Cell {
        std::size_t instance;
        std::size_t strategy;
    };
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < instances.size(); ++i)
        for (std::size_t s = 0; s < strategies.size(); ++s) cells.push_back({i, s});

    // Resume support: skip cells already present in a partial CSV.
    std::set<std::pair<std::size_t, std::string>> have;
    const bool resuming = !csv_path.empty() && std::filesystem::exists(csv_path);
    std::vector<RunRecord> records;
    if (resuming) {
        records = load_run_records(csv_path);
        for (const auto& r : records) have.emplace(r.instance, r.strategy);
    }

    std::vector<std::size_t> todo;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& cell = cells[c];
        if (!have.contains({cell.instance, strategies[cell.strategy].label}))
            todo.push_back(c);
    }

    std::vector<RunRecord> fresh(todo.size());
    std::vector<char> done(todo.size(), 0);
    std::mutex mu;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;

    auto work = [&] {
        while (true) {
            const std::size_t t = next.fetch_add(1);
            if (t >= todo.size()) return;
            const auto& cell = cells[todo[t]];
            RunRecord rec;
            rec.instance = cell.instance;
            rec.strategy = strategies[cell.strategy].label;
            try {
                const auto& init = instances[cell.instance];
                auto bundle = bundles(cell.instance, init);
                // factories may provide one bundle for all strategies; narrow
                // the generator map to this strategy's distance set
                const auto& cfg = strategies[cell.strategy].config;
                if (cfg.strategy != Strategy::BestFS) {
                    for (auto it = bundle.generators.begin();
                         it != bundle.generators.end();) {
                        const bool used =
                            std::find(cfg.generator_distances.begin(),
                                      cfg.generator_distances.end(),
                                      it->first) != cfg.generator_distances.end();
                        it = used ? std::next(it) : bundle.generators.erase(it);
                    }
                }
                const auto t0 = std::chrono::steady_clock::now();
                auto outcome = solve<Env>(init, bundle, strategies[cell.strategy].config);
                const auto t1 = std::chrono::steady_clock::now();
                if (!validate_outcome<Env>(init, outcome))
                    throw std::runtime_error("run_experiment: replay validation failed");
                rec.status = outcome.status;
                rec.stats = outcome.stats;
                rec.path_length = outcome.action_path.size();
                rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
                done[t] = 1;
                cv.notify_all();
                return;
            }
            {
                std::lock_guard lock(mu);
                fresh[t] = std::move(rec);
                done[t] = 1;
            }
            cv.notify_all();
        }
    };

    std::vector<std::thread> pool;
    const int n_workers = std::max(1, jobs);
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(work);

    std::ofstream csv;
    std::ofstream timing;
    if (!csv_path.empty()) {
        csv.open(csv_path, resuming ? std::ios::app : std::ios::out);
        if (!csv) throw std::runtime_error("run_experiment: cannot open " + csv_path);
        if (!resuming) csv << run_record_header() << '\n';
    }
    if (!timing_path.empty()) {
        timing.open(timing_path, std::ios::app);
        timing << "instance,strategy,wall_ms\n";
    }

    {
        std::unique_lock lock(mu);
        for (std::size_t cursor = 0; cursor < todo.size(); ++cursor) {
            cv.wait(lock, [&] { return done[cursor] || error; });
            if (error) break;
            if (csv.is_open()) {
                csv << run_record_csv(fresh[cursor]) << '\n';
                csv.flush();
            }
            if (timing.is_open())
                timing << fresh[cursor].instance << ',' << fresh[cursor].strategy << ','
                       << fresh[cursor].wall_ms << '\n';
        }
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);

    records.insert(records.end(), fresh.begin(), fresh.end());
    return records;
}

// --- reporting ----------------------------------------------------------------

struct CurvePoint {
    std::uint64_t budget = 0;
    double rate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

// 95% Wilson score interval.
inline CurvePoint wilson_point(std::uint64_t budget, std::size_t successes,
                               std::size_t n) {
    CurvePoint p;
    p.budget = budget;
    if (n == 0) return p;
    constexpr double z = 1.959963984540054;
    const double phat = static_cast<double>(successes) / static_cast<double>(n);
    const double z2 = z * z;
    const double denom = 1.0 + z2 / static_cast<double>(n);
    const double center = phat + z2 / (2.0 * static_cast<double>(n));
    const double half =
        z * std::sqrt(phat * (1.0 - phat) / static_cast<double>(n) +
                      z2 / (4.0 * static_cast<double>(n) * static_cast<double>(n)));
    p.rate = phat;
    p.ci_lo = (center - half) / denom;
    p.ci_hi = (center + half) / denom;
    return p;
}

// Success within a budget = solved with solution graph size <= budget.
inline std::vector<CurvePoint> compute_success_curve(
    const std::vector<RunRecord>& records, const std::string& strategy,
    const std::vector<std::uint64_t>& budgets) {
    std::vector<const RunRecord*> rows;
    for (const auto& r : records)
        if (r.strategy == strategy) rows.push_back(&r);
    std::vector<CurvePoint> out;
    for (auto b : budgets) {
        std::size_t solved = 0;
        for (auto* r : rows)
            if (r->status == SolveStatus::Solved && r->stats.graph_size <= b) ++solved;
        out.push_back(wilson_point(b, solved, rows.size()));
    }
    return out;
}

struct CallCountRow {
    std::string strategy;
    double generator = 0.0;
    double verifier = 0.0;
    double policy = 0.0;
    double value = 0.0;
    double total() const { return generator + verifier + policy + value; }
};

// Component call totals normalized to `per_episodes` episodes.
inline std::vector<CallCountRow> call_count_table(const std::vector<RunRecord>& records,
                                                  std::size_t per_episodes) {
    std::vector<std::string> order;
    for (const auto& r : records)
        if (std::find(order.begin(), order.end(), r.strategy) == order.end())
            order.push_back(r.strategy);
    std::vector<CallCountRow> out;
    for (const auto& label : order) {
        CallCountRow row;
        row.strategy = label;
        std::size_t n = 0;
        std::uint64_t g = 0, ver = 0, pol = 0, val = 0;
        for (const auto& r : records) {
            if (r.strategy != label) continue;
            ++n;
            g += r.stats.generator_calls;
            ver += r.stats.verifier_calls;
            pol += r.stats.policy_calls;
            val += r.stats.value_calls;
        }
        const double scale =
            n == 0 ? 0.0 : static_cast<double>(per_episodes) / static_cast<double>(n);
        row.generator = static_cast<double>(g) * scale;
        row.verifier = static_cast<double>(ver) * scale;
        row.policy = static_cast<double>(pol) * scale;
        row.value = static_cast<double>(val) * scale;
        out.push_back(row);
    }
    return out;
}

struct NamedCurve {
    std::string strategy;
    std::vector<CurvePoint> points;
};

// One CSV per figure: strategy,budget,rate,ci_lo,ci_hi. Re-emits are
// byte-identical; an empty curve set produces a header-only file.
inline void emit_plot_data(const std::vector<NamedCurve>& curves,
                           const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("emit_plot_data: cannot open " + path);
    os << "# subsearch-curves v1\n";
    os << "strategy,budget,rate,ci_lo,ci_hi\n";
    char buf[64];
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f", p.rate, p.ci_lo, p.ci_hi);
            os << c.strategy << ',' << p.budget << ',' << buf << '\n';
        }
    }
}

} // namespace subsearch
