#ifndef SHALLOWTREE_EXPERIMENT_HPP
#define SHALLOWTREE_EXPERIMENT_HPP

/**
 * @file experiment.hpp
 *
 * @brief Seeded experiment runs: k-means++ and Lloyd per seed, then a tree
 * per strategy, collected into result tables.
 */

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "builder.hpp"
#include "calibrate.hpp"
#include "io.hpp"
#include "kmeans.hpp"
#include "metrics.hpp"

namespace shallowtree {

struct RunConfig {
    std::size_t k = 2;
    Strategy strategy = Strategy::ex_shallow();
    std::vector<std::uint64_t> seeds{0};
    LloydConfig lloyd{};
    /// Worker threads for the seed loop; 0 picks the hardware concurrency.
    std::size_t threads = 1;
};

struct SeedRun {
    std::uint64_t seed;
    LloydResult reference;
    ThresholdTree tree;
    MetricsReport report;
    double kmeans_seconds = 0.0;
    double build_seconds = 0.0;
};

struct Summary {
    double normalized_cost = 0.0;
    double waes = 0.0;
    double wad = 0.0;
    double nmi = 0.0;
    double max_depth = 0.0;
    double kmeans_seconds = 0.0;
    double build_seconds = 0.0;
};

struct ExperimentResult {
    std::vector<SeedRun> runs;
    Summary mean;
};

/// Thread count from SHALLOWTREE_THREADS (unset or 0 means automatic).
inline std::size_t threads_from_env() {
    const char* raw = std::getenv("SHALLOWTREE_THREADS");
    if (raw == nullptr || *raw == '\0') {
        return 0;
    }
    char* end = nullptr;
    const unsigned long v = std::strtoul(raw, &end, 10);
    if (end == raw || *end != '\0') {
        throw std::invalid_argument("SHALLOWTREE_THREADS must be a nonnegative integer");
    }
    return static_cast<std::size_t>(v);
}

namespace detail {

/// Runs body(i) for i in [0, count) on up to `threads` workers; rethrows the first failure.
template <typename Body>
void parallel_for(std::size_t count, std::size_t threads, Body body) {
    if (threads == 0) {
        threads = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    }
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// The unrestricted solution for one seed.
inline LloydResult reference_solution(const Dataset& X, std::size_t k, std::uint64_t seed,
                                      LloydConfig cfg = {}) {
    cfg.seed = seed;
    return kmeans(X, k, cfg);
}

inline Summary summarize(const std::vector<SeedRun>& runs) {
    Summary s;
    if (runs.empty()) {
        return s;
    }
    for (const auto& r : runs) {
        s.normalized_cost += r.report.normalized_cost;
        s.waes += r.report.waes;
        s.wad += r.report.wad;
        s.nmi += r.report.nmi_vs_reference;
        s.max_depth += static_cast<double>(r.report.max_depth);
        s.kmeans_seconds += r.kmeans_seconds;
        s.build_seconds += r.build_seconds;
    }
    const double n = static_cast<double>(runs.size());
    s.normalized_cost /= n;
    s.waes /= n;
    s.wad /= n;
    s.nmi /= n;
    s.max_depth /= n;
    s.kmeans_seconds /= n;
    s.build_seconds /= n;
    return s;
}

/// One row per seed plus means; rows stay in seed-list order whatever the thread count.
inline ExperimentResult run_experiment(const Dataset& X, const RunConfig& cfg) {
    if (cfg.k < 1) {
        throw std::invalid_argument("k must be at least 1");
    }
    if (cfg.seeds.empty()) {
        throw std::invalid_argument("at least one seed is required");
    }
    std::vector<std::optional<SeedRun>> slots(cfg.seeds.size());
    detail::parallel_for(cfg.seeds.size(), cfg.threads, [&](std::size_t i) {
        const std::uint64_t seed = cfg.seeds[i];
        auto t0 = std::chrono::steady_clock::now();
        LloydResult reference = reference_solution(X, cfg.k, seed, cfg.lloyd);
        const double kmeans_seconds = detail::seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        ThresholdTree tree = build_tree(X, reference.centers, cfg.strategy);
        const double build_seconds = detail::seconds_since(t0);
        MetricsReport report = evaluate(tree, X, reference.assignment);
        slots[i] = SeedRun{seed, std::move(reference), std::move(tree), std::move(report),
                           kmeans_seconds, build_seconds};
    });
    ExperimentResult result;
    for (auto& slot : slots) {
        result.runs.push_back(std::move(*slot));
    }
    result.mean = summarize(result.runs);
    return result;
}

/// CSV table: header, one row per seed, then a "mean" row. Timing columns are optional.
inline std::string format_table(const ExperimentResult& result, const Strategy& strategy,
                                bool timing) {
    using detail::format_real;
    std::string out = "seed,strategy,lambda,normalized_cost,waes,wad,nmi,max_depth,cost,reference_cost";
    out += timing ? ",kmeans_seconds,build_seconds\n" : "\n";
    const std::string lambda =
        strategy.kind == StrategyKind::ex_shallow ? format_real(strategy.lambda) : "";
    for (const auto& r : result.runs) {
        out += std::to_string(r.seed) + "," + strategy.name() + "," + lambda + ",";
        out += format_real(r.report.normalized_cost) + "," + format_real(r.report.waes) + ",";
        out += format_real(r.report.wad) + "," + format_real(r.report.nmi_vs_reference) + ",";
        out += std::to_string(r.report.max_depth) + "," + format_real(r.report.cost) + ",";
        out += format_real(r.report.reference_cost);
        if (timing) {
            out += "," + format_real(r.kmeans_seconds) + "," + format_real(r.build_seconds);
        }
        out += "\n";
    }
    const Summary& m = result.mean;
    out += "mean," + strategy.name() + "," + lambda + ",";
    out += format_real(m.normalized_cost) + "," + format_real(m.waes) + "," + format_real(m.wad) +
           "," + format_real(m.nmi) + "," + format_real(m.max_depth) + ",,";
    if (timing) {
        out += "," + format_real(m.kmeans_seconds) + "," + format_real(m.build_seconds);
    }
    out += "\n";
    return out;
}

struct CalibrationRun {
    std::uint64_t seed = 0;
    CalibrationResult result;
};

/**
 * Per seed, calibrates lambda against `goal`. Goals left infinite are filled
 * in with the ExKMC-style baseline's means over the same seeds.
 */
inline std::vector<CalibrationRun> run_calibration(const Dataset& X, const RunConfig& cfg,
                                                   CalibrationGoal goal) {
    if (cfg.seeds.empty()) {
        throw std::invalid_argument("at least one seed is required");
    }
    std::vector<std::optional<LloydResult>> slots(cfg.seeds.size());
    detail::parallel_for(cfg.seeds.size(), cfg.threads, [&](std::size_t i) {
        slots[i] = reference_solution(X, cfg.k, cfg.seeds[i], cfg.lloyd);
    });
    std::vector<LloydResult> refs;
    for (auto& slot : slots) {
        refs.push_back(std::move(*slot));
    }
    if (!std::isfinite(goal.c_star) || !std::isfinite(goal.w_star)) {
        double cost = 0.0;
        double waes_sum = 0.0;
        for (const auto& ref : refs) {
            const auto tree = build_tree(X, ref.centers, Strategy::exkmc());
            const auto report = evaluate(tree, X, ref.assignment);
            cost += report.normalized_cost;
            waes_sum += report.waes;
        }
        const double n = static_cast<double>(refs.size());
        if (!std::isfinite(goal.c_star)) {
            goal.c_star = cost / n;
        }
        if (!std::isfinite(goal.w_star)) {
            goal.w_star = waes_sum / n;
        }
    }
    std::vector<CalibrationRun> runs(cfg.seeds.size());
    detail::parallel_for(cfg.seeds.size(), cfg.threads, [&](std::size_t i) {
        runs[i].seed = cfg.seeds[i];
        runs[i].result = calibrate_lambda(X, refs[i].centers, refs[i].assignment, goal);
    });
    return runs;
}

inline std::string format_calibration_table(const std::vector<CalibrationRun>& runs) {
    using detail::format_real;
    std::string out = "seed,lambda,normalized_cost,waes,wad,nmi,builds,goals_met,failed\n";
    for (const auto& r : runs) {
        const auto& rep = r.result.report;
        out += std::to_string(r.seed) + "," + format_real(r.result.lambda) + ",";
        out += format_real(rep.normalized_cost) + "," + format_real(rep.waes) + ",";
        out += format_real(rep.wad) + "," + format_real(rep.nmi_vs_reference) + ",";
        out += std::to_string(r.result.steps.size()) + ",";
        out += std::string(r.result.goals_met ? "1" : "0") + "," + (r.result.failed ? "1" : "0");
        out += "\n";
    }
    return out;
}

}  // namespace shallowtree

#endif  // SHALLOWTREE_EXPERIMENT_HPP
