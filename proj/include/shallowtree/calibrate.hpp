#ifndef SHALLOWTREE_CALIBRATE_HPP
#define SHALLOWTREE_CALIBRATE_HPP

/**
 * @file calibrate.hpp
 *
 * @brief Search over the ExShallow trade-off parameter for a tree meeting a
 * cost goal and a WAES goal.
 */

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "builder.hpp"
#include "metrics.hpp"

namespace shallowtree {

struct CalibrationGoal {
    /// Largest acceptable normalized cost.
    double c_star = std::numeric_limits<double>::infinity();
    /// Target WAES.
    double w_star = std::numeric_limits<double>::infinity();
    double lambda_init = 0.03;
    double lambda_lo = 0.0;
    double lambda_hi = 1.0;
    std::size_t max_rounds = 12;
    /// Lower end used for geometric midpoints when the bracket starts at 0.
    double lambda_floor = 1e-4;
};

struct CalibrationStep {
    double lambda = 0.0;
    double normalized_cost = 0.0;
    double waes = 0.0;
};

struct CalibrationResult {
    double lambda = 0.0;
    ThresholdTree tree;
    MetricsReport report;
    /// Both goals met by the returned tree.
    bool goals_met = false;
    /// No visited tree satisfied the cost goal; the cheapest one is returned.
    bool failed = false;
    std::vector<CalibrationStep> steps;
};

/**
 * Starts at lambda_init and, while the goals are unmet, moves lambda down
 * when the cost is above c_star (cost takes priority) and up when only WAES
 * is above w_star. Midpoints are geometric; the first move down probes
 * lambda = 0 directly. Stops as soon as a tree meets both goals, when the
 * round budget runs out or when the midpoint stops moving.
 *
 * Without a tree meeting both goals, returns the lowest-WAES tree among the
 * visited ones within the cost goal, or the cheapest visited tree with
 * `failed` set when none is within the cost goal.
 */
inline CalibrationResult calibrate_lambda(const Dataset& X, const CenterSet& S,
                                          const Assignment& reference,
                                          const CalibrationGoal& goal) {
    if (!(goal.lambda_lo >= 0.0) || !(goal.lambda_lo <= goal.lambda_init) ||
        !(goal.lambda_init <= goal.lambda_hi) || goal.max_rounds < 1 ||
        !std::isfinite(goal.lambda_hi)) {
        throw std::invalid_argument("invalid calibration bracket");
    }
    if (std::isnan(goal.c_star) || std::isnan(goal.w_star)) {
        throw std::invalid_argument("calibration goals must not be NaN");
    }

    struct Visit {
        double lambda;
        ThresholdTree tree;
        MetricsReport report;
    };
    std::vector<Visit> visits;
    auto visit = [&](double lambda) -> const Visit& {
        ThresholdTree tree = build_tree(X, S, Strategy::ex_shallow(lambda));
        MetricsReport report = evaluate(tree, X, reference);
        visits.push_back({lambda, std::move(tree), std::move(report)});
        return visits.back();
    };
    auto cost_ok = [&](const MetricsReport& r) { return r.normalized_cost <= goal.c_star; };
    auto waes_ok = [&](const MetricsReport& r) { return r.waes <= goal.w_star; };
    auto midpoint = [&](double lo, double hi) {
        return std::sqrt(std::max(lo, goal.lambda_floor) * hi);
    };

    CalibrationResult result;
    auto finish = [&](const Visit& v, bool met, bool failed) {
        result.lambda = v.lambda;
        result.tree = v.tree;
        result.report = v.report;
        result.goals_met = met;
        result.failed = failed;
        for (const auto& s : visits) {
            result.steps.push_back({s.lambda, s.report.normalized_cost, s.report.waes});
        }
        return result;
    };

    double lambda = goal.lambda_init;
    double lo = goal.lambda_lo;
    double hi = goal.lambda_hi;
    bool zero_probed = false;
    visit(lambda);

    for (std::size_t round = 0;; ++round) {
        const Visit& last = visits.back();
        if (cost_ok(last.report) && waes_ok(last.report)) {
            return finish(last, true, false);
        }
        if (round == goal.max_rounds) {
            break;
        }
        double next;
        if (!cost_ok(last.report)) {
            hi = lambda;
            if (lo == 0.0 && !zero_probed) {
                next = 0.0;
                zero_probed = true;
            } else {
                next = midpoint(lo, hi);
            }
        } else {
            lo = lambda;
            next = midpoint(lo, hi);
        }
        if (next == lambda || next < goal.lambda_lo || next > goal.lambda_hi) {
            break;
        }
        if (next == 0.0 && lambda == 0.0) {
            break;
        }
        lambda = next;
        visit(lambda);
    }

    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < visits.size(); ++i) {
        const auto& r = visits[i].report;
        if (!cost_ok(r)) {
            continue;
        }
        if (!best || r.waes < visits[*best].report.waes ||
            (r.waes == visits[*best].report.waes &&
             r.normalized_cost < visits[*best].report.normalized_cost)) {
            best = i;
        }
    }
    if (best) {
        return finish(visits[*best], false, false);
    }
    std::size_t cheapest = 0;
    for (std::size_t i = 1; i < visits.size(); ++i) {
        if (visits[i].report.normalized_cost < visits[cheapest].report.normalized_cost) {
            cheapest = i;
        }
    }
    return finish(visits[cheapest], false, true);
}

}  // namespace shallowtree

#endif  // SHALLOWTREE_CALIBRATE_HPP
