#ifndef SHALLOWTREE_METRICS_HPP
#define SHALLOWTREE_METRICS_HPP

/**
 * @file metrics.hpp
 *
 * @brief Quality and explainability measures of threshold trees.
 */

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "core.hpp"

namespace shallowtree {

enum class Direction { le, gt };

/// One path condition: `x[dim] <= theta` or `x[dim] > theta`.
struct Condition {
    std::size_t dim = 0;
    Direction direction = Direction::le;
    double theta = 0.0;

    bool holds(std::span<const double> x) const {
        return direction == Direction::le ? x[dim] <= theta : x[dim] > theta;
    }

    friend bool operator==(const Condition&, const Condition&) = default;
};

struct Explanation {
    /// Conditions along the root-to-leaf path, root first.
    std::vector<Condition> conditions;
    /// redundant[i] is set when conditions[i] can be dropped without changing the region.
    std::vector<bool> redundant;

    /// The non-redundant conditions, in path order.
    std::vector<Condition> reduced() const {
        std::vector<Condition> out;
        for (std::size_t i = 0; i < conditions.size(); ++i) {
            if (!redundant[i]) {
                out.push_back(conditions[i]);
            }
        }
        return out;
    }

    std::size_t size() const { return conditions.size(); }
    std::size_t reduced_size() const { return reduced().size(); }

    bool holds(std::span<const double> x) const {
        for (const auto& c : conditions) {
            if (!c.holds(x)) {
                return false;
            }
        }
        return true;
    }
};

/**
 * Flags redundant conditions. Per (dim, direction) only the tightest bound is
 * kept: the smallest theta among `<=`, the largest among `>`; the first
 * occurrence wins among equal thresholds.
 */
inline Explanation explain(std::vector<Condition> conditions) {
    Explanation e;
    e.conditions = std::move(conditions);
    e.redundant.assign(e.conditions.size(), true);
    std::map<std::pair<std::size_t, Direction>, std::size_t> tightest;
    for (std::size_t i = 0; i < e.conditions.size(); ++i) {
        const auto& c = e.conditions[i];
        const auto key = std::make_pair(c.dim, c.direction);
        auto it = tightest.find(key);
        if (it == tightest.end()) {
            tightest.emplace(key, i);
            continue;
        }
        const double cur = e.conditions[it->second].theta;
        if (c.direction == Direction::le ? c.theta < cur : c.theta > cur) {
            it->second = i;
        }
    }
    for (const auto& [key, i] : tightest) {
        e.redundant[i] = false;
    }
    return e;
}

/// Path conditions of a leaf with the redundant ones flagged.
inline Explanation explanation(const ThresholdTree& tree, NodeId leaf) {
    if (!tree.node(leaf).leaf) {
        throw std::invalid_argument("explanation needs a leaf");
    }
    std::vector<Condition> conds;
    for (const auto& [id, went_left] : tree.path_to(leaf)) {
        const Cut& cut = tree.node(id).cut;
        conds.push_back({cut.dim, went_left ? Direction::le : Direction::gt, cut.theta});
    }
    return explain(std::move(conds));
}

/// Sum over leaves of the squared distances of the leaf points to their mean.
inline double tree_cost(const ThresholdTree& tree, const Dataset& X) {
    double total = 0.0;
    std::vector<double> mean(X.dim());
    for (const auto& node : tree.nodes()) {
        if (!node.leaf || node.points.empty()) {
            continue;
        }
        std::fill(mean.begin(), mean.end(), 0.0);
        for (PointId p : node.points) {
            const auto x = X.point(p);
            for (std::size_t j = 0; j < X.dim(); ++j) {
                mean[j] += x[j];
            }
        }
        for (double& m : mean) {
            m /= static_cast<double>(node.points.size());
        }
        for (PointId p : node.points) {
            total += squared_distance(X.point(p), mean);
        }
    }
    return total;
}

/// Within-cluster sum of squares of a labelled partition, each cluster served by its mean.
inline double partition_cost(const Dataset& X, const Assignment& labels) {
    if (labels.size() != X.size()) {
        throw std::invalid_argument("assignment length does not match the dataset");
    }
    std::map<std::size_t, std::pair<std::vector<double>, std::size_t>> sums;
    for (PointId p = 0; p < X.size(); ++p) {
        auto& [sum, count] = sums[labels.labels[p]];
        sum.resize(X.dim(), 0.0);
        const auto x = X.point(p);
        for (std::size_t j = 0; j < X.dim(); ++j) {
            sum[j] += x[j];
        }
        ++count;
    }
    for (auto& [label, entry] : sums) {
        for (double& v : entry.first) {
            v /= static_cast<double>(entry.second);
        }
    }
    double total = 0.0;
    for (PointId p = 0; p < X.size(); ++p) {
        total += squared_distance(X.point(p), sums[labels.labels[p]].first);
    }
    return total;
}

/// Size-weighted mean leaf depth.
inline double wad(const ThresholdTree& tree) {
    if (tree.empty()) {
        throw std::invalid_argument("empty tree");
    }
    double weighted = 0.0;
    std::size_t n = 0;
    for (const auto& node : tree.nodes()) {
        if (node.leaf) {
            weighted += static_cast<double>(node.points.size() * node.depth);
            n += node.points.size();
        }
    }
    return n == 0 ? 0.0 : weighted / static_cast<double>(n);
}

/// Size-weighted mean number of non-redundant path conditions.
inline double waes(const ThresholdTree& tree) {
    if (tree.empty()) {
        throw std::invalid_argument("empty tree");
    }
    double weighted = 0.0;
    std::size_t n = 0;
    for (NodeId id : tree.leaves()) {
        const auto& node = tree.node(id);
        weighted += static_cast<double>(node.points.size() * explanation(tree, id).reduced_size());
        n += node.points.size();
    }
    return n == 0 ? 0.0 : weighted / static_cast<double>(n);
}

/**
 * Normalized mutual information with arithmetic-mean normalization and
 * natural logarithms. Two constant labelings score 1; a constant labeling
 * against a non-constant one scores 0.
 */
inline double nmi(const Assignment& a, const Assignment& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("assignments have different lengths");
    }
    const std::size_t n = a.size();
    if (n == 0) {
        throw std::invalid_argument("empty assignments");
    }
    std::map<std::size_t, std::size_t> ca;
    std::map<std::size_t, std::size_t> cb;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> joint;
    for (std::size_t i = 0; i < n; ++i) {
        ++ca[a.labels[i]];
        ++cb[b.labels[i]];
        ++joint[{a.labels[i], b.labels[i]}];
    }
    // identical up to relabeling: every row and column of the contingency table has one cell
    if (joint.size() == ca.size() && joint.size() == cb.size()) {
        return 1.0;
    }
    const double N = static_cast<double>(n);
    auto entropy = [N](const std::map<std::size_t, std::size_t>& counts) {
        double h = 0.0;
        for (const auto& [label, c] : counts) {
            const double p = static_cast<double>(c) / N;
            h -= p * std::log(p);
        }
        return h;
    };
    const double ha = entropy(ca);
    const double hb = entropy(cb);
    if (ha <= 0.0 || hb <= 0.0) {
        return 0.0;
    }
    double mi = 0.0;
    for (const auto& [key, c] : joint) {
        const double nij = static_cast<double>(c);
        const double ai = static_cast<double>(ca[key.first]);
        const double bj = static_cast<double>(cb[key.second]);
        mi += nij / N * std::log(N * nij / (ai * bj));
    }
    return std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
}

struct MetricsReport {
    double cost = 0.0;
    double reference_cost = 0.0;
    double normalized_cost = 1.0;
    double wad = 0.0;
    double waes = 0.0;
    std::size_t max_depth = 0;
    double nmi_vs_reference = 1.0;
    std::vector<std::size_t> leaf_sizes;
    std::vector<std::size_t> leaf_depths;
};

/**
 * Evaluates a tree built over X against the unrestricted partition given by
 * `reference`. The normalizing cost is that partition's cost with its own
 * cluster means.
 */
inline MetricsReport evaluate(const ThresholdTree& tree, const Dataset& X,
                              const Assignment& reference) {
    MetricsReport r;
    r.cost = tree_cost(tree, X);
    r.reference_cost = partition_cost(X, reference);
    if (r.reference_cost > 0.0) {
        r.normalized_cost = r.cost / r.reference_cost;
    } else {
        r.normalized_cost = r.cost > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    }
    r.wad = wad(tree);
    r.waes = waes(tree);
    r.max_depth = tree.max_depth();
    r.nmi_vs_reference = nmi(assignment_from_tree(tree, X.size()), reference);
    for (NodeId id : tree.leaves()) {
        r.leaf_sizes.push_back(tree.node(id).points.size());
        r.leaf_depths.push_back(tree.node(id).depth);
    }
    return r;
}

struct SyntheticInstance {
    Dataset points;
    CenterSet centers;
    /// Group index of every point, which is also the optimal k-partition.
    Assignment groups;
};

/**
 * k nested groups in R^k: group i (1-based) holds 4^i - 1 points whose
 * coordinates all equal 4^i + j for the j-th point. Centers are the group
 * means. Valid for 2 <= k <= 6.
 */
inline SyntheticInstance synthetic_d1_d4(std::size_t k) {
    if (k < 2 || k > 6) {
        throw std::invalid_argument("synthetic instance needs 2 <= k <= 6");
    }
    std::vector<double> points;
    std::vector<double> centers;
    Assignment groups;
    std::size_t n = 0;
    for (std::size_t i = 1; i <= k; ++i) {
        const double base = std::ldexp(1.0, static_cast<int>(2 * i));
        const auto count = static_cast<std::size_t>(base) - 1;
        double sum = 0.0;
        for (std::size_t j = 1; j <= count; ++j) {
            const double v = base + static_cast<double>(j);
            points.insert(points.end(), k, v);
            groups.labels.push_back(i - 1);
            sum += v;
        }
        centers.insert(centers.end(), k, sum / static_cast<double>(count));
        n += count;
    }
    return {Dataset(Matrix(n, k, std::move(points))), CenterSet(Matrix(k, k, std::move(centers))),
            std::move(groups)};
}

}  // namespace shallowtree

#endif  // SHALLOWTREE_METRICS_HPP
