#ifndef SHALLOWTREE_BUILDER_HPP
#define SHALLOWTREE_BUILDER_HPP

/**
 * @file builder.hpp
 *
 * @brief Top-down construction of threshold trees with exactly k leaves.
 *
 * Every strategy shares the same recursion: at a node holding two or more
 * reference centers, score all candidate cuts, take the minimum of the
 * strategy's objective (ties to the smallest (dim, theta)) and recurse,
 * left child first. The recursion stops at nodes with a single center.
 *
 * ExShallow minimises Price + lambda * DExp, where DExp estimates how the
 * cut affects the weighted average depth of the subtree (eval_wad) and
 * discounts edges that make an earlier condition on the path redundant
 * (eval_dexp, fed by the KillerTracker).
 */

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "core.hpp"
#include "splitter.hpp"

namespace shallowtree {

enum class StrategyKind { ex_shallow, ex_greedy, imm, exkmc };

struct Strategy {
    StrategyKind kind = StrategyKind::ex_shallow;
    double lambda = 0.03;

    static Strategy ex_shallow(double lambda = 0.03) {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
            throw std::invalid_argument("lambda must be a finite nonnegative number");
        }
        return {StrategyKind::ex_shallow, lambda};
    }
    static Strategy ex_greedy() { return {StrategyKind::ex_greedy, 0.0}; }
    static Strategy imm() { return {StrategyKind::imm, 0.0}; }
    static Strategy exkmc() { return {StrategyKind::exkmc, 0.0}; }

    /// Parses exshallow / exgreedy / imm / exkmc.
    static Strategy parse(std::string_view name, double lambda = 0.03) {
        if (name == "exshallow") {
            return ex_shallow(lambda);
        }
        if (name == "exgreedy") {
            return ex_greedy();
        }
        if (name == "imm") {
            return imm();
        }
        if (name == "exkmc") {
            return exkmc();
        }
        throw std::invalid_argument("unknown strategy: " + std::string(name));
    }

    std::string name() const {
        switch (kind) {
            case StrategyKind::ex_shallow: return "exshallow";
            case StrategyKind::ex_greedy: return "exgreedy";
            case StrategyKind::imm: return "imm";
            case StrategyKind::exkmc: return "exkmc";
        }
        return "unknown";
    }
};

/**
 * @brief Counts of left and right edges per dimension on the current
 * root-to-node path.
 *
 * A new left (right) edge on dimension i is killer iff the path already
 * holds a left (right) edge on dimension i.
 */
class KillerTracker {
public:
    explicit KillerTracker(std::size_t d) : left_(d, 0), right_(d, 0) {}

    std::size_t dim() const { return left_.size(); }
    std::size_t left(std::size_t i) const { return left_.at(i); }
    std::size_t right(std::size_t i) const { return right_.at(i); }

    void push(std::size_t i, bool left_edge) { ++(left_edge ? left_ : right_).at(i); }

    void pop(std::size_t i, bool left_edge) {
        auto& slot = (left_edge ? left_ : right_).at(i);
        if (slot == 0) {
            throw std::logic_error("killer tracker underflow");
        }
        --slot;
    }

    std::size_t depth() const {
        std::size_t total = 0;
        for (std::size_t i = 0; i < dim(); ++i) {
            total += left_[i] + right_[i];
        }
        return total;
    }

    bool all_zero() const { return depth() == 0; }

private:
    std::vector<std::size_t> left_;
    std::vector<std::size_t> right_;
};

namespace detail {

inline double eval_wad_rec(double N, std::size_t K, double r_p, double r_c) {
    if (K == 1) {
        return 0.0;
    }
    const double raw = std::floor(static_cast<double>(K) * r_c + 0.5);
    const double clamped = std::clamp(raw, 1.0, static_cast<double>(K - 1));
    const auto K_L = static_cast<std::size_t>(clamped);
    const std::size_t K_R = K - K_L;
    const double N_L = N * r_p;
    const double N_R = N - N_L;
    return 1.0 + (N_L * eval_wad_rec(N_L, K_L, r_p, r_c) + N_R * eval_wad_rec(N_R, K_R, r_p, r_c)) / N;
}

}  // namespace detail

/**
 * Weighted average depth of the auxiliary tree with K leaves over N points in
 * which every node splits points by r_p and centers by r_c. The left center
 * count rounds half up and is clamped to [1, K-1].
 */
inline double eval_wad(double N, std::size_t K, double r_p, double r_c) {
    if (K < 1) {
        throw std::invalid_argument("eval_wad needs K >= 1");
    }
    if (K == 1) {
        return 0.0;
    }
    if (!(N > 0.0) || !(r_p > 0.0 && r_p < 1.0) || !(r_c > 0.0 && r_c < 1.0)) {
        throw std::invalid_argument("eval_wad needs N > 0 and split ratios in (0, 1)");
    }
    return detail::eval_wad_rec(N, K, r_p, r_c);
}

/**
 * DExp from side counts. A side without points gets its ratio clamped into
 * [1/(N+1), N/(N+1)]; a node without points scores 0.
 */
inline double eval_dexp(std::size_t n_left, std::size_t n_total, std::size_t s_left,
                        std::size_t s_total, std::size_t dim, const KillerTracker& tracker) {
    if (s_left == 0 || s_left >= s_total) {
        throw std::invalid_argument("cut must leave a center on each side");
    }
    if (n_total == 0) {
        return 0.0;
    }
    const double N = static_cast<double>(n_total);
    const double r_p = std::clamp(static_cast<double>(n_left) / N, 1.0 / (N + 1.0), N / (N + 1.0));
    const double r_c = static_cast<double>(s_left) / static_cast<double>(s_total);
    const double wad_hat = eval_wad(N, s_total, r_p, r_c);
    const bool left_killer = tracker.left(dim) > 0;
    const bool right_killer = tracker.right(dim) > 0;
    if (left_killer && right_killer) {
        return wad_hat - 1.0;
    }
    if (left_killer) {
        return wad_hat - static_cast<double>(n_left) / N;
    }
    if (right_killer) {
        return wad_hat - static_cast<double>(n_total - n_left) / N;
    }
    return wad_hat;
}

inline double eval_dexp(const Cut& cut, const NodeView& node, const KillerTracker& tracker) {
    const auto parts = partition_by_cut(node.data(), node.points(), node.center_set(),
                                        node.centers(), cut);
    return eval_dexp(parts.left_points.size(), node.n_points(), parts.left_centers.size(),
                     node.n_centers(), cut.dim, tracker);
}

/// Lexicographic score; `primary` is compared with a relative tolerance.
struct Objective {
    double primary = 0.0;
    double secondary = 0.0;
};

/// Relative tolerance under which two objective values count as tied.
inline constexpr double kTieTolerance = 1e-12;

inline bool strictly_less(double a, double b) {
    return a < b - kTieTolerance * std::max(std::abs(a), std::abs(b));
}

inline bool better(const Objective& a, const Objective& b) {
    if (strictly_less(a.primary, b.primary)) {
        return true;
    }
    if (strictly_less(b.primary, a.primary)) {
        return false;
    }
    return strictly_less(a.secondary, b.secondary);
}

inline Objective objective(const CandidateScore& s, const Strategy& strategy, double dexp) {
    switch (strategy.kind) {
        case StrategyKind::ex_shallow:
            if (s.price == kPriceSentinel) {
                return {kPriceSentinel, s.induced_cost};
            }
            return {s.price + strategy.lambda * dexp, 0.0};
        case StrategyKind::ex_greedy: return {s.induced_cost, 0.0};
        case StrategyKind::imm: return {static_cast<double>(s.mistakes), 0.0};
        case StrategyKind::exkmc: return {s.surrogate_cost, 0.0};
    }
    return {};
}

/**
 * Index of the winning candidate. `scores` must be in (dim, theta) order so
 * that the first of a tied group wins.
 */
inline std::size_t select_cut(std::span<const CandidateScore> scores, const Strategy& strategy,
                              std::size_t node_points, std::size_t node_centers,
                              const KillerTracker& tracker) {
    if (scores.empty()) {
        throw DegenerateNodeError("no candidate cuts");
    }
    std::size_t best = 0;
    Objective best_obj;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto& s = scores[i];
        double dexp = 0.0;
        if (strategy.kind == StrategyKind::ex_shallow && strategy.lambda != 0.0) {
            dexp = eval_dexp(s.n_left, node_points, s.s_left, node_centers, s.cut.dim, tracker);
        }
        const Objective obj = objective(s, strategy, dexp);
        if (i == 0 || better(obj, best_obj)) {
            best = i;
            best_obj = obj;
        }
    }
    return best;
}

/// Called once per internal node with the scores and the winning index.
using NodeObserver = std::function<void(const NodeView&, const KillerTracker&,
                                        std::span<const CandidateScore>, std::size_t)>;

/// The cut a custom chooser wants at a node, given the node and its depth.
using CutChooser = std::function<Cut(const NodeView&, std::size_t)>;

/**
 * @brief Runs the recursion of the tree construction.
 *
 * Holds the killer tracker, which is incremented before each descent and
 * decremented on return, so it is all zeros again once build() finishes.
 */
class TreeBuilder {
public:
    TreeBuilder(const Dataset& X, const CenterSet& S, Strategy strategy)
        : X_(X), S_(S), strategy_(strategy), tracker_(X.dim()) {
        if (X.dim() != S.dim()) {
            throw std::invalid_argument("centers and points have different dimensions");
        }
    }

    void set_observer(NodeObserver observer) { observer_ = std::move(observer); }

    /// Replaces the strategy with a fixed cut per node (used for hand-built trees).
    void set_chooser(CutChooser chooser) { chooser_ = std::move(chooser); }

    ThresholdTree build() {
        ThresholdTree tree;
        const NodeId root = tree.add_root();
        grow(tree, root, NodeView(X_, S_));
        return tree;
    }

    const KillerTracker& tracker() const { return tracker_; }

private:
    void grow(ThresholdTree& tree, NodeId id, NodeView node) {
        if (node.n_centers() == 1) {
            tree.set_leaf(id, node.centers().front(),
                          std::vector<PointId>(node.points().begin(), node.points().end()));
            return;
        }
        const auto [cut, mistakes] = choose(node, tree.node(id).depth);
        const auto [l, r] = tree.split(id, cut, node.n_points(), mistakes);
        auto [left, right] = node.split(cut);
        node = NodeView(X_, S_, {}, {});

        tracker_.push(cut.dim, true);
        grow(tree, l, std::move(left));
        tracker_.pop(cut.dim, true);

        tracker_.push(cut.dim, false);
        grow(tree, r, std::move(right));
        tracker_.pop(cut.dim, false);
    }

    std::pair<Cut, std::size_t> choose(const NodeView& node, std::size_t depth) {
        if (chooser_) {
            const Cut cut = chooser_(node, depth);
            return {cut, count_mistakes(node, cut)};
        }
        const auto scores = sweep_scores(node);
        const std::size_t best =
            select_cut(scores, strategy_, node.n_points(), node.n_centers(), tracker_);
        if (observer_) {
            observer_(node, tracker_, scores, best);
        }
        return {scores[best].cut, scores[best].mistakes};
    }

    static std::size_t count_mistakes(const NodeView& node, const Cut& cut) {
        std::size_t left_centers = 0;
        for (CenterId c : node.centers()) {
            left_centers += node.center_set()(c, cut.dim) <= cut.theta;
        }
        if (left_centers == 0 || left_centers == node.n_centers()) {
            throw std::invalid_argument("cut does not separate the centers at this node");
        }
        std::size_t mistakes = 0;
        for (PointId p : node.points()) {
            const auto x = node.data().point(p);
            const CenterId c = node.centers()[nearest_center(node.center_set(), node.centers(), x)];
            mistakes += cut.goes_left(x) != (node.center_set()(c, cut.dim) <= cut.theta);
        }
        return mistakes;
    }

    const Dataset& X_;
    const CenterSet& S_;
    Strategy strategy_;
    KillerTracker tracker_;
    NodeObserver observer_;
    CutChooser chooser_;
};

/// Builds the k-leaf tree for the given strategy.
inline ThresholdTree build_tree(const Dataset& X, const CenterSet& S, const Strategy& strategy) {
    TreeBuilder builder(X, S, strategy);
    return builder.build();
}

/// Builds a tree whose cut at every node is dictated by `chooser`.
inline ThresholdTree build_tree_with(const Dataset& X, const CenterSet& S, CutChooser chooser) {
    TreeBuilder builder(X, S, Strategy::ex_greedy());
    builder.set_chooser(std::move(chooser));
    return builder.build();
}

}  // namespace shallowtree

#endif  // SHALLOWTREE_BUILDER_HPP
