#ifndef SHALLOWTREE_SPLITTER_HPP
#define SHALLOWTREE_SPLITTER_HPP

/**
 * @file splitter.hpp
 *
 * @brief Per-node cut machinery.
 *
 * A NodeView holds the points and centers reaching a tree node together with
 * one sorted ordering of the points per dimension. The sorted orderings are
 * produced once at the root and filtered down to the children, so a node
 * costs O(n_v d) to set up.
 *
 * sweep_scores() evaluates every candidate cut of a node in O(n_v k_v d)
 * time. For a fixed dimension the centers are sorted by coordinate, so the
 * centers left of any threshold form a prefix of that order. Each point
 * keeps the prefix minima and suffix minima of its squared distances over
 * that order; sweeping thresholds left to right then only touches a point
 * when it crosses the threshold, except when a center crosses and all sums
 * are refreshed.
 */

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "core.hpp"

namespace shallowtree {

/// Denominators below this are treated as zero when forming a price.
inline constexpr double kZeroCost = 1e-12;
/// Price assigned to a cut that creates cost at a node whose current cost is zero.
inline constexpr double kPriceSentinel = std::numeric_limits<double>::max();

class NodeView {
public:
    /// View over every point and center.
    NodeView(const Dataset& X, const CenterSet& S)
        : NodeView(X, S, iota_ids(X.size()), iota_ids(S.size())) {}

    /// View over the given ids; both lists are sorted ascending.
    NodeView(const Dataset& X, const CenterSet& S, std::vector<PointId> points,
             std::vector<CenterId> centers)
        : X_(&X), S_(&S), points_(std::move(points)), centers_(std::move(centers)) {
        if (X.dim() != S.dim()) {
            throw std::invalid_argument("centers and points have different dimensions");
        }
        std::sort(points_.begin(), points_.end());
        std::sort(centers_.begin(), centers_.end());
        const std::size_t n = points_.size();
        order_.resize(n * dim());
        for (std::size_t j = 0; j < dim(); ++j) {
            auto first = order_.begin() + static_cast<std::ptrdiff_t>(j * n);
            std::iota(first, first + static_cast<std::ptrdiff_t>(n), std::size_t{0});
            std::stable_sort(first, first + static_cast<std::ptrdiff_t>(n),
                             [&](std::size_t a, std::size_t b) {
                                 return X(points_[a], j) < X(points_[b], j);
                             });
        }
    }

    const Dataset& data() const { return *X_; }
    const CenterSet& center_set() const { return *S_; }
    std::size_t dim() const { return X_->dim(); }

    std::span<const PointId> points() const { return points_; }
    std::span<const CenterId> centers() const { return centers_; }
    std::size_t n_points() const { return points_.size(); }
    std::size_t n_centers() const { return centers_.size(); }

    /// Local point indices (positions in points()) sorted by coordinate `j`, ties by id.
    std::span<const std::size_t> order(std::size_t j) const {
        return {order_.data() + j * points_.size(), points_.size()};
    }

    /// Local center indices sorted by coordinate `j`, ties by id.
    std::vector<std::size_t> center_order(std::size_t j) const {
        std::vector<std::size_t> out(centers_.size());
        std::iota(out.begin(), out.end(), std::size_t{0});
        std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
            return (*S_)(centers_[a], j) < (*S_)(centers_[b], j);
        });
        return out;
    }

    double point_value(std::size_t local, std::size_t j) const { return (*X_)(points_[local], j); }
    double center_value(std::size_t local, std::size_t j) const { return (*S_)(centers_[local], j); }

    /// Children induced by `cut`, sorted orders carried over without re-sorting.
    std::pair<NodeView, NodeView> split(const Cut& cut) const {
        if (cut.dim >= dim()) {
            throw std::invalid_argument("cut dimension out of range");
        }
        const std::size_t n = points_.size();
        NodeView left(X_, S_);
        NodeView right(X_, S_);
        std::vector<std::size_t> remap(n);
        std::vector<char> goes_left(n);
        for (std::size_t i = 0; i < n; ++i) {
            goes_left[i] = point_value(i, cut.dim) <= cut.theta;
            NodeView& side = goes_left[i] ? left : right;
            remap[i] = side.points_.size();
            side.points_.push_back(points_[i]);
        }
        for (CenterId c : centers_) {
            ((*S_)(c, cut.dim) <= cut.theta ? left : right).centers_.push_back(c);
        }
        left.order_.reserve(left.points_.size() * dim());
        right.order_.reserve(right.points_.size() * dim());
        for (std::size_t j = 0; j < dim(); ++j) {
            for (std::size_t i : order(j)) {
                (goes_left[i] ? left : right).order_.push_back(remap[i]);
            }
        }
        return {std::move(left), std::move(right)};
    }

private:
    NodeView(const Dataset* X, const CenterSet* S) : X_(X), S_(S) {}

    const Dataset* X_;
    const CenterSet* S_;
    std::vector<PointId> points_;
    std::vector<CenterId> centers_;
    std::vector<std::size_t> order_;
};

/// Score of one candidate cut at a node.
struct CandidateScore {
    Cut cut;
    double induced_cost = 0.0;
    double price = 1.0;
    /// Points whose nearest node center ends up on the other side.
    std::size_t mistakes = 0;
    /// Best single-center-per-side cost, the ExKMC-style criterion.
    double surrogate_cost = 0.0;
    std::size_t n_left = 0;
    std::size_t n_right = 0;
    std::size_t s_left = 0;
    std::size_t s_right = 0;
};

/// InducedCost / CurrentCost with the zero-denominator convention.
inline double price_of(double induced_cost, double current_cost) {
    if (current_cost < kZeroCost) {
        return induced_cost < kZeroCost ? 1.0 : kPriceSentinel;
    }
    return induced_cost / current_cost;
}

/**
 * One representative per class of equivalent cuts that leaves at least one
 * center on each side, sorted by (dim, theta). Theta is the largest observed
 * coordinate going left.
 */
inline std::vector<Cut> candidate_cuts(const NodeView& node) {
    if (node.n_centers() < 2) {
        throw std::invalid_argument("candidate cuts need at least two centers");
    }
    std::vector<Cut> cuts;
    for (std::size_t j = 0; j < node.dim(); ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        std::vector<double> values;
        for (std::size_t t = 0; t < node.n_centers(); ++t) {
            const double v = node.center_value(t, j);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            values.push_back(v);
        }
        if (!(lo < hi)) {
            continue;
        }
        for (std::size_t i : node.order(j)) {
            const double v = node.point_value(i, j);
            if (v >= lo && v < hi) {
                values.push_back(v);
            }
        }
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        for (double v : values) {
            if (v < hi) {
                cuts.push_back(Cut{j, v});
            }
        }
    }
    if (cuts.empty()) {
        throw DegenerateNodeError("no cut separates the centers at this node");
    }
    return cuts;
}

namespace detail {

/// Row-major n_v x k_v squared distances between node points and node centers.
inline std::vector<double> node_distances(const NodeView& node) {
    const std::size_t n = node.n_points();
    const std::size_t m = node.n_centers();
    std::vector<double> dist(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = node.data().point(node.points()[i]);
        for (std::size_t t = 0; t < m; ++t) {
            dist[i * m + t] = squared_distance(x, node.center_set().center(node.centers()[t]));
        }
    }
    return dist;
}

/// Local index of the nearest node center per point; lower id wins ties.
inline std::vector<std::size_t> nearest_local(const std::vector<double>& dist, std::size_t n,
                                              std::size_t m) {
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        for (std::size_t t = 1; t < m; ++t) {
            if (dist[i * m + t] < dist[i * m + best]) {
                best = t;
            }
        }
        out[i] = best;
    }
    return out;
}

inline double current_cost_from(const std::vector<double>& dist, std::size_t n, std::size_t m) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += *std::min_element(dist.begin() + static_cast<std::ptrdiff_t>(i * m),
                                   dist.begin() + static_cast<std::ptrdiff_t>((i + 1) * m));
    }
    return total;
}

inline void sweep_dimension(const NodeView& node, std::size_t j, const std::vector<double>& dist,
                            const std::vector<std::size_t>& nearest, double current,
                            std::vector<CandidateScore>& out) {
    const std::size_t n = node.n_points();
    const std::size_t m = node.n_centers();
    const auto cs = node.center_order(j);
    const auto ps = node.order(j);
    const double inf = std::numeric_limits<double>::infinity();

    // pre[i*(m+1)+L]: min distance of point i over the first L centers in cs;
    // suf[i*(m+1)+L]: min over cs[L..m).
    std::vector<double> pre(n * (m + 1));
    std::vector<double> suf(n * (m + 1));
    for (std::size_t i = 0; i < n; ++i) {
        double* p = pre.data() + i * (m + 1);
        double* s = suf.data() + i * (m + 1);
        p[0] = inf;
        for (std::size_t L = 0; L < m; ++L) {
            p[L + 1] = std::min(p[L], dist[i * m + cs[L]]);
        }
        s[m] = inf;
        for (std::size_t L = m; L-- > 0;) {
            s[L] = std::min(s[L + 1], dist[i * m + cs[L]]);
        }
    }

    std::vector<char> center_left(m, 0);
    std::vector<std::size_t> owned_left(m, 0);
    std::vector<std::size_t> owned_right(m, 0);
    std::vector<double> left_to(m, 0.0);
    std::vector<double> total_to(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        ++owned_right[nearest[i]];
        for (std::size_t t = 0; t < m; ++t) {
            total_to[t] += dist[i * m + t];
        }
    }

    const double max_center = node.center_value(cs[m - 1], j);
    std::size_t pos = 0;
    std::size_t cpos = 0;
    std::size_t L = 0;
    std::size_t mistakes = 0;
    double left_sum = 0.0;
    double right_sum = 0.0;

    while (pos < n || cpos < m) {
        double v = inf;
        if (pos < n) {
            v = node.point_value(ps[pos], j);
        }
        if (cpos < m) {
            v = std::min(v, node.center_value(cs[cpos], j));
        }
        if (!(v < max_center)) {
            break;
        }
        bool refresh = false;
        while (cpos < m && node.center_value(cs[cpos], j) == v) {
            const std::size_t t = cs[cpos];
            mistakes += owned_right[t];
            mistakes -= owned_left[t];
            center_left[t] = 1;
            ++L;
            ++cpos;
            refresh = true;
        }
        while (pos < n && node.point_value(ps[pos], j) == v) {
            const std::size_t i = ps[pos];
            const std::size_t a = nearest[i];
            --owned_right[a];
            ++owned_left[a];
            if (center_left[a]) {
                --mistakes;
            } else {
                ++mistakes;
            }
            if (!refresh && L > 0) {
                left_sum += pre[i * (m + 1) + L];
                right_sum -= suf[i * (m + 1) + L];
            }
            for (std::size_t t = 0; t < m; ++t) {
                left_to[t] += dist[i * m + t];
            }
            ++pos;
        }
        if (L == 0) {
            continue;
        }
        if (refresh) {
            left_sum = 0.0;
            right_sum = 0.0;
            for (std::size_t q = 0; q < pos; ++q) {
                left_sum += pre[ps[q] * (m + 1) + L];
            }
            for (std::size_t q = pos; q < n; ++q) {
                right_sum += suf[ps[q] * (m + 1) + L];
            }
        }

        CandidateScore s;
        s.cut = Cut{j, v};
        s.induced_cost = left_sum + right_sum;
        s.price = price_of(s.induced_cost, current);
        s.mistakes = mistakes;
        double best_left = inf;
        double best_right = inf;
        for (std::size_t t = 0; t < m; ++t) {
            if (center_left[t]) {
                best_left = std::min(best_left, left_to[t]);
            } else {
                best_right = std::min(best_right, total_to[t] - left_to[t]);
            }
        }
        s.surrogate_cost = best_left + best_right;
        s.n_left = pos;
        s.n_right = n - pos;
        s.s_left = L;
        s.s_right = m - L;
        out.push_back(s);
    }
}

}  // namespace detail

/// Sum over node points of the squared distance to the nearest node center.
inline double current_cost(const NodeView& node) {
    if (node.n_centers() < 1) {
        throw std::invalid_argument("current cost needs at least one center");
    }
    const auto dist = detail::node_distances(node);
    return detail::current_cost_from(dist, node.n_points(), node.n_centers());
}

/**
 * Scores every candidate cut of the node, in the order of candidate_cuts().
 * Throws DegenerateNodeError when no cut separates the centers.
 */
inline std::vector<CandidateScore> sweep_scores(const NodeView& node) {
    if (node.n_centers() < 2) {
        throw std::invalid_argument("sweep needs at least two centers");
    }
    const std::size_t n = node.n_points();
    const std::size_t m = node.n_centers();
    const auto dist = detail::node_distances(node);
    const auto nearest = detail::nearest_local(dist, n, m);
    const double current = detail::current_cost_from(dist, n, m);
    std::vector<CandidateScore> out;
    for (std::size_t j = 0; j < node.dim(); ++j) {
        detail::sweep_dimension(node, j, dist, nearest, current, out);
    }
    if (out.empty()) {
        throw DegenerateNodeError("no cut separates the centers at this node");
    }
    return out;
}

/**
 * Cost of serving each side of `cut` with the single best node center lying
 * on that side.
 */
inline double exkmc_surrogate_cost(const NodeView& node, const Cut& cut) {
    const auto parts = partition_by_cut(node.data(), node.points(), node.center_set(),
                                        node.centers(), cut);
    if (parts.left_centers.empty() || parts.right_centers.empty()) {
        throw std::invalid_argument("cut leaves one side without centers");
    }
    auto side_cost = [&](const std::vector<PointId>& pts, const std::vector<CenterId>& cs) {
        double best = std::numeric_limits<double>::infinity();
        for (CenterId c : cs) {
            double acc = 0.0;
            for (PointId p : pts) {
                acc += squared_distance(node.data().point(p), node.center_set().center(c));
            }
            best = std::min(best, acc);
        }
        return best;
    };
    return side_cost(parts.left_points, parts.left_centers) +
           side_cost(parts.right_points, parts.right_centers);
}

}  // namespace shallowtree

#endif  // SHALLOWTREE_SPLITTER_HPP
