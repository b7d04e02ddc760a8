#ifndef SHALLOWTREE_CORE_HPP
#define SHALLOWTREE_CORE_HPP

/**
 * @file core.hpp
 *
 * @brief Domain types shared by every module: point matrices, axis-aligned
 * cuts, threshold trees and the routing / partitioning primitives.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace shallowtree {

using PointId = std::size_t;
using CenterId = std::size_t;
using NodeId = std::size_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Raised when a node holding two or more centers admits no separating cut.
class DegenerateNodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * @brief Dense row-major matrix of finite reals.
 *
 * Row index is the point (or center) id. Immutable once constructed.
 */
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
        : rows_(rows), cols_(cols), values_(std::move(values)) {
        if (values_.size() != rows_ * cols_) {
            throw std::invalid_argument("matrix storage does not match its shape");
        }
        for (double v : values_) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("matrix entries must be finite");
            }
        }
    }

    /// Builds a matrix from equally sized rows.
    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) {
            return Matrix(0, 0, {});
        }
        const std::size_t cols = rows.front().size();
        std::vector<double> values;
        values.reserve(rows.size() * cols);
        for (const auto& r : rows) {
            if (r.size() != cols) {
                throw std::invalid_argument("ragged rows");
            }
            values.insert(values.end(), r.begin(), r.end());
        }
        return Matrix(rows.size(), cols, std::move(values));
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const {
        return {values_.data() + r * cols_, cols_};
    }

    std::span<const double> values() const { return values_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// The n x d clustering input. Requires n >= 1 and d >= 1.
class Dataset {
public:
    explicit Dataset(Matrix points) : points_(std::move(points)) {
        if (points_.rows() < 1 || points_.cols() < 1) {
            throw std::invalid_argument("dataset needs at least one point and one dimension");
        }
    }

    static Dataset from_rows(const std::vector<std::vector<double>>& rows) {
        return Dataset(Matrix::from_rows(rows));
    }

    std::size_t size() const { return points_.rows(); }
    std::size_t dim() const { return points_.cols(); }
    double operator()(PointId i, std::size_t j) const { return points_(i, j); }
    std::span<const double> point(PointId i) const { return points_.row(i); }
    const Matrix& matrix() const { return points_; }

private:
    Matrix points_;
};

/// The k x d reference centers the tree has to separate, one per leaf.
class CenterSet {
public:
    explicit CenterSet(Matrix centers) : centers_(std::move(centers)) {
        if (centers_.rows() < 1 || centers_.cols() < 1) {
            throw std::invalid_argument("center set needs at least one center");
        }
    }

    static CenterSet from_rows(const std::vector<std::vector<double>>& rows) {
        return CenterSet(Matrix::from_rows(rows));
    }

    std::size_t size() const { return centers_.rows(); }
    std::size_t dim() const { return centers_.cols(); }
    double operator()(CenterId c, std::size_t j) const { return centers_(c, j); }
    std::span<const double> center(CenterId c) const { return centers_.row(c); }
    const Matrix& matrix() const { return centers_; }

private:
    Matrix centers_;
};

/// Axis-aligned test `x[dim] <= theta`; the left branch takes the rows that satisfy it.
struct Cut {
    std::size_t dim = 0;
    double theta = 0.0;

    bool goes_left(std::span<const double> x) const { return x[dim] <= theta; }

    friend bool operator==(const Cut&, const Cut&) = default;
    friend auto operator<=>(const Cut&, const Cut&) = default;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        acc += diff * diff;
    }
    return acc;
}

/// Index into `centers` of the nearest center to `x`; ties go to the lower position.
inline std::size_t nearest_center(const CenterSet& S, std::span<const CenterId> centers,
                                  std::span<const double> x) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < centers.size(); ++t) {
        const double d = squared_distance(x, S.center(centers[t]));
        if (d < best_d) {
            best_d = d;
            best = t;
        }
    }
    return best;
}

struct CutPartition {
    std::vector<PointId> left_points;
    std::vector<PointId> right_points;
    std::vector<CenterId> left_centers;
    std::vector<CenterId> right_centers;
};

/**
 * Splits point ids and center ids by the cut. Each output side keeps the
 * relative order of its input. Empty sides are legal.
 */
inline CutPartition partition_by_cut(const Dataset& X, std::span<const PointId> points,
                                     const CenterSet& S, std::span<const CenterId> centers,
                                     const Cut& cut) {
    if (cut.dim >= X.dim() || cut.dim >= S.dim()) {
        throw std::invalid_argument("cut dimension out of range");
    }
    CutPartition out;
    for (PointId p : points) {
        (X(p, cut.dim) <= cut.theta ? out.left_points : out.right_points).push_back(p);
    }
    for (CenterId c : centers) {
        (S(c, cut.dim) <= cut.theta ? out.left_centers : out.right_centers).push_back(c);
    }
    return out;
}

/**
 * @brief Binary threshold tree whose leaves each own one reference center.
 *
 * Nodes live in an arena indexed by NodeId. Internal nodes record the cut
 * and a few statistics gathered at build time; leaves record the center id
 * and the ids of the training points routed to them.
 */
class ThresholdTree {
public:
    struct Node {
        bool leaf = true;
        Cut cut{};
        NodeId left = kNoNode;
        NodeId right = kNoNode;
        NodeId parent = kNoNode;
        std::size_t depth = 0;
        // internal nodes
        std::size_t n_points = 0;
        std::size_t mistakes = 0;
        // leaves
        CenterId center = 0;
        std::vector<PointId> points;
    };

    ThresholdTree() = default;

    /// Creates the root as a leaf and returns its id.
    NodeId add_root() {
        nodes_.clear();
        nodes_.emplace_back();
        return 0;
    }

    /// Turns a leaf into an internal node with two fresh leaf children.
    std::pair<NodeId, NodeId> split(NodeId id, const Cut& cut, std::size_t n_points,
                                    std::size_t mistakes) {
        if (!nodes_.at(id).leaf) {
            throw std::logic_error("node already split");
        }
        const NodeId l = nodes_.size();
        const NodeId r = l + 1;
        const std::size_t depth = nodes_[id].depth + 1;
        nodes_.emplace_back();
        nodes_.emplace_back();
        for (NodeId child : {l, r}) {
            nodes_[child].parent = id;
            nodes_[child].depth = depth;
        }
        Node& n = nodes_[id];
        n.leaf = false;
        n.cut = cut;
        n.left = l;
        n.right = r;
        n.n_points = n_points;
        n.mistakes = mistakes;
        n.points.clear();
        return {l, r};
    }

    void set_leaf(NodeId id, CenterId center, std::vector<PointId> points) {
        Node& n = nodes_.at(id);
        if (!n.leaf) {
            throw std::logic_error("not a leaf");
        }
        n.center = center;
        n.points = std::move(points);
    }

    bool empty() const { return nodes_.empty(); }
    NodeId root() const { return 0; }
    std::size_t node_count() const { return nodes_.size(); }
    const Node& node(NodeId id) const { return nodes_.at(id); }
    const std::vector<Node>& nodes() const { return nodes_; }

    /// Leaf ids in depth-first, left-first order.
    std::vector<NodeId> leaves() const {
        std::vector<NodeId> out;
        if (nodes_.empty()) {
            return out;
        }
        std::vector<NodeId> stack{root()};
        while (!stack.empty()) {
            const NodeId id = stack.back();
            stack.pop_back();
            const Node& n = nodes_[id];
            if (n.leaf) {
                out.push_back(id);
            } else {
                stack.push_back(n.right);
                stack.push_back(n.left);
            }
        }
        return out;
    }

    std::size_t leaf_count() const { return leaves().size(); }

    /// Total number of training points stored at leaves.
    std::size_t point_count() const {
        std::size_t total = 0;
        for (const Node& n : nodes_) {
            if (n.leaf) {
                total += n.points.size();
            }
        }
        return total;
    }

    std::size_t max_depth() const {
        std::size_t m = 0;
        for (const Node& n : nodes_) {
            if (n.leaf) {
                m = std::max(m, n.depth);
            }
        }
        return m;
    }

    /// Root-to-node edges as (ancestor id, went_left) pairs.
    std::vector<std::pair<NodeId, bool>> path_to(NodeId id) const {
        std::vector<std::pair<NodeId, bool>> path;
        NodeId cur = id;
        while (nodes_.at(cur).parent != kNoNode) {
            const NodeId p = nodes_[cur].parent;
            path.emplace_back(p, nodes_[p].left == cur);
            cur = p;
        }
        std::reverse(path.begin(), path.end());
        return path;
    }

    bool operator==(const ThresholdTree& other) const {
        if (nodes_.size() != other.nodes_.size()) {
            return false;
        }
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const Node& a = nodes_[i];
            const Node& b = other.nodes_[i];
            if (a.leaf != b.leaf || a.left != b.left || a.right != b.right ||
                a.parent != b.parent || a.depth != b.depth) {
                return false;
            }
            if (a.leaf) {
                if (a.center != b.center || a.points != b.points) {
                    return false;
                }
            } else if (a.cut != b.cut || a.n_points != b.n_points || a.mistakes != b.mistakes) {
                return false;
            }
        }
        return true;
    }

private:
    std::vector<Node> nodes_;
};

/// Follows the cuts from the root and returns the leaf that `x` lands in.
inline NodeId route(const ThresholdTree& tree, std::span<const double> x) {
    NodeId id = tree.root();
    while (!tree.node(id).leaf) {
        const auto& n = tree.node(id);
        if (n.cut.dim >= x.size()) {
            throw std::invalid_argument("point dimension does not match the tree");
        }
        id = n.cut.goes_left(x) ? n.left : n.right;
    }
    return id;
}

/// Cluster labels, one per point, each in [0, k).
struct Assignment {
    std::vector<std::size_t> labels;

    std::size_t size() const { return labels.size(); }
    bool operator==(const Assignment&) const = default;
};

/// Labels each training point with the center id of the leaf storing it.
inline Assignment assignment_from_tree(const ThresholdTree& tree, std::size_t n) {
    Assignment a;
    a.labels.assign(n, 0);
    std::vector<bool> seen(n, false);
    for (const auto& node : tree.nodes()) {
        if (!node.leaf) {
            continue;
        }
        for (PointId p : node.points) {
            if (p >= n || seen[p]) {
                throw std::invalid_argument("tree leaves do not partition the points");
            }
            seen[p] = true;
            a.labels[p] = node.center;
        }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw std::invalid_argument("tree leaves do not cover every point");
    }
    return a;
}

/// Labels each point with its nearest center (lower id on ties).
inline Assignment assignment_from_centers(const Dataset& X, const CenterSet& S) {
    std::vector<CenterId> all(S.size());
    std::iota(all.begin(), all.end(), CenterId{0});
    Assignment a;
    a.labels.resize(X.size());
    for (PointId p = 0; p < X.size(); ++p) {
        a.labels[p] = nearest_center(S, all, X.point(p));
    }
    return a;
}

inline std::vector<std::size_t> iota_ids(std::size_t n) {
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    return ids;
}

}  // namespace shallowtree

#endif  // SHALLOWTREE_CORE_HPP
