#ifndef SHALLOWTREE_TESTS_ORACLE_HPP
#define SHALLOWTREE_TESTS_ORACLE_HPP

// Slow reference implementations and random instance generators used by the
// unit tests and the acceptance binary. Nothing here shares code with the
// fast paths it checks beyond the basic container types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "shallowtree/shallowtree.hpp"

namespace oracle {

using namespace shallowtree;

inline double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        s += (a[j] - b[j]) * (a[j] - b[j]);
    }
    return s;
}

inline std::vector<double> row_of(const Matrix& m, std::size_t r) {
    std::vector<double> out(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) {
        out[j] = m(r, j);
    }
    return out;
}

struct NaiveScore {
    Cut cut;
    double induced = 0.0;
    std::size_t mistakes = 0;
    double surrogate = 0.0;
    std::size_t n_left = 0;
    std::size_t s_left = 0;
};

/// Every (dim, value) over points and centers of the node with min center <= value < max center.
inline std::vector<Cut> naive_candidates(const Dataset& X, const CenterSet& S,
                                         const std::vector<PointId>& pts,
                                         const std::vector<CenterId>& cts) {
    std::set<std::pair<std::size_t, double>> uniq;
    for (std::size_t j = 0; j < X.dim(); ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (CenterId c : cts) {
            lo = std::min(lo, S(c, j));
            hi = std::max(hi, S(c, j));
        }
        for (CenterId c : cts) {
            if (S(c, j) >= lo && S(c, j) < hi) {
                uniq.insert({j, S(c, j)});
            }
        }
        for (PointId p : pts) {
            if (X(p, j) >= lo && X(p, j) < hi) {
                uniq.insert({j, X(p, j)});
            }
        }
    }
    std::vector<Cut> out;
    for (const auto& [j, v] : uniq) {
        out.push_back(Cut{j, v});
    }
    return out;
}

/// Candidates by brute-force equivalence classes: one per distinct induced bipartition of
/// points and centers, keeping the largest representative value going left.
inline std::vector<Cut> brute_force_classes(const Dataset& X, const CenterSet& S,
                                            const std::vector<PointId>& pts,
                                            const std::vector<CenterId>& cts) {
    std::vector<Cut> out;
    for (std::size_t j = 0; j < X.dim(); ++j) {
        std::vector<double> values;
        for (PointId p : pts) {
            values.push_back(X(p, j));
        }
        for (CenterId c : cts) {
            values.push_back(S(c, j));
        }
        std::vector<std::pair<std::vector<bool>, double>> classes;
        for (double v : values) {
            std::vector<bool> key;
            std::size_t left_centers = 0;
            for (PointId p : pts) {
                key.push_back(X(p, j) <= v);
            }
            for (CenterId c : cts) {
                key.push_back(S(c, j) <= v);
                left_centers += S(c, j) <= v;
            }
            if (left_centers == 0 || left_centers == cts.size()) {
                continue;
            }
            bool found = false;
            for (auto& [k, rep] : classes) {
                if (k == key) {
                    rep = std::max(rep, v);
                    found = true;
                }
            }
            if (!found) {
                classes.push_back({key, v});
            }
        }
        std::vector<double> reps;
        for (const auto& c : classes) {
            reps.push_back(c.second);
        }
        std::sort(reps.begin(), reps.end());
        for (double v : reps) {
            out.push_back(Cut{j, v});
        }
    }
    return out;
}

inline double naive_current_cost(const Dataset& X, const CenterSet& S,
                                 const std::vector<PointId>& pts,
                                 const std::vector<CenterId>& cts) {
    double total = 0.0;
    for (PointId p : pts) {
        double best = std::numeric_limits<double>::infinity();
        for (CenterId c : cts) {
            best = std::min(best, dist2(row_of(X.matrix(), p), row_of(S.matrix(), c)));
        }
        total += best;
    }
    return total;
}

inline NaiveScore naive_score(const Dataset& X, const CenterSet& S, const std::vector<PointId>& pts,
                              std::vector<CenterId> cts, const Cut& cut) {
    std::sort(cts.begin(), cts.end());
    NaiveScore s;
    s.cut = cut;
    std::vector<CenterId> lc;
    std::vector<CenterId> rc;
    for (CenterId c : cts) {
        (S(c, cut.dim) <= cut.theta ? lc : rc).push_back(c);
    }
    s.s_left = lc.size();
    std::vector<PointId> lp;
    std::vector<PointId> rp;
    for (PointId p : pts) {
        const auto x = row_of(X.matrix(), p);
        const bool left = x[cut.dim] <= cut.theta;
        (left ? lp : rp).push_back(p);
        double best = std::numeric_limits<double>::infinity();
        for (CenterId c : left ? lc : rc) {
            best = std::min(best, dist2(x, row_of(S.matrix(), c)));
        }
        s.induced += best;
        double nearest_d = std::numeric_limits<double>::infinity();
        CenterId nearest = 0;
        for (CenterId c : cts) {
            const double d = dist2(x, row_of(S.matrix(), c));
            if (d < nearest_d) {
                nearest_d = d;
                nearest = c;
            }
        }
        s.mistakes += left != (S(nearest, cut.dim) <= cut.theta);
    }
    s.n_left = lp.size();
    auto side = [&](const std::vector<PointId>& ps, const std::vector<CenterId>& cs) {
        double best = std::numeric_limits<double>::infinity();
        for (CenterId c : cs) {
            double acc = 0.0;
            for (PointId p : ps) {
                acc += dist2(row_of(X.matrix(), p), row_of(S.matrix(), c));
            }
            best = std::min(best, acc);
        }
        return best;
    };
    s.surrogate = side(lp, lc) + side(rp, rc);
    return s;
}

inline bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

/// First index with the smallest value, values within `tol` relative treated as equal.
inline std::size_t argmin_first(const std::vector<double>& values, double tol) {
    double best = std::numeric_limits<double>::infinity();
    for (double v : values) {
        best = std::min(best, v);
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] <= best + tol * std::max(1.0, std::abs(best))) {
            return i;
        }
    }
    return 0;
}

/// Direct recursion for the auxiliary tree depth, written from the textual description.
inline double wad_of_aux_tree(double n, std::size_t k, double rp, double rc) {
    if (k <= 1) {
        return 0.0;
    }
    auto kl = static_cast<long>(std::floor(static_cast<double>(k) * rc + 0.5));
    kl = std::max(1L, std::min(kl, static_cast<long>(k) - 1));
    const double nl = n * rp;
    const double nr = n - nl;
    return (n + nl * wad_of_aux_tree(nl, static_cast<std::size_t>(kl), rp, rc) +
            nr * wad_of_aux_tree(nr, k - static_cast<std::size_t>(kl), rp, rc)) /
           n;
}

/// Entropy-based NMI straight from the definitions, arithmetic-mean normalized.
inline double entropy_nmi(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    const double n = static_cast<double>(a.size());
    std::size_t ka = *std::max_element(a.begin(), a.end()) + 1;
    std::size_t kb = *std::max_element(b.begin(), b.end()) + 1;
    std::vector<std::vector<double>> joint(ka, std::vector<double>(kb, 0.0));
    std::vector<double> pa(ka, 0.0);
    std::vector<double> pb(kb, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[a[i]][b[i]] += 1.0;
        pa[a[i]] += 1.0;
        pb[b[i]] += 1.0;
    }
    for (auto& row : joint) {
        for (double& v : row) {
            v /= n;
        }
    }
    for (double& v : pa) {
        v /= n;
    }
    for (double& v : pb) {
        v /= n;
    }
    double ha = 0.0;
    double hb = 0.0;
    double mi = 0.0;
    for (double p : pa) {
        ha -= p > 0 ? p * std::log(p) : 0.0;
    }
    for (double p : pb) {
        hb -= p > 0 ? p * std::log(p) : 0.0;
    }
    for (std::size_t i = 0; i < ka; ++i) {
        for (std::size_t j = 0; j < kb; ++j) {
            if (joint[i][j] > 0) {
                mi += joint[i][j] * std::log(joint[i][j] / (pa[i] * pb[j]));
            }
        }
    }
    if (ha == 0.0 || hb == 0.0) {
        return ha == hb ? 1.0 : 0.0;
    }
    return mi / ((ha + hb) / 2.0);
}

struct Instance {
    Dataset X;
    CenterSet S;
    Assignment reference;
    std::string kind;
};

inline bool centers_distinct(const CenterSet& S) {
    for (std::size_t a = 0; a < S.size(); ++a) {
        for (std::size_t b = a + 1; b < S.size(); ++b) {
            if (S.matrix().row(a).size() &&
                std::equal(S.center(a).begin(), S.center(a).end(), S.center(b).begin())) {
                return false;
            }
        }
    }
    return true;
}

/**
 * Random instance number `index`: even indices draw uniform points, odd ones a
 * Gaussian mixture; every third uniform instance is snapped to a coarse grid
 * so that coordinate ties occur. Centers come from k-means++ and Lloyd.
 */
inline Instance random_instance(std::uint64_t index, std::size_t max_n = 200,
                                std::size_t max_d = 5, std::size_t max_k = 8) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        std::mt19937_64 rng(index * 7919 + attempt * 104729 + 17);
        std::uniform_int_distribution<std::size_t> dk(2, max_k);
        std::uniform_int_distribution<std::size_t> dd(1, max_d);
        const std::size_t k = dk(rng);
        const std::size_t d = dd(rng);
        std::uniform_int_distribution<std::size_t> dn(std::max<std::size_t>(k, 10), max_n);
        const std::size_t n = dn(rng);
        std::vector<double> values(n * d);
        std::string kind;
        if (index % 2 == 0) {
            std::uniform_real_distribution<double> u(-5.0, 5.0);
            const bool grid = index % 3 == 0;
            kind = grid ? "uniform-grid" : "uniform";
            for (double& v : values) {
                v = u(rng);
                if (grid) {
                    v = std::round(v);
                }
            }
        } else {
            kind = "gaussian-mixture";
            std::uniform_int_distribution<std::size_t> dm(2, max_k);
            const std::size_t modes = dm(rng);
            std::uniform_real_distribution<double> u(-10.0, 10.0);
            std::normal_distribution<double> g(0.0, 1.0);
            std::vector<double> means(modes * d);
            for (double& m : means) {
                m = u(rng);
            }
            std::uniform_int_distribution<std::size_t> pick(0, modes - 1);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t m = pick(rng);
                for (std::size_t j = 0; j < d; ++j) {
                    values[i * d + j] = means[m * d + j] + g(rng);
                }
            }
        }
        Dataset X(Matrix(n, d, std::move(values)));
        LloydConfig cfg;
        cfg.seed = index + attempt;
        auto res = kmeans(X, k, cfg);
        if (!centers_distinct(res.centers)) {
            continue;
        }
        return Instance{std::move(X), std::move(res.centers), std::move(res.assignment), kind};
    }
}

/// Returns an empty string when the tree satisfies the structural invariants, else a reason.
inline std::string structural_violation(const ThresholdTree& tree, const Dataset& X,
                                        std::size_t k) {
    const auto leaves = tree.leaves();
    if (leaves.size() != k) {
        return "leaf count " + std::to_string(leaves.size()) + " != k";
    }
    std::set<CenterId> centers;
    for (NodeId id : leaves) {
        centers.insert(tree.node(id).center);
        for (PointId p : tree.node(id).points) {
            if (route(tree, X.point(p)) != id) {
                return "point " + std::to_string(p) + " does not route to its leaf";
            }
        }
    }
    if (centers.size() != k) {
        return "leaf centers are not distinct";
    }
    if (tree.point_count() != X.size()) {
        return "leaves do not hold every point";
    }
    const double a = waes(tree);
    const double w = wad(tree);
    const double m = static_cast<double>(tree.max_depth());
    if (!(a <= w + 1e-12 && w <= m + 1e-12 && m <= static_cast<double>(k - 1))) {
        return "depth chain WAES <= WAD <= max depth <= k-1 violated";
    }
    return {};
}

}  // namespace oracle

#endif  // SHALLOWTREE_TESTS_ORACLE_HPP
