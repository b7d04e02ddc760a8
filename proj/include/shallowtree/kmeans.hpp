#ifndef SHALLOWTREE_KMEANS_HPP
#define SHALLOWTREE_KMEANS_HPP

/**
 * @file kmeans.hpp
 *
 * @brief Unrestricted reference clustering: k-means++ seeding, Lloyd
 * iterations and the k-means cost.
 */

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "core.hpp"

namespace shallowtree {

struct LloydConfig {
    std::size_t max_iter = 300;
    double rel_tol = 1e-4;
    std::uint64_t seed = 0;
};

struct LloydResult {
    CenterSet centers;
    Assignment assignment;
    double cost = 0.0;
    std::size_t iterations = 0;
    /// Cost after every assignment step, starting with the initial centers.
    std::vector<double> cost_history;
};

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    const auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
    return i < n ? i : n - 1;
}

}  // namespace detail

/// Sum over the given points of the squared distance to their nearest center.
inline double kmeans_cost(const Dataset& X, std::span<const PointId> points, const CenterSet& S) {
    if (S.dim() != X.dim()) {
        throw std::invalid_argument("center dimension does not match the dataset");
    }
    double total = 0.0;
    for (PointId p : points) {
        double best = std::numeric_limits<double>::infinity();
        for (CenterId c = 0; c < S.size(); ++c) {
            best = std::min(best, squared_distance(X.point(p), S.center(c)));
        }
        total += best;
    }
    return total;
}

inline double kmeans_cost(const Dataset& X, const CenterSet& S) {
    const auto ids = iota_ids(X.size());
    return kmeans_cost(X, ids, S);
}

/**
 * D^2 seeding. The first center is a uniformly random row, every further
 * one a row drawn with probability proportional to its squared distance to
 * the closest center chosen so far.
 */
inline CenterSet kmeanspp_init(const Dataset& X, std::size_t k, std::uint64_t seed) {
    const std::size_t n = X.size();
    if (k < 1 || k > n) {
        throw std::invalid_argument("kmeans++ needs 1 <= k <= n");
    }
    std::mt19937_64 rng(seed);
    std::vector<PointId> chosen;
    chosen.reserve(k);
    std::vector<bool> taken(n, false);
    chosen.push_back(detail::uniform_index(rng, n));
    taken[chosen.back()] = true;

    std::vector<double> closest(n);
    for (PointId p = 0; p < n; ++p) {
        closest[p] = squared_distance(X.point(p), X.point(chosen.back()));
    }

    while (chosen.size() < k) {
        double total = 0.0;
        for (double w : closest) {
            total += w;
        }
        PointId pick = n;
        if (total > 0.0) {
            const double target = detail::uniform01(rng) * total;
            double acc = 0.0;
            for (PointId p = 0; p < n; ++p) {
                if (closest[p] <= 0.0) {
                    continue;
                }
                acc += closest[p];
                pick = p;
                if (acc > target) {
                    break;
                }
            }
        } else {
            // every remaining row duplicates a chosen one
            std::vector<PointId> free;
            for (PointId p = 0; p < n; ++p) {
                if (!taken[p]) {
                    free.push_back(p);
                }
            }
            pick = free[detail::uniform_index(rng, free.size())];
        }
        chosen.push_back(pick);
        taken[pick] = true;
        for (PointId p = 0; p < n; ++p) {
            closest[p] = std::min(closest[p], squared_distance(X.point(p), X.point(pick)));
        }
    }

    std::vector<double> values;
    values.reserve(k * X.dim());
    for (PointId p : chosen) {
        const auto row = X.point(p);
        values.insert(values.end(), row.begin(), row.end());
    }
    return CenterSet(Matrix(k, X.dim(), std::move(values)));
}

namespace detail {

inline double assign_nearest(const Dataset& X, const std::vector<double>& centers, std::size_t k,
                             std::vector<std::size_t>& labels, std::vector<double>& dist) {
    const std::size_t d = X.dim();
    double cost = 0.0;
    for (PointId p = 0; p < X.size(); ++p) {
        const auto x = X.point(p);
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            const double dd = squared_distance(x, {centers.data() + c * d, d});
            if (dd < best_d) {
                best_d = dd;
                best = c;
            }
        }
        labels[p] = best;
        dist[p] = best_d;
        cost += best_d;
    }
    return cost;
}

}  // namespace detail

/**
 * Lloyd iterations from `init` until the relative cost improvement drops
 * below `rel_tol` or `max_iter` mean updates have run. An empty cluster is
 * re-seeded at the point farthest from its current center.
 */
inline LloydResult lloyd(const Dataset& X, const CenterSet& init, const LloydConfig& cfg) {
    if (init.dim() != X.dim()) {
        throw std::invalid_argument("initial centers do not match the dataset dimension");
    }
    if (cfg.max_iter < 1 || !(cfg.rel_tol >= 0.0)) {
        throw std::invalid_argument("invalid Lloyd configuration");
    }
    const std::size_t n = X.size();
    const std::size_t d = X.dim();
    const std::size_t k = init.size();

    std::vector<double> centers(init.matrix().values().begin(), init.matrix().values().end());
    std::vector<std::size_t> labels(n);
    std::vector<double> dist(n);
    std::vector<double> history;

    double cost = detail::assign_nearest(X, centers, k, labels, dist);
    history.push_back(cost);
    std::size_t it = 0;
    while (it < cfg.max_iter) {
        ++it;
        std::vector<double> sums(k * d, 0.0);
        std::vector<std::size_t> counts(k, 0);
        for (PointId p = 0; p < n; ++p) {
            const auto x = X.point(p);
            for (std::size_t j = 0; j < d; ++j) {
                sums[labels[p] * d + j] += x[j];
            }
            ++counts[labels[p]];
        }
        std::vector<bool> used(n, false);
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) {
                for (std::size_t j = 0; j < d; ++j) {
                    centers[c * d + j] = sums[c * d + j] / static_cast<double>(counts[c]);
                }
                continue;
            }
            PointId far = n;
            for (PointId p = 0; p < n; ++p) {
                if (!used[p] && (far == n || dist[p] > dist[far])) {
                    far = p;
                }
            }
            if (far == n) {
                continue;
            }
            used[far] = true;
            const auto x = X.point(far);
            std::copy(x.begin(), x.end(), centers.begin() + static_cast<std::ptrdiff_t>(c * d));
        }

        const double next = detail::assign_nearest(X, centers, k, labels, dist);
        history.push_back(next);
        const double improvement = cost - next;
        cost = next;
        if (improvement <= cfg.rel_tol * history[history.size() - 2]) {
            break;
        }
    }

    return LloydResult{CenterSet(Matrix(k, d, std::move(centers))), Assignment{std::move(labels)},
                       cost, it, std::move(history)};
}

/// k-means++ seeding followed by Lloyd, both driven by `cfg.seed`.
inline LloydResult kmeans(const Dataset& X, std::size_t k, const LloydConfig& cfg) {
    return lloyd(X, kmeanspp_init(X, k, cfg.seed), cfg);
}

}  // namespace shallowtree

#endif  // SHALLOWTREE_KMEANS_HPP
