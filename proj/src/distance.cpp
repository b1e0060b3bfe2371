#include "trajclust/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trajclust/errors.hpp"
#include "trajclust/harness.hpp"

namespace trajclust {

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw Error(ErrorKind::Shape, "series lengths differ (" + std::to_string(a.size()) + " vs " +
                                          std::to_string(b.size()) + ")");
    }
    double ss = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) ss += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(ss);
}

double dtw_distance(std::span<const double> a, std::span<const double> b, int window) {
    if (a.empty() || b.empty()) throw Error(ErrorKind::Shape, "dtw needs non-empty series");
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    const auto diff = static_cast<std::ptrdiff_t>(n > m ? n - m : m - n);
    const std::ptrdiff_t w = window < 0 ? static_cast<std::ptrdiff_t>(std::max(n, m))
                                        : std::max<std::ptrdiff_t>(window, diff);
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(m + 1, inf);
    std::vector<double> cur(m + 1, inf);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        std::fill(cur.begin(), cur.end(), inf);
        const auto lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, static_cast<std::ptrdiff_t>(i) - w));
        const auto hi = static_cast<std::size_t>(std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(m),
                                                                          static_cast<std::ptrdiff_t>(i) + w));
        for (std::size_t j = lo; j <= hi; ++j) {
            const double cost = std::abs(a[i - 1] - b[j - 1]);
            cur[j] = cost + std::min({prev[j - 1], prev[j], cur[j - 1]});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

DistanceMatrix pairwise_distances(std::size_t n, const std::function<double(std::size_t, std::size_t)>& dist,
                                  int workers) {
    DistanceMatrix d(n);
    // rows are independent; each (i, j > i) cell is written by exactly one task
    parallel_for(n, workers, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, dist(i, j));
    });
    return d;
}

DistanceMatrix euclidean_matrix(const Eigen::MatrixXd& rows, int workers) {
    const Eigen::MatrixXd t = rows.transpose();
    return pairwise_distances(
        static_cast<std::size_t>(rows.rows()),
        [&](std::size_t i, std::size_t j) { return (t.col(static_cast<Eigen::Index>(i)) - t.col(static_cast<Eigen::Index>(j))).norm(); },
        workers);
}

DistanceMatrix dtw_matrix(const Dataset& ds, int window, int workers) {
    return pairwise_distances(
        ds.n_trajectories(), [&](std::size_t i, std::size_t j) { return dtw_distance(ds.values(i), ds.values(j), window); },
        workers);
}

double pam_cost(const DistanceMatrix& d, std::span<const std::size_t> medoids) {
    double total = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (auto m : medoids) best = std::min(best, d(i, m));
        total += best;
    }
    return total;
}

PamResult pam(const DistanceMatrix& d, int k) {
    const std::size_t n = d.size();
    if (k < 1) throw Error(ErrorKind::Validation, "k-medoids needs K >= 1");
    if (static_cast<std::size_t>(k) > n) {
        throw Error(ErrorKind::Infeasible, "cannot form " + std::to_string(k) + " clusters from " +
                                               std::to_string(n) + " trajectories");
    }
    PamResult res;
    std::vector<bool> is_medoid(n, false);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());

    // BUILD
    for (int c = 0; c < k; ++c) {
        std::size_t pick = n;
        double pick_cost = std::numeric_limits<double>::infinity();
        for (std::size_t h = 0; h < n; ++h) {
            if (is_medoid[h]) continue;
            double cost = 0.0;
            for (std::size_t i = 0; i < n; ++i) cost += std::min(nearest[i], d(i, h));
            if (cost < pick_cost) {
                pick_cost = cost;
                pick = h;
            }
        }
        is_medoid[pick] = true;
        res.medoids.push_back(pick);
        for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], d(i, pick));
    }

    // SWAP
    double cost = pam_cost(d, res.medoids);
    std::vector<std::size_t> trial = res.medoids;
    while (true) {
        double best_cost = cost;
        std::size_t best_slot = 0;
        std::size_t best_h = n;
        for (std::size_t slot = 0; slot < res.medoids.size(); ++slot) {
            for (std::size_t h = 0; h < n; ++h) {
                if (is_medoid[h]) continue;
                trial = res.medoids;
                trial[slot] = h;
                const double c = pam_cost(d, trial);
                if (c < best_cost - 1e-12 * std::max(1.0, std::abs(cost))) {
                    best_cost = c;
                    best_slot = slot;
                    best_h = h;
                }
            }
        }
        if (best_h == n) break;
        is_medoid[res.medoids[best_slot]] = false;
        is_medoid[best_h] = true;
        res.medoids[best_slot] = best_h;
        cost = best_cost;
        ++res.swaps;
    }

    res.assignments.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        for (int c = 1; c < k; ++c) {
            if (d(i, res.medoids[static_cast<std::size_t>(c)]) < d(i, res.medoids[static_cast<std::size_t>(best)])) best = c;
        }
        // a medoid always belongs to its own cluster
        for (int c = 0; c < k; ++c) {
            if (res.medoids[static_cast<std::size_t>(c)] == i) best = c;
        }
        res.assignments[i] = best;
    }
    res.total_cost = cost;
    return res;
}

}  // namespace trajclust
