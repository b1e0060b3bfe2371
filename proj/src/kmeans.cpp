#include "trajclust/kmeans.hpp"

#include <limits>
#include <numeric>

#include "trajclust/errors.hpp"

namespace trajclust {

namespace {

Eigen::MatrixXd initial_centers(const Eigen::MatrixXd& x, int k, Rng& rng) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    rng.shuffle(order.begin(), order.end());
    std::vector<Eigen::Index> picked;
    std::vector<Eigen::Index> duplicates;
    for (auto r : order) {
        if (static_cast<int>(picked.size()) == k) break;
        bool seen = false;
        for (auto p : picked) {
            if (x.row(p) == x.row(r)) {
                seen = true;
                break;
            }
        }
        (seen ? duplicates : picked).push_back(r);
    }
    for (auto r : duplicates) {
        if (static_cast<int>(picked.size()) == k) break;
        picked.push_back(r);
    }
    Eigen::MatrixXd centers(k, x.cols());
    for (int c = 0; c < k; ++c) centers.row(c) = x.row(picked[static_cast<std::size_t>(c)]);
    return centers;
}

}  // namespace

double within_ss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers, const std::vector<int>& assignments) {
    double ss = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        ss += (x.row(i) - centers.row(assignments[static_cast<std::size_t>(i)])).squaredNorm();
    }
    return ss;
}

KMeansResult kmeans_from(const Eigen::MatrixXd& x, const Eigen::MatrixXd& initial, int max_iter) {
    const auto n = x.rows();
    const auto k = initial.rows();
    KMeansResult res;
    res.centers = initial;
    res.assignments.assign(static_cast<std::size_t>(n), -1);
    if (n == 0) {
        res.converged = true;
        return res;
    }
    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            auto& a = res.assignments[static_cast<std::size_t>(i)];
            int best = a;
            double best_d = a >= 0 ? (x.row(i) - res.centers.row(a)).squaredNorm()
                                   : std::numeric_limits<double>::infinity();
            for (Eigen::Index c = 0; c < k; ++c) {
                const double d = (x.row(i) - res.centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<int>(c);
                }
            }
            if (best != a) {
                a = best;
                changed = true;
            }
        }
        res.iterations = iter + 1;
        if (!changed && iter > 0) {
            res.converged = true;
            res.trace.push_back(within_ss(x, res.centers, res.assignments));
            break;
        }

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int a = res.assignments[static_cast<std::size_t>(i)];
            sums.row(a) += x.row(i);
            ++counts[static_cast<std::size_t>(a)];
        }
        for (Eigen::Index c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) res.centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        }
        for (Eigen::Index c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            // reseed with the point farthest from its center, taken from a cluster that can spare it
            Eigen::Index far = -1;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const int a = res.assignments[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(a)] < 2) continue;
                const double d = (x.row(i) - res.centers.row(a)).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far < 0) break;
            const int old = res.assignments[static_cast<std::size_t>(far)];
            --counts[static_cast<std::size_t>(old)];
            sums.row(old) -= x.row(far);
            res.centers.row(old) = sums.row(old) / counts[static_cast<std::size_t>(old)];
            res.assignments[static_cast<std::size_t>(far)] = static_cast<int>(c);
            counts[static_cast<std::size_t>(c)] = 1;
            sums.row(c) = x.row(far);
            res.centers.row(c) = x.row(far);
        }
        res.trace.push_back(within_ss(x, res.centers, res.assignments));
    }
    res.within_ss = within_ss(x, res.centers, res.assignments);
    return res;
}

KMeansResult kmeans(const Eigen::MatrixXd& x, int k, int nstart, int max_iter, Rng& rng) {
    if (k < 1) throw Error(ErrorKind::Validation, "kmeans needs K >= 1");
    if (k > x.rows()) {
        throw Error(ErrorKind::Infeasible, "cannot form " + std::to_string(k) + " clusters from " +
                                               std::to_string(x.rows()) + " trajectories");
    }
    KMeansResult best;
    bool have = false;
    for (int s = 0; s < std::max(nstart, 1); ++s) {
        auto res = kmeans_from(x, initial_centers(x, k, rng), max_iter);
        if (!have || res.within_ss < best.within_ss) {
            best = std::move(res);
            have = true;
        }
    }
    return best;
}

}  // namespace trajclust
