#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "trajclust/rng.hpp"

namespace trajclust {

struct KMeansResult {
    Eigen::MatrixXd centers;       // K x P
    std::vector<int> assignments;  // 0-based, one per row
    double within_ss = 0.0;
    bool converged = false;
    int iterations = 0;
    /// Within-cluster sum of squares after each Lloyd iteration of the
    /// retained start.
    std::vector<double> trace;
};

/// Lloyd's algorithm from `nstart` random initializations (K distinct rows,
/// preferring distinct row values); the lowest within-SS start is kept. A
/// cluster that empties during iteration is reseeded with the point farthest
/// from its center. Throws Infeasible when K exceeds the row count.
KMeansResult kmeans(const Eigen::MatrixXd& x, int k, int nstart, int max_iter, Rng& rng);

/// Lloyd's algorithm from given initial centers.
KMeansResult kmeans_from(const Eigen::MatrixXd& x, const Eigen::MatrixXd& initial_centers, int max_iter);

double within_ss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers, const std::vector<int>& assignments);

}  // namespace trajclust
