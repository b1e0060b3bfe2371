#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "trajclust/dataset.hpp"

namespace trajclust {

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Dynamic time warping with local cost |a_i - b_j| and unit-weight steps.
/// `window` < 0 means unconstrained; otherwise a Sakoe-Chiba band of that
/// half-width (widened to cover the length difference).
double dtw_distance(std::span<const double> a, std::span<const double> b, int window = -1);

/// Symmetric N x N matrix with zero diagonal.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        d_[i * n_ + j] = v;
        d_[j * n_ + i] = v;
    }

private:
    std::size_t n_ = 0;
    std::vector<double> d_;
};

/// Pairwise distances between rows; pairs are split across `workers` threads.
DistanceMatrix pairwise_distances(std::size_t n,
                                  const std::function<double(std::size_t, std::size_t)>& dist,
                                  int workers = 1);

DistanceMatrix euclidean_matrix(const Eigen::MatrixXd& rows, int workers = 1);
DistanceMatrix dtw_matrix(const Dataset& ds, int window = -1, int workers = 1);

struct PamResult {
    std::vector<std::size_t> medoids;  // row index per cluster
    std::vector<int> assignments;
    double total_cost = 0.0;
    int swaps = 0;
};

/// Partitioning around medoids: greedy BUILD followed by steepest-descent
/// SWAP until no swap lowers the total cost.
PamResult pam(const DistanceMatrix& d, int k);

/// Total distance of every point to its nearest medoid.
double pam_cost(const DistanceMatrix& d, std::span<const std::size_t> medoids);

}  // namespace trajclust
