#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "trajclust/dataset.hpp"
#include "trajclust/rng.hpp"
#include "trajclust/spec.hpp"

namespace trajclust {

/// Per-trajectory least-squares coefficients of the polynomial design
/// (N x (degree + 1)). Throws Degenerate naming the first trajectory with
/// fewer distinct time points than coefficients.
Eigen::MatrixXd trajectory_coefficients(const Dataset& ds, int degree);

/// Column z-scores (sample SD); constant columns are only centered.
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x);

struct FeaturePartition {
    std::vector<int> labels;
    int n_clusters = 0;
};

using RepresentationFn = std::function<Eigen::MatrixXd(const Dataset&, const MethodSpec&)>;
using ClustererFn = std::function<FeaturePartition(const Eigen::MatrixXd&, const MethodSpec&, Rng&)>;

/// Named building blocks for the generic feature-based method. Built in:
/// representations "ols" (degree) and "mean"; clusterers "kmeans"
/// (nClusters, nstart, maxIter) and "threshold" (thresholds: label = number
/// of thresholds strictly exceeded by the first feature).
void register_representation(const std::string& name, RepresentationFn fn);
void register_clusterer(const std::string& name, ClustererFn fn);
RepresentationFn find_representation(std::string_view name);
ClustererFn find_clusterer(std::string_view name);

/// Stratification rule over per-trajectory summaries of the response.
///
/// Grammar: arithmetic (+ - * /, unary -, parentheses) over numbers and the
/// summaries mean, median, min, max, first, last, slope, sd, n applied to the
/// response column, optionally compared with > >= < <= == !=. A top-level
/// cut(expr, breaks) bins the values: an integer gives that many equal-width
/// bins over the observed range, c(b0, b1, ...) gives explicit right-closed
/// intervals.
class StratifyRule {
public:
    static StratifyRule parse(std::string_view text);

    struct Strata {
        std::vector<int> labels;
        int n_clusters = 0;
        std::vector<std::string> level_names;
        std::vector<double> breaks;  // cut rules only
    };

    /// Throws Rule for unknown variables or functions.
    Strata evaluate(const Dataset& ds) const;

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace trajclust
