#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "trajclust/dataset.hpp"

namespace trajclust {

/// Polynomial design in time: columns 1, t, ..., t^degree.
Eigen::MatrixXd design_matrix(std::span<const double> times, int degree);

/// Mixture of fixed-effect regressions.
struct GbtmParams {
    Eigen::MatrixXd beta;    // K x B
    Eigen::VectorXd sigma2;  // residual variance per cluster (equal entries when shared)
    Eigen::VectorXd pi;
    int degree = 1;
};

/// Mixture of random-intercept regressions; variance components shared
/// across clusters.
struct GmmParams {
    Eigen::MatrixXd beta;  // K x B
    double sigma2_e = 1.0;
    double sigma2_u = 0.0;
    Eigen::VectorXd pi;
    int degree = 1;
};

struct EmSettings {
    int k = 2;
    int degree = 1;
    int starts = 10;
    int max_iter = 500;
    double tol = 1e-8;
    /// GBTM: one residual variance per cluster instead of a shared one.
    bool cluster_variances = false;
    /// GMM: estimate the random-intercept variance; false pins it at zero.
    bool random_intercept = true;
    int workers = 1;
};

template <class Params>
struct EmFit {
    Params params;
    Eigen::MatrixXd postprob;
    double log_likelihood = 0.0;
    /// Observed-data log-likelihood evaluated at the start of each iteration
    /// (and at the final parameters) for the retained start.
    std::vector<double> trace;
    bool converged = false;
    int iterations = 0;
    int collapsed_starts = 0;
};

using GbtmFit = EmFit<GbtmParams>;
using GmmFit = EmFit<GmmParams>;

/// EM from `settings.starts` random soft assignments (flat Dirichlet per
/// trajectory); the start with the highest final log-likelihood wins.
/// Start s draws from derive_seed(seed, "em-start", s). Starts whose variance
/// collapses below 1e-10 are replaced by fresh ones, up to `starts` extra.
GbtmFit fit_gbtm(const Dataset& ds, const EmSettings& settings, std::uint64_t seed);
GmmFit fit_gmm(const Dataset& ds, const EmSettings& settings, std::uint64_t seed);

/// log N(y; X beta, sigma2_e I + sigma2_u 11') via the rank-one
/// determinant lemma and Sherman-Morrison.
double gmm_marginal_log_density(std::span<const double> y, const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& beta, double sigma2_e, double sigma2_u);

double gbtm_log_likelihood(const Dataset& ds, const GbtmParams& params);
double gmm_log_likelihood(const Dataset& ds, const GmmParams& params);

/// Number of free parameters: K*B + variances + (K - 1).
int gbtm_parameter_count(int k, int degree, bool cluster_variances);
int gmm_parameter_count(int k, int degree);

}  // namespace trajclust
