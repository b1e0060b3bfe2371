#pragma once

// Slow reference implementations used to cross-check the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "trajclust/rng.hpp"

namespace oracle {

// Pair counting over all i < j.
inline double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
    double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            const bool sa = a[i] == a[j];
            const bool sb = b[i] == b[j];
            if (sa && sb) n11 += 1;
            else if (sa) n10 += 1;
            else if (sb) n01 += 1;
            else n00 += 1;
        }
    }
    const double denom = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    if (denom == 0.0) return 1.0;
    return 2.0 * (n00 * n11 - n01 * n10) / denom;
}

// For each cluster of `a`, the members outside its largest overlap with `b`.
inline int split_join_ref(const std::vector<int>& a, const std::vector<int>& b) {
    std::set<int> clusters(a.begin(), a.end());
    int moved = 0;
    for (int c : clusters) {
        std::map<int, int> overlap;
        int size = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] != c) continue;
            ++size;
            ++overlap[b[i]];
        }
        int best = 0;
        for (const auto& [k, v] : overlap) best = std::max(best, v);
        moved += size - best;
    }
    return moved;
}

inline int split_join(const std::vector<int>& a, const std::vector<int>& b) {
    return split_join_ref(a, b) + split_join_ref(b, a);
}

using Dist = std::function<double(std::size_t, std::size_t)>;

inline double dunn(std::size_t n, const Dist& d, const std::vector<int>& labels) {
    std::set<int> clusters(labels.begin(), labels.end());
    if (clusters.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double sep = std::numeric_limits<double>::infinity();
    double diam = 0.0;
    for (int c : clusters) {
        for (int e : clusters) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    if (labels[i] != c || labels[j] != e || i == j) continue;
                    if (c == e) diam = std::max(diam, d(i, j));
                    else sep = std::min(sep, d(i, j));
                }
            }
        }
    }
    if (diam == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sep / diam;
}

inline double silhouette(std::size_t n, const Dist& d, const std::vector<int>& labels) {
    std::set<int> clusters(labels.begin(), labels.end());
    if (clusters.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto mean_to = [&](int c, bool self) {
            double s = 0.0;
            int m = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (labels[j] != c || (self && j == i)) continue;
                s += d(i, j);
                ++m;
            }
            return m == 0 ? std::numeric_limits<double>::quiet_NaN() : s / m;
        };
        const double a = mean_to(labels[i], true);
        if (std::isnan(a)) continue;
        double b = std::numeric_limits<double>::infinity();
        for (int c : clusters) {
            if (c != labels[i]) b = std::min(b, mean_to(c, false));
        }
        total += (b - a) / std::max(a, b);
    }
    return total / static_cast<double>(n);
}

// Minimum cost over every monotone warping path, enumerated recursively.
inline double dtw(const std::vector<double>& a, const std::vector<double>& b) {
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double cost) {
        cost += std::abs(a[i] - b[j]);
        if (i + 1 == a.size() && j + 1 == b.size()) {
            best = std::min(best, cost);
            return;
        }
        if (i + 1 < a.size()) walk(i + 1, j, cost);
        if (j + 1 < b.size()) walk(i, j + 1, cost);
        if (i + 1 < a.size() && j + 1 < b.size()) walk(i + 1, j + 1, cost);
    };
    walk(0, 0, 0.0);
    return best;
}

// log N(y; X beta, s2e I + s2u 11') with the covariance built densely.
inline double gmm_density(const std::vector<double>& y, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                          double s2e, double s2u) {
    const auto n = static_cast<Eigen::Index>(y.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(n, n, s2u);
    cov.diagonal().array() += s2e;
    Eigen::VectorXd r(n);
    for (Eigen::Index j = 0; j < n; ++j) r(j) = y[static_cast<std::size_t>(j)] - x.row(j).dot(beta);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    const Eigen::MatrixXd l = llt.matrixL();
    double logdet = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) logdet += 2.0 * std::log(l(j, j));
    const double quad = r.dot(llt.solve(r));
    return -0.5 * (static_cast<double>(n) * std::log(2.0 * M_PI) + logdet + quad);
}

// Normal equations (X'X) b = X'y.
inline Eigen::VectorXd ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    return (x.transpose() * x).ldlt().solve(x.transpose() * y);
}

// Copy-mean imputation written out cell by cell from its definition.
inline Eigen::MatrixXd copy_mean(const Eigen::MatrixXd& m) {
    const auto rows = m.rows();
    const auto cols = m.cols();
    Eigen::VectorXd mean(cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        double s = 0.0;
        int c = 0;
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (!std::isnan(m(i, j))) {
                s += m(i, j);
                ++c;
            }
        }
        mean(j) = s / c;
    }
    Eigen::MatrixXd out = m;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (!std::isnan(m(i, j))) continue;
            Eigen::Index before = -1, after = -1;
            for (Eigen::Index q = j - 1; q >= 0; --q) {
                if (!std::isnan(m(i, q))) {
                    before = q;
                    break;
                }
            }
            for (Eigen::Index q = j + 1; q < cols; ++q) {
                if (!std::isnan(m(i, q))) {
                    after = q;
                    break;
                }
            }
            if (before >= 0 && after >= 0) {
                const double db = m(i, before) - mean(before);
                const double da = m(i, after) - mean(after);
                const double w = static_cast<double>(j - before) / static_cast<double>(after - before);
                out(i, j) = mean(j) + db + w * (da - db);
            } else if (before >= 0) {
                out(i, j) = mean(j) + m(i, before) - mean(before);
            } else {
                out(i, j) = mean(j) + m(i, after) - mean(after);
            }
        }
    }
    return out;
}

// Random labels in 0..k-1 with every label used (needs n >= k).
inline std::vector<int> random_partition(trajclust::Rng& rng, std::size_t n, int k) {
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = i < static_cast<std::size_t>(k) ? static_cast<int>(i)
                                                                                     : static_cast<int>(rng.index(static_cast<std::size_t>(k)));
    rng.shuffle(labels.begin(), labels.end());
    return labels;
}

}  // namespace oracle
