#include "trajclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "trajclust/errors.hpp"

namespace trajclust {

namespace {

std::vector<int> modal(const ClusterModel& m) { return trajectory_assignments(m, AssignmentStrategy::Modal, m.seed()); }

struct Contingency {
    std::vector<std::vector<long>> table;  // rows: a clusters, cols: b clusters
    long n = 0;
};

Contingency contingency(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw Error(ErrorKind::IncompatiblePartition, "partitions have different lengths");
    Contingency c;
    const int ka = a.empty() ? 0 : *std::max_element(a.begin(), a.end()) + 1;
    const int kb = b.empty() ? 0 : *std::max_element(b.begin(), b.end()) + 1;
    c.table.assign(static_cast<std::size_t>(ka), std::vector<long>(static_cast<std::size_t>(kb), 0));
    for (std::size_t i = 0; i < a.size(); ++i) ++c.table[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])];
    c.n = static_cast<long>(a.size());
    return c;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

void require_same_ids(const ClusterModel& a, const ClusterModel& b) {
    if (a.ids() != b.ids()) {
        throw Error(ErrorKind::IncompatiblePartition, "models are fitted on different trajectory id sets");
    }
}

/// Shared summation for MAE/WMAE/RMSE/WRMSE: sum_i sum_k w_ik sum_j loss(y_ij - yhat_k(t_ij)) / sum_i J_i,
/// with w either the posterior or the modal indicator. Zero weights are skipped.
double weighted_error(const ClusterModel& m, const Eigen::MatrixXd& w, bool squared) {
    auto data = m.training_data();
    if (!data) return kNA;
    double total = 0.0;
    double obs = 0.0;
    for (std::size_t i = 0; i < data->n_trajectories(); ++i) {
        auto t = data->times(i);
        auto y = data->values(i);
        obs += static_cast<double>(y.size());
        for (Eigen::Index k = 0; k < w.cols(); ++k) {
            const double wk = w(static_cast<Eigen::Index>(i), k);
            if (wk == 0.0) continue;
            const auto& curve = m.curves()[static_cast<std::size_t>(k)];
            double s = 0.0;
            for (std::size_t j = 0; j < y.size(); ++j) {
                const double r = y[j] - curve(t[j]);
                s += squared ? r * r : std::abs(r);
            }
            total += wk * s;
        }
    }
    const double v = total / obs;
    return squared ? std::sqrt(v) : v;
}

Eigen::MatrixXd modal_indicator(const ClusterModel& m) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m.postprob().rows(), m.postprob().cols());
    const auto a = modal(m);
    for (std::size_t i = 0; i < a.size(); ++i) w(static_cast<Eigen::Index>(i), a[i]) = 1.0;
    return w;
}

double with_distances(const ClusterModel& m, double (*fn)(const DistanceMatrix&, std::span<const int>)) {
    auto data = m.training_data();
    if (!data || m.n_clusters() < 2) return kNA;
    const auto labels = modal(m);
    return fn(trajectory_distances(*data), labels);
}

void add_builtins(MetricRegistry& r) {
    r.define_internal("MAE", [](const ClusterModel& m) { return weighted_error(m, modal_indicator(m), false); });
    r.define_internal("RMSE", [](const ClusterModel& m) { return weighted_error(m, modal_indicator(m), true); });
    r.define_internal("WMAE", [](const ClusterModel& m) { return weighted_error(m, m.postprob(), false); });
    r.define_internal("WRMSE", [](const ClusterModel& m) { return weighted_error(m, m.postprob(), true); });
    r.define_internal("Dunn", [](const ClusterModel& m) { return with_distances(m, dunn_index); });
    r.define_internal("ASW", [](const ClusterModel& m) { return with_distances(m, silhouette_width); });
    r.define_internal("BIC", [](const ClusterModel& m) {
        if (!m.log_likelihood() || !m.n_params()) return kNA;
        return -2.0 * *m.log_likelihood() + *m.n_params() * std::log(static_cast<double>(m.n_trajectories()));
    });
    r.define_internal("AIC", [](const ClusterModel& m) {
        if (!m.log_likelihood() || !m.n_params()) return kNA;
        return -2.0 * *m.log_likelihood() + 2.0 * *m.n_params();
    });
    r.define_internal("converged", [](const ClusterModel& m) { return m.converged() ? 1.0 : 0.0; });
    r.define_internal("estimationTime", [](const ClusterModel& m) { return m.estimation_seconds(); });

    r.define_external("adjustedRand", [](const ClusterModel& a, const ClusterModel& b) {
        require_same_ids(a, b);
        return adjusted_rand(modal(a), modal(b));
    });
    r.define_external("splitJoin", [](const ClusterModel& a, const ClusterModel& b) {
        require_same_ids(a, b);
        return static_cast<double>(split_join(modal(a), modal(b)));
    });
    r.define_external("splitJoin.ref", [](const ClusterModel& a, const ClusterModel& b) {
        require_same_ids(a, b);
        return static_cast<double>(split_join_ref(modal(a), modal(b)));
    });
    r.define_external("WMMAE", [](const ClusterModel& a, const ClusterModel& b) { return wmmae(a, b); });
}

}  // namespace

// ------------------------------------------------------------------ registry

MetricRegistry::MetricRegistry(const MetricRegistry& other) {
    std::lock_guard lock(other.mutex_);
    internal_ = other.internal_;
    external_ = other.external_;
}

MetricRegistry MetricRegistry::with_builtins() {
    MetricRegistry r;
    add_builtins(r);
    return r;
}

void MetricRegistry::define_internal(const std::string& name, InternalMetricFn fn) {
    std::lock_guard lock(mutex_);
    internal_[name] = std::move(fn);
}

void MetricRegistry::define_external(const std::string& name, ExternalMetricFn fn) {
    std::lock_guard lock(mutex_);
    external_[name] = std::move(fn);
}

std::vector<std::string> MetricRegistry::internal_names() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [k, v] : internal_) out.push_back(k);
    return out;
}

std::vector<std::string> MetricRegistry::external_names() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [k, v] : external_) out.push_back(k);
    return out;
}

double MetricRegistry::internal(const ClusterModel& m, const std::string& name) const {
    InternalMetricFn fn;
    {
        std::lock_guard lock(mutex_);
        auto it = internal_.find(name);
        if (it == internal_.end()) throw Error(ErrorKind::UnknownMetric, "unknown internal metric '" + name + "'");
        fn = it->second;
    }
    const double v = fn(m);
    return std::isfinite(v) ? v : kNA;
}

double MetricRegistry::external(const ClusterModel& a, const ClusterModel& b, const std::string& name) const {
    ExternalMetricFn fn;
    {
        std::lock_guard lock(mutex_);
        auto it = external_.find(name);
        if (it == external_.end()) throw Error(ErrorKind::UnknownMetric, "unknown external metric '" + name + "'");
        fn = it->second;
    }
    const double v = fn(a, b);
    return std::isfinite(v) ? v : kNA;
}

MetricRegistry& metric_registry() {
    static MetricRegistry r = MetricRegistry::with_builtins();
    return r;
}

void define_internal_metric(const std::string& name, InternalMetricFn fn) {
    metric_registry().define_internal(name, std::move(fn));
}

void define_external_metric(const std::string& name, ExternalMetricFn fn) {
    metric_registry().define_external(name, std::move(fn));
}

std::vector<std::string> internal_metric_names() { return metric_registry().internal_names(); }
std::vector<std::string> external_metric_names() { return metric_registry().external_names(); }

std::map<std::string, double> internal_metric(const ClusterModel& m, const std::vector<std::string>& names) {
    std::map<std::string, double> out;
    for (const auto& n : names) out[n] = metric_registry().internal(m, n);
    return out;
}

double external_metric(const ClusterModel& a, const ClusterModel& b, const std::string& name) {
    return metric_registry().external(a, b, name);
}

// -------------------------------------------------------------- model lists

PairwiseMatrix pairwise_external(const ModelList& list, const std::string& name, std::vector<std::string>* warnings) {
    std::vector<const ModelEntry*> ok;
    for (const auto& e : list) {
        if (e.ok()) ok.push_back(&e);
    }
    if (ok.size() < 2) throw Error(ErrorKind::Validation, "pairwise comparison needs at least two models");
    PairwiseMatrix out;
    const auto n = static_cast<Eigen::Index>(ok.size());
    out.values = Eigen::MatrixXd::Constant(n, n, kNA);
    for (const auto* e : ok) out.names.push_back(e->name);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i, i) = kNA;
        for (Eigen::Index j = 0; j < i; ++j) {
            try {
                out.values(i, j) = external_metric(*ok[static_cast<std::size_t>(i)]->model,
                                                   *ok[static_cast<std::size_t>(j)]->model, name);
            } catch (const Error& err) {
                const std::string what = "models '" + out.names[static_cast<std::size_t>(i)] + "' and '" +
                                         out.names[static_cast<std::size_t>(j)] + "': " + err.what();
                if (!warnings || err.kind() != ErrorKind::IncompatiblePartition) throw Error(err.kind(), what);
                warnings->push_back(what);
            }
        }
    }
    return out;
}

namespace {

std::shared_ptr<const ClusterModel> best_by(const ModelList& list, const std::string& metric, bool maximize) {
    std::shared_ptr<const ClusterModel> best;
    double best_v = kNA;
    bool any = false;
    for (const auto& e : list) {
        if (!e.ok()) continue;
        any = true;
        const double v = metric_registry().internal(*e.model, metric);
        if (is_na(v)) continue;
        if (!best || (maximize ? v > best_v : v < best_v)) {
            best = e.model;
            best_v = v;
        }
    }
    if (!any) throw Error(ErrorKind::NotFound, "model list is empty");
    if (!best) throw Error(ErrorKind::NotFound, "metric '" + metric + "' is NA for every model");
    return best;
}

}  // namespace

std::shared_ptr<const ClusterModel> max_by(const ModelList& list, const std::string& metric) {
    return best_by(list, metric, true);
}

std::shared_ptr<const ClusterModel> min_by(const ModelList& list, const std::string& metric) {
    return best_by(list, metric, false);
}

MetricTable metric_table(const ModelList& list, const std::vector<std::string>& metrics) {
    const auto known = internal_metric_names();
    for (const auto& m : metrics) {
        if (std::find(known.begin(), known.end(), m) == known.end()) {
            throw Error(ErrorKind::UnknownMetric, "unknown internal metric '" + m + "'");
        }
    }
    MetricTable t;
    t.metrics = metrics;
    for (const auto& e : list) {
        t.row_names.push_back(e.name);
        std::vector<double> row;
        for (const auto& m : metrics) row.push_back(e.ok() ? metric_registry().internal(*e.model, m) : kNA);
        t.values.push_back(std::move(row));
    }
    return t;
}

// ----------------------------------------------------------- building blocks

double adjusted_rand(std::span<const int> a, std::span<const int> b) {
    const auto c = contingency(a, b);
    double index = 0.0;
    std::vector<double> rows(c.table.size(), 0.0);
    std::vector<double> cols(c.table.empty() ? 0 : c.table.front().size(), 0.0);
    for (std::size_t i = 0; i < c.table.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            const auto v = static_cast<double>(c.table[i][j]);
            index += choose2(v);
            rows[i] += v;
            cols[j] += v;
        }
    }
    double sa = 0.0;
    double sb = 0.0;
    for (double r : rows) sa += choose2(r);
    for (double x : cols) sb += choose2(x);
    const double total = choose2(static_cast<double>(c.n));
    if (total == 0.0) return 1.0;
    const double expected = sa * sb / total;
    const double max_index = 0.5 * (sa + sb);
    if (max_index - expected == 0.0) return 1.0;
    return (index - expected) / (max_index - expected);
}

int split_join_ref(std::span<const int> a, std::span<const int> b) {
    const auto c = contingency(a, b);
    long kept = 0;
    for (const auto& row : c.table) kept += row.empty() ? 0 : *std::max_element(row.begin(), row.end());
    return static_cast<int>(c.n - kept);
}

int split_join(std::span<const int> a, std::span<const int> b) { return split_join_ref(a, b) + split_join_ref(b, a); }

double dunn_index(const DistanceMatrix& d, std::span<const int> labels) {
    const std::size_t n = labels.size();
    std::map<int, int> sizes;
    for (int l : labels) ++sizes[l];
    if (sizes.size() < 2) return kNA;
    double min_between = std::numeric_limits<double>::infinity();
    double max_within = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (labels[i] == labels[j]) {
                max_within = std::max(max_within, d(i, j));
            } else {
                min_between = std::min(min_between, d(i, j));
            }
        }
    }
    if (max_within == 0.0) return kNA;
    return min_between / max_within;
}

double silhouette_width(const DistanceMatrix& d, std::span<const int> labels) {
    const std::size_t n = labels.size();
    std::map<int, int> sizes;
    for (int l : labels) ++sizes[l];
    if (sizes.size() < 2) return kNA;
    double total = 0.0;
    std::map<int, double> sums;
    for (std::size_t i = 0; i < n; ++i) {
        if (sizes[labels[i]] == 1) continue;  // singleton silhouette is 0
        sums.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) sums[labels[j]] += d(i, j);
        }
        const double a = sums[labels[i]] / (sizes[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [label, size] : sizes) {
            if (label != labels[i]) b = std::min(b, sums[label] / size);
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

double wmmae(const ClusterModel& a, const ClusterModel& reference, int grid_points) {
    const double lo = std::max(a.time_range().first, reference.time_range().first);
    const double hi = std::min(a.time_range().second, reference.time_range().second);
    if (lo > hi || grid_points < 1) return kNA;
    std::vector<double> grid(static_cast<std::size_t>(grid_points));
    for (int j = 0; j < grid_points; ++j) {
        grid[static_cast<std::size_t>(j)] = grid_points == 1 ? lo : lo + (hi - lo) * j / (grid_points - 1);
    }
    const Eigen::MatrixXd ya = cluster_trajectories(a, grid);
    const Eigen::MatrixXd yr = cluster_trajectories(reference, grid);
    const Eigen::VectorXd pi = a.proportions();
    double total = 0.0;
    for (Eigen::Index k = 0; k < ya.rows(); ++k) {
        if (pi(k) == 0.0) continue;
        if (ya.row(k).hasNaN()) return kNA;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index r = 0; r < yr.rows(); ++r) {
            if (yr.row(r).hasNaN()) continue;
            best = std::min(best, (ya.row(k) - yr.row(r)).cwiseAbs().sum() / grid_points);
        }
        if (!std::isfinite(best)) return kNA;
        total += pi(k) * best;
    }
    return total;
}

DistanceMatrix trajectory_distances(const Dataset& ds) {
    return euclidean_matrix(to_aligned_matrix(ds, Imputation::CopyMean).values);
}

}  // namespace trajclust
