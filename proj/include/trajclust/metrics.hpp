#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "trajclust/distance.hpp"
#include "trajclust/model.hpp"

namespace trajclust {

/// Metric value for "not defined". Metrics never return infinities.
inline constexpr double kNA = std::numeric_limits<double>::quiet_NaN();
inline bool is_na(double v) { return std::isnan(v); }

using InternalMetricFn = std::function<double(const ClusterModel&)>;
using ExternalMetricFn = std::function<double(const ClusterModel&, const ClusterModel&)>;

class MetricRegistry {
public:
    MetricRegistry() = default;
    MetricRegistry(const MetricRegistry& other);
    MetricRegistry& operator=(const MetricRegistry&) = delete;

    /// Registry pre-populated with the built-in metrics.
    static MetricRegistry with_builtins();

    void define_internal(const std::string& name, InternalMetricFn fn);
    void define_external(const std::string& name, ExternalMetricFn fn);

    std::vector<std::string> internal_names() const;
    std::vector<std::string> external_names() const;

    /// Throws UnknownMetric. Non-finite results come back as NA.
    double internal(const ClusterModel& m, const std::string& name) const;
    double external(const ClusterModel& a, const ClusterModel& b, const std::string& name) const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, InternalMetricFn> internal_;
    std::map<std::string, ExternalMetricFn> external_;
};

/// Process-wide registry used by the convenience functions below.
MetricRegistry& metric_registry();

void define_internal_metric(const std::string& name, InternalMetricFn fn);
void define_external_metric(const std::string& name, ExternalMetricFn fn);
std::vector<std::string> internal_metric_names();
std::vector<std::string> external_metric_names();

std::map<std::string, double> internal_metric(const ClusterModel& m, const std::vector<std::string>& names);
double external_metric(const ClusterModel& a, const ClusterModel& b, const std::string& name);

/// Lower-triangular matrix: values(i, j) for i > j holds metric(models[i], models[j]).
struct PairwiseMatrix {
    std::vector<std::string> names;
    Eigen::MatrixXd values;

    std::size_t n_entries() const { return names.size() * (names.size() - 1) / 2; }
};

/// With a warnings sink, incompatible partitions give NA cells instead of throwing.
PairwiseMatrix pairwise_external(const ModelList& list, const std::string& name,
                                 std::vector<std::string>* warnings = nullptr);

/// Entry maximizing a metric; NA values sort last. Throws NotFound when the
/// list holds no model with a defined value.
std::shared_ptr<const ClusterModel> max_by(const ModelList& list, const std::string& metric);
std::shared_ptr<const ClusterModel> min_by(const ModelList& list, const std::string& metric);

/// Metric table: one row per entry (NA for failed fits).
struct MetricTable {
    std::vector<std::string> row_names;
    std::vector<std::string> metrics;
    std::vector<std::vector<double>> values;
};

MetricTable metric_table(const ModelList& list, const std::vector<std::string>& metrics);

// Building blocks, exposed for testing.

/// Hard partition comparisons on label vectors of equal length.
double adjusted_rand(std::span<const int> a, std::span<const int> b);
/// Symmetric split-join distance (van Dongen).
int split_join(std::span<const int> a, std::span<const int> b);
/// One-way projection distance: n - sum over clusters of a of the best overlap in b.
int split_join_ref(std::span<const int> a, std::span<const int> b);

double dunn_index(const DistanceMatrix& d, std::span<const int> labels);
double silhouette_width(const DistanceMatrix& d, std::span<const int> labels);

/// Eq. form: (1/J) sum_k pi_k min_k' sum_j |y_kj - yref_k'j|.
double wmmae(const ClusterModel& a, const ClusterModel& reference, int grid_points = 100);

/// Euclidean distance matrix on the copy-mean imputed aligned data.
DistanceMatrix trajectory_distances(const Dataset& ds);

}  // namespace trajclust
