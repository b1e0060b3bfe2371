#pragma once

#include <string>
#include <vector>

#include "trajclust/dataset.hpp"
#include "trajclust/metrics.hpp"
#include "trajclust/model.hpp"

namespace trajclust {

/// Shortest round-trip decimal form; NA becomes an empty string.
std::string format_number(double v);

/// rows = models, columns = metrics, NA as empty field.
std::string metric_table_csv(const MetricTable& table, const std::vector<std::pair<std::string, std::vector<std::string>>>& extra_columns = {});

std::string pairwise_csv(const PairwiseMatrix& m);

struct Series {
    std::string label;
    /// Emitted as the data-name attribute (e.g. trajectory id).
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    int color = 0;
    double stroke_width = 1.0;
    double opacity = 1.0;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    int width = 720;
    int height = 440;
    bool legend = true;
};

/// Deterministic SVG line chart. Every series becomes one <polyline> whose
/// data-values attribute lists the original (x, y) pairs.
std::string render_svg(const Chart& chart);

/// One thin polyline per trajectory, colored by group when labels are given.
std::string plot_trajectories(const Dataset& ds, const std::vector<int>* groups = nullptr,
                              const std::vector<std::string>* group_names = nullptr);

/// One bold polyline per cluster, sampled at `times`.
std::string plot_cluster_trajectories(const ClusterModel& m, const std::vector<double>& times,
                                      const std::string& time_label, const std::string& response_label);

/// One panel per metric stacked vertically; metric value against nClusters,
/// one line per method.
std::string plot_metric_sweep(const std::vector<std::string>& methods, const std::vector<int>& n_clusters,
                              const MetricTable& table);

}  // namespace trajclust
