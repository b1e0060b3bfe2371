#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "trajclust/dataset.hpp"
#include "trajclust/spec.hpp"

namespace trajclust {

/// Cluster trajectory given by knots; linear in between, clamped outside.
/// An empty knot set (empty cluster) evaluates to NaN.
struct PiecewiseLinear {
    std::vector<double> times;
    std::vector<double> values;
};

/// Cluster trajectory sum_b coefficients[b] * t^b.
struct Polynomial {
    std::vector<double> coefficients;
};

/// Arbitrary user-supplied curve (custom methods). Not serializable.
struct CustomCurve {
    std::function<double(double)> fn;
};

class ClusterCurve {
public:
    using Repr = std::variant<PiecewiseLinear, Polynomial, CustomCurve>;

    ClusterCurve(Repr repr) : repr_(std::move(repr)) {}  // NOLINT(implicit)

    double operator()(double t) const;
    const Repr& repr() const { return repr_; }

    nlohmann::json to_json() const;
    static ClusterCurve from_json(const nlohmann::json& j);

private:
    Repr repr_;
};

/// Everything a backend produces; the pipeline turns this into a ClusterModel.
struct FitResult {
    Eigen::MatrixXd postprob;
    std::vector<ClusterCurve> curves;
    bool converged = true;
    std::optional<double> log_likelihood;
    std::optional<int> n_params;
    /// When set, cluster order is intrinsic (strata, labeled partitions) and
    /// the pipeline keeps it instead of sorting by decreasing proportion.
    std::optional<std::vector<std::string>> cluster_names;
    std::vector<std::string> diagnostics;
    nlohmann::json details = nlohmann::json::object();
};

/// Fitted cluster solution. Immutable; "modifiers" return new models.
class ClusterModel {
public:
    struct Parts {
        MethodSpec spec;
        std::uint64_t seed = 0;
        Eigen::MatrixXd postprob;
        std::vector<std::string> cluster_names;
        std::vector<ClusterCurve> curves;
        std::vector<std::string> ids;
        std::pair<double, double> time_range{0.0, 0.0};
        std::vector<double> time_grid;
        bool converged = true;
        double estimation_seconds = 0.0;
        std::optional<double> log_likelihood;
        std::optional<int> n_params;
        std::vector<std::string> diagnostics;
        nlohmann::json details = nlohmann::json::object();
        std::string tag;
        std::shared_ptr<const Dataset> data;
        std::optional<BootRecipe> recipe;
    };

    /// Validates the postprob/name/curve invariants.
    explicit ClusterModel(Parts parts);

    int n_clusters() const { return static_cast<int>(p_.cluster_names.size()); }
    std::size_t n_trajectories() const { return p_.ids.size(); }

    const MethodSpec& spec() const { return p_.spec; }
    const std::string& method() const { return p_.spec.method(); }
    std::uint64_t seed() const { return p_.seed; }
    bool converged() const { return p_.converged; }
    double estimation_seconds() const { return p_.estimation_seconds; }
    const std::optional<double>& log_likelihood() const { return p_.log_likelihood; }
    const std::optional<int>& n_params() const { return p_.n_params; }
    const std::string& tag() const { return p_.tag; }
    const std::vector<std::string>& diagnostics() const { return p_.diagnostics; }
    const nlohmann::json& details() const { return p_.details; }

    const Eigen::MatrixXd& postprob() const { return p_.postprob; }
    /// Column means of the posterior probability matrix.
    Eigen::VectorXd proportions() const;
    const std::vector<std::string>& cluster_names() const { return p_.cluster_names; }
    const std::vector<ClusterCurve>& curves() const { return p_.curves; }
    const std::vector<std::string>& ids() const { return p_.ids; }
    std::pair<double, double> time_range() const { return p_.time_range; }
    /// Time grid of the training data (used for predictor samples).
    const std::vector<double>& time_grid() const { return p_.time_grid; }

    /// Number of clusters without modal members.
    int empty_clusters() const;

    /// Training data: stored, rebuilt from the bootstrap recipe, or null for
    /// models loaded from JSON.
    std::shared_ptr<const Dataset> training_data() const;
    const std::optional<BootRecipe>& recipe() const { return p_.recipe; }

    ClusterModel with_cluster_names(std::vector<std::string> names) const;
    ClusterModel with_tag(std::string tag) const;
    /// Replaces the stored training data by a bootstrap recipe.
    ClusterModel with_recipe(BootRecipe recipe) const;
    /// Reorders clusters: new cluster k is old cluster order[k].
    ClusterModel permuted(std::span<const int> order) const;

    const Parts& parts() const { return p_; }

private:
    Parts p_;
};

/// "A", "B", ..., "Z", "AA", ...
std::vector<std::string> default_cluster_names(std::size_t k);

enum class AssignmentStrategy { Modal, WeightedRandom };

/// Cluster index per trajectory (aligned with model.ids()). Modal breaks exact
/// ties uniformly at random from the given seed.
std::vector<int> trajectory_assignments(const ClusterModel& m,
                                        AssignmentStrategy strategy = AssignmentStrategy::Modal,
                                        std::uint64_t seed = 0);

/// Row-wise variant on a bare posterior matrix.
std::vector<int> assign_rows(const Eigen::MatrixXd& postprob, AssignmentStrategy strategy,
                             std::uint64_t seed);

/// K x T matrix of cluster trajectory values.
Eigen::MatrixXd cluster_trajectories(const ClusterModel& m, std::span<const double> times);

/// Cluster k's prediction at every observation of `data` (trajectory-major).
std::vector<double> predict_for_cluster(const ClusterModel& m, const Dataset& data, int k);

/// Predictions under each training trajectory's modal cluster.
std::vector<double> fitted(const ClusterModel& m);
std::vector<double> residuals(const ClusterModel& m);

enum class Center { Mean, Median };
Center parse_center(std::string_view name);

/// Per-cluster pointwise center curves for a hard partition (labels 0..K-1).
std::vector<ClusterCurve> partition_curves(const Dataset& ds, std::span<const int> labels, int k,
                                           Center center);

/// Hard-assignment model from an id -> label map. Clusters are the distinct
/// labels in natural order.
ClusterModel partition_model(std::shared_ptr<const Dataset> ds,
                             const std::map<std::string, std::string>& assignments,
                             Center center = Center::Mean);

/// Partition model from the dataset's ground truth.
ClusterModel truth_model(std::shared_ptr<const Dataset> ds, Center center = Center::Mean);

nlohmann::json to_json(const ClusterModel& m, bool include_timing = false);
std::string to_json_string(const ClusterModel& m, bool include_timing = false);
/// Rebuilds a model from its JSON export (no training data attached).
ClusterModel model_from_json(const nlohmann::json& j);

/// Printed summary: spec, cluster sizes, scaled residual quantiles.
std::string summary(const ClusterModel& m);

/// Ordered list of named fits. Failed fits are kept with their error.
struct ModelEntry {
    std::string name;
    MethodSpec spec;
    std::uint64_t seed = 0;
    std::shared_ptr<const ClusterModel> model;
    std::string error;

    bool ok() const { return model != nullptr; }
};

class ModelList {
public:
    ModelList() = default;
    explicit ModelList(std::vector<ModelEntry> entries) : entries_(std::move(entries)) {}

    void add(std::string name, std::shared_ptr<const ClusterModel> model);
    void add(ModelEntry entry) { entries_.push_back(std::move(entry)); }
    void append(const ModelList& other);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const ModelEntry& operator[](std::size_t i) const { return entries_[i]; }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    /// Successful models in order.
    std::vector<std::shared_ptr<const ClusterModel>> models() const;

private:
    std::vector<ModelEntry> entries_;
};

ModelList subset(const ModelList& list, const std::function<bool(const MethodSpec&)>& pred);
/// Drop semantics: exactly one match expected.
std::shared_ptr<const ClusterModel> subset_one(const ModelList& list,
                                               const std::function<bool(const MethodSpec&)>& pred);

}  // namespace trajclust
