#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace trajclust {

struct Observation {
    std::string id;
    double time = 0.0;
    double value = 0.0;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Names of the id, time and response columns a dataset was read with.
struct Columns {
    std::string id = "id";
    std::string time = "time";
    std::string response = "value";

    friend bool operator==(const Columns&, const Columns&) = default;
};

/// Reference partition of a dataset, keyed by trajectory id.
struct GroundTruth {
    std::map<std::string, std::string> assignments;
    std::vector<std::string> group_names;

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// Natural ("human") ordering for identifiers: digit runs compare numerically,
/// so "2" < "10" < "10#2" < "11".
bool natural_less(std::string_view a, std::string_view b);

/// Long-format longitudinal data. Trajectories are kept in canonical order
/// (natural order of ids), observations within a trajectory sorted by time.
/// Immutable after construction.
class Dataset {
public:
    Dataset() = default;

    /// Groups, sorts and validates. Throws on duplicate (id, time) pairs.
    Dataset(std::vector<Observation> observations, Columns columns = {},
            std::optional<GroundTruth> truth = std::nullopt);

    std::size_t n_trajectories() const { return ids_.size(); }
    std::size_t n_observations() const { return n_obs_; }
    bool empty() const { return ids_.empty(); }

    const std::vector<std::string>& ids() const { return ids_; }
    const Columns& columns() const { return columns_; }
    const std::optional<GroundTruth>& truth() const { return truth_; }

    std::span<const double> times(std::size_t i) const { return times_[i]; }
    std::span<const double> values(std::size_t i) const { return values_[i]; }
    std::size_t length(std::size_t i) const { return times_[i].size(); }

    /// Index of a trajectory id, or nullopt.
    std::optional<std::size_t> find(std::string_view id) const;

    /// All observations, trajectory-major in canonical order.
    std::vector<Observation> observations() const;

    /// Sorted union of all observation times.
    std::vector<double> time_grid() const;
    std::pair<double, double> time_range() const;

    double mean_value() const;

    /// Copy with a different truth partition.
    Dataset with_truth(std::optional<GroundTruth> truth) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    Columns columns_;
    std::vector<std::string> ids_;
    std::vector<std::vector<double>> times_;
    std::vector<std::vector<double>> values_;
    std::optional<GroundTruth> truth_;
    std::size_t n_obs_ = 0;
};

/// Time-aligned wide representation. Missing cells hold NaN.
struct TrajectoryMatrix {
    Eigen::MatrixXd values;
    std::vector<double> times;
    std::vector<std::string> ids;

    bool has_missing() const;
};

enum class Imputation { CopyMean, Fail };

Imputation parse_imputation(std::string_view name);

struct CsvColumns {
    std::string id;
    std::string time;
    std::string response;
    std::optional<std::string> group;
};

Dataset load_long_csv(const std::filesystem::path& path, const CsvColumns& columns);
Dataset parse_long_csv(std::string_view text, const CsvColumns& columns);

/// Long-format CSV with header `id,time,response[,group]`. Numbers are written
/// in shortest round-trip form so that write → load is a fixpoint.
std::string to_long_csv(const Dataset& ds, std::optional<std::string> group_column = std::nullopt);
void write_long_csv(const Dataset& ds, const std::filesystem::path& path,
                    std::optional<std::string> group_column = std::nullopt);

/// Matrix to long format; NaN cells are skipped.
Dataset from_matrix(const Eigen::MatrixXd& values, std::span<const double> times,
                    std::span<const std::string> ids, Columns columns = {});

/// Aligns on the sorted union of observed times and fills gaps per policy
/// (Fail throws MissingData).
TrajectoryMatrix to_aligned_matrix(const Dataset& ds, Imputation impute);
/// Aligns on an explicit grid; an observation time off the grid throws Alignment.
TrajectoryMatrix to_aligned_matrix(const Dataset& ds, Imputation impute, const std::vector<double>& grid);

/// Fills missing cells relative to the column means. For an interior gap
/// between observed columns a < b in row i, cell j becomes
/// mean_j + d_a + (j - a) / (b - a) * (d_b - d_a) with d_x = y_ix - mean_x.
/// Leading and trailing gaps take mean_j + d of the nearest observed column.
TrajectoryMatrix impute_copy_mean(const TrajectoryMatrix& m);

/// Synthetic therapy-adherence data: three linear trend groups with random
/// intercepts and observation noise, clipped to [0, 9.5].
struct PapSimulationConfig {
    double adherent_share = 0.538;
    double nonadherent_share = 0.300;  // improvers take the remainder
    double adherent_intercept = 6.8;
    double adherent_slope = -0.05;
    double nonadherent_intercept = 2.2;
    double nonadherent_slope = -0.10;
    double improver_intercept = 2.0;
    double improver_slope = 0.30;
    double intercept_sd = 0.6;
    double adherent_intercept_sd = 0.25;
    double noise_sd = 0.9;
    double lower = 0.0;
    double upper = 9.5;
};

struct SimulatedData {
    Dataset data;
    GroundTruth truth;
};

SimulatedData simulate_pap(std::size_t n, std::size_t weeks, std::uint64_t seed,
                           const PapSimulationConfig& config = {});

/// Sampling recipe for a bootstrap dataset: the source and the drawn ids
/// (with multiplicity, in draw order).
struct BootRecipe {
    std::shared_ptr<const Dataset> source;
    std::uint64_t sample_seed = 0;
    std::vector<std::string> drawn_ids;
};

/// Builds the dataset for a list of drawn ids. The k-th repeat (k >= 2) of an
/// id is relabeled "id#k".
Dataset resample(const Dataset& source, std::span<const std::string> drawn_ids);

nlohmann::json to_json(const Dataset& ds);

}  // namespace trajclust
