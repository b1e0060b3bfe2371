#include "trajclust/model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "trajclust/errors.hpp"
#include "trajclust/harness.hpp"
#include "trajclust/rng.hpp"

namespace trajclust {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double interpolate(const PiecewiseLinear& c, double t) {
    if (c.times.empty()) return kNaN;
    if (t <= c.times.front()) return c.values.front();
    if (t >= c.times.back()) return c.values.back();
    auto it = std::upper_bound(c.times.begin(), c.times.end(), t);
    const auto hi = static_cast<std::size_t>(it - c.times.begin());
    const auto lo = hi - 1;
    const double t0 = c.times[lo];
    const double t1 = c.times[hi];
    if (t == t0) return c.values[lo];
    const double w = (t - t0) / (t1 - t0);
    return c.values[lo] + w * (c.values[hi] - c.values[lo]);
}

double horner(const Polynomial& p, double t) {
    double y = 0.0;
    for (auto it = p.coefficients.rbegin(); it != p.coefficients.rend(); ++it) y = y * t + *it;
    return y;
}

std::string default_name(std::size_t k) {
    std::string name;
    std::size_t x = k;
    do {
        name.insert(name.begin(), static_cast<char>('A' + x % 26));
        x = x / 26;
    } while (x-- > 0);
    return name;
}

double quantile7(std::vector<double> sorted, double p) {
    if (sorted.empty()) return kNaN;
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<std::string> default_cluster_names(std::size_t k) {
    std::vector<std::string> names;
    names.reserve(k);
    for (std::size_t i = 0; i < k; ++i) names.push_back(default_name(i));
    return names;
}

// ------------------------------------------------------------------ curves

double ClusterCurve::operator()(double t) const {
    return std::visit(
        [t](const auto& c) -> double {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, PiecewiseLinear>) {
                return interpolate(c, t);
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                return horner(c, t);
            } else {
                return c.fn ? c.fn(t) : kNaN;
            }
        },
        repr_);
}

nlohmann::json ClusterCurve::to_json() const {
    return std::visit(
        [](const auto& c) -> nlohmann::json {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, PiecewiseLinear>) {
                return {{"type", "piecewise_linear"}, {"times", c.times}, {"values", c.values}};
            } else if constexpr (std::is_same_v<T, Polynomial>) {
                return {{"type", "polynomial"}, {"coefficients", c.coefficients}};
            } else {
                return {{"type", "custom"}};
            }
        },
        repr_);
}

ClusterCurve ClusterCurve::from_json(const nlohmann::json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "piecewise_linear") {
        PiecewiseLinear c;
        for (const auto& v : j.at("times")) c.times.push_back(v.is_null() ? kNaN : v.get<double>());
        for (const auto& v : j.at("values")) c.values.push_back(v.is_null() ? kNaN : v.get<double>());
        return ClusterCurve(std::move(c));
    }
    if (type == "polynomial") return ClusterCurve(Polynomial{j.at("coefficients").get<std::vector<double>>()});
    throw Error(ErrorKind::Parse, "curve type '" + type + "' cannot be restored");
}

// ------------------------------------------------------------------- model

ClusterModel::ClusterModel(Parts parts) : p_(std::move(parts)) {
    const auto n = p_.postprob.rows();
    const auto k = p_.postprob.cols();
    if (k < 1) throw Error(ErrorKind::Contract, "model needs at least one cluster");
    if (static_cast<std::size_t>(k) != p_.cluster_names.size() || static_cast<std::size_t>(k) != p_.curves.size()) {
        throw Error(ErrorKind::Contract, "cluster count mismatch between postprob, names and curves");
    }
    if (static_cast<std::size_t>(n) != p_.ids.size()) {
        throw Error(ErrorKind::Contract, "postprob has " + std::to_string(n) + " rows for " +
                                             std::to_string(p_.ids.size()) + " trajectories");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        double total = 0.0;
        for (Eigen::Index c = 0; c < k; ++c) {
            const double v = p_.postprob(i, c);
            if (!(v >= 0.0 && v <= 1.0)) {
                throw Error(ErrorKind::Contract, "postprob entry outside [0, 1] for '" + p_.ids[i] + "'");
            }
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw Error(ErrorKind::Contract, "postprob row for '" + p_.ids[i] + "' does not sum to 1");
        }
    }
}

Eigen::VectorXd ClusterModel::proportions() const {
    if (p_.postprob.rows() == 0) return Eigen::VectorXd::Zero(p_.postprob.cols());
    return p_.postprob.colwise().sum().transpose() / static_cast<double>(p_.postprob.rows());
}

int ClusterModel::empty_clusters() const {
    auto a = trajectory_assignments(*this);
    std::vector<int> count(static_cast<std::size_t>(n_clusters()), 0);
    for (int c : a) ++count[static_cast<std::size_t>(c)];
    return static_cast<int>(std::count(count.begin(), count.end(), 0));
}

std::shared_ptr<const Dataset> ClusterModel::training_data() const {
    if (p_.data) return p_.data;
    if (p_.recipe && p_.recipe->source) {
        return std::make_shared<const Dataset>(resample(*p_.recipe->source, p_.recipe->drawn_ids));
    }
    return nullptr;
}

ClusterModel ClusterModel::with_cluster_names(std::vector<std::string> names) const {
    if (names.size() != p_.cluster_names.size()) {
        throw Error(ErrorKind::Validation, "expected " + std::to_string(p_.cluster_names.size()) + " cluster names");
    }
    std::set<std::string> unique(names.begin(), names.end());
    if (unique.size() != names.size()) throw Error(ErrorKind::Validation, "cluster names must be unique");
    Parts p = p_;
    p.cluster_names = std::move(names);
    return ClusterModel(std::move(p));
}

ClusterModel ClusterModel::with_tag(std::string tag) const {
    Parts p = p_;
    p.tag = std::move(tag);
    return ClusterModel(std::move(p));
}

ClusterModel ClusterModel::with_recipe(BootRecipe recipe) const {
    Parts p = p_;
    p.recipe = std::move(recipe);
    p.data.reset();
    return ClusterModel(std::move(p));
}

ClusterModel ClusterModel::permuted(std::span<const int> order) const {
    const auto k = static_cast<std::size_t>(n_clusters());
    if (order.size() != k) throw Error(ErrorKind::Validation, "permutation length mismatch");
    Parts p = p_;
    for (std::size_t c = 0; c < k; ++c) {
        const auto src = static_cast<std::size_t>(order[c]);
        p.postprob.col(static_cast<Eigen::Index>(c)) = p_.postprob.col(static_cast<Eigen::Index>(src));
        p.cluster_names[c] = p_.cluster_names[src];
        p.curves[c] = p_.curves[src];
    }
    return ClusterModel(std::move(p));
}

// ------------------------------------------------------------- assignments

std::vector<int> assign_rows(const Eigen::MatrixXd& postprob, AssignmentStrategy strategy, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "tie-break", 0));
    const auto n = postprob.rows();
    const auto k = postprob.cols();
    std::vector<int> out(static_cast<std::size_t>(n), 0);
    std::vector<int> ties;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (strategy == AssignmentStrategy::Modal) {
            const double best = postprob.row(i).maxCoeff();
            ties.clear();
            for (Eigen::Index c = 0; c < k; ++c) {
                if (postprob(i, c) == best) ties.push_back(static_cast<int>(c));
            }
            out[static_cast<std::size_t>(i)] = ties.size() == 1 ? ties.front() : ties[rng.index(ties.size())];
        } else {
            const double total = postprob.row(i).sum();
            const double u = rng.uniform() * total;
            double acc = 0.0;
            int pick = static_cast<int>(k) - 1;
            for (Eigen::Index c = 0; c < k; ++c) {
                acc += postprob(i, c);
                if (u < acc) {
                    pick = static_cast<int>(c);
                    break;
                }
            }
            // never land on a zero-probability trailing cluster through rounding
            while (pick > 0 && postprob(i, pick) == 0.0) --pick;
            out[static_cast<std::size_t>(i)] = pick;
        }
    }
    return out;
}

std::vector<int> trajectory_assignments(const ClusterModel& m, AssignmentStrategy strategy, std::uint64_t seed) {
    return assign_rows(m.postprob(), strategy, seed);
}

Eigen::MatrixXd cluster_trajectories(const ClusterModel& m, std::span<const double> times) {
    Eigen::MatrixXd out(m.n_clusters(), static_cast<Eigen::Index>(times.size()));
    for (int k = 0; k < m.n_clusters(); ++k) {
        for (std::size_t j = 0; j < times.size(); ++j) out(k, static_cast<Eigen::Index>(j)) = m.curves()[k](times[j]);
    }
    return out;
}

std::vector<double> predict_for_cluster(const ClusterModel& m, const Dataset& data, int k) {
    if (k < 0 || k >= m.n_clusters()) {
        throw Error(ErrorKind::Range, "cluster index " + std::to_string(k) + " outside [0, " +
                                          std::to_string(m.n_clusters()) + ")");
    }
    std::vector<double> out;
    out.reserve(data.n_observations());
    const auto& curve = m.curves()[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < data.n_trajectories(); ++i) {
        for (double t : data.times(i)) out.push_back(curve(t));
    }
    return out;
}

namespace {

std::shared_ptr<const Dataset> require_data(const ClusterModel& m) {
    auto data = m.training_data();
    if (!data) throw Error(ErrorKind::NotFound, "model has no training data attached");
    return data;
}

}  // namespace

std::vector<double> fitted(const ClusterModel& m) {
    auto data = require_data(m);
    const auto assign = trajectory_assignments(m, AssignmentStrategy::Modal, m.seed());
    std::vector<double> out;
    out.reserve(data->n_observations());
    for (std::size_t i = 0; i < data->n_trajectories(); ++i) {
        const auto& curve = m.curves()[static_cast<std::size_t>(assign[i])];
        for (double t : data->times(i)) out.push_back(curve(t));
    }
    return out;
}

std::vector<double> residuals(const ClusterModel& m) {
    auto data = require_data(m);
    auto fit = fitted(m);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < data->n_trajectories(); ++i) {
        for (double y : data->values(i)) {
            fit[idx] = y - fit[idx];
            ++idx;
        }
    }
    return fit;
}

// --------------------------------------------------------------- partitions

Center parse_center(std::string_view name) {
    if (name == "mean") return Center::Mean;
    if (name == "median") return Center::Median;
    throw Error(ErrorKind::Validation, "unknown center function '" + std::string(name) + "'");
}

std::vector<ClusterCurve> partition_curves(const Dataset& ds, std::span<const int> labels, int k, Center center) {
    if (labels.size() != ds.n_trajectories()) throw Error(ErrorKind::Contract, "one label per trajectory expected");
    const auto grid = ds.time_grid();
    // bucket[c][j] = values of members of cluster c at grid time j
    std::vector<std::vector<std::vector<double>>> bucket(
        static_cast<std::size_t>(k), std::vector<std::vector<double>>(grid.size()));
    for (std::size_t i = 0; i < ds.n_trajectories(); ++i) {
        const int c = labels[i];
        if (c < 0 || c >= k) throw Error(ErrorKind::Range, "label outside [0, K)");
        auto t = ds.times(i);
        auto v = ds.values(i);
        for (std::size_t j = 0; j < t.size(); ++j) {
            auto pos = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), t[j]) - grid.begin());
            bucket[static_cast<std::size_t>(c)][pos].push_back(v[j]);
        }
    }
    std::vector<ClusterCurve> curves;
    curves.reserve(static_cast<std::size_t>(k));
    for (auto& per_time : bucket) {
        PiecewiseLinear curve;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            auto& vals = per_time[j];
            if (vals.empty()) continue;
            double c = 0.0;
            if (center == Center::Mean) {
                c = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
            } else {
                std::sort(vals.begin(), vals.end());
                const std::size_t h = vals.size() / 2;
                c = vals.size() % 2 == 1 ? vals[h] : 0.5 * (vals[h - 1] + vals[h]);
            }
            curve.times.push_back(grid[j]);
            curve.values.push_back(c);
        }
        curves.emplace_back(std::move(curve));
    }
    return curves;
}

ClusterModel partition_model(std::shared_ptr<const Dataset> ds, const std::map<std::string, std::string>& assignments,
                             Center center) {
    if (!ds) throw Error(ErrorKind::Contract, "partition_model needs a dataset");
    std::vector<std::string> names;
    for (const auto& id : ds->ids()) {
        auto it = assignments.find(id);
        if (it == assignments.end()) {
            throw Error(ErrorKind::PartialAssignment, "trajectory '" + id + "' has no assignment");
        }
        names.push_back(it->second);
    }
    std::vector<std::string> levels = names;
    std::sort(levels.begin(), levels.end(), [](const auto& a, const auto& b) { return natural_less(a, b); });
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    std::vector<int> labels;
    labels.reserve(names.size());
    for (const auto& n : names) {
        labels.push_back(static_cast<int>(std::lower_bound(levels.begin(), levels.end(), n,
                                                           [](const auto& a, const auto& b) { return natural_less(a, b); }) -
                                          levels.begin()));
    }
    const int k = static_cast<int>(std::max<std::size_t>(levels.size(), 1));
    if (levels.empty()) levels.push_back("A");

    ClusterModel::Parts p{.spec = MethodSpec("part", {}, "partition")};
    p.postprob = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), k);
    for (std::size_t i = 0; i < labels.size(); ++i) p.postprob(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    p.curves = partition_curves(*ds, labels, k, center);
    p.cluster_names = std::move(levels);
    p.ids = ds->ids();
    p.time_range = ds->time_range();
    p.time_grid = ds->time_grid();
    p.data = std::move(ds);
    return ClusterModel(std::move(p));
}

ClusterModel truth_model(std::shared_ptr<const Dataset> ds, Center center) {
    if (!ds || !ds->truth()) throw Error(ErrorKind::NotFound, "dataset has no ground truth");
    return partition_model(ds, ds->truth()->assignments, center);
}

// --------------------------------------------------------------------- JSON

nlohmann::json recipe_json(const BootRecipe& recipe) {
    return {{"sample_seed", recipe.sample_seed}, {"drawn_ids", recipe.drawn_ids}};
}

nlohmann::json to_json(const ClusterModel& m, bool include_timing) {
    nlohmann::json j = to_json(m.spec());
    j["seed"] = m.seed();
    j["converged"] = m.converged();
    j["estimation_seconds"] = include_timing ? nlohmann::json(m.estimation_seconds()) : nlohmann::json(nullptr);
    j["cluster_names"] = m.cluster_names();
    const Eigen::VectorXd props = m.proportions();
    j["proportions"] = std::vector<double>(props.data(), props.data() + props.size());
    auto& pp = j["postprob"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.postprob().rows(); ++i) {
        std::vector<double> row(static_cast<std::size_t>(m.postprob().cols()));
        for (Eigen::Index c = 0; c < m.postprob().cols(); ++c) row[static_cast<std::size_t>(c)] = m.postprob()(i, c);
        pp.push_back(std::move(row));
    }
    const auto samples = cluster_trajectories(m, m.time_grid());
    nlohmann::json values = nlohmann::json::array();
    for (Eigen::Index k = 0; k < samples.rows(); ++k) {
        std::vector<double> row(static_cast<std::size_t>(samples.cols()));
        for (Eigen::Index t = 0; t < samples.cols(); ++t) row[static_cast<std::size_t>(t)] = samples(k, t);
        values.push_back(std::move(row));
    }
    j["predictor_samples"] = {{"times", m.time_grid()}, {"values", values}};
    if (m.log_likelihood()) j["log_likelihood"] = *m.log_likelihood();
    if (m.n_params()) j["n_params"] = *m.n_params();
    j["ids"] = m.ids();
    j["time_range"] = {m.time_range().first, m.time_range().second};
    auto& curves = j["curves"] = nlohmann::json::array();
    for (const auto& c : m.curves()) curves.push_back(c.to_json());
    j["diagnostics"] = m.diagnostics();
    j["details"] = m.details();
    j["tag"] = m.tag();
    if (m.recipe()) j["recipe"] = recipe_json(*m.recipe());
    return j;
}

std::string to_json_string(const ClusterModel& m, bool include_timing) {
    return to_json(m, include_timing).dump(2) + "\n";
}

ClusterModel model_from_json(const nlohmann::json& j) {
    try {
        ClusterModel::Parts p{.spec = spec_from_json(j)};
        p.seed = j.at("seed").get<std::uint64_t>();
        p.converged = j.at("converged").get<bool>();
        if (!j.at("estimation_seconds").is_null()) p.estimation_seconds = j.at("estimation_seconds").get<double>();
        p.cluster_names = j.at("cluster_names").get<std::vector<std::string>>();
        const auto& pp = j.at("postprob");
        const auto k = static_cast<Eigen::Index>(p.cluster_names.size());
        p.postprob.resize(static_cast<Eigen::Index>(pp.size()), k);
        for (std::size_t i = 0; i < pp.size(); ++i) {
            for (Eigen::Index c = 0; c < k; ++c) p.postprob(static_cast<Eigen::Index>(i), c) = pp[i].at(c).get<double>();
        }
        const auto& samples = j.at("predictor_samples");
        p.time_grid = samples.at("times").get<std::vector<double>>();
        const auto& curves = j.at("curves");
        for (std::size_t c = 0; c < curves.size(); ++c) {
            if (curves[c].at("type") == "custom") {
                PiecewiseLinear fallback{p.time_grid, {}};
                for (const auto& v : samples.at("values").at(c)) fallback.values.push_back(v.is_null() ? kNaN : v.get<double>());
                p.curves.emplace_back(std::move(fallback));
            } else {
                p.curves.push_back(ClusterCurve::from_json(curves[c]));
            }
        }
        if (j.contains("log_likelihood")) p.log_likelihood = j["log_likelihood"].get<double>();
        if (j.contains("n_params")) p.n_params = j["n_params"].get<int>();
        p.ids = j.at("ids").get<std::vector<std::string>>();
        p.time_range = {j.at("time_range").at(0).get<double>(), j.at("time_range").at(1).get<double>()};
        if (j.contains("diagnostics")) p.diagnostics = j["diagnostics"].get<std::vector<std::string>>();
        if (j.contains("details")) p.details = j["details"];
        if (j.contains("tag")) p.tag = j["tag"].get<std::string>();
        return ClusterModel(std::move(p));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, std::string("malformed model JSON: ") + e.what());
    }
}

// ------------------------------------------------------------------ summary

std::string summary(const ClusterModel& m) {
    std::ostringstream out;
    out << "Longitudinal cluster model using " << m.method() << "\n";
    out << m.spec().describe() << "\n";
    const auto assign = trajectory_assignments(m, AssignmentStrategy::Modal, m.seed());
    std::vector<int> sizes(static_cast<std::size_t>(m.n_clusters()), 0);
    for (int c : assign) ++sizes[static_cast<std::size_t>(c)];
    const double n = static_cast<double>(std::max<std::size_t>(assign.size(), 1));
    out << "Cluster sizes (K=" << m.n_clusters() << "):\n";
    std::vector<std::string> cells;
    std::size_t width = 0;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        std::ostringstream cell;
        cell << sizes[c] << " (" << std::fixed << std::setprecision(1) << 100.0 * sizes[c] / n << "%)";
        cells.push_back(cell.str());
        width = std::max({width, cells.back().size(), m.cluster_names()[c].size()});
    }
    for (const auto& name : m.cluster_names()) out << std::setw(static_cast<int>(width) + 1) << name;
    out << "\n";
    for (const auto& cell : cells) out << std::setw(static_cast<int>(width) + 1) << cell;
    out << "\n\n";
    if (m.converged()) {
        out << "Converged: yes\n";
    } else {
        out << "Converged: no\n";
    }
    for (const auto& d : m.diagnostics()) out << "Note: " << d << "\n";

    auto data = m.training_data();
    if (data) {
        std::string id_name = m.spec().get_string("id");
        if (id_name.empty()) id_name = data->columns().id;
        out << "\nNumber of obs: " << data->n_observations() << ", strata (" << id_name
            << "): " << data->n_trajectories() << "\n";
        auto res = residuals(m);
        if (res.size() > 1) {
            const double mean = std::accumulate(res.begin(), res.end(), 0.0) / static_cast<double>(res.size());
            double ss = 0.0;
            for (double r : res) ss += (r - mean) * (r - mean);
            const double sd = std::sqrt(ss / static_cast<double>(res.size() - 1));
            std::vector<double> scaled;
            scaled.reserve(res.size());
            for (double r : res) scaled.push_back(sd > 0.0 ? (r - mean) / sd : 0.0);
            std::sort(scaled.begin(), scaled.end());
            const double values[6] = {scaled.front(), quantile7(scaled, 0.25), quantile7(scaled, 0.5), 0.0,
                                      quantile7(scaled, 0.75), scaled.back()};
            out << "\nScaled residuals:\n";
            for (const char* h : {"Min.", "1st Qu.", "Median", "Mean", "3rd Qu.", "Max."}) out << std::setw(10) << h;
            out << "\n" << std::fixed << std::setprecision(5);
            for (double v : values) out << std::setw(10) << v;
            out << "\n";
        }
    }
    return out.str();
}

// -------------------------------------------------------------- model lists

void ModelList::add(std::string name, std::shared_ptr<const ClusterModel> model) {
    if (!model) throw Error(ErrorKind::Contract, "null model");
    ModelEntry e{std::move(name), model->spec(), model->seed(), model, {}};
    entries_.push_back(std::move(e));
}

void ModelList::append(const ModelList& other) {
    entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

std::vector<std::shared_ptr<const ClusterModel>> ModelList::models() const {
    std::vector<std::shared_ptr<const ClusterModel>> out;
    for (const auto& e : entries_) {
        if (e.ok()) out.push_back(e.model);
    }
    return out;
}

ModelList subset(const ModelList& list, const std::function<bool(const MethodSpec&)>& pred) {
    std::vector<ModelEntry> out;
    for (const auto& e : list) {
        if (pred(e.spec)) out.push_back(e);
    }
    return ModelList(std::move(out));
}

std::shared_ptr<const ClusterModel> subset_one(const ModelList& list,
                                               const std::function<bool(const MethodSpec&)>& pred) {
    auto s = subset(list, pred);
    std::vector<std::shared_ptr<const ClusterModel>> ok = s.models();
    if (ok.empty()) throw Error(ErrorKind::NotFound, "no model matches the subset condition");
    if (ok.size() > 1) {
        throw Error(ErrorKind::Validation, std::to_string(ok.size()) + " models match; expected exactly one");
    }
    return ok.front();
}

}  // namespace trajclust
