#include "trajclust/method.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <mutex>
#include <numeric>

#include "builtin_methods.hpp"
#include "trajclust/errors.hpp"

namespace trajclust {

namespace {

struct MethodRegistry {
    std::mutex mutex;
    std::map<std::string, std::shared_ptr<const Method>, std::less<>> methods;

    MethodRegistry() {
        for (auto& m : builtin_methods()) methods[m->name()] = m;
    }
};

MethodRegistry& registry() {
    static MethodRegistry r;
    return r;
}

/// Fills unset column arguments from the dataset and rejects mismatches.
MethodSpec bind_columns(const MethodSpec& spec, const Dataset& data) {
    ArgMap args = spec.args();
    const std::pair<const char*, const std::string*> columns[] = {
        {"id", &data.columns().id}, {"time", &data.columns().time}, {"response", &data.columns().response}};
    for (const auto& [key, actual] : columns) {
        const auto& given = spec.get_string(key);
        if (given.empty()) {
            args[key] = *actual;
        } else if (given != *actual) {
            throw Error(ErrorKind::Validation, std::string(key) + " column '" + given + "' not found in data (has '" +
                                                   *actual + "')");
        }
    }
    return MethodSpec(spec.method(), std::move(args), spec.provenance());
}

}  // namespace

void Method::validate(const FitContext& ctx) const {
    const auto known = defaults();
    for (const auto& [key, value] : ctx.spec.args()) {
        if (key == "id" || key == "time" || key == "response" || key == "nClusters") continue;
        if (!known.count(key)) {
            throw Error(ErrorKind::Validation, "method '" + name() + "' has no argument '" + key + "'");
        }
    }
    if (ctx.spec.n_clusters() < 1) throw Error(ErrorKind::Validation, "nClusters must be >= 1");
}

void register_method(std::shared_ptr<const Method> method) {
    if (!method) throw Error(ErrorKind::Contract, "null method");
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    r.methods[method->name()] = std::move(method);
}

std::shared_ptr<const Method> find_method(std::string_view name) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    auto it = r.methods.find(name);
    return it == r.methods.end() ? nullptr : it->second;
}

std::vector<std::string> method_names() {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    std::vector<std::string> out;
    for (const auto& [k, v] : r.methods) out.push_back(k);
    return out;
}

namespace {

struct Prepared {
    std::shared_ptr<const Method> method;
    FitContext ctx;
};

Prepared prepare(const MethodSpec& spec, std::shared_ptr<const Dataset> data, std::uint64_t seed,
                 const EstimateOptions& options) {
    if (!data || data->empty()) throw Error(ErrorKind::EmptyDataset, "empty dataset");
    auto method = find_method(spec.method());
    if (!method) throw Error(ErrorKind::UnknownMethod, "unknown method '" + spec.method() + "'");
    auto trace = [&](std::string_view step) {
        if (options.trace) options.trace(step);
    };

    FitContext ctx{data, bind_columns(spec, *data), Rng(seed), std::max(options.workers, 1), std::nullopt, {}};

    trace("prepare");
    method->prepare_data(ctx);

    trace("compose");
    MethodSpec composed = method->compose(ctx.spec);
    if (composed.method() != spec.method()) {
        throw Error(ErrorKind::Contract, "compose() of '" + spec.method() + "' may not change the method name");
    }
    ctx.spec = bind_columns(composed, *data);

    trace("validate");
    method->validate(ctx);
    return {std::move(method), std::move(ctx)};
}

}  // namespace

MethodSpec check_spec(const MethodSpec& spec, std::shared_ptr<const Dataset> data) {
    return prepare(spec, std::move(data), 0, {}).ctx.spec;
}

ClusterModel estimate(const MethodSpec& spec, std::shared_ptr<const Dataset> data, std::uint64_t seed,
                      const EstimateOptions& options) {
    auto [method, ctx] = prepare(spec, data, seed, options);
    auto trace = [&](std::string_view step) {
        if (options.trace) options.trace(step);
    };

    trace("pre_fit");
    method->pre_fit(ctx);

    trace("fit");
    const auto start = std::chrono::steady_clock::now();
    FitResult result = method->fit(ctx);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    trace("post_fit");
    method->post_fit(ctx, result);

    const auto n = static_cast<Eigen::Index>(data->n_trajectories());
    const auto k = result.postprob.cols();
    if (result.postprob.rows() != n) {
        throw Error(ErrorKind::Contract, "fit() of '" + spec.method() + "' returned " +
                                             std::to_string(result.postprob.rows()) + " postprob rows for " +
                                             std::to_string(n) + " trajectories");
    }
    if (static_cast<std::size_t>(k) != result.curves.size()) {
        throw Error(ErrorKind::Contract, "fit() of '" + spec.method() + "' returned mismatched curve count");
    }

    ClusterModel::Parts parts{.spec = ctx.spec};
    parts.seed = seed;
    parts.ids = data->ids();
    parts.time_range = data->time_range();
    parts.time_grid = data->time_grid();
    parts.converged = result.converged;
    parts.estimation_seconds = seconds;
    parts.log_likelihood = result.log_likelihood;
    parts.n_params = result.n_params;
    parts.diagnostics = std::move(result.diagnostics);
    parts.details = std::move(result.details);
    parts.data = data;

    if (result.cluster_names) {
        if (result.cluster_names->size() != static_cast<std::size_t>(k)) {
            throw Error(ErrorKind::Contract, "fit() returned mismatched cluster names");
        }
        parts.postprob = std::move(result.postprob);
        parts.curves = std::move(result.curves);
        parts.cluster_names = std::move(*result.cluster_names);
    } else {
        // decreasing proportion, ties by fit order
        const Eigen::VectorXd mass = result.postprob.colwise().sum().transpose();
        std::vector<int> order(static_cast<std::size_t>(k));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mass(a) > mass(b); });
        parts.postprob.resize(n, k);
        for (Eigen::Index c = 0; c < k; ++c) {
            parts.postprob.col(c) = result.postprob.col(order[static_cast<std::size_t>(c)]);
            parts.curves.push_back(result.curves[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])]);
        }
        parts.cluster_names = default_cluster_names(static_cast<std::size_t>(k));
    }

    ClusterModel model(std::move(parts));
    if (int empty = model.empty_clusters(); empty > 0) {
        auto p = model.parts();
        p.diagnostics.push_back(std::to_string(empty) + " empty cluster(s)");
        return ClusterModel(std::move(p));
    }
    return model;
}

ClusterModel estimate(const MethodSpec& spec, const Dataset& data, std::uint64_t seed, const EstimateOptions& options) {
    return estimate(spec, std::make_shared<const Dataset>(data), seed, options);
}

}  // namespace trajclust
