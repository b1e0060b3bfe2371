#pragma once

#include <any>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trajclust/dataset.hpp"
#include "trajclust/model.hpp"
#include "trajclust/rng.hpp"
#include "trajclust/spec.hpp"

namespace trajclust {

/// Mutable state threaded through the six estimation steps of one fit.
struct FitContext {
    std::shared_ptr<const Dataset> data;
    MethodSpec spec;
    Rng rng;
    int workers = 1;
    std::optional<TrajectoryMatrix> matrix;
    std::any state;
};

/// A clustering method. Only fit() is mandatory; the remaining steps default
/// to no-ops (validate() checks argument names and nClusters).
class Method {
public:
    virtual ~Method() = default;

    virtual std::string name() const = 0;
    virtual std::string label() const { return name(); }
    /// Method-specific arguments with defaults (excluding id/time/response).
    virtual ArgMap defaults() const = 0;

    virtual void prepare_data(FitContext&) const {}
    /// May rewrite arguments; must not change the method name.
    virtual MethodSpec compose(const MethodSpec& spec) const { return spec; }
    virtual void validate(const FitContext& ctx) const;
    virtual void pre_fit(FitContext&) const {}
    virtual FitResult fit(FitContext& ctx) const = 0;
    virtual void post_fit(FitContext&, FitResult&) const {}
};

void register_method(std::shared_ptr<const Method> method);
std::shared_ptr<const Method> find_method(std::string_view name);
std::vector<std::string> method_names();

struct EstimateOptions {
    /// Worker threads for internal parallel loops (distance matrices, EM starts).
    int workers = 1;
    /// Called with each step name: prepare, compose, validate, pre_fit, fit, post_fit.
    std::function<void(std::string_view)> trace;
};

/// Runs prepare, compose and validate without fitting; returns the bound spec.
MethodSpec check_spec(const MethodSpec& spec, std::shared_ptr<const Dataset> data);

/// Runs the estimation pipeline. Deterministic in (spec, data, seed).
ClusterModel estimate(const MethodSpec& spec, std::shared_ptr<const Dataset> data, std::uint64_t seed,
                      const EstimateOptions& options = {});
ClusterModel estimate(const MethodSpec& spec, const Dataset& data, std::uint64_t seed,
                      const EstimateOptions& options = {});

}  // namespace trajclust
