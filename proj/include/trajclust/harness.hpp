#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajclust/dataset.hpp"
#include "trajclust/method.hpp"
#include "trajclust/model.hpp"
#include "trajclust/spec.hpp"

namespace trajclust {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Exceptions from
/// fn propagate (the first one, by index).
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

struct HarnessOptions {
    bool parallel = false;
    /// Worker count when parallel; 0 = hardware concurrency.
    int workers = 0;
};

/// Fits every spec; child seed i = derive_seed(seed, "batch", i). Entries are
/// named "1", "2", ... in spec order; a failing fit becomes an entry carrying
/// its error.
ModelList run_batch(const std::vector<MethodSpec>& specs, std::shared_ptr<const Dataset> ds,
                    std::uint64_t seed, const HarnessOptions& options = {});

/// Repeated fits of one spec; child seed i = derive_seed(seed, "rep", i).
ModelList run_rep(const MethodSpec& spec, std::shared_ptr<const Dataset> ds, int reps,
                  std::uint64_t seed, const HarnessOptions& options = {});

struct BootSample {
    Dataset data;
    BootRecipe recipe;
};

/// N trajectories drawn uniformly with replacement.
BootSample boot_sample(std::shared_ptr<const Dataset> ds, std::uint64_t sample_seed);

/// Per sample s: boot_sample with derive_seed(seed, "boot-sample", s), then
/// estimate with derive_seed(seed, "boot-fit", s). Models keep the recipe
/// instead of the sample.
ModelList run_boot(const MethodSpec& spec, std::shared_ptr<const Dataset> ds, int samples,
                   std::uint64_t seed, const HarnessOptions& options = {});

/// Re-estimates a bootstrap model from its recipe.
ClusterModel refit_from_recipe(const ClusterModel& m);

nlohmann::json recipe_json(const BootRecipe& recipe);

/// Manifest: [{name, spec, seed, status, model_path, recipe?, error?}].
/// `model_paths` are parallel to the list (empty string for failed fits).
nlohmann::json manifest_json(const ModelList& list, const std::vector<std::string>& model_paths);

}  // namespace trajclust
