#include "trajclust/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "trajclust/errors.hpp"

namespace trajclust {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

namespace {

int worker_count(const HarnessOptions& o) {
    if (!o.parallel) return 1;
    if (o.workers > 0) return o.workers;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct Task {
    MethodSpec spec;
    std::shared_ptr<const Dataset> data;
    std::uint64_t seed = 0;
    std::optional<BootRecipe> recipe;
};

ModelList run_tasks(std::vector<Task> tasks, const HarnessOptions& options) {
    std::vector<ModelEntry> entries(tasks.size(), ModelEntry{"", tasks.empty() ? MethodSpec("none", {}) : tasks[0].spec, 0, nullptr, ""});
    // fits run single-threaded inside; the pool parallelizes across fits
    parallel_for(tasks.size(), worker_count(options), [&](std::size_t i) {
        auto& t = tasks[i];
        ModelEntry e{std::to_string(i + 1), t.spec, t.seed, nullptr, ""};
        try {
            ClusterModel m = estimate(t.spec, t.data, t.seed);
            if (t.recipe) m = m.with_recipe(*t.recipe);
            e.spec = m.spec();
            e.model = std::make_shared<const ClusterModel>(std::move(m));
        } catch (const std::exception& err) {
            e.error = err.what();
        }
        entries[i] = std::move(e);
    });
    return ModelList(std::move(entries));
}

}  // namespace

ModelList run_batch(const std::vector<MethodSpec>& specs, std::shared_ptr<const Dataset> ds, std::uint64_t seed,
                    const HarnessOptions& options) {
    if (specs.empty()) throw Error(ErrorKind::Validation, "batch needs at least one method spec");
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < specs.size(); ++i) tasks.push_back({specs[i], ds, derive_seed(seed, "batch", i), {}});
    return run_tasks(std::move(tasks), options);
}

ModelList run_rep(const MethodSpec& spec, std::shared_ptr<const Dataset> ds, int reps, std::uint64_t seed,
                  const HarnessOptions& options) {
    if (reps < 1) throw Error(ErrorKind::Validation, "reps must be >= 1");
    std::vector<Task> tasks;
    for (int i = 0; i < reps; ++i) {
        tasks.push_back({spec, ds, derive_seed(seed, "rep", static_cast<std::uint64_t>(i)), {}});
    }
    return run_tasks(std::move(tasks), options);
}

BootSample boot_sample(std::shared_ptr<const Dataset> ds, std::uint64_t sample_seed) {
    if (!ds || ds->empty()) throw Error(ErrorKind::EmptyDataset, "empty dataset");
    Rng rng(sample_seed);
    BootRecipe recipe{ds, sample_seed, {}};
    const auto n = ds->n_trajectories();
    recipe.drawn_ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) recipe.drawn_ids.push_back(ds->ids()[rng.index(n)]);
    Dataset sample = resample(*ds, recipe.drawn_ids);
    return {std::move(sample), std::move(recipe)};
}

ModelList run_boot(const MethodSpec& spec, std::shared_ptr<const Dataset> ds, int samples, std::uint64_t seed,
                   const HarnessOptions& options) {
    if (samples < 1) throw Error(ErrorKind::Validation, "samples must be >= 1");
    std::vector<Task> tasks;
    for (int s = 0; s < samples; ++s) {
        auto b = boot_sample(ds, derive_seed(seed, "boot-sample", static_cast<std::uint64_t>(s)));
        tasks.push_back({spec, std::make_shared<const Dataset>(std::move(b.data)),
                         derive_seed(seed, "boot-fit", static_cast<std::uint64_t>(s)), std::move(b.recipe)});
    }
    return run_tasks(std::move(tasks), options);
}

ClusterModel refit_from_recipe(const ClusterModel& m) {
    if (!m.recipe()) throw Error(ErrorKind::NotFound, "model carries no bootstrap recipe");
    const auto& r = *m.recipe();
    auto again = boot_sample(r.source, r.sample_seed);
    if (again.recipe.drawn_ids != r.drawn_ids) {
        throw Error(ErrorKind::Contract, "bootstrap recipe does not reproduce its drawn ids");
    }
    return estimate(m.spec(), std::make_shared<const Dataset>(std::move(again.data)), m.seed()).with_recipe(r);
}

nlohmann::json manifest_json(const ModelList& list, const std::vector<std::string>& model_paths) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& e = list[i];
        nlohmann::json j{{"name", e.name},
                         {"spec", to_json(e.spec)},
                         {"seed", e.seed},
                         {"status", e.ok() ? "ok" : "failed"},
                         {"model_path", i < model_paths.size() ? model_paths[i] : std::string()}};
        if (e.ok() && e.model->recipe()) j["recipe"] = recipe_json(*e.model->recipe());
        if (!e.ok()) j["error"] = e.error;
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace trajclust
