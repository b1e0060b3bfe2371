#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "trajclust/errors.hpp"
#include "trajclust/method.hpp"
#include "trajclust/metrics.hpp"

using namespace trajclust;

namespace {

std::shared_ptr<const Dataset> pap(std::size_t n = 80, std::uint64_t seed = 1) {
    auto sim = simulate_pap(n, 8, seed);
    return std::make_shared<const Dataset>(sim.data.with_truth(sim.truth));
}

ClusterModel fit(const char* m, int k, std::shared_ptr<const Dataset> ds, std::uint64_t seed = 1) {
    return estimate(spec_new(m, {{"nClusters", std::int64_t{k}}}), ds, seed);
}

}  // namespace

TEST_CASE("partition metrics match brute force on random partitions") {
    Rng rng(31);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = 1 + rng.index(12);
        const int ka = 1 + int(rng.index(std::min<std::size_t>(n, 5)));
        const int kb = 1 + int(rng.index(std::min<std::size_t>(n, 5)));
        const auto a = oracle::random_partition(rng, n, ka);
        const auto b = oracle::random_partition(rng, n, kb);
        CHECK(std::abs(adjusted_rand(a, b) - oracle::adjusted_rand(a, b)) < 1e-10);
        CHECK(split_join(a, b) == oracle::split_join(a, b));
        CHECK(split_join_ref(a, b) == oracle::split_join_ref(a, b));
        CHECK(split_join(a, b) == split_join(b, a));
    }
}

TEST_CASE("validity indices match brute force") {
    Rng rng(32);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 2 + rng.index(11);
        const auto labels = oracle::random_partition(rng, n, 1 + int(rng.index(std::min<std::size_t>(n, 4))));
        Eigen::MatrixXd x(Eigen::Index(n), 2);
        for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) << rng.normal(), rng.normal();
        const auto d = euclidean_matrix(x);
        oracle::Dist od = [&](std::size_t i, std::size_t j) { return d(i, j); };
        const double dl = dunn_index(d, labels), dr = oracle::dunn(n, od, labels);
        CHECK(((std::isnan(dl) && std::isnan(dr)) || std::abs(dl - dr) < 1e-10));
        const double sl = silhouette_width(d, labels), sr = oracle::silhouette(n, od, labels);
        CHECK(((std::isnan(sl) && std::isnan(sr)) || std::abs(sl - sr) < 1e-10));
    }
}

TEST_CASE("ARI edge cases") {
    std::vector<int> one{0, 0, 0}, singles{0, 1, 2};
    CHECK(adjusted_rand(one, one) == 1.0);
    CHECK(adjusted_rand(singles, singles) == 1.0);
    std::vector<int> a{0, 0, 1, 1}, b{1, 1, 0, 0};
    CHECK(adjusted_rand(a, b) == 1.0);
    std::vector<int> shorter{0, 1};
    CHECK_THROWS_AS(adjusted_rand(a, shorter), Error);
}

TEST_CASE("ARI of independent random partitions averages near zero") {
    Rng rng(6);
    double s = 0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
        const auto a = oracle::random_partition(rng, 60, 3);
        const auto b = oracle::random_partition(rng, 60, 4);
        s += adjusted_rand(a, b);
    }
    CHECK(std::abs(s / reps) < 0.01);
}

TEST_CASE("one-way split-join counts moves from the first partition") {
    // first partition splits a reference cluster: no member is misplaced
    std::vector<int> fine{0, 0, 1, 1, 2, 2}, coarse{0, 0, 0, 0, 1, 1};
    CHECK(split_join_ref(fine, coarse) == 0);
    CHECK(split_join_ref(coarse, fine) == 2);
}

TEST_CASE("hard models: WMAE equals MAE and WRMSE equals RMSE") {
    auto ds = pap();
    for (const char* m : {"kml", "lmkm", "kmedoids", "random"}) {
        const auto v = internal_metric(fit(m, 3, ds), {"WMAE", "MAE", "WRMSE", "RMSE"});
        CHECK(v.at("WMAE") == v.at("MAE"));
        CHECK(v.at("WRMSE") == v.at("RMSE"));
    }
}

TEST_CASE("MAE by hand") {
    auto ds = std::make_shared<const Dataset>(Dataset({{"a", 1, 1}, {"a", 2, 3}, {"b", 1, 2}, {"b", 2, 2}}));
    auto m = fit("kml", 1, ds);
    // centroid (1.5, 2.5): |.5|+|.5|+|.5|+|.5|
    CHECK(internal_metric(m, {"MAE"}).at("MAE") == doctest::Approx(0.5));
    CHECK(internal_metric(m, {"RMSE"}).at("RMSE") == doctest::Approx(0.5));
}

TEST_CASE("NA conventions") {
    auto ds = pap();
    auto one = fit("kml", 1, ds);
    const auto v = internal_metric(one, {"Dunn", "ASW"});
    CHECK(is_na(v.at("Dunn")));
    CHECK(is_na(v.at("ASW")));
    auto json_only = model_from_json(to_json(fit("kml", 2, ds)));
    CHECK(is_na(internal_metric(json_only, {"WMAE"}).at("WMAE")));
}

TEST_CASE("WMMAE properties") {
    auto ds = pap();
    auto a = fit("kml", 3, ds);
    auto b = fit("gmm", 3, ds);
    CHECK(external_metric(a, a, "WMMAE") == 0.0);
    CHECK(external_metric(a, b, "WMMAE") >= 0.0);
    CHECK(external_metric(a, a.permuted(std::vector<int>{2, 0, 1}), "WMMAE") == doctest::Approx(0.0));
}

TEST_CASE("external metrics need matching id sets") {
    auto a = fit("kml", 2, pap(80, 1));
    auto b = fit("kml", 2, pap(60, 1));
    CHECK_THROWS_AS(external_metric(a, b, "adjustedRand"), Error);
    ModelList list;
    list.add("a", std::make_shared<const ClusterModel>(a));
    list.add("b", std::make_shared<const ClusterModel>(b));
    std::vector<std::string> warnings;
    auto pw = pairwise_external(list, "adjustedRand", &warnings);
    CHECK(is_na(pw.values(1, 0)));
    CHECK(warnings.size() == 1);
}

TEST_CASE("pairwise matrix is lower triangular over models") {
    auto ds = pap();
    ModelList list;
    for (int k = 2; k <= 5; ++k) list.add(std::to_string(k), std::make_shared<const ClusterModel>(fit("kml", k, ds)));
    auto pw = pairwise_external(list, "adjustedRand");
    CHECK(pw.n_entries() == 6);
    for (Eigen::Index i = 0; i < 4; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) {
            if (j < i) CHECK(std::isfinite(pw.values(i, j)));
            else CHECK(is_na(pw.values(i, j)));
        }
    }
}

TEST_CASE("max_by and min_by skip NA") {
    auto ds = pap();
    ModelList list;
    for (int k = 1; k <= 4; ++k) list.add(std::to_string(k), std::make_shared<const ClusterModel>(fit("kml", k, ds)));
    CHECK(max_by(list, "Dunn")->n_clusters() >= 2);
    CHECK(min_by(list, "WMAE")->n_clusters() == 4);
    CHECK_THROWS_AS(max_by(list, "nope"), Error);
}

TEST_CASE("user-defined metrics") {
    define_internal_metric("clusterCount", [](const ClusterModel& m) { return double(m.n_clusters()); });
    define_external_metric("sizeGap", [](const ClusterModel& a, const ClusterModel& b) {
        return double(a.n_clusters() - b.n_clusters());
    });
    auto ds = pap();
    auto a = fit("kml", 3, ds);
    auto b = fit("kml", 2, ds);
    CHECK(internal_metric(a, {"clusterCount"}).at("clusterCount") == 3.0);
    CHECK(external_metric(a, b, "sizeGap") == 1.0);
    const auto names = internal_metric_names();
    CHECK(std::find(names.begin(), names.end(), "clusterCount") != names.end());
    CHECK_THROWS_AS(internal_metric(a, {"undefined"}), Error);
}

TEST_CASE("model-level Dunn equals the index on the imputed matrix") {
    auto ds = pap(40, 2);
    auto m = fit("kml", 3, ds);
    const auto labels = trajectory_assignments(m);
    const auto x = to_aligned_matrix(*ds, Imputation::CopyMean).values;
    oracle::Dist od = [&](std::size_t i, std::size_t j) { return (x.row(Eigen::Index(i)) - x.row(Eigen::Index(j))).norm(); };
    CHECK(internal_metric(m, {"Dunn"}).at("Dunn") == doctest::Approx(oracle::dunn(40, od, labels)).epsilon(1e-12));
    CHECK(internal_metric(m, {"ASW"}).at("ASW") == doctest::Approx(oracle::silhouette(40, od, labels)).epsilon(1e-12));
}
