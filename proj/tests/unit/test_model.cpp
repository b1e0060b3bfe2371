#include <doctest.h>

#include <cmath>
#include <map>

#include "trajclust/errors.hpp"
#include "trajclust/method.hpp"
#include "trajclust/model.hpp"

using namespace trajclust;

namespace {

std::shared_ptr<const Dataset> small() {
    return std::make_shared<const Dataset>(Dataset({{"a", 1, 1}, {"a", 2, 2}, {"b", 1, 1.2}, {"b", 2, 2.2},
                                                    {"c", 1, 8}, {"c", 2, 9}, {"d", 1, 8.2}, {"d", 2, 9.1}},
                                                   Columns{"id", "t", "y"}));
}

}  // namespace

TEST_CASE("piecewise curves interpolate and clamp") {
    ClusterCurve c(PiecewiseLinear{{1, 3}, {0, 4}});
    CHECK(c(2) == 2.0);
    CHECK(c(0) == 0.0);
    CHECK(c(10) == 4.0);
    CHECK(std::isnan(ClusterCurve(PiecewiseLinear{})(1.0)));
}

TEST_CASE("polynomial curves") {
    ClusterCurve c(Polynomial{{1, 2, 3}});
    CHECK(c(2) == 1 + 4 + 12);
}

TEST_CASE("curve JSON round trip") {
    ClusterCurve c(Polynomial{{0.5, -1}});
    CHECK(ClusterCurve::from_json(c.to_json())(3) == c(3));
}

TEST_CASE("partition model uses pointwise means") {
    auto ds = small();
    auto m = partition_model(ds, {{"a", "low"}, {"b", "low"}, {"c", "high"}, {"d", "high"}});
    REQUIRE(m.n_clusters() == 2);
    CHECK(m.cluster_names() == std::vector<std::string>{"high", "low"});
    CHECK(m.curves()[1](1) == doctest::Approx(1.1));
    CHECK(m.curves()[0](2) == doctest::Approx(9.05));
    CHECK_THROWS_AS(partition_model(ds, {{"a", "x"}}), Error);
}

TEST_CASE("median center") {
    auto ds = small();
    auto m = partition_model(ds, {{"a", "x"}, {"b", "x"}, {"c", "x"}, {"d", "y"}}, Center::Median);
    CHECK(m.curves()[0](1) == doctest::Approx(1.2));
}

TEST_CASE("modal assignment and tie breaking") {
    Eigen::MatrixXd p(3, 2);
    p << 0.9, 0.1, 0.2, 0.8, 0.5, 0.5;
    const auto a = assign_rows(p, AssignmentStrategy::Modal, 1);
    CHECK(a[0] == 0);
    CHECK(a[1] == 1);
    CHECK(assign_rows(p, AssignmentStrategy::Modal, 1) == a);
}

TEST_CASE("weighted random assignment follows the posterior") {
    Eigen::MatrixXd p(1, 3);
    p << 0.2, 0.5, 0.3;
    std::vector<int> counts(3, 0);
    const int n = 20000;
    for (int s = 0; s < n; ++s) ++counts[assign_rows(p, AssignmentStrategy::WeightedRandom, s)[0]];
    CHECK(counts[0] / double(n) == doctest::Approx(0.2).epsilon(0.1));
    CHECK(counts[1] / double(n) == doctest::Approx(0.5).epsilon(0.05));
    CHECK(counts[2] / double(n) == doctest::Approx(0.3).epsilon(0.08));
}

TEST_CASE("fitted plus residuals gives the data") {
    auto ds = small();
    auto m = estimate(spec_new("kml", {{"nClusters", std::int64_t{2}}}), ds, 1);
    const auto f = fitted(m);
    const auto r = residuals(m);
    const auto obs = ds->observations();
    REQUIRE(f.size() == obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) CHECK(f[i] + r[i] == doctest::Approx(obs[i].value));
    CHECK_THROWS_AS(predict_for_cluster(m, *ds, 5), Error);
}

TEST_CASE("cluster_trajectories evaluates every curve") {
    auto ds = small();
    auto m = estimate(spec_new("kml", {{"nClusters", std::int64_t{2}}}), ds, 1);
    std::vector<double> t{1, 1.5, 2};
    const auto y = cluster_trajectories(m, t);
    CHECK(y.rows() == 2);
    CHECK(y.cols() == 3);
    CHECK(y(0, 1) == doctest::Approx(m.curves()[0](1.5)));
}

TEST_CASE("model JSON round trip keeps the observable state") {
    auto ds = small();
    auto m = estimate(spec_new("lmkm", {{"nClusters", std::int64_t{2}}}), ds, 3);
    const auto text = to_json_string(m);
    auto back = model_from_json(nlohmann::json::parse(text));
    CHECK(to_json_string(back) == text);
    CHECK(back.postprob() == m.postprob());
    CHECK(nlohmann::json::parse(text)["estimation_seconds"].is_null());
    CHECK_FALSE(nlohmann::json::parse(to_json_string(m, true))["estimation_seconds"].is_null());
    CHECK_THROWS_AS(model_from_json(nlohmann::json::parse("{\"x\": 1}")), Error);
}

TEST_CASE("summary lists sizes and residual quantiles") {
    auto ds = small();
    auto m = estimate(spec_new("kml", {{"nClusters", std::int64_t{2}}}), ds, 1);
    const auto s = summary(m);
    CHECK(s.find("Cluster sizes (K=2)") != std::string::npos);
    CHECK(s.find("Scaled residuals") != std::string::npos);
    CHECK(s.find("Number of obs: 8") != std::string::npos);
}

TEST_CASE("clusters are ordered by decreasing size") {
    auto ds = std::make_shared<const Dataset>(simulate_pap(60, 6, 2).data);
    auto m = estimate(spec_new("kml", {{"nClusters", std::int64_t{3}}}), ds, 1);
    const auto p = m.proportions();
    CHECK(p(0) >= p(1));
    CHECK(p(1) >= p(2));
    CHECK(m.cluster_names() == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("model list subset") {
    auto ds = small();
    ModelList list;
    for (int k = 1; k <= 3; ++k) {
        list.add(std::to_string(k), std::make_shared<const ClusterModel>(
                                        estimate(spec_new("kml", {{"nClusters", std::int64_t{k}}}), ds, 1)));
    }
    auto two = subset(list, [](const MethodSpec& s) { return s.n_clusters() >= 2; });
    CHECK(two.size() == 2);
    CHECK(subset_one(list, [](const MethodSpec& s) { return s.n_clusters() == 3; })->n_clusters() == 3);
    CHECK_THROWS_AS(subset_one(list, [](const MethodSpec& s) { return s.n_clusters() == 9; }), Error);
    CHECK_THROWS_AS(subset_one(list, [](const MethodSpec&) { return true; }), Error);
}

TEST_CASE("permuted relabels consistently") {
    auto ds = small();
    auto m = estimate(spec_new("kml", {{"nClusters", std::int64_t{2}}}), ds, 1);
    std::vector<int> order{1, 0};
    auto p = m.permuted(order);
    CHECK(p.postprob().col(0) == m.postprob().col(1));
    CHECK(p.curves()[0](1) == m.curves()[1](1));
}
