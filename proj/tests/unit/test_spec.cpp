#include <doctest.h>

#include <cstdlib>

#include "trajclust/errors.hpp"
#include "trajclust/method.hpp"
#include "trajclust/spec.hpp"

using namespace trajclust;

TEST_CASE("spec_new fills method defaults") {
    auto s = spec_new("kml");
    CHECK(s.get_int("nstart") == 20);
    CHECK(s.get_string("imputation") == "copyMean");
    auto g = spec_new("gmm", {{"nClusters", std::int64_t{4}}});
    CHECK(g.n_clusters() == 4);
    CHECK(g.get_bool("random_intercept"));
}

TEST_CASE("unknown method and bad nClusters") {
    CHECK_THROWS_AS(spec_new("nope"), Error);
    try {
        spec_new("kml", {{"nClusters", std::int64_t{0}}});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Validation);
    }
}

TEST_CASE("spec_update overrides without touching the original") {
    auto a = spec_new("kml", {{"nClusters", std::int64_t{2}}});
    auto b = spec_update(a, {{"nClusters", std::int64_t{5}}});
    CHECK(a.n_clusters() == 2);
    CHECK(b.n_clusters() == 5);
    CHECK_FALSE(a == b);
}

TEST_CASE("spec_permute yields one spec per value") {
    auto base = spec_new("lmkm");
    auto specs = spec_permute(base, "nClusters", {std::int64_t{1}, std::int64_t{2}, std::int64_t{3}});
    REQUIRE(specs.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(specs[i].n_clusters() == i + 1);
}

TEST_CASE("typed getters reject the wrong type") {
    auto s = spec_new("kml");
    CHECK_THROWS_AS(s.get_string("nstart"), Error);
    CHECK_THROWS_AS(s.get_int("missing"), Error);
}

TEST_CASE("parse_arg recognizes value kinds") {
    CHECK(std::get<bool>(parse_arg("true")));
    CHECK(std::get<std::int64_t>(parse_arg("12")) == 12);
    CHECK(std::get<double>(parse_arg("1.5")) == 1.5);
    CHECK(std::get<std::string>(parse_arg("dtw")) == "dtw");
    CHECK(std::get<std::vector<double>>(parse_arg("1,2.5")) == std::vector<double>{1, 2.5});
    CHECK(std::get<std::vector<double>>(parse_arg("[3]")) == std::vector<double>{3});
}

TEST_CASE("spec JSON round trip") {
    auto s = spec_new("feature", {{"thresholds", std::vector<double>{1, 2}}, {"clusterer", std::string("threshold")}});
    auto back = spec_from_json(to_json(s));
    CHECK(back == s);
    CHECK(to_json(back).dump() == to_json(s).dump());
}

TEST_CASE("describe lists every argument") {
    auto s = spec_new("kml", {{"nClusters", std::int64_t{3}}});
    const auto text = s.describe();
    CHECK(text.find("nClusters") != std::string::npos);
    CHECK(text.find("nstart") != std::string::npos);
}

TEST_CASE("registry lists the built-in methods") {
    const auto names = method_names();
    for (const char* m : {"kml", "lmkm", "gbtm", "gmm", "kmedoids", "stratify", "random", "feature"}) {
        CHECK(std::find(names.begin(), names.end(), m) != names.end());
    }
}
