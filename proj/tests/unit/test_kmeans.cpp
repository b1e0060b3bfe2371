#include <doctest.h>

#include "oracles.hpp"
#include "trajclust/errors.hpp"
#include "trajclust/kmeans.hpp"
#include "trajclust/metrics.hpp"

using namespace trajclust;

namespace {

Eigen::MatrixXd blobs(Rng& rng, int per, const std::vector<double>& centers, std::vector<int>& labels) {
    Eigen::MatrixXd x(per * static_cast<int>(centers.size()), 2);
    labels.clear();
    int r = 0;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (int i = 0; i < per; ++i, ++r) {
            x(r, 0) = centers[c] + rng.normal(0, 0.3);
            x(r, 1) = -centers[c] + rng.normal(0, 0.3);
            labels.push_back(static_cast<int>(c));
        }
    }
    return x;
}

}  // namespace

TEST_CASE("separated blobs are recovered") {
    Rng rng(1);
    std::vector<int> labels;
    auto x = blobs(rng, 20, {0, 10, 20}, labels);
    Rng krng(2);
    auto r = kmeans(x, 3, 5, 100, krng);
    CHECK(adjusted_rand(r.assignments, labels) == 1.0);
    CHECK(r.converged);
}

TEST_CASE("within-SS trace never increases") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        Eigen::MatrixXd x(60, 3);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = rng.normal();
        }
        auto r = kmeans(x, 4, 3, 100, rng);
        for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1] + 1e-12);
        CHECK(r.within_ss == doctest::Approx(within_ss(x, r.centers, r.assignments)));
    }
}

TEST_CASE("final assignment is nearest-center") {
    Rng rng(4);
    Eigen::MatrixXd x(40, 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) << rng.normal(), rng.normal();
    auto r = kmeans(x, 3, 5, 200, rng);
    REQUIRE(r.converged);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double own = (x.row(i) - r.centers.row(r.assignments[i])).squaredNorm();
        for (Eigen::Index k = 0; k < 3; ++k) CHECK(own <= (x.row(i) - r.centers.row(k)).squaredNorm() + 1e-12);
    }
}

TEST_CASE("more clusters than rows is infeasible") {
    Eigen::MatrixXd x(2, 1);
    x << 0, 1;
    Rng rng(1);
    CHECK_THROWS_AS(kmeans(x, 3, 1, 10, rng), Error);
}

TEST_CASE("K equal to N puts every row alone") {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 5, 9;
    Rng rng(1);
    auto r = kmeans(x, 4, 1, 10, rng);
    CHECK(r.within_ss == 0.0);
}

TEST_CASE("kmeans_from starting at the optimum stays put") {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 10, 11;
    Eigen::MatrixXd c(2, 1);
    c << 0.5, 10.5;
    auto r = kmeans_from(x, c, 10);
    CHECK(r.assignments == std::vector<int>{0, 0, 1, 1});
    CHECK(r.within_ss == doctest::Approx(1.0));
}

TEST_CASE("a start with an empty cluster is reseeded") {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 10, 11;
    Eigen::MatrixXd c(2, 1);
    c << 5, 100;
    auto r = kmeans_from(x, c, 50);
    std::set<int> used(r.assignments.begin(), r.assignments.end());
    CHECK(used.size() == 2);
}
