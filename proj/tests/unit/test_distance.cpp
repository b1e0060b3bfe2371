#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "trajclust/distance.hpp"
#include "trajclust/errors.hpp"

using namespace trajclust;

TEST_CASE("euclidean distance") {
    std::vector<double> a{0, 0}, b{3, 4};
    CHECK(euclidean_distance(a, b) == 5.0);
    std::vector<double> c{1};
    CHECK_THROWS_AS(euclidean_distance(a, c), Error);
}

TEST_CASE("dtw of identical and shifted series") {
    std::vector<double> a{1, 2, 3, 2, 1};
    CHECK(dtw_distance(a, a) == 0.0);
    std::vector<double> b{1, 1, 2, 3, 2, 1};
    CHECK(dtw_distance(a, b) == 0.0);
    CHECK(dtw_distance(a, b) == dtw_distance(b, a));
}

TEST_CASE("dtw matches exhaustive path enumeration") {
    Rng rng(99);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> a(1 + rng.index(6)), b(1 + rng.index(6));
        for (auto& v : a) v = rng.normal();
        for (auto& v : b) v = rng.normal();
        CHECK(std::abs(dtw_distance(a, b) - oracle::dtw(a, b)) < 1e-12);
    }
}

TEST_CASE("windowed dtw is never below the unconstrained one") {
    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> a(8), b(8);
        for (auto& v : a) v = rng.normal();
        for (auto& v : b) v = rng.normal();
        const double free = dtw_distance(a, b);
        CHECK(dtw_distance(a, b, 1) >= free - 1e-12);
        CHECK(dtw_distance(a, b, 0) >= dtw_distance(a, b, 1) - 1e-12);
        CHECK(dtw_distance(a, b, 7) == doctest::Approx(free));
    }
}

TEST_CASE("window 0 on equal lengths is the L1 distance") {
    std::vector<double> a{1, 5, 2}, b{2, 3, 2};
    CHECK(dtw_distance(a, b, 0) == 3.0);
}

TEST_CASE("distance matrices are symmetric with zero diagonal") {
    Rng rng(1);
    Eigen::MatrixXd x(7, 3);
    for (Eigen::Index i = 0; i < 7; ++i) x.row(i) << rng.normal(), rng.normal(), rng.normal();
    auto serial = euclidean_matrix(x, 1);
    auto threaded = euclidean_matrix(x, 4);
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(serial(i, i) == 0.0);
        for (std::size_t j = 0; j < 7; ++j) {
            CHECK(serial(i, j) == serial(j, i));
            CHECK(serial(i, j) == threaded(i, j));
        }
    }
}

TEST_CASE("pam reaches a swap-stable optimum") {
    Rng rng(8);
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::MatrixXd x(15, 2);
        for (Eigen::Index i = 0; i < 15; ++i) x.row(i) << rng.normal(), rng.normal();
        auto d = euclidean_matrix(x);
        auto r = pam(d, 3);
        CHECK(r.total_cost == doctest::Approx(pam_cost(d, r.medoids)));
        auto medoids = r.medoids;
        for (std::size_t m = 0; m < 3; ++m) {
            CHECK(r.assignments[r.medoids[m]] == static_cast<int>(m));
            for (std::size_t o = 0; o < 15; ++o) {
                if (std::find(r.medoids.begin(), r.medoids.end(), o) != r.medoids.end()) continue;
                auto trial = medoids;
                trial[m] = o;
                CHECK(pam_cost(d, trial) >= r.total_cost - 1e-9);
            }
        }
    }
}

TEST_CASE("pam with K = 1 picks the overall medoid") {
    Eigen::MatrixXd x(5, 1);
    x << 0, 1, 2, 3, 100;
    auto r = pam(euclidean_matrix(x), 1);
    CHECK(r.medoids[0] == 2);
}
