#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "trajclust/dataset.hpp"
#include "trajclust/errors.hpp"

using namespace trajclust;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error thrown");
    return ErrorKind::Config;
}

const CsvColumns kCols{"id", "time", "y", std::nullopt};

}  // namespace

TEST_CASE("trajectories are ordered naturally and sorted by time") {
    Dataset ds({{"10", 2, 1}, {"2", 3, 5}, {"2", 1, 4}, {"10", 1, 0}});
    REQUIRE(ds.n_trajectories() == 2);
    CHECK(ds.ids()[0] == "2");
    CHECK(ds.ids()[1] == "10");
    CHECK(ds.times(0)[0] == 1.0);
    CHECK(ds.values(0)[1] == 5.0);
    CHECK(ds.n_observations() == 4);
}

TEST_CASE("natural ordering") {
    CHECK(natural_less("2", "10"));
    CHECK(natural_less("10", "10#2"));
    CHECK(natural_less("10#2", "11"));
    CHECK_FALSE(natural_less("b", "a"));
}

TEST_CASE("duplicate (id, time) is rejected") {
    CHECK(kind_of([] { Dataset({{"a", 1, 1}, {"a", 1, 2}}); }) == ErrorKind::DuplicateObservation);
}

TEST_CASE("csv parsing") {
    auto ds = parse_long_csv("id,time,y\na,1,2.5\na,2,3\nb,1,NA\nb,2,4\n", kCols);
    CHECK(ds.n_trajectories() == 2);
    CHECK(ds.n_observations() == 3);
    CHECK(ds.columns().response == "y");
}

TEST_CASE("csv errors") {
    CHECK(kind_of([] { parse_long_csv("id,time\na,1\n", kCols); }) == ErrorKind::Schema);
    CHECK(kind_of([] { parse_long_csv("id,time,y\na,x,1\n", kCols); }) == ErrorKind::Parse);
    CHECK(kind_of([] { parse_long_csv("id,time,y\na,1,1,2\n", kCols); }) == ErrorKind::Parse);
    CHECK(kind_of([] { load_long_csv("/nonexistent/file.csv", kCols); }) == ErrorKind::Io);
}

TEST_CASE("header-only csv is an empty dataset") {
    auto ds = parse_long_csv("id,time,y\n", kCols);
    CHECK(ds.empty());
}

TEST_CASE("group column becomes ground truth") {
    auto ds = parse_long_csv("id,time,y,g\na,1,1,x\na,2,1,x\nb,1,0,z\n", {"id", "time", "y", std::string("g")});
    REQUIRE(ds.truth());
    CHECK(ds.truth()->assignments.at("a") == "x");
    CHECK(ds.truth()->group_names == std::vector<std::string>{"x", "z"});
}

TEST_CASE("write then load is a fixpoint") {
    auto sim = simulate_pap(20, 5, 3);
    const auto text = to_long_csv(sim.data);
    auto again = parse_long_csv(text, {"Patient", "Week", "UsageHours", std::nullopt});
    CHECK(to_long_csv(again) == text);
    CHECK(again.observations() == sim.data.observations());
}

TEST_CASE("from_matrix skips NaN cells") {
    Eigen::MatrixXd m(2, 3);
    m << 1, NAN, 3, 4, 5, 6;
    std::vector<double> t{1, 2, 3};
    std::vector<std::string> ids{"a", "b"};
    auto ds = from_matrix(m, t, ids);
    CHECK(ds.n_observations() == 5);
    CHECK(ds.length(0) == 2);
}

TEST_CASE("aligned matrix with the Fail policy reports missing cells") {
    Dataset ds({{"a", 1, 1}, {"a", 2, 2}, {"b", 1, 3}});
    CHECK(kind_of([&] { to_aligned_matrix(ds, Imputation::Fail); }) == ErrorKind::MissingData);
    auto m = to_aligned_matrix(ds, Imputation::CopyMean);
    CHECK_FALSE(m.has_missing());
}

TEST_CASE("off-grid times are an alignment error") {
    Dataset ds({{"a", 1.5, 1}});
    CHECK(kind_of([&] { to_aligned_matrix(ds, Imputation::Fail, {1.0, 2.0}); }) == ErrorKind::Alignment);
}

TEST_CASE("copy-mean matches the cell-by-cell oracle on random gaps") {
    Rng rng(17);
    for (int rep = 0; rep < 30; ++rep) {
        const int rows = 4 + static_cast<int>(rng.index(6));
        const int cols = 3 + static_cast<int>(rng.index(6));
        TrajectoryMatrix m;
        m.values.resize(rows, cols);
        for (int j = 0; j < cols; ++j) m.times.push_back(j);
        for (int i = 0; i < rows; ++i) {
            m.ids.push_back(std::to_string(i));
            for (int j = 0; j < cols; ++j) m.values(i, j) = rng.normal(3, 2);
        }
        // every column keeps row 0, every row keeps at least one cell
        for (int i = 1; i < rows; ++i) {
            const int keep = static_cast<int>(rng.index(static_cast<std::size_t>(cols)));
            for (int j = 0; j < cols; ++j) {
                if (j != keep && rng.uniform() < 0.4) m.values(i, j) = NAN;
            }
        }
        const auto lib = impute_copy_mean(m);
        const auto ref = oracle::copy_mean(m.values);
        CHECK((lib.values - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("copy-mean fills an interior gap by interpolating deviations") {
    TrajectoryMatrix m;
    m.values.resize(2, 3);
    m.values << 0, 0, 0, 2, NAN, 4;
    m.times = {1, 2, 3};
    m.ids = {"a", "b"};
    const auto out = impute_copy_mean(m);
    // means: 1, 0, 2; deviations 1 and 2 -> 0 + 1.5
    CHECK(out.values(1, 1) == doctest::Approx(1.5));
}

TEST_CASE("simulated data has the expected shape") {
    auto sim = simulate_pap(301, 13, 1);
    CHECK(sim.data.n_trajectories() == 301);
    CHECK(sim.data.n_observations() == 3913);
    CHECK(sim.truth.assignments.size() == 301);
    for (std::size_t i = 0; i < sim.data.n_trajectories(); ++i) {
        for (double v : sim.data.values(i)) {
            CHECK(v >= 0.0);
            CHECK(v <= 9.5);
        }
    }
}

TEST_CASE("simulated overall mean stays in [4, 5] across seeds") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const double m = simulate_pap(150, 13, seed).data.mean_value();
        CHECK(m >= 4.0);
        CHECK(m <= 5.0);
    }
}

TEST_CASE("simulation is seed-deterministic") {
    CHECK(simulate_pap(50, 6, 4).data == simulate_pap(50, 6, 4).data);
    CHECK_FALSE(simulate_pap(50, 6, 4).data == simulate_pap(50, 6, 5).data);
}

TEST_CASE("resample relabels repeats") {
    auto ds = simulate_pap(10, 4, 1).data;
    std::vector<std::string> drawn{"3", "3", "5", "3"};
    auto r = resample(ds, drawn);
    CHECK(r.n_trajectories() == 4);
    CHECK(r.find("3#2").has_value());
    CHECK(r.find("3#3").has_value());
    CHECK(r.values(*r.find("3#2"))[0] == ds.values(*ds.find("3"))[0]);
    std::vector<std::string> bad{"nope"};
    CHECK(kind_of([&] { resample(ds, bad); }) == ErrorKind::NotFound);
}
