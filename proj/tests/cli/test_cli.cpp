#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "trajclust/harness.hpp"
#include "trajclust/metrics.hpp"
#include "trajclust/report.hpp"

namespace fs = std::filesystem;
using namespace trajclust;

namespace {

const fs::path kWork = fs::current_path() / "cli_work";

struct Run {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Run run(const std::string& args, const std::string& env = "") {
    fs::create_directories(kWork);
    const auto out = kWork / "stdout.txt";
    const auto err = kWork / "stderr.txt";
    const std::string cmd = "cd '" + kWork.string() + "' && " + env + " '" TRAJCLUSTER_BIN "' " + args + " > '" +
                            out.string() + "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

int count_lines(const std::string& s) { return int(std::count(s.begin(), s.end(), '\n')); }

void ensure_data() {
    if (!fs::exists(kWork / "pap.csv")) REQUIRE(run("simulate --n 301 --weeks 13 --seed 1 --out pap.csv").code == 0);
}

std::shared_ptr<const Dataset> pap_dataset() {
    return std::make_shared<const Dataset>(
        load_long_csv(kWork / "pap.csv", {"Patient", "Week", "UsageHours", std::string("Group")}));
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("simulate writes 3913 rows plus header") {
    ensure_data();
    const auto text = slurp(kWork / "pap.csv");
    CHECK(count_lines(text) == 3914);
    CHECK(text.rfind("Patient,Week,UsageHours,Group\n", 0) == 0);
}

TEST_CASE("fit writes model and summary, byte-identical on rerun") {
    ensure_data();
    auto r = run("fit --data pap.csv --method lmkm --clusters 2 --seed 3 --out fit1");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("Cluster sizes (K=2)") != std::string::npos);
    CHECK(r.out.find("Scaled residuals") != std::string::npos);
    REQUIRE(run("fit --data pap.csv --method lmkm --clusters 2 --seed 3 --out fit2").code == 0);
    CHECK(slurp(kWork / "fit1/model.json") == slurp(kWork / "fit2/model.json"));
    CHECK(slurp(kWork / "fit1/summary.txt") == r.out);
}

TEST_CASE("fit output equals the library result") {
    ensure_data();
    REQUIRE(run("fit --data pap.csv --method gmm --clusters 3 --seed 1 --out gmm3").code == 0);
    const auto m = estimate(spec_new("gmm", {{"nClusters", std::int64_t{3}}}), pap_dataset(), 1);
    CHECK(slurp(kWork / "gmm3/model.json") == to_json_string(m));
}

TEST_CASE("exit codes") {
    ensure_data();
    {
        std::ofstream(kWork / "empty.csv") << "id,time,value\n";
    }
    auto empty = run("fit --data empty.csv");
    CHECK(empty.code == 1);
    CHECK(empty.err.find("empty dataset") != std::string::npos);
    CHECK(run("fit --data missing.csv").code == 2);
    CHECK(run("fit --data pap.csv --method nope").code == 1);
    CHECK(run("fit --data pap.csv --clusters 0").code == 1);
    CHECK(run("fit --data pap.csv --no-such-flag").code == 1);
    CHECK(run("").code == 1);
    CHECK(run("fit --data pap.csv --response Nope").code == 2);
    {
        std::ofstream(kWork / "ragged.csv") << "id,time,value\na,1\n";
    }
    CHECK(run("fit --data ragged.csv").code == 2);
    CHECK(run("fit --data pap.csv --method kml --clusters 400").code == 2);
    CHECK(run("--help").code == 0);
}

TEST_CASE("sweep writes one row per K with NA Dunn at K=1") {
    ensure_data();
    auto r = run("sweep --data pap.csv --method kml --clusters 1:6 --metrics Dunn,WMAE,estimationTime --out sweep");
    REQUIRE(r.code == 0);
    CHECK(r.err.find("warning") != std::string::npos);
    const auto rows = read_csv(slurp(kWork / "sweep/metrics.csv"));
    REQUIRE(rows.size() == 7);
    CHECK(rows[0] == std::vector<std::string>{"name", "method", "nClusters", "Dunn", "WMAE", "estimationTime"});
    CHECK(rows[1][3].empty());
    for (std::size_t i = 2; i < 7; ++i) CHECK_FALSE(rows[i][3].empty());
    CHECK(fs::exists(kWork / "sweep/metrics.svg"));
}

TEST_CASE("sweep values equal direct library calls and are reproducible") {
    ensure_data();
    REQUIRE(run("sweep --data pap.csv --method kml,lmkm --clusters 2:3 --metrics WMAE,ASW --seed 4 --out s1").code == 0);
    REQUIRE(run("sweep --data pap.csv --method kml,lmkm --clusters 2:3 --metrics WMAE,ASW --seed 4 --parallel --out s2")
                .code == 0);
    const auto text = slurp(kWork / "s1/metrics.csv");
    CHECK(text == slurp(kWork / "s2/metrics.csv"));
    CHECK(slurp(kWork / "s1/metrics.svg") == slurp(kWork / "s2/metrics.svg"));

    std::vector<MethodSpec> specs;
    for (const char* m : {"kml", "lmkm"}) {
        for (int k : {2, 3}) specs.push_back(spec_new(m, {{"nClusters", std::int64_t{k}}}));
    }
    const auto table = metric_table(run_batch(specs, pap_dataset(), 4), {"WMAE", "ASW"});
    const auto rows = read_csv(text);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(rows[i + 1][3] == format_number(table.values[i][0]));
        CHECK(rows[i + 1][4] == format_number(table.values[i][1]));
    }
}

TEST_CASE("single method, single K gives a one-row table") {
    ensure_data();
    REQUIRE(run("sweep --data pap.csv --method gbtm --clusters 2 --out one").code == 0);
    CHECK(count_lines(slurp(kWork / "one/metrics.csv")) == 2);
}

TEST_CASE("compare a model with itself") {
    ensure_data();
    REQUIRE(run("fit --data pap.csv --method kml --clusters 3 --out self").code == 0);
    auto r = run("compare self/model.json self/model.json --metrics adjustedRand,splitJoin");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("self/model,1\n") != std::string::npos);
    CHECK(r.out.find("self/model,0\n") != std::string::npos);
}

TEST_CASE("compare against the reference groups") {
    ensure_data();
    REQUIRE(run("fit --data pap.csv --method gmm --clusters 3 --out ref_gmm").code == 0);
    auto r = run("compare ref_gmm/model.json --truth pap.csv --group Group --metrics splitJoin.ref");
    REQUIRE(r.code == 0);
    const auto rows = read_csv(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(rows[1][1]) <= 15);
    CHECK(run("compare ref_gmm/model.json").code == 1);
}

TEST_CASE("compare flags incompatible id sets") {
    ensure_data();
    REQUIRE(run("simulate --n 50 --weeks 13 --seed 2 --out small.csv").code == 0);
    REQUIRE(run("fit --data small.csv --method kml --clusters 2 --out small").code == 0);
    REQUIRE(run("fit --data pap.csv --method kml --clusters 2 --out big").code == 0);
    auto r = run("compare small/model.json big/model.json");
    CHECK(r.code == 0);
    CHECK(r.err.find("warning") != std::string::npos);
    CHECK(r.out.find("big/model,\n") != std::string::npos);
}

TEST_CASE("plotted cluster trajectories equal the model curves") {
    ensure_data();
    REQUIRE(run("fit --data pap.csv --method gmm --clusters 3 --out plotfit").code == 0);
    REQUIRE(run("plot --mode cluster-trajectories --model plotfit/model.json --out ct.svg").code == 0);
    const auto svg = slurp(kWork / "ct.svg");
    const auto model = model_from_json(nlohmann::json::parse(slurp(kWork / "plotfit/model.json")));
    const auto times = model.time_grid();
    const auto y = cluster_trajectories(model, times);
    const std::regex values(R"re(data-values="([^"]*)")re");
    int k = 0;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), values); it != std::sregex_iterator(); ++it, ++k) {
        std::istringstream pairs((*it)[1].str());
        std::string pair;
        std::size_t j = 0;
        while (pairs >> pair) {
            const auto comma = pair.find(',');
            CHECK(std::stod(pair.substr(0, comma)) == times[j]);
            CHECK(std::stod(pair.substr(comma + 1)) == y(k, Eigen::Index(j)));
            ++j;
        }
        CHECK(j == times.size());
    }
    CHECK(k == 3);
    CHECK(svg.find("UsageHours") != std::string::npos);
}

TEST_CASE("trajectory plot shows the three reference groups") {
    ensure_data();
    REQUIRE(run("plot --data pap.csv --group Group --out traj.svg").code == 0);
    const auto svg = slurp(kWork / "traj.svg");
    for (const char* g : {"Adherent", "Improvers", "Non-adherent"}) {
        CHECK(svg.find(std::string("data-label=\"") + g + "\"") != std::string::npos);
    }
    REQUIRE(run("plot --data pap.csv --group Group --out traj2.svg").code == 0);
    CHECK(svg == slurp(kWork / "traj2.svg"));
}

TEST_CASE("validate checks arguments without fitting") {
    ensure_data();
    auto ok = run("validate --data pap.csv --method kmedoids --clusters 5 --set distance=dtw");
    CHECK(ok.code == 0);
    CHECK(ok.out.find("301 trajectories") != std::string::npos);
    CHECK(run("validate --data pap.csv --method kmedoids --set distance=cosine").code == 1);
    CHECK(run("validate --data pap.csv --method kml --set bogus=1").code == 1);
}

TEST_CASE("boot on stratify converges and writes a manifest") {
    ensure_data();
    auto r = run("boot --data pap.csv --method stratify --set \"stratify=mean(UsageHours) > 4\" --samples 10 --out boot");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("convergence rate 1") != std::string::npos);
    const auto manifest = nlohmann::json::parse(slurp(kWork / "boot/manifest.json"));
    REQUIRE(manifest.size() == 10);
    for (const auto& e : manifest) {
        CHECK(e["status"] == "ok");
        CHECK(fs::exists(kWork / "boot" / e["model_path"].get<std::string>()));
        CHECK(e["recipe"]["drawn_ids"].size() == 301);
    }
}

TEST_CASE("rep summary is ordered min <= median <= max") {
    ensure_data();
    REQUIRE(run("rep --data pap.csv --method kml --clusters 4 --reps 5 --metrics WMAE,Dunn --set nstart=1 --out rep")
                .code == 0);
    const auto rows = read_csv(slurp(kWork / "rep/summary.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"metric", "n", "min", "median", "max"});
    for (std::size_t i = 1; i < 3; ++i) {
        CHECK(std::stod(rows[i][2]) <= std::stod(rows[i][3]));
        CHECK(std::stod(rows[i][3]) <= std::stod(rows[i][4]));
    }
}

TEST_CASE("config file with flag overrides") {
    ensure_data();
    {
        std::ofstream cfg(kWork / "run.cfg");
        cfg << "# fit settings\ndata = pap.csv\nmethod = kml\nclusters = 4\nseed = 2\nset.nstart = 3\nout = cfgfit\n";
    }
    REQUIRE(run("fit --config run.cfg --clusters 2").code == 0);
    const auto j = nlohmann::json::parse(slurp(kWork / "cfgfit/model.json"));
    CHECK(j["args"]["nClusters"] == 2);
    CHECK(j["args"]["nstart"] == 3);
    {
        std::ofstream(kWork / "bad.cfg") << "colour = blue\n";
    }
    CHECK(run("fit --config bad.cfg --data pap.csv").code == 1);
}

TEST_CASE("column defaults come from the environment") {
    ensure_data();
    {
        std::ofstream csv(kWork / "swapped.csv");
        csv << "t,subject,y\n1,a,1\n2,a,2\n1,b,5\n2,b,6\n1,c,1.1\n2,c,2.2\n";
    }
    auto r = run("fit --data swapped.csv --clusters 2 --out envfit", "TRAJCLUSTER_ID=subject TRAJCLUSTER_TIME=t");
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(kWork / "envfit/model.json"));
    CHECK(j["args"]["id"] == "subject");
    CHECK(j["args"]["time"] == "t");
    CHECK(j["args"]["response"] == "y");
}
