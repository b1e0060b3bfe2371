#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "trajclust/dataset.hpp"
#include "trajclust/errors.hpp"
#include "trajclust/harness.hpp"
#include "trajclust/method.hpp"
#include "trajclust/metrics.hpp"
#include "trajclust/model.hpp"
#include "trajclust/report.hpp"
#include "trajclust/spec.hpp"

namespace fs = std::filesystem;
using namespace trajclust;

namespace {

struct RunConfig {
    std::string data;
    std::string id;
    std::string time;
    std::string response;
    std::string group;
    std::string method = "kml";
    std::string clusters;
    std::uint64_t seed = 1;
    bool parallel = false;
    bool timing = false;
    std::string out;
    std::string metrics;
    std::vector<std::string> sets;
};

// Flag values left unset keep whatever the config file said.
struct Flags {
    std::string config;
    std::optional<std::string> data, id, time, response, group, method, clusters, out, metrics;
    std::optional<std::uint64_t> seed;
    bool parallel = false;
    bool timing = false;
    std::vector<std::string> sets;
};

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(ErrorKind::Config, "'" + key + "' expects true or false, got '" + v + "'");
}

void apply_config_file(const std::string& path, RunConfig& c) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot read config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::Config, path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "data") c.data = value;
        else if (key == "id") c.id = value;
        else if (key == "time") c.time = value;
        else if (key == "response") c.response = value;
        else if (key == "group") c.group = value;
        else if (key == "method") c.method = value;
        else if (key == "clusters") c.clusters = value;
        else if (key == "out") c.out = value;
        else if (key == "metrics") c.metrics = value;
        else if (key == "parallel") c.parallel = parse_bool(key, value);
        else if (key == "timing") c.timing = parse_bool(key, value);
        else if (key == "seed") {
            try {
                c.seed = std::stoull(value);
            } catch (const std::exception&) {
                throw Error(ErrorKind::Config, "seed must be a non-negative integer, got '" + value + "'");
            }
        } else if (key.starts_with("set.")) c.sets.push_back(key.substr(4) + "=" + value);
        else throw Error(ErrorKind::Config, path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
}

RunConfig resolve(const Flags& f) {
    RunConfig c;
    if (!f.config.empty()) apply_config_file(f.config, c);
    if (f.data) c.data = *f.data;
    if (f.id) c.id = *f.id;
    if (f.time) c.time = *f.time;
    if (f.response) c.response = *f.response;
    if (f.group) c.group = *f.group;
    if (f.method) c.method = *f.method;
    if (f.clusters) c.clusters = *f.clusters;
    if (f.out) c.out = *f.out;
    if (f.metrics) c.metrics = *f.metrics;
    if (f.seed) c.seed = *f.seed;
    if (f.parallel) c.parallel = true;
    if (f.timing) c.timing = true;
    c.sets.insert(c.sets.end(), f.sets.begin(), f.sets.end());
    return c;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int parse_int(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::Config, what + ": '" + s + "' is not an integer");
    }
}

// "3", "1:6" or "2,3,5"
std::vector<int> parse_clusters(const std::string& text) {
    if (text.empty()) throw Error(ErrorKind::Config, "no cluster count given (--clusters)");
    std::vector<int> ks;
    if (const auto colon = text.find(':'); colon != std::string::npos) {
        const int lo = parse_int(trim(text.substr(0, colon)), "clusters");
        const int hi = parse_int(trim(text.substr(colon + 1)), "clusters");
        for (int k = lo; k <= hi; ++k) ks.push_back(k);
    } else {
        for (const auto& part : split(text, ',')) ks.push_back(parse_int(part, "clusters"));
    }
    if (ks.empty()) throw Error(ErrorKind::Config, "cluster range '" + text + "' is empty");
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] < 1) throw Error(ErrorKind::Config, "cluster counts must be >= 1");
        if (i > 0 && ks[i] <= ks[i - 1]) throw Error(ErrorKind::Config, "cluster range must be ascending");
    }
    return ks;
}

int single_k(const RunConfig& c) {
    const auto ks = parse_clusters(c.clusters.empty() ? "2" : c.clusters);
    if (ks.size() != 1) throw Error(ErrorKind::Config, "this command takes a single cluster count");
    return ks.front();
}

ArgMap method_overrides(const RunConfig& c) {
    ArgMap args;
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw Error(ErrorKind::Config, "--set expects name=value, got '" + s + "'");
        args[trim(s.substr(0, eq))] = parse_arg(trim(s.substr(eq + 1)));
    }
    return args;
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

std::vector<std::string> csv_header(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
        cols.push_back(cell);
    }
    return cols;
}

// Unset column names come from TRAJCLUSTER_ID / TRAJCLUSTER_TIME, then from
// the header: id first, time second, response the first remaining column.
std::shared_ptr<const Dataset> load_data(const RunConfig& c, bool with_group) {
    if (c.data.empty()) throw Error(ErrorKind::Config, "no input data given (--data)");
    const auto header = csv_header(c.data);
    CsvColumns cols;
    cols.id = !c.id.empty() ? c.id : env_or("TRAJCLUSTER_ID", header.size() > 0 ? header[0] : "id");
    cols.time = !c.time.empty() ? c.time : env_or("TRAJCLUSTER_TIME", header.size() > 1 ? header[1] : "time");
    if (with_group && !c.group.empty()) cols.group = c.group;
    cols.response = c.response;
    if (cols.response.empty()) {
        for (const auto& h : header) {
            if (h != cols.id && h != cols.time && h != c.group) {
                cols.response = h;
                break;
            }
        }
    }
    if (cols.response.empty()) throw Error(ErrorKind::Schema, "cannot find a response column in '" + c.data + "'");
    auto ds = std::make_shared<const Dataset>(load_long_csv(c.data, cols));
    if (ds->empty()) throw Error(ErrorKind::EmptyDataset, "empty dataset");
    return ds;
}

HarnessOptions harness_options(const RunConfig& c) { return {c.parallel, 0}; }

int worker_count(const RunConfig& c) {
    return c.parallel ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency())) : 1;
}

fs::path out_dir(const RunConfig& c) {
    fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw Error(ErrorKind::Io, "cannot create output directory '" + dir.string() + "'");
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

// Writes to --out when given, else stdout.
void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    const fs::path p(out);
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
    }
    write_file(p, text);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ClusterModel load_model(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Parse, "'" + path + "' is not valid JSON: " + e.what());
    }
    return model_from_json(j);
}

std::vector<std::string> metric_list(const RunConfig& c, const std::string& fallback) {
    auto names = split(c.metrics.empty() ? fallback : c.metrics, ',');
    if (names.empty()) throw Error(ErrorKind::Config, "no metrics given");
    return names;
}

void report_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    if (!warnings.empty()) std::cerr << warnings.size() << " warning(s)\n";
}

// ------------------------------------------------------------------ commands

int cmd_simulate(std::size_t n, std::size_t weeks, std::uint64_t seed, const std::string& out) {
    auto sim = simulate_pap(n, weeks, seed);
    emit(out, to_long_csv(sim.data.with_truth(sim.truth), std::string("Group")));
    return 0;
}

int cmd_fit(const RunConfig& c) {
    auto ds = load_data(c, false);
    ArgMap args = method_overrides(c);
    args["nClusters"] = std::int64_t{single_k(c)};
    const auto spec = spec_new(c.method, args);
    const auto model = estimate(spec, ds, c.seed, {worker_count(c), {}});
    const auto dir = out_dir(c);
    write_file(dir / "model.json", to_json_string(model, c.timing));
    const std::string text = summary(model);
    write_file(dir / "summary.txt", text);
    std::cout << text;
    return 0;
}

int cmd_sweep(const RunConfig& c) {
    auto ds = load_data(c, false);
    const auto methods = split(c.method, ',');
    if (methods.empty()) throw Error(ErrorKind::Config, "no method given");
    const auto ks = parse_clusters(c.clusters);
    const auto metrics = metric_list(c, "WMAE,Dunn");
    const auto overrides = method_overrides(c);

    std::vector<MethodSpec> specs;
    std::vector<std::string> row_method;
    std::vector<int> row_k;
    for (const auto& m : methods) {
        const auto base = spec_new(m, overrides);
        std::vector<ArgValue> values;
        for (int k : ks) values.emplace_back(std::int64_t{k});
        for (auto& s : spec_permute(base, "nClusters", values)) specs.push_back(std::move(s));
        for (int k : ks) {
            row_method.push_back(m);
            row_k.push_back(k);
        }
    }
    const auto list = run_batch(specs, ds, c.seed, harness_options(c));

    std::vector<std::string> warnings;
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (!list[i].ok()) warnings.push_back(row_method[i] + " K=" + std::to_string(row_k[i]) + ": " + list[i].error);
    }
    auto table = metric_table(list, metrics);
    for (std::size_t i = 0; i < table.row_names.size(); ++i) {
        table.row_names[i] = row_method[i] + "_" + std::to_string(row_k[i]);
        for (std::size_t m = 0; m < metrics.size(); ++m) {
            if (list[i].ok() && is_na(table.values[i][m])) {
                warnings.push_back(table.row_names[i] + ": " + metrics[m] + " is NA");
            }
        }
    }
    std::vector<std::string> k_text;
    for (int k : row_k) k_text.push_back(std::to_string(k));
    const auto dir = out_dir(c);
    write_file(dir / "metrics.csv", metric_table_csv(table, {{"method", row_method}, {"nClusters", k_text}}));
    write_file(dir / "metrics.svg", plot_metric_sweep(row_method, row_k, table));
    report_warnings(warnings);
    return 0;
}

int cmd_compare(const RunConfig& c, const std::vector<std::string>& paths, const std::string& reference,
                const std::string& truth) {
    ModelList list;
    for (const auto& p : paths) {
        list.add(fs::path(p).replace_extension().generic_string(), std::make_shared<const ClusterModel>(load_model(p)));
    }
    std::optional<ClusterModel> ref;
    if (!reference.empty() && !truth.empty()) throw Error(ErrorKind::Config, "give either --reference or --truth");
    if (!reference.empty()) ref = load_model(reference);
    if (!truth.empty()) {
        if (c.group.empty()) throw Error(ErrorKind::Config, "--truth needs --group naming the reference column");
        RunConfig tc = c;
        tc.data = truth;
        ref = truth_model(load_data(tc, true));
    }
    if (!ref && list.size() < 2) throw Error(ErrorKind::Config, "compare needs two models or a reference");

    const auto metrics = metric_list(c, "adjustedRand");
    std::vector<std::string> warnings;
    std::ostringstream text;
    if (ref) {
        MetricTable t;
        t.metrics = metrics;
        for (const auto& e : list) {
            t.row_names.push_back(e.name);
            std::vector<double> row;
            for (const auto& m : metrics) {
                try {
                    row.push_back(external_metric(*e.model, *ref, m));
                } catch (const Error& err) {
                    if (err.kind() != ErrorKind::IncompatiblePartition) throw;
                    warnings.push_back(e.name + " vs reference: " + err.what());
                    row.push_back(kNA);
                }
            }
            t.values.push_back(std::move(row));
        }
        text << metric_table_csv(t);
    } else {
        for (std::size_t i = 0; i < metrics.size(); ++i) {
            if (i > 0) text << "\n";
            text << "# " << metrics[i] << "\n" << pairwise_csv(pairwise_external(list, metrics[i], &warnings));
        }
    }
    emit(c.out, text.str());
    report_warnings(warnings);
    return 0;
}

int cmd_plot(const RunConfig& c, const std::string& mode, const std::string& model_path) {
    if (mode == "trajectories") {
        auto ds = load_data(c, true);
        if (!model_path.empty()) {
            const auto model = load_model(model_path);
            const auto labels = trajectory_assignments(model);
            std::map<std::string, int> by_id;
            for (std::size_t i = 0; i < model.ids().size(); ++i) by_id[model.ids()[i]] = labels[i];
            std::vector<int> groups;
            for (const auto& id : ds->ids()) {
                auto it = by_id.find(id);
                if (it == by_id.end()) {
                    throw Error(ErrorKind::IncompatiblePartition, "trajectory '" + id + "' is not in the model");
                }
                groups.push_back(it->second);
            }
            emit(c.out, plot_trajectories(*ds, &groups, &model.cluster_names()));
            return 0;
        }
        if (ds->truth()) {
            const auto& names = ds->truth()->group_names;
            std::vector<int> groups;
            for (const auto& id : ds->ids()) {
                const auto& g = ds->truth()->assignments.at(id);
                groups.push_back(static_cast<int>(std::find(names.begin(), names.end(), g) - names.begin()));
            }
            emit(c.out, plot_trajectories(*ds, &groups, &names));
            return 0;
        }
        emit(c.out, plot_trajectories(*ds));
        return 0;
    }
    if (mode == "cluster-trajectories") {
        if (model_path.empty()) throw Error(ErrorKind::Config, "cluster-trajectories needs --model");
        const auto model = load_model(model_path);
        std::vector<double> times = model.time_grid();
        if (times.empty()) {
            const auto [lo, hi] = model.time_range();
            for (int i = 0; i < 100; ++i) times.push_back(lo + (hi - lo) * i / 99.0);
        }
        const auto& spec = model.spec();
        const std::string tl = spec.has("time") ? spec.get_string("time") : "time";
        const std::string rl = spec.has("response") ? spec.get_string("response") : "value";
        emit(c.out, plot_cluster_trajectories(model, times, tl, rl));
        return 0;
    }
    throw Error(ErrorKind::Config, "unknown plot mode '" + mode + "'");
}

int cmd_validate(const RunConfig& c) {
    auto ds = load_data(c, true);
    ArgMap args = method_overrides(c);
    const auto ks = parse_clusters(c.clusters.empty() ? "2" : c.clusters);
    for (int k : ks) {
        args["nClusters"] = std::int64_t{k};
        check_spec(spec_new(c.method, args), ds);
    }
    std::cout << "ok: " << ds->n_trajectories() << " trajectories, " << ds->n_observations() << " observations\n";
    args["nClusters"] = std::int64_t{ks.front()};
    std::cout << check_spec(spec_new(c.method, args), ds).describe();
    return 0;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// manifest.json, models/<name>.json and summary.csv (min / median / max).
int write_runs(const RunConfig& c, const ModelList& list, const std::vector<std::string>& metrics) {
    const auto dir = out_dir(c);
    fs::create_directories(dir / "models");
    std::vector<std::string> paths;
    std::vector<std::string> warnings;
    for (const auto& e : list) {
        if (!e.ok()) {
            paths.emplace_back();
            warnings.push_back("fit " + e.name + " failed: " + e.error);
            continue;
        }
        const std::string rel = "models/" + e.name + ".json";
        write_file(dir / rel, to_json_string(*e.model, c.timing));
        paths.push_back(rel);
    }
    write_file(dir / "manifest.json", manifest_json(list, paths).dump(2) + "\n");

    const auto table = metric_table(list, metrics);
    std::ostringstream csv;
    csv << "metric,n,min,median,max\n";
    for (std::size_t m = 0; m < metrics.size(); ++m) {
        std::vector<double> v;
        for (const auto& row : table.values) {
            if (!is_na(row[m])) v.push_back(row[m]);
        }
        csv << metrics[m] << "," << v.size();
        if (v.empty()) {
            csv << ",,,\n";
            continue;
        }
        csv << "," << format_number(*std::min_element(v.begin(), v.end())) << "," << format_number(median_of(v))
            << "," << format_number(*std::max_element(v.begin(), v.end())) << "\n";
    }
    write_file(dir / "summary.csv", csv.str());

    std::size_t converged = 0;
    for (const auto& e : list) converged += e.ok() && e.model->converged();
    std::cout << list.size() << " fits, convergence rate " << format_number(static_cast<double>(converged) / list.size())
              << "\n";
    report_warnings(warnings);
    return 0;
}

int cmd_boot(const RunConfig& c, int samples) {
    auto ds = load_data(c, false);
    ArgMap args = method_overrides(c);
    args["nClusters"] = std::int64_t{single_k(c)};
    const auto list = run_boot(spec_new(c.method, args), ds, samples, c.seed, harness_options(c));
    return write_runs(c, list, metric_list(c, "WMAE,converged"));
}

int cmd_rep(const RunConfig& c, int reps) {
    auto ds = load_data(c, false);
    ArgMap args = method_overrides(c);
    args["nClusters"] = std::int64_t{single_k(c)};
    const auto list = run_rep(spec_new(c.method, args), ds, reps, c.seed, harness_options(c));
    return write_runs(c, list, metric_list(c, "WMAE,converged"));
}

int exit_code(const Error& e) {
    switch (e.category()) {
        case ErrorCategory::Usage: return 1;
        case ErrorCategory::Data: return 2;
        case ErrorCategory::Internal: return 3;
    }
    return 3;
}

void add_common(CLI::App* cmd, Flags& f, bool needs_data = true) {
    cmd->add_option("--config", f.config, "key=value config file; flags override it");
    if (needs_data) cmd->add_option("--data", f.data, "long-format CSV");
    cmd->add_option("--id", f.id, "id column");
    cmd->add_option("--time", f.time, "time column");
    cmd->add_option("--response", f.response, "response column");
    cmd->add_option("--group", f.group, "reference group column");
    cmd->add_option("--method", f.method, "method name (sweep: comma-separated list)");
    cmd->add_option("--clusters", f.clusters, "cluster count, range lo:hi or list");
    cmd->add_option("--seed", f.seed, "master seed");
    cmd->add_option("--set", f.sets, "method argument name=value")->allow_extra_args(false);
    cmd->add_flag("--parallel", f.parallel, "run fits on all cores");
    cmd->add_option("--out", f.out, "output directory or file");
    cmd->add_option("--metrics", f.metrics, "comma-separated metric names");
    cmd->add_flag("--timing", f.timing, "record estimation time in model JSON");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Longitudinal trajectory clustering"};
    app.require_subcommand(1);
    Flags f;

    std::size_t sim_n = 301, sim_weeks = 13;
    std::uint64_t sim_seed = 1;
    std::string sim_out;
    auto* simulate = app.add_subcommand("simulate", "write a synthetic therapy-adherence dataset");
    simulate->add_option("--n", sim_n, "trajectories")->capture_default_str();
    simulate->add_option("--weeks", sim_weeks, "observations per trajectory")->capture_default_str();
    simulate->add_option("--seed", sim_seed, "seed")->capture_default_str();
    simulate->add_option("--out", sim_out, "CSV path (default stdout)");

    auto* fit = app.add_subcommand("fit", "estimate one model; writes model.json and summary.txt");
    add_common(fit, f);
    auto* sweep = app.add_subcommand("sweep", "fit methods over a cluster range; writes metrics.csv and metrics.svg");
    add_common(sweep, f);

    std::vector<std::string> model_paths;
    std::string reference, truth;
    auto* compare = app.add_subcommand("compare", "external metrics between models");
    add_common(compare, f, false);
    compare->add_option("models", model_paths, "model JSON files");
    compare->add_option("--reference", reference, "reference model JSON");
    compare->add_option("--truth", truth, "CSV with a reference group column (see --group)");

    std::string mode = "trajectories", plot_model;
    auto* plot = app.add_subcommand("plot", "SVG of trajectories or cluster trajectories");
    add_common(plot, f);
    plot->add_option("--mode", mode, "trajectories | cluster-trajectories")->capture_default_str();
    plot->add_option("--model", plot_model, "model JSON");

    auto* validate = app.add_subcommand("validate", "check data and method arguments without fitting");
    add_common(validate, f);

    int samples = 10, reps = 5;
    auto* boot = app.add_subcommand("boot", "bootstrap fits; writes manifest.json, models/, summary.csv");
    add_common(boot, f);
    boot->add_option("--samples", samples, "bootstrap samples")->capture_default_str();
    auto* rep = app.add_subcommand("rep", "repeated fits; writes manifest.json, models/, summary.csv");
    add_common(rep, f);
    rep->add_option("--reps", reps, "repetitions")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*simulate) return cmd_simulate(sim_n, sim_weeks, sim_seed, sim_out);
        const RunConfig c = resolve(f);
        if (*fit) return cmd_fit(c);
        if (*sweep) return cmd_sweep(c);
        if (*compare) return cmd_compare(c, model_paths, reference, truth);
        if (*plot) return cmd_plot(c, mode, plot_model);
        if (*validate) return cmd_validate(c);
        if (*boot) {
            if (samples < 1) throw Error(ErrorKind::Config, "--samples must be >= 1");
            return cmd_boot(c, samples);
        }
        if (*rep) {
            if (reps < 1) throw Error(ErrorKind::Config, "--reps must be >= 1");
            return cmd_rep(c, reps);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
