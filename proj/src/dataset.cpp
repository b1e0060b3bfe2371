#include "trajclust/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include "trajclust/errors.hpp"
#include "trajclust/rng.hpp"

namespace trajclust {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

bool natural_less(std::string_view a, std::string_view b) {
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() && j < b.size()) {
        if (is_digit(a[i]) && is_digit(b[j])) {
            std::size_t ie = i;
            std::size_t je = j;
            while (ie < a.size() && is_digit(a[ie])) ++ie;
            while (je < b.size() && is_digit(b[je])) ++je;
            // Compare digit runs by value: strip leading zeros, then length, then text.
            std::size_t is = i;
            std::size_t js = j;
            while (is + 1 < ie && a[is] == '0') ++is;
            while (js + 1 < je && b[js] == '0') ++js;
            const auto ra = a.substr(is, ie - is);
            const auto rb = b.substr(js, je - js);
            if (ra.size() != rb.size()) return ra.size() < rb.size();
            if (ra != rb) return ra < rb;
            if (ie - i != je - j) return (ie - i) < (je - j);
            i = ie;
            j = je;
        } else {
            if (a[i] != b[j]) return static_cast<unsigned char>(a[i]) < static_cast<unsigned char>(b[j]);
            ++i;
            ++j;
        }
    }
    return (a.size() - i) < (b.size() - j);
}

Dataset::Dataset(std::vector<Observation> observations, Columns columns, std::optional<GroundTruth> truth)
    : columns_(std::move(columns)) {
    std::unordered_map<std::string, std::size_t> slot;
    std::vector<std::string> ids;
    std::vector<std::vector<std::pair<double, double>>> rows;
    for (auto& obs : observations) {
        if (!std::isfinite(obs.time)) {
            throw Error(ErrorKind::Parse, "non-finite time for trajectory '" + obs.id + "'");
        }
        auto [it, inserted] = slot.try_emplace(obs.id, ids.size());
        if (inserted) {
            ids.push_back(obs.id);
            rows.emplace_back();
        }
        rows[it->second].emplace_back(obs.time, obs.value);
    }

    std::vector<std::size_t> order(ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return natural_less(ids[a], ids[b]); });

    ids_.reserve(ids.size());
    times_.reserve(ids.size());
    values_.reserve(ids.size());
    for (std::size_t idx : order) {
        auto& row = rows[idx];
        std::sort(row.begin(), row.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        std::vector<double> t;
        std::vector<double> v;
        t.reserve(row.size());
        v.reserve(row.size());
        for (const auto& [time, value] : row) {
            if (!t.empty() && t.back() == time) {
                std::ostringstream msg;
                msg << "duplicate observation for trajectory '" << ids[idx] << "' at time " << time;
                throw Error(ErrorKind::DuplicateObservation, msg.str());
            }
            t.push_back(time);
            v.push_back(value);
        }
        n_obs_ += t.size();
        ids_.push_back(ids[idx]);
        times_.push_back(std::move(t));
        values_.push_back(std::move(v));
    }

    if (truth) {
        GroundTruth filtered;
        filtered.group_names = truth->group_names;
        std::set<std::string> seen(filtered.group_names.begin(), filtered.group_names.end());
        for (const auto& id : ids_) {
            auto it = truth->assignments.find(id);
            if (it == truth->assignments.end()) {
                throw Error(ErrorKind::PartialAssignment, "ground truth has no group for trajectory '" + id + "'");
            }
            filtered.assignments.emplace(id, it->second);
            if (seen.insert(it->second).second) filtered.group_names.push_back(it->second);
        }
        truth_ = std::move(filtered);
    }
}

std::optional<std::size_t> Dataset::find(std::string_view id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id,
                               [](const std::string& a, std::string_view b) { return natural_less(a, b); });
    if (it != ids_.end() && *it == id) return static_cast<std::size_t>(it - ids_.begin());
    return std::nullopt;
}

std::vector<Observation> Dataset::observations() const {
    std::vector<Observation> out;
    out.reserve(n_obs_);
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        for (std::size_t j = 0; j < times_[i].size(); ++j) {
            out.push_back({ids_[i], times_[i][j], values_[i][j]});
        }
    }
    return out;
}

std::vector<double> Dataset::time_grid() const {
    std::vector<double> grid;
    grid.reserve(n_obs_);
    for (const auto& t : times_) grid.insert(grid.end(), t.begin(), t.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

std::pair<double, double> Dataset::time_range() const {
    if (empty()) return {kNaN, kNaN};
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& t : times_) {
        lo = std::min(lo, t.front());
        hi = std::max(hi, t.back());
    }
    return {lo, hi};
}

double Dataset::mean_value() const {
    if (n_obs_ == 0) return kNaN;
    double total = 0.0;
    for (const auto& v : values_) {
        for (double x : v) total += x;
    }
    return total / static_cast<double>(n_obs_);
}

Dataset Dataset::with_truth(std::optional<GroundTruth> truth) const {
    return Dataset(observations(), columns_, std::move(truth));
}

bool TrajectoryMatrix::has_missing() const {
    return values.array().isNaN().any();
}

Imputation parse_imputation(std::string_view name) {
    if (name == "copyMean" || name == "copy_mean") return Imputation::CopyMean;
    if (name == "none" || name == "fail") return Imputation::Fail;
    throw Error(ErrorKind::Validation, "unknown imputation method '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- CSV input

namespace {

std::vector<std::vector<std::string>> split_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                any = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                any = true;
                break;
            case '\r':
                break;
            case '\n':
                if (any || !field.empty()) {
                    row.push_back(std::move(field));
                    rows.push_back(std::move(row));
                }
                row.clear();
                field.clear();
                any = false;
                break;
            default:
                field.push_back(c);
                any = true;
        }
    }
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

bool is_missing_field(std::string_view s) {
    return s.empty() || s == "NA";
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_real(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

}  // namespace

Dataset parse_long_csv(std::string_view text, const CsvColumns& cols) {
    if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
        static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF) {
        text.remove_prefix(3);
    }
    auto rows = split_csv(text);
    if (rows.empty()) throw Error(ErrorKind::Schema, "missing header row");
    const auto& header = rows.front();
    auto column = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == name) return i;
        }
        throw Error(ErrorKind::Schema, "missing column '" + name + "'");
    };
    const std::size_t id_col = column(cols.id);
    const std::size_t time_col = column(cols.time);
    const std::size_t resp_col = column(cols.response);
    std::optional<std::size_t> group_col;
    if (cols.group) group_col = column(*cols.group);

    std::vector<Observation> obs;
    std::map<std::string, std::string> groups;
    std::vector<std::string> group_names;
    std::set<std::string> group_seen;
    obs.reserve(rows.size());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) {
            throw Error(ErrorKind::Parse, "row " + std::to_string(r) + ": expected " + std::to_string(header.size()) +
                                              " fields, found " + std::to_string(row.size()));
        }
        const std::string id(trim(row[id_col]));
        if (is_missing_field(id)) throw Error(ErrorKind::Parse, "row " + std::to_string(r) + ": missing id");
        auto time = parse_real(row[time_col]);
        if (!time) {
            throw Error(ErrorKind::Parse, "row " + std::to_string(r) + ": time '" + row[time_col] + "' is not numeric");
        }
        if (group_col) {
            const std::string g(trim(row[*group_col]));
            auto [it, inserted] = groups.try_emplace(id, g);
            if (!inserted && it->second != g) {
                throw Error(ErrorKind::Schema, "row " + std::to_string(r) + ": trajectory '" + id +
                                                   "' changes group from '" + it->second + "' to '" + g + "'");
            }
            if (group_seen.insert(g).second) group_names.push_back(g);
        }
        const std::string_view resp = trim(row[resp_col]);
        if (is_missing_field(resp)) continue;
        auto value = parse_real(resp);
        if (!value) {
            throw Error(ErrorKind::Parse,
                        "row " + std::to_string(r) + ": response '" + std::string(resp) + "' is not numeric");
        }
        obs.push_back({id, *time, *value});
    }

    std::optional<GroundTruth> truth;
    if (group_col) {
        GroundTruth t;
        std::set<std::string> observed;
        for (const auto& o : obs) observed.insert(o.id);
        for (auto& [id, g] : groups) {
            if (observed.count(id)) t.assignments.emplace(id, g);
        }
        std::sort(group_names.begin(), group_names.end(),
                  [](const std::string& a, const std::string& b) { return natural_less(a, b); });
        t.group_names = std::move(group_names);
        truth = std::move(t);
    }
    return Dataset(std::move(obs), Columns{cols.id, cols.time, cols.response}, std::move(truth));
}

Dataset load_long_csv(const std::filesystem::path& path, const CsvColumns& columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_long_csv(buf.str(), columns);
}

namespace {

std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::string to_long_csv(const Dataset& ds, std::optional<std::string> group_column) {
    const bool with_group = group_column.has_value() && ds.truth().has_value();
    std::string out = csv_field(ds.columns().id) + "," + csv_field(ds.columns().time) + "," +
                      csv_field(ds.columns().response);
    if (with_group) out += "," + csv_field(*group_column);
    out += "\n";
    for (std::size_t i = 0; i < ds.n_trajectories(); ++i) {
        const std::string id = csv_field(ds.ids()[i]);
        std::string group;
        if (with_group) group = "," + csv_field(ds.truth()->assignments.at(ds.ids()[i]));
        auto t = ds.times(i);
        auto v = ds.values(i);
        for (std::size_t j = 0; j < t.size(); ++j) {
            out += id;
            out += ',';
            out += shortest(t[j]);
            out += ',';
            out += std::isnan(v[j]) ? std::string("NA") : shortest(v[j]);
            out += group;
            out += '\n';
        }
    }
    return out;
}

void write_long_csv(const Dataset& ds, const std::filesystem::path& path, std::optional<std::string> group_column) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    out << to_long_csv(ds, std::move(group_column));
}

// ------------------------------------------------------------ matrix forms

Dataset from_matrix(const Eigen::MatrixXd& values, std::span<const double> times, std::span<const std::string> ids,
                    Columns columns) {
    if (static_cast<std::size_t>(values.rows()) != ids.size() ||
        static_cast<std::size_t>(values.cols()) != times.size()) {
        throw Error(ErrorKind::Shape, "matrix is " + std::to_string(values.rows()) + "x" +
                                          std::to_string(values.cols()) + " but got " + std::to_string(ids.size()) +
                                          " ids and " + std::to_string(times.size()) + " times");
    }
    for (std::size_t j = 1; j < times.size(); ++j) {
        if (!(times[j] > times[j - 1])) throw Error(ErrorKind::Shape, "times must be strictly increasing");
    }
    std::vector<Observation> obs;
    obs.reserve(values.size());
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (!std::isnan(values(i, j))) obs.push_back({ids[i], times[j], values(i, j)});
        }
    }
    return Dataset(std::move(obs), std::move(columns));
}

namespace {

TrajectoryMatrix align(const Dataset& ds, const std::vector<double>& grid) {
    TrajectoryMatrix m;
    m.times = grid;
    m.ids = ds.ids();
    m.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(ds.n_trajectories()),
                                         static_cast<Eigen::Index>(grid.size()), kNaN);
    for (std::size_t i = 0; i < ds.n_trajectories(); ++i) {
        auto t = ds.times(i);
        auto v = ds.values(i);
        for (std::size_t j = 0; j < t.size(); ++j) {
            auto it = std::lower_bound(grid.begin(), grid.end(), t[j]);
            if (it == grid.end() || *it != t[j]) {
                std::ostringstream msg;
                msg << "trajectory '" << ds.ids()[i] << "' has time " << t[j] << " off the grid";
                throw Error(ErrorKind::Alignment, msg.str());
            }
            m.values(static_cast<Eigen::Index>(i), it - grid.begin()) = v[j];
        }
    }
    return m;
}

}  // namespace

TrajectoryMatrix to_aligned_matrix(const Dataset& ds, Imputation impute) {
    return to_aligned_matrix(ds, impute, ds.time_grid());
}

TrajectoryMatrix to_aligned_matrix(const Dataset& ds, Imputation impute, const std::vector<double>& grid) {
    auto m = align(ds, grid);
    if (!m.has_missing()) return m;
    if (impute == Imputation::Fail) {
        for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
            if (m.values.row(i).array().isNaN().any()) {
                throw Error(ErrorKind::MissingData,
                            "trajectory '" + m.ids[static_cast<std::size_t>(i)] + "' has missing grid cells");
            }
        }
    }
    return impute_copy_mean(m);
}

TrajectoryMatrix impute_copy_mean(const TrajectoryMatrix& m) {
    TrajectoryMatrix out = m;
    const Eigen::Index n = m.values.rows();
    const Eigen::Index J = m.values.cols();
    Eigen::VectorXd means(J);
    for (Eigen::Index j = 0; j < J; ++j) {
        double total = 0.0;
        Eigen::Index count = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!std::isnan(m.values(i, j))) {
                total += m.values(i, j);
                ++count;
            }
        }
        if (count == 0) throw Error(ErrorKind::Imputation, "time column " + std::to_string(j) + " has no observations");
        means(j) = total / static_cast<double>(count);
    }

    std::vector<Eigen::Index> observed;
    for (Eigen::Index i = 0; i < n; ++i) {
        observed.clear();
        for (Eigen::Index j = 0; j < J; ++j) {
            if (!std::isnan(m.values(i, j))) observed.push_back(j);
        }
        if (observed.empty()) {
            throw Error(ErrorKind::Imputation,
                        "trajectory '" + m.ids[static_cast<std::size_t>(i)] + "' has no observed values");
        }
        if (static_cast<Eigen::Index>(observed.size()) == J) continue;
        auto dev = [&](Eigen::Index j) { return m.values(i, j) - means(j); };
        std::size_t next = 0;  // index into observed of the first observed column >= j
        for (Eigen::Index j = 0; j < J; ++j) {
            while (next < observed.size() && observed[next] < j) ++next;
            if (next < observed.size() && observed[next] == j) continue;
            if (next == 0) {
                out.values(i, j) = means(j) + dev(observed.front());
            } else if (next == observed.size()) {
                out.values(i, j) = means(j) + dev(observed.back());
            } else {
                const Eigen::Index a = observed[next - 1];
                const Eigen::Index b = observed[next];
                const double frac = static_cast<double>(j - a) / static_cast<double>(b - a);
                out.values(i, j) = means(j) + dev(a) + frac * (dev(b) - dev(a));
            }
        }
    }
    return out;
}

// --------------------------------------------------------------- simulator

SimulatedData simulate_pap(std::size_t n, std::size_t weeks, std::uint64_t seed, const PapSimulationConfig& c) {
    if (n < 3) throw Error(ErrorKind::Validation, "simulate_pap needs at least 3 trajectories");
    if (weeks < 2) throw Error(ErrorKind::Validation, "simulate_pap needs at least 2 weeks");

    auto n_adh = static_cast<std::size_t>(std::llround(c.adherent_share * static_cast<double>(n)));
    auto n_non = static_cast<std::size_t>(std::llround(c.nonadherent_share * static_cast<double>(n)));
    n_adh = std::clamp<std::size_t>(n_adh, 1, n - 2);
    n_non = std::clamp<std::size_t>(n_non, 1, n - n_adh - 1);
    const std::size_t n_imp = n - n_adh - n_non;

    struct Group {
        const char* name;
        double intercept;
        double slope;
        double intercept_sd;
    };
    const Group groups[3] = {
        {"Adherent", c.adherent_intercept, c.adherent_slope, c.adherent_intercept_sd},
        {"Non-adherent", c.nonadherent_intercept, c.nonadherent_slope, c.intercept_sd},
        {"Improvers", c.improver_intercept, c.improver_slope, c.intercept_sd},
    };
    std::vector<int> membership;
    membership.reserve(n);
    membership.insert(membership.end(), n_adh, 0);
    membership.insert(membership.end(), n_non, 1);
    membership.insert(membership.end(), n_imp, 2);

    Rng rng(seed);
    rng.shuffle(membership.begin(), membership.end());

    std::vector<Observation> obs;
    obs.reserve(n * weeks);
    GroundTruth truth;
    truth.group_names = {"Adherent", "Improvers", "Non-adherent"};
    for (std::size_t i = 0; i < n; ++i) {
        const Group& g = groups[membership[i]];
        const std::string id = std::to_string(i + 1);
        truth.assignments.emplace(id, g.name);
        const double intercept = g.intercept + g.intercept_sd * rng.normal();
        for (std::size_t w = 1; w <= weeks; ++w) {
            const double week = static_cast<double>(w);
            double y = intercept + g.slope * week + c.noise_sd * rng.normal();
            y = std::clamp(y, c.lower, c.upper);
            obs.push_back({id, week, y});
        }
    }
    Dataset ds(std::move(obs), Columns{"Patient", "Week", "UsageHours"}, truth);
    return {std::move(ds), std::move(truth)};
}

// --------------------------------------------------------------- resampling

Dataset resample(const Dataset& source, std::span<const std::string> drawn_ids) {
    std::unordered_map<std::string, int> seen;
    std::vector<Observation> obs;
    std::optional<GroundTruth> truth;
    if (source.truth()) {
        truth.emplace();
        truth->group_names = source.truth()->group_names;
    }
    for (const auto& id : drawn_ids) {
        auto idx = source.find(id);
        if (!idx) throw Error(ErrorKind::NotFound, "bootstrap recipe refers to unknown trajectory '" + id + "'");
        const int k = ++seen[id];
        const std::string label = k == 1 ? id : id + "#" + std::to_string(k);
        auto t = source.times(*idx);
        auto v = source.values(*idx);
        for (std::size_t j = 0; j < t.size(); ++j) obs.push_back({label, t[j], v[j]});
        if (truth) truth->assignments.emplace(label, source.truth()->assignments.at(id));
    }
    return Dataset(std::move(obs), source.columns(), std::move(truth));
}

nlohmann::json to_json(const Dataset& ds) {
    nlohmann::json j;
    j["ids"] = ds.ids();
    auto& arr = j["observations"] = nlohmann::json::array();
    for (const auto& o : ds.observations()) {
        arr.push_back({{"id", o.id}, {"time", o.time}, {"value", o.value}});
    }
    if (ds.truth()) {
        j["truth"] = {{"assignments", ds.truth()->assignments}, {"group_names", ds.truth()->group_names}};
    }
    return j;
}

}  // namespace trajclust
