#include "trajclust/feature.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>

#include "trajclust/errors.hpp"
#include "trajclust/kmeans.hpp"
#include "trajclust/mixture.hpp"

namespace trajclust {

Eigen::MatrixXd trajectory_coefficients(const Dataset& ds, int degree) {
    const auto b = degree + 1;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(ds.n_trajectories()), b);
    for (std::size_t i = 0; i < ds.n_trajectories(); ++i) {
        if (static_cast<int>(ds.length(i)) < b) {
            throw Error(ErrorKind::Degenerate, "trajectory '" + ds.ids()[i] + "' has " + std::to_string(ds.length(i)) +
                                                   " time points; degree " + std::to_string(degree) + " needs " +
                                                   std::to_string(b));
        }
        const Eigen::MatrixXd x = design_matrix(ds.times(i), degree);
        auto v = ds.values(i);
        const Eigen::Map<const Eigen::VectorXd> y(v.data(), static_cast<Eigen::Index>(v.size()));
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
        if (qr.rank() < b) throw Error(ErrorKind::Degenerate, "trajectory '" + ds.ids()[i] + "' has a rank-deficient design");
        out.row(static_cast<Eigen::Index>(i)) = qr.solve(y).transpose();
    }
    return out;
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out = x;
    const auto n = x.rows();
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double mean = x.col(c).mean();
        out.col(c).array() -= mean;
        if (n < 2) continue;
        const double sd = std::sqrt(out.col(c).squaredNorm() / static_cast<double>(n - 1));
        if (sd > 0.0) out.col(c) /= sd;
    }
    return out;
}

// --------------------------------------------------------------- registries

namespace {

struct FeatureRegistry {
    std::mutex mutex;
    std::map<std::string, RepresentationFn, std::less<>> representations;
    std::map<std::string, ClustererFn, std::less<>> clusterers;

    FeatureRegistry() {
        representations["ols"] = [](const Dataset& ds, const MethodSpec& spec) {
            return trajectory_coefficients(ds, static_cast<int>(spec.get_int("degree")));
        };
        representations["mean"] = [](const Dataset& ds, const MethodSpec&) {
            Eigen::MatrixXd m(static_cast<Eigen::Index>(ds.n_trajectories()), 1);
            for (std::size_t i = 0; i < ds.n_trajectories(); ++i) {
                auto v = ds.values(i);
                m(static_cast<Eigen::Index>(i), 0) = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
            }
            return m;
        };
        clusterers["kmeans"] = [](const Eigen::MatrixXd& x, const MethodSpec& spec, Rng& rng) {
            auto res = kmeans(x, spec.n_clusters(), static_cast<int>(spec.get_int("nstart")),
                              static_cast<int>(spec.get_int("maxIter")), rng);
            return FeaturePartition{res.assignments, spec.n_clusters()};
        };
        clusterers["threshold"] = [](const Eigen::MatrixXd& x, const MethodSpec& spec, Rng&) {
            auto thresholds = spec.get_list("thresholds");
            std::sort(thresholds.begin(), thresholds.end());
            FeaturePartition p;
            p.n_clusters = static_cast<int>(thresholds.size()) + 1;
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                int label = 0;
                for (double t : thresholds) label += x(i, 0) > t ? 1 : 0;
                p.labels.push_back(label);
            }
            return p;
        };
    }
};

FeatureRegistry& feature_registry() {
    static FeatureRegistry r;
    return r;
}

}  // namespace

void register_representation(const std::string& name, RepresentationFn fn) {
    auto& r = feature_registry();
    std::lock_guard lock(r.mutex);
    r.representations[name] = std::move(fn);
}

void register_clusterer(const std::string& name, ClustererFn fn) {
    auto& r = feature_registry();
    std::lock_guard lock(r.mutex);
    r.clusterers[name] = std::move(fn);
}

RepresentationFn find_representation(std::string_view name) {
    auto& r = feature_registry();
    std::lock_guard lock(r.mutex);
    auto it = r.representations.find(name);
    if (it == r.representations.end()) {
        throw Error(ErrorKind::Validation, "unknown representation '" + std::string(name) + "'");
    }
    return it->second;
}

ClustererFn find_clusterer(std::string_view name) {
    auto& r = feature_registry();
    std::lock_guard lock(r.mutex);
    auto it = r.clusterers.find(name);
    if (it == r.clusterers.end()) throw Error(ErrorKind::Validation, "unknown clusterer '" + std::string(name) + "'");
    return it->second;
}

// ------------------------------------------------------------ stratify rule

struct StratifyRule::Node {
    enum class Kind { Number, Summary, Unary, Binary, Compare, Cut };
    Kind kind = Kind::Number;
    double number = 0.0;
    std::string name;      // summary name, operator symbol
    std::string argument;  // summary argument (column), empty when bare
    std::vector<std::shared_ptr<const Node>> children;
    int bins = 0;
    std::vector<double> breaks;
};

namespace {

using Node = StratifyRule::Node;
using NodePtr = std::shared_ptr<const Node>;

const std::vector<std::string>& summary_names() {
    static const std::vector<std::string> names{"mean", "median", "min", "max", "first",
                                                "last", "slope", "sd",     "n"};
    return names;
}

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    NodePtr parse_rule() {
        skip();
        NodePtr node;
        if (peek_word() == "cut") {
            node = parse_cut();
        } else {
            node = parse_comparison();
        }
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(s_.substr(pos_)) + "'");
        return node;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::Rule, "cannot parse rule '" + std::string(s_) + "': " + what);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(std::string_view tok) {
        skip();
        if (s_.substr(pos_, tok.size()) == tok) {
            pos_ += tok.size();
            return true;
        }
        return false;
    }

    void expect(std::string_view tok) {
        if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
    }

    std::string_view peek_word() {
        skip();
        std::size_t e = pos_;
        while (e < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[e])) || s_[e] == '_' || s_[e] == '.')) ++e;
        if (e > pos_ && std::isdigit(static_cast<unsigned char>(s_[pos_]))) return {};
        return s_.substr(pos_, e - pos_);
    }

    std::optional<double> number() {
        skip();
        std::size_t e = pos_;
        if (e < s_.size() && (s_[e] == '-' || s_[e] == '+')) ++e;
        if (e >= s_.size() || !(std::isdigit(static_cast<unsigned char>(s_[e])) || s_[e] == '.')) return std::nullopt;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
        if (ec != std::errc()) return std::nullopt;
        pos_ = static_cast<std::size_t>(ptr - s_.data());
        return v;
    }

    NodePtr parse_cut() {
        accept("cut");
        expect("(");
        auto node = std::make_shared<Node>();
        node->kind = Node::Kind::Cut;
        node->children.push_back(parse_arith());
        expect(",");
        if (peek_word() == "c") {
            accept("c");
            expect("(");
            do {
                auto v = number();
                if (!v) fail("expected a break value");
                node->breaks.push_back(*v);
            } while (accept(","));
            expect(")");
            if (node->breaks.size() < 2) fail("cut needs at least two breaks");
            if (!std::is_sorted(node->breaks.begin(), node->breaks.end()) ||
                std::adjacent_find(node->breaks.begin(), node->breaks.end()) != node->breaks.end()) {
                fail("breaks must be strictly increasing");
            }
        } else {
            auto v = number();
            if (!v || *v < 1 || *v != std::floor(*v)) fail("cut needs a positive integer bin count or c(...)");
            node->bins = static_cast<int>(*v);
        }
        expect(")");
        return node;
    }

    NodePtr parse_comparison() {
        auto lhs = parse_arith();
        for (const char* op : {">=", "<=", "==", "!=", ">", "<"}) {
            if (accept(op)) {
                auto node = std::make_shared<Node>();
                node->kind = Node::Kind::Compare;
                node->name = op;
                node->children = {lhs, parse_arith()};
                return node;
            }
        }
        return lhs;
    }

    NodePtr parse_arith() {
        auto lhs = parse_term();
        while (true) {
            std::string op;
            if (accept("+")) op = "+";
            else if (accept("-")) op = "-";
            else return lhs;
            auto node = std::make_shared<Node>();
            node->kind = Node::Kind::Binary;
            node->name = op;
            node->children = {lhs, parse_term()};
            lhs = node;
        }
    }

    NodePtr parse_term() {
        auto lhs = parse_unary();
        while (true) {
            std::string op;
            if (accept("*")) op = "*";
            else if (accept("/")) op = "/";
            else return lhs;
            auto node = std::make_shared<Node>();
            node->kind = Node::Kind::Binary;
            node->name = op;
            node->children = {lhs, parse_unary()};
            lhs = node;
        }
    }

    NodePtr parse_unary() {
        if (accept("-")) {
            auto node = std::make_shared<Node>();
            node->kind = Node::Kind::Unary;
            node->name = "-";
            node->children = {parse_unary()};
            return node;
        }
        return parse_primary();
    }

    NodePtr parse_primary() {
        if (accept("(")) {
            auto inner = parse_arith();
            expect(")");
            return inner;
        }
        auto word = std::string(peek_word());
        if (!word.empty()) {
            pos_ += word.size();
            auto node = std::make_shared<Node>();
            node->kind = Node::Kind::Summary;
            node->name = word;
            if (accept("(")) {
                node->argument = std::string(peek_word());
                if (node->argument.empty()) fail("expected a column name in " + word + "(...)");
                pos_ += node->argument.size();
                expect(")");
            }
            return node;
        }
        auto v = number();
        if (!v) fail("expected a number, summary or '('");
        auto node = std::make_shared<Node>();
        node->kind = Node::Kind::Number;
        node->number = *v;
        return node;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

double summarize(const std::string& name, std::span<const double> t, std::span<const double> y) {
    const auto n = static_cast<double>(y.size());
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    if (name == "mean") return mean;
    if (name == "n") return n;
    if (name == "first") return y.front();
    if (name == "last") return y.back();
    if (name == "min") return *std::min_element(y.begin(), y.end());
    if (name == "max") return *std::max_element(y.begin(), y.end());
    if (name == "median") {
        std::vector<double> v(y.begin(), y.end());
        std::sort(v.begin(), v.end());
        const std::size_t h = v.size() / 2;
        return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
    }
    if (name == "sd") {
        if (y.size() < 2) return std::numeric_limits<double>::quiet_NaN();
        double ss = 0.0;
        for (double v : y) ss += (v - mean) * (v - mean);
        return std::sqrt(ss / (n - 1.0));
    }
    // slope
    if (y.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double tm = std::accumulate(t.begin(), t.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        sxy += (t[j] - tm) * (y[j] - mean);
        sxx += (t[j] - tm) * (t[j] - tm);
    }
    return sxy / sxx;
}

struct Value {
    double v = 0.0;
    bool logical = false;
};

Value eval(const Node& node, std::span<const double> t, std::span<const double> y, const std::string& response) {
    switch (node.kind) {
        case Node::Kind::Number:
            return {node.number, false};
        case Node::Kind::Summary: {
            const auto& names = summary_names();
            if (std::find(names.begin(), names.end(), node.name) == names.end()) {
                throw Error(ErrorKind::Rule, "unknown variable or function '" + node.name + "'");
            }
            if (!node.argument.empty() && node.argument != response && node.argument != "response") {
                throw Error(ErrorKind::Rule, "unknown variable '" + node.argument + "'");
            }
            return {summarize(node.name, t, y), false};
        }
        case Node::Kind::Unary:
            return {-eval(*node.children[0], t, y, response).v, false};
        case Node::Kind::Binary: {
            const double a = eval(*node.children[0], t, y, response).v;
            const double b = eval(*node.children[1], t, y, response).v;
            if (node.name == "+") return {a + b, false};
            if (node.name == "-") return {a - b, false};
            if (node.name == "*") return {a * b, false};
            return {a / b, false};
        }
        case Node::Kind::Compare: {
            const double a = eval(*node.children[0], t, y, response).v;
            const double b = eval(*node.children[1], t, y, response).v;
            bool r = false;
            if (node.name == ">") r = a > b;
            else if (node.name == ">=") r = a >= b;
            else if (node.name == "<") r = a < b;
            else if (node.name == "<=") r = a <= b;
            else if (node.name == "==") r = a == b;
            else r = a != b;
            return {r ? 1.0 : 0.0, true};
        }
        case Node::Kind::Cut:
            break;
    }
    throw Error(ErrorKind::Rule, "cut() is only allowed at the top level of a rule");
}

std::string format3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

std::string format_short(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

StratifyRule StratifyRule::parse(std::string_view text) {
    StratifyRule r;
    r.text_ = std::string(text);
    r.root_ = Parser(text).parse_rule();
    return r;
}

StratifyRule::Strata StratifyRule::evaluate(const Dataset& ds) const {
    if (!root_) throw Error(ErrorKind::Rule, "empty stratification rule");
    const auto& response = ds.columns().response;
    const bool is_cut = root_->kind == Node::Kind::Cut;
    const Node& expr = is_cut ? *root_->children[0] : *root_;

    std::vector<double> values(ds.n_trajectories());
    bool logical = false;
    for (std::size_t i = 0; i < ds.n_trajectories(); ++i) {
        auto v = eval(expr, ds.times(i), ds.values(i), response);
        if (std::isnan(v.v)) {
            throw Error(ErrorKind::Rule, "rule '" + text_ + "' is undefined for trajectory '" + ds.ids()[i] + "'");
        }
        values[i] = v.v;
        logical = v.logical;
    }

    Strata out;
    out.labels.resize(values.size());
    if (is_cut) {
        if (root_->bins > 0) {
            if (values.empty()) throw Error(ErrorKind::Rule, "cannot cut an empty dataset");
            const double lo = *std::min_element(values.begin(), values.end());
            const double hi = *std::max_element(values.begin(), values.end());
            const int nb = root_->bins;
            double dx = hi - lo;
            if (dx == 0.0) {
                dx = std::abs(lo);
                if (dx == 0.0) dx = 1.0;
                out.breaks.resize(static_cast<std::size_t>(nb) + 1);
                const double a = lo - dx / 1000.0;
                const double b = hi + dx / 1000.0;
                for (int j = 0; j <= nb; ++j) out.breaks[static_cast<std::size_t>(j)] = a + (b - a) * j / nb;
            } else {
                out.breaks.resize(static_cast<std::size_t>(nb) + 1);
                for (int j = 0; j <= nb; ++j) out.breaks[static_cast<std::size_t>(j)] = lo + dx * j / nb;
                out.breaks.front() = lo - dx / 1000.0;
                out.breaks.back() = hi + dx / 1000.0;
            }
        } else {
            out.breaks = root_->breaks;
        }
        const auto nb = out.breaks.size() - 1;
        for (std::size_t i = 0; i < values.size(); ++i) {
            // right-closed intervals (b[j], b[j+1]]
            auto it = std::lower_bound(out.breaks.begin(), out.breaks.end(), values[i]);
            if (it == out.breaks.begin() || it == out.breaks.end()) {
                throw Error(ErrorKind::Rule, "value " + format_short(values[i]) + " of trajectory '" + ds.ids()[i] +
                                                 "' falls outside the cut breaks");
            }
            out.labels[i] = static_cast<int>(it - out.breaks.begin()) - 1;
        }
        for (std::size_t j = 0; j < nb; ++j) {
            out.level_names.push_back("(" + format3(out.breaks[j]) + "," + format3(out.breaks[j + 1]) + "]");
        }
        out.n_clusters = static_cast<int>(nb);
    } else if (logical) {
        for (std::size_t i = 0; i < values.size(); ++i) out.labels[i] = values[i] != 0.0 ? 1 : 0;
        out.level_names = {"FALSE", "TRUE"};
        out.n_clusters = 2;
    } else {
        std::vector<double> levels = values;
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        for (std::size_t i = 0; i < values.size(); ++i) {
            out.labels[i] = static_cast<int>(std::lower_bound(levels.begin(), levels.end(), values[i]) - levels.begin());
        }
        for (double l : levels) out.level_names.push_back(format_short(l));
        out.n_clusters = static_cast<int>(std::max<std::size_t>(levels.size(), 1));
    }
    return out;
}

}  // namespace trajclust
