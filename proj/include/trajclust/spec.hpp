#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace trajclust {

using ArgValue = std::variant<bool, std::int64_t, double, std::string, std::vector<double>>;
using ArgMap = std::map<std::string, ArgValue, std::less<>>;

std::string format_arg(const ArgValue& v);
nlohmann::json to_json(const ArgValue& v);
ArgValue arg_from_json(const nlohmann::json& j);

/// Parses a command-line style value: true/false, integer, real,
/// comma-separated real list (with at least one comma or written as [..]),
/// otherwise string.
ArgValue parse_arg(std::string_view text);

/// Immutable, named argument bundle identifying a clustering method.
class MethodSpec {
public:
    MethodSpec(std::string method, ArgMap args, std::string provenance = {});

    const std::string& method() const { return method_; }
    const ArgMap& args() const { return args_; }
    const std::string& provenance() const { return provenance_; }

    bool has(std::string_view name) const { return args_.find(name) != args_.end(); }
    const ArgValue& at(std::string_view name) const;

    std::int64_t get_int(std::string_view name) const;
    double get_double(std::string_view name) const;
    bool get_bool(std::string_view name) const;
    const std::string& get_string(std::string_view name) const;
    std::vector<double> get_list(std::string_view name) const;

    int n_clusters() const { return static_cast<int>(get_int("nClusters")); }

    /// Human-readable listing, one argument per line.
    std::string describe() const;

    /// Equality covers method and arguments; provenance is metadata.
    friend bool operator==(const MethodSpec& a, const MethodSpec& b) {
        return a.method_ == b.method_ && a.args_ == b.args_;
    }

private:
    std::string method_;
    ArgMap args_;
    std::string provenance_;
};

/// New spec for a registered method: method defaults, then overrides.
/// Unset id/time/response defaults are empty and bind to the dataset's
/// columns at estimation (TRAJCLUSTER_ID / TRAJCLUSTER_TIME override them).
MethodSpec spec_new(const std::string& method, const ArgMap& overrides = {});

MethodSpec spec_update(const MethodSpec& spec, const ArgMap& overrides);

std::vector<MethodSpec> spec_permute(const MethodSpec& spec, const std::string& arg,
                                     const std::vector<ArgValue>& values);

nlohmann::json to_json(const MethodSpec& spec);
MethodSpec spec_from_json(const nlohmann::json& j);

}  // namespace trajclust
