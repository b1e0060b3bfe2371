#include "trajclust/spec.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

#include "trajclust/errors.hpp"
#include "trajclust/method.hpp"

namespace trajclust {

namespace {

std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

std::string describe_overrides(const ArgMap& args) {
    std::string out;
    for (const auto& [k, v] : args) {
        if (!out.empty()) out += ", ";
        out += k + " = " + format_arg(v);
    }
    return out;
}

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return (v != nullptr && *v != '\0') ? std::string(v) : fallback;
}

}  // namespace

std::string format_arg(const ArgValue& v) {
    return std::visit(overloaded{
                          [](bool b) -> std::string { return b ? "true" : "false"; },
                          [](std::int64_t i) { return std::to_string(i); },
                          [](double d) { return shortest(d); },
                          [](const std::string& s) { return "\"" + s + "\""; },
                          [](const std::vector<double>& l) {
                              std::string out = "[";
                              for (std::size_t i = 0; i < l.size(); ++i) {
                                  if (i) out += ", ";
                                  out += shortest(l[i]);
                              }
                              return out + "]";
                          },
                      },
                      v);
}

nlohmann::json to_json(const ArgValue& v) {
    return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

ArgValue arg_from_json(const nlohmann::json& j) {
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    if (j.is_array()) return j.get<std::vector<double>>();
    throw Error(ErrorKind::Parse, "unsupported argument value " + j.dump());
}

ArgValue parse_arg(std::string_view text) {
    if (text == "true" || text == "TRUE") return true;
    if (text == "false" || text == "FALSE") return false;
    {
        std::int64_t i = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
        if (ec == std::errc() && ptr == text.data() + text.size() && !text.empty()) return i;
    }
    auto parse_double = [](std::string_view s) -> std::optional<double> {
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
        double d = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
        if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty()) return d;
        return std::nullopt;
    };
    if (auto d = parse_double(text)) return *d;
    std::string_view body = text;
    bool bracketed = false;
    if (body.size() >= 2 && body.front() == '[' && body.back() == ']') {
        body = body.substr(1, body.size() - 2);
        bracketed = true;
    }
    if (bracketed || body.find(',') != std::string_view::npos) {
        std::vector<double> list;
        bool ok = true;
        std::size_t start = 0;
        while (ok && start <= body.size() && !body.empty()) {
            auto end = body.find(',', start);
            if (end == std::string_view::npos) end = body.size();
            auto d = parse_double(body.substr(start, end - start));
            if (!d) ok = false;
            else list.push_back(*d);
            start = end + 1;
        }
        if (ok) return list;
    }
    return std::string(text);
}

MethodSpec::MethodSpec(std::string method, ArgMap args, std::string provenance)
    : method_(std::move(method)), args_(std::move(args)), provenance_(std::move(provenance)) {
    for (const char* key : {"id", "time", "response"}) {
        if (!has(key)) args_.emplace(key, std::string());
    }
    if (!has("nClusters")) args_.emplace("nClusters", std::int64_t{2});
    const auto& k = args_.at("nClusters");
    const auto* ki = std::get_if<std::int64_t>(&k);
    const auto* kd = std::get_if<double>(&k);
    if (kd != nullptr && *kd == static_cast<double>(static_cast<std::int64_t>(*kd))) {
        args_["nClusters"] = static_cast<std::int64_t>(*kd);
        ki = std::get_if<std::int64_t>(&args_.at("nClusters"));
    }
    if (ki == nullptr || *ki < 1) {
        throw Error(ErrorKind::Validation, "nClusters must be an integer >= 1, got " + format_arg(k));
    }
    if (provenance_.empty()) provenance_ = method_ + "()";
}

const ArgValue& MethodSpec::at(std::string_view name) const {
    auto it = args_.find(name);
    if (it == args_.end()) {
        throw Error(ErrorKind::Validation, "method '" + method_ + "' has no argument '" + std::string(name) + "'");
    }
    return it->second;
}

std::int64_t MethodSpec::get_int(std::string_view name) const {
    const auto& v = at(name);
    if (auto p = std::get_if<std::int64_t>(&v)) return *p;
    if (auto p = std::get_if<double>(&v); p && *p == static_cast<double>(static_cast<std::int64_t>(*p))) {
        return static_cast<std::int64_t>(*p);
    }
    if (auto p = std::get_if<bool>(&v)) return *p ? 1 : 0;
    throw Error(ErrorKind::Validation, "argument '" + std::string(name) + "' must be an integer");
}

double MethodSpec::get_double(std::string_view name) const {
    const auto& v = at(name);
    if (auto p = std::get_if<double>(&v)) return *p;
    if (auto p = std::get_if<std::int64_t>(&v)) return static_cast<double>(*p);
    throw Error(ErrorKind::Validation, "argument '" + std::string(name) + "' must be a number");
}

bool MethodSpec::get_bool(std::string_view name) const {
    const auto& v = at(name);
    if (auto p = std::get_if<bool>(&v)) return *p;
    if (auto p = std::get_if<std::int64_t>(&v)) return *p != 0;
    throw Error(ErrorKind::Validation, "argument '" + std::string(name) + "' must be a logical");
}

const std::string& MethodSpec::get_string(std::string_view name) const {
    const auto& v = at(name);
    if (auto p = std::get_if<std::string>(&v)) return *p;
    throw Error(ErrorKind::Validation, "argument '" + std::string(name) + "' must be a string");
}

std::vector<double> MethodSpec::get_list(std::string_view name) const {
    const auto& v = at(name);
    if (auto p = std::get_if<std::vector<double>>(&v)) return *p;
    if (auto p = std::get_if<double>(&v)) return {*p};
    if (auto p = std::get_if<std::int64_t>(&v)) return {static_cast<double>(*p)};
    throw Error(ErrorKind::Validation, "argument '" + std::string(name) + "' must be a numeric list");
}

std::string MethodSpec::describe() const {
    std::ostringstream out;
    std::string label = method_;
    if (auto m = find_method(method_)) label = m->label();
    out << "method " << method_ << " specifying \"" << label << "\"\n";
    for (const auto& [k, v] : args_) {
        std::string key = " " + k + ":";
        if (key.size() < 18) key.resize(18, ' ');
        out << key << format_arg(v) << "\n";
    }
    return out.str();
}

MethodSpec spec_new(const std::string& method, const ArgMap& overrides) {
    auto m = find_method(method);
    if (!m) throw Error(ErrorKind::UnknownMethod, "unknown method '" + method + "'");
    ArgMap args = m->defaults();
    args.insert_or_assign("id", env_or("TRAJCLUSTER_ID", ""));
    args.insert_or_assign("time", env_or("TRAJCLUSTER_TIME", ""));
    if (!args.count("response")) args.emplace("response", std::string());
    if (!args.count("nClusters")) args.emplace("nClusters", std::int64_t{2});
    for (const auto& [k, v] : overrides) args.insert_or_assign(k, v);
    return MethodSpec(method, std::move(args), method + "(" + describe_overrides(overrides) + ")");
}

MethodSpec spec_update(const MethodSpec& spec, const ArgMap& overrides) {
    if (overrides.empty()) return spec;
    ArgMap args = spec.args();
    for (const auto& [k, v] : overrides) args.insert_or_assign(k, v);
    return MethodSpec(spec.method(), std::move(args),
                      spec.provenance() + " |> update(" + describe_overrides(overrides) + ")");
}

std::vector<MethodSpec> spec_permute(const MethodSpec& spec, const std::string& arg,
                                     const std::vector<ArgValue>& values) {
    if (values.empty()) throw Error(ErrorKind::Validation, "spec_permute needs at least one value");
    std::vector<MethodSpec> out;
    out.reserve(values.size());
    for (const auto& v : values) out.push_back(spec_update(spec, {{arg, v}}));
    return out;
}

nlohmann::json to_json(const MethodSpec& spec) {
    nlohmann::json args = nlohmann::json::object();
    for (const auto& [k, v] : spec.args()) args[k] = to_json(v);
    return {{"method", spec.method()}, {"args", args}};
}

MethodSpec spec_from_json(const nlohmann::json& j) {
    ArgMap args;
    for (const auto& [k, v] : j.at("args").items()) args.emplace(k, arg_from_json(v));
    return MethodSpec(j.at("method").get<std::string>(), std::move(args));
}

}  // namespace trajclust
