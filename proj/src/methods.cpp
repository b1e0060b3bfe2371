#include <cmath>
#include <limits>

#include "builtin_methods.hpp"
#include "trajclust/distance.hpp"
#include "trajclust/errors.hpp"
#include "trajclust/feature.hpp"
#include "trajclust/kmeans.hpp"
#include "trajclust/mixture.hpp"

namespace trajclust {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd hard_postprob(const std::vector<int>& labels, int k) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), k);
    for (std::size_t i = 0; i < labels.size(); ++i) p(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    return p;
}

void require_k_le_n(const FitContext& ctx) {
    const auto n = ctx.data->n_trajectories();
    if (static_cast<std::size_t>(ctx.spec.n_clusters()) > n) {
        throw Error(ErrorKind::Infeasible, "cannot form " + std::to_string(ctx.spec.n_clusters()) +
                                               " clusters from " + std::to_string(n) + " trajectories");
    }
}

void require_positive(const MethodSpec& spec, const char* name) {
    if (spec.get_int(name) < 1) throw Error(ErrorKind::Validation, std::string(name) + " must be >= 1");
}

void flag_duplicate_centers(const Eigen::MatrixXd& centers, std::vector<std::string>& diagnostics) {
    for (Eigen::Index a = 0; a < centers.rows(); ++a) {
        for (Eigen::Index b = a + 1; b < centers.rows(); ++b) {
            if (centers.row(a) == centers.row(b)) {
                diagnostics.push_back("duplicate cluster centers");
                return;
            }
        }
    }
}

std::vector<double> row_vector(const Eigen::MatrixXd& m, Eigen::Index r) {
    std::vector<double> out(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[static_cast<std::size_t>(c)] = m(r, c);
    return out;
}

std::vector<double> vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json j = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) j.push_back(row_vector(m, r));
    return j;
}

// ---------------------------------------------------------------------- kml

class KmlMethod final : public Method {
public:
    std::string name() const override { return "kml"; }
    std::string label() const override { return "longitudinal k-means (KmL)"; }
    ArgMap defaults() const override {
        return {{"nstart", std::int64_t{20}}, {"maxIter", std::int64_t{200}}, {"imputation", std::string("copyMean")}};
    }
    void prepare_data(FitContext& ctx) const override {
        ctx.matrix = to_aligned_matrix(*ctx.data, parse_imputation(ctx.spec.get_string("imputation")));
    }
    void validate(const FitContext& ctx) const override {
        Method::validate(ctx);
        require_positive(ctx.spec, "nstart");
        require_positive(ctx.spec, "maxIter");
        require_k_le_n(ctx);
    }
    FitResult fit(FitContext& ctx) const override {
        const auto& m = *ctx.matrix;
        const int k = ctx.spec.n_clusters();
        auto res = kmeans(m.values, k, static_cast<int>(ctx.spec.get_int("nstart")),
                          static_cast<int>(ctx.spec.get_int("maxIter")), ctx.rng);
        FitResult out;
        out.postprob = hard_postprob(res.assignments, k);
        for (int c = 0; c < k; ++c) out.curves.emplace_back(PiecewiseLinear{m.times, row_vector(res.centers, c)});
        out.converged = res.converged;
        out.details = {{"within_ss", res.within_ss}, {"iterations", res.iterations}};
        flag_duplicate_centers(res.centers, out.diagnostics);
        return out;
    }
};

// --------------------------------------------------------------------- lmkm

class LmkmMethod final : public Method {
public:
    std::string name() const override { return "lmkm"; }
    std::string label() const override { return "lm-kmeans"; }
    ArgMap defaults() const override {
        return {{"degree", std::int64_t{1}},
                {"standardize", true},
                {"nstart", std::int64_t{20}},
                {"maxIter", std::int64_t{100}}};
    }
    void validate(const FitContext& ctx) const override {
        Method::validate(ctx);
        if (ctx.spec.get_int("degree") < 0) throw Error(ErrorKind::Validation, "degree must be >= 0");
        require_positive(ctx.spec, "nstart");
        require_positive(ctx.spec, "maxIter");
        require_k_le_n(ctx);
    }
    FitResult fit(FitContext& ctx) const override {
        const int degree = static_cast<int>(ctx.spec.get_int("degree"));
        const int k = ctx.spec.n_clusters();
        const Eigen::MatrixXd coef = trajectory_coefficients(*ctx.data, degree);
        const Eigen::MatrixXd x = ctx.spec.get_bool("standardize") ? standardize_columns(coef) : coef;
        auto res = kmeans(x, k, static_cast<int>(ctx.spec.get_int("nstart")),
                          static_cast<int>(ctx.spec.get_int("maxIter")), ctx.rng);
        FitResult out;
        out.postprob = hard_postprob(res.assignments, k);
        Eigen::MatrixXd mean_coef = Eigen::MatrixXd::Zero(k, coef.cols());
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < res.assignments.size(); ++i) {
            mean_coef.row(res.assignments[i]) += coef.row(static_cast<Eigen::Index>(i));
            ++counts[static_cast<std::size_t>(res.assignments[i])];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                mean_coef.row(c) /= counts[static_cast<std::size_t>(c)];
            } else {
                mean_coef.row(c).setConstant(kNaN);
            }
            out.curves.emplace_back(Polynomial{row_vector(mean_coef, c)});
        }
        out.converged = res.converged;
        out.details = {{"within_ss", res.within_ss}, {"coefficients", matrix_json(mean_coef)}};
        flag_duplicate_centers(res.centers, out.diagnostics);
        return out;
    }
};

// ------------------------------------------------------------ mixture models

EmSettings em_settings(const FitContext& ctx) {
    EmSettings s;
    s.k = ctx.spec.n_clusters();
    s.degree = static_cast<int>(ctx.spec.get_int("degree"));
    s.starts = static_cast<int>(ctx.spec.get_int("starts"));
    s.max_iter = static_cast<int>(ctx.spec.get_int("maxIter"));
    s.tol = ctx.spec.get_double("tol");
    s.workers = ctx.workers;
    return s;
}

void validate_em(const FitContext& ctx) {
    if (ctx.spec.get_int("degree") < 0) throw Error(ErrorKind::Validation, "degree must be >= 0");
    require_positive(ctx.spec, "starts");
    require_positive(ctx.spec, "maxIter");
    if (!(ctx.spec.get_double("tol") > 0.0)) throw Error(ErrorKind::Validation, "tol must be positive");
    require_k_le_n(ctx);
}

template <class Fit>
void fill_em_result(const Fit& fit, int k, FitResult& out) {
    out.converged = fit.converged;
    if (fit.postprob.size() == 0) {
        out.postprob = Eigen::MatrixXd::Constant(0, k, 1.0 / k);
        out.diagnostics.push_back("all EM starts collapsed");
        return;
    }
    out.postprob = fit.postprob;
    for (int c = 0; c < k; ++c) out.curves.emplace_back(Polynomial{row_vector(fit.params.beta, c)});
    out.log_likelihood = fit.log_likelihood;
    if (fit.collapsed_starts > 0) {
        out.diagnostics.push_back(std::to_string(fit.collapsed_starts) + " EM start(s) collapsed and were replaced");
    }
}

void fill_collapsed(std::size_t n, int k, int degree, FitResult& out) {
    out.postprob = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(n), k, 1.0 / k);
    out.curves.assign(static_cast<std::size_t>(k), ClusterCurve(Polynomial{std::vector<double>(degree + 1, kNaN)}));
}

class GbtmMethod final : public Method {
public:
    std::string name() const override { return "gbtm"; }
    std::string label() const override { return "group-based trajectory model"; }
    ArgMap defaults() const override {
        return {{"degree", std::int64_t{1}},   {"starts", std::int64_t{10}},  {"maxIter", std::int64_t{500}},
                {"tol", 1e-8},                 {"cluster_variances", false}};
    }
    void validate(const FitContext& ctx) const override {
        Method::validate(ctx);
        validate_em(ctx);
    }
    FitResult fit(FitContext& ctx) const override {
        EmSettings s = em_settings(ctx);
        s.cluster_variances = ctx.spec.get_bool("cluster_variances");
        const auto fit = fit_gbtm(*ctx.data, s, ctx.rng.next());
        FitResult out;
        fill_em_result(fit, s.k, out);
        if (fit.postprob.size() == 0) {
            fill_collapsed(ctx.data->n_trajectories(), s.k, s.degree, out);
            return out;
        }
        out.n_params = gbtm_parameter_count(s.k, s.degree, s.cluster_variances);
        out.details = {{"beta", matrix_json(fit.params.beta)},
                       {"sigma2", vec(fit.params.sigma2)},
                       {"pi", vec(fit.params.pi)},
                       {"iterations", fit.iterations},
                       {"loglik_trace", fit.trace}};
        return out;
    }
};

class GmmMethod final : public Method {
public:
    std::string name() const override { return "gmm"; }
    std::string label() const override { return "growth mixture model (random intercept)"; }
    ArgMap defaults() const override {
        return {{"degree", std::int64_t{1}}, {"starts", std::int64_t{10}}, {"maxIter", std::int64_t{500}},
                {"tol", 1e-8},               {"idiag", true},              {"random_intercept", true}};
    }
    void validate(const FitContext& ctx) const override {
        Method::validate(ctx);
        validate_em(ctx);
    }
    FitResult fit(FitContext& ctx) const override {
        EmSettings s = em_settings(ctx);
        s.random_intercept = ctx.spec.get_bool("random_intercept");
        const auto fit = fit_gmm(*ctx.data, s, ctx.rng.next());
        FitResult out;
        fill_em_result(fit, s.k, out);
        if (fit.postprob.size() == 0) {
            fill_collapsed(ctx.data->n_trajectories(), s.k, s.degree, out);
            return out;
        }
        out.n_params = s.random_intercept ? gmm_parameter_count(s.k, s.degree)
                                          : gbtm_parameter_count(s.k, s.degree, false);
        out.details = {{"beta", matrix_json(fit.params.beta)},
                       {"sigma2_e", fit.params.sigma2_e},
                       {"sigma2_u", fit.params.sigma2_u},
                       {"pi", vec(fit.params.pi)},
                       {"iterations", fit.iterations},
                       {"loglik_trace", fit.trace}};
        return out;
    }
};

// ----------------------------------------------------------------- kmedoids

class KmedoidsMethod final : public Method {
public:
    std::string name() const override { return "kmedoids"; }
    std::string label() const override { return "k-medoids (PAM)"; }
    ArgMap defaults() const override {
        return {{"distance", std::string("euclidean")},
                {"window", std::int64_t{-1}},
                {"maxN", std::int64_t{5000}},
                {"imputation", std::string("copyMean")}};
    }
    void prepare_data(FitContext& ctx) const override {
        if (ctx.spec.get_string("distance") == "euclidean") {
            ctx.matrix = to_aligned_matrix(*ctx.data, parse_imputation(ctx.spec.get_string("imputation")));
        }
    }
    void validate(const FitContext& ctx) const override {
        Method::validate(ctx);
        const auto& d = ctx.spec.get_string("distance");
        if (d != "euclidean" && d != "dtw") {
            throw Error(ErrorKind::Validation, "unknown distance '" + d + "' (expected euclidean or dtw)");
        }
        const auto cap = ctx.spec.get_int("maxN");
        if (static_cast<std::int64_t>(ctx.data->n_trajectories()) > cap) {
            throw Error(ErrorKind::Capacity, std::to_string(ctx.data->n_trajectories()) +
                                                 " trajectories exceed the distance-matrix cap maxN = " +
                                                 std::to_string(cap));
        }
        require_k_le_n(ctx);
    }
    FitResult fit(FitContext& ctx) const override {
        const int k = ctx.spec.n_clusters();
        const bool dtw = ctx.spec.get_string("distance") == "dtw";
        const DistanceMatrix d = dtw ? dtw_matrix(*ctx.data, static_cast<int>(ctx.spec.get_int("window")), ctx.workers)
                                     : euclidean_matrix(ctx.matrix->values, ctx.workers);
        const auto res = pam(d, k);
        FitResult out;
        out.postprob = hard_postprob(res.assignments, k);
        nlohmann::json medoid_ids = nlohmann::json::array();
        for (auto m : res.medoids) {
            medoid_ids.push_back(ctx.data->ids()[m]);
            if (dtw) {
                auto t = ctx.data->times(m);
                auto v = ctx.data->values(m);
                out.curves.emplace_back(PiecewiseLinear{{t.begin(), t.end()}, {v.begin(), v.end()}});
            } else {
                out.curves.emplace_back(PiecewiseLinear{ctx.matrix->times, row_vector(ctx.matrix->values, static_cast<Eigen::Index>(m))});
            }
        }
        out.details = {{"medoids", medoid_ids}, {"total_cost", res.total_cost}, {"swaps", res.swaps}};
        return out;
    }
};

// ----------------------------------------------------------------- stratify

class StratifyMethod final : public Method {
public:
    std::string name() const override { return "stratify"; }
    std::string label() const override { return "stratification rule"; }
    ArgMap defaults() const override { return {{"stratify", std::string()}, {"center", std::string("mean")}}; }
    void validate(const FitContext& ctx) const override {
        Method::validate(ctx);
        if (ctx.spec.get_string("stratify").empty()) throw Error(ErrorKind::Validation, "stratify rule is empty");
        StratifyRule::parse(ctx.spec.get_string("stratify"));
        parse_center(ctx.spec.get_string("center"));
    }
    FitResult fit(FitContext& ctx) const override {
        const auto strata = StratifyRule::parse(ctx.spec.get_string("stratify")).evaluate(*ctx.data);
        ctx.spec = spec_update(ctx.spec, {{"nClusters", std::int64_t{strata.n_clusters}}});
        FitResult out;
        out.postprob = hard_postprob(strata.labels, strata.n_clusters);
        out.curves = partition_curves(*ctx.data, strata.labels, strata.n_clusters, parse_center(ctx.spec.get_string("center")));
        out.cluster_names = default_cluster_names(static_cast<std::size_t>(strata.n_clusters));
        out.details = {{"levels", strata.level_names}};
        if (!strata.breaks.empty()) out.details["breaks"] = strata.breaks;
        return out;
    }
};

// ------------------------------------------------------------------- random

class RandomMethod final : public Method {
public:
    std::string name() const override { return "random"; }
    std::string label() const override { return "random partitioning"; }
    ArgMap defaults() const override { return {{"center", std::string("mean")}}; }
    void validate(const FitContext& ctx) const override {
        Method::validate(ctx);
        parse_center(ctx.spec.get_string("center"));
        require_k_le_n(ctx);
    }
    FitResult fit(FitContext& ctx) const override {
        const int k = ctx.spec.n_clusters();
        std::vector<int> labels(ctx.data->n_trajectories());
        for (auto& l : labels) l = static_cast<int>(ctx.rng.index(static_cast<std::size_t>(k)));
        FitResult out;
        out.postprob = hard_postprob(labels, k);
        out.curves = partition_curves(*ctx.data, labels, k, parse_center(ctx.spec.get_string("center")));
        return out;
    }
};

// ------------------------------------------------------------------ feature

class FeatureMethod final : public Method {
public:
    std::string name() const override { return "feature"; }
    std::string label() const override { return "feature-based clustering"; }
    ArgMap defaults() const override {
        return {{"representation", std::string("ols")},
                {"clusterer", std::string("kmeans")},
                {"degree", std::int64_t{1}},
                {"nstart", std::int64_t{20}},
                {"maxIter", std::int64_t{100}},
                {"thresholds", std::vector<double>{}},
                {"center", std::string("mean")}};
    }
    void validate(const FitContext& ctx) const override {
        Method::validate(ctx);
        find_representation(ctx.spec.get_string("representation"));
        find_clusterer(ctx.spec.get_string("clusterer"));
        parse_center(ctx.spec.get_string("center"));
    }
    FitResult fit(FitContext& ctx) const override {
        const auto n = ctx.data->n_trajectories();
        const Eigen::MatrixXd x = find_representation(ctx.spec.get_string("representation"))(*ctx.data, ctx.spec);
        if (static_cast<std::size_t>(x.rows()) != n) {
            throw Error(ErrorKind::Contract, "representation returned " + std::to_string(x.rows()) + " rows for " +
                                                 std::to_string(n) + " trajectories");
        }
        auto part = find_clusterer(ctx.spec.get_string("clusterer"))(x, ctx.spec, ctx.rng);
        if (part.labels.size() != n) {
            throw Error(ErrorKind::Contract, "clusterer returned " + std::to_string(part.labels.size()) +
                                                 " labels for " + std::to_string(n) + " trajectories");
        }
        for (int l : part.labels) {
            if (l < 0 || l >= part.n_clusters) throw Error(ErrorKind::Contract, "clusterer label outside [0, K)");
        }
        if (part.n_clusters != ctx.spec.n_clusters()) {
            ctx.spec = spec_update(ctx.spec, {{"nClusters", std::int64_t{part.n_clusters}}});
        }
        FitResult out;
        out.postprob = hard_postprob(part.labels, part.n_clusters);
        out.curves = partition_curves(*ctx.data, part.labels, part.n_clusters, parse_center(ctx.spec.get_string("center")));
        bool constant = true;
        for (Eigen::Index i = 1; i < x.rows() && constant; ++i) constant = x.row(i) == x.row(0);
        if (constant && n > 0) out.diagnostics.push_back("constant representation: single effective cluster");
        return out;
    }
};

}  // namespace

std::vector<std::shared_ptr<const Method>> builtin_methods() {
    return {std::make_shared<KmlMethod>(),      std::make_shared<LmkmMethod>(),     std::make_shared<GbtmMethod>(),
            std::make_shared<GmmMethod>(),      std::make_shared<KmedoidsMethod>(), std::make_shared<StratifyMethod>(),
            std::make_shared<RandomMethod>(),   std::make_shared<FeatureMethod>()};
}

}  // namespace trajclust
