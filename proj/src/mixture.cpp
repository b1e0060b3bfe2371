#include "trajclust/mixture.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "trajclust/errors.hpp"
#include "trajclust/harness.hpp"
#include "trajclust/rng.hpp"

namespace trajclust {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kVarianceFloor = 1e-10;

struct Trajectory {
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
    Eigen::MatrixXd xtx;
    Eigen::VectorXd xty;
    Eigen::VectorXd xt1;  // column sums of x
    double sum_y = 0.0;
    double n = 0.0;
};

std::vector<Trajectory> prepare(const Dataset& ds, int degree) {
    std::vector<Trajectory> out(ds.n_trajectories());
    for (std::size_t i = 0; i < ds.n_trajectories(); ++i) {
        auto& t = out[i];
        auto v = ds.values(i);
        t.y = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        t.x = design_matrix(ds.times(i), degree);
        t.xtx = t.x.transpose() * t.x;
        t.xty = t.x.transpose() * t.y;
        t.xt1 = t.x.colwise().sum().transpose();
        t.sum_y = t.y.sum();
        t.n = static_cast<double>(v.size());
    }
    return out;
}

double total_obs(const std::vector<Trajectory>& data) {
    double n = 0.0;
    for (const auto& t : data) n += t.n;
    return n;
}

/// Row-wise log-sum-exp normalization; returns the summed log normalizers.
double normalize_rows(const Eigen::MatrixXd& logp, Eigen::MatrixXd& postprob) {
    postprob.resize(logp.rows(), logp.cols());
    double ll = 0.0;
    for (Eigen::Index i = 0; i < logp.rows(); ++i) {
        const double mx = logp.row(i).maxCoeff();
        double s = 0.0;
        for (Eigen::Index k = 0; k < logp.cols(); ++k) s += std::exp(logp(i, k) - mx);
        const double lse = mx + std::log(s);
        ll += lse;
        double total = 0.0;
        for (Eigen::Index k = 0; k < logp.cols(); ++k) {
            postprob(i, k) = std::exp(logp(i, k) - lse);
            total += postprob(i, k);
        }
        postprob.row(i) /= total;
    }
    return ll;
}

std::optional<Eigen::VectorXd> solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-12);
    if (lu.rank() < a.rows()) return std::nullopt;
    return Eigen::VectorXd(lu.solve(b));
}

bool mixing_ok(const Eigen::VectorXd& pi, std::size_t n) {
    return (pi.array() * static_cast<double>(n)).minCoeff() >= 1e-6;
}

Eigen::VectorXd column_means(const Eigen::MatrixXd& tau) {
    return tau.colwise().sum().transpose() / static_cast<double>(tau.rows());
}

Eigen::MatrixXd random_soft_assignments(std::size_t n, int k, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd tau(static_cast<Eigen::Index>(n), k);
    for (std::size_t i = 0; i < n; ++i) {
        auto w = rng.dirichlet_flat(static_cast<std::size_t>(k));
        for (int c = 0; c < k; ++c) tau(static_cast<Eigen::Index>(i), c) = w[static_cast<std::size_t>(c)];
    }
    return tau;
}

// ------------------------------------------------------------------- GBTM

double gbtm_cluster_loglik(const Trajectory& t, const Eigen::VectorXd& beta, double sigma2) {
    const double rss = (t.y - t.x * beta).squaredNorm();
    return -0.5 * t.n * (kLog2Pi + std::log(sigma2)) - 0.5 * rss / sigma2;
}

Eigen::MatrixXd gbtm_log_joint(const std::vector<Trajectory>& data, const GbtmParams& p) {
    const auto k = p.beta.rows();
    Eigen::MatrixXd logp(static_cast<Eigen::Index>(data.size()), k);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (Eigen::Index c = 0; c < k; ++c) {
            const double lp = p.pi(c) > 0.0 ? std::log(p.pi(c)) : -std::numeric_limits<double>::infinity();
            logp(static_cast<Eigen::Index>(i), c) =
                lp + gbtm_cluster_loglik(data[i], p.beta.row(c).transpose(), p.sigma2(c));
        }
    }
    return logp;
}

std::optional<GbtmParams> gbtm_mstep(const std::vector<Trajectory>& data, const Eigen::MatrixXd& tau,
                                     const EmSettings& s) {
    const int b = s.degree + 1;
    GbtmParams p;
    p.degree = s.degree;
    p.pi = column_means(tau);
    if (!mixing_ok(p.pi, data.size())) return std::nullopt;
    p.beta.resize(s.k, b);
    for (int c = 0; c < s.k; ++c) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(b, b);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(b);
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double w = tau(static_cast<Eigen::Index>(i), c);
            a += w * data[i].xtx;
            rhs += w * data[i].xty;
        }
        auto beta = solve_spd(a, rhs);
        if (!beta) return std::nullopt;
        p.beta.row(c) = beta->transpose();
    }
    Eigen::VectorXd rss = Eigen::VectorXd::Zero(s.k);
    Eigen::VectorXd obs = Eigen::VectorXd::Zero(s.k);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (int c = 0; c < s.k; ++c) {
            const double w = tau(static_cast<Eigen::Index>(i), c);
            rss(c) += w * (data[i].y - data[i].x * p.beta.row(c).transpose()).squaredNorm();
            obs(c) += w * data[i].n;
        }
    }
    if (s.cluster_variances) {
        p.sigma2 = rss.array() / obs.array();
    } else {
        p.sigma2 = Eigen::VectorXd::Constant(s.k, rss.sum() / obs.sum());
    }
    if (!(p.sigma2.minCoeff() >= kVarianceFloor)) return std::nullopt;
    return p;
}

// -------------------------------------------------------------------- GMM

struct Residual {
    double rss = 0.0;    // r'r
    double sum = 0.0;    // 1'r
};

Residual residual_of(const Trajectory& t, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd r = t.y - t.x * beta;
    return {r.squaredNorm(), r.sum()};
}

double gmm_density(const Residual& r, double n, double s2e, double s2u) {
    const double denom = s2e + n * s2u;
    const double logdet = (n - 1.0) * std::log(s2e) + std::log(denom);
    const double quad = (r.rss - s2u * r.sum * r.sum / denom) / s2e;
    return -0.5 * (n * kLog2Pi + logdet + quad);
}

Eigen::MatrixXd gmm_log_joint(const std::vector<Trajectory>& data, const GmmParams& p) {
    const auto k = p.beta.rows();
    Eigen::MatrixXd logp(static_cast<Eigen::Index>(data.size()), k);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (Eigen::Index c = 0; c < k; ++c) {
            const double lp = p.pi(c) > 0.0 ? std::log(p.pi(c)) : -std::numeric_limits<double>::infinity();
            logp(static_cast<Eigen::Index>(i), c) =
                lp + gmm_density(residual_of(data[i], p.beta.row(c).transpose()), data[i].n, p.sigma2_e, p.sigma2_u);
        }
    }
    return logp;
}

/// Weighted marginal objective sum_ik tau_ik log N(y_i; X_i beta_k, V_i).
double gmm_objective(const std::vector<std::vector<Residual>>& res, const std::vector<Trajectory>& data,
                     const Eigen::MatrixXd& tau, double s2e, double s2u) {
    double q = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t c = 0; c < res[i].size(); ++c) {
            const double w = tau(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
            if (w > 0.0) q += w * gmm_density(res[i][c], data[i].n, s2e, s2u);
        }
    }
    return q;
}

/// One EM update of the variance components from (s2e, s2u) using the
/// conditional moments of the random intercept.
std::pair<double, double> gmm_variance_em(const std::vector<std::vector<Residual>>& res,
                                          const std::vector<Trajectory>& data, const Eigen::MatrixXd& tau,
                                          double s2e, double s2u, double n_obs) {
    double su = 0.0;
    double se = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double n = data[i].n;
        const double denom = s2e + n * s2u;
        const double v = s2u * s2e / denom;
        for (std::size_t c = 0; c < res[i].size(); ++c) {
            const double w = tau(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
            if (w == 0.0) continue;
            const double m = s2u * res[i][c].sum / denom;
            su += w * (m * m + v);
            // (r - m 1)'(r - m 1) + n v
            se += w * (res[i][c].rss - 2.0 * m * res[i][c].sum + n * m * m + n * v);
        }
    }
    return {se / n_obs, su / static_cast<double>(data.size())};
}

std::optional<GmmParams> gmm_mstep(const std::vector<Trajectory>& data, const Eigen::MatrixXd& tau,
                                   const EmSettings& s, double s2e_old, double s2u_old, double n_obs) {
    const int b = s.degree + 1;
    GmmParams p;
    p.degree = s.degree;
    p.pi = column_means(tau);
    if (!mixing_ok(p.pi, data.size())) return std::nullopt;
    p.beta.resize(s.k, b);
    for (int c = 0; c < s.k; ++c) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(b, b);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(b);
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double w = tau(static_cast<Eigen::Index>(i), c);
            if (w == 0.0) continue;
            const auto& t = data[i];
            const double shrink = s2u_old / (s2e_old + t.n * s2u_old);
            a += w * (t.xtx - shrink * t.xt1 * t.xt1.transpose());
            rhs += w * (t.xty - shrink * t.xt1 * t.sum_y);
        }
        auto beta = solve_spd(a, rhs);
        if (!beta) return std::nullopt;
        p.beta.row(c) = beta->transpose();
    }

    std::vector<std::vector<Residual>> res(data.size(), std::vector<Residual>(static_cast<std::size_t>(s.k)));
    double rss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (int c = 0; c < s.k; ++c) {
            res[i][static_cast<std::size_t>(c)] = residual_of(data[i], p.beta.row(c).transpose());
            rss += tau(static_cast<Eigen::Index>(i), c) * res[i][static_cast<std::size_t>(c)].rss;
        }
    }

    // Variance step: best of several monotone-safe candidates under the
    // weighted marginal objective. Candidate A alone never decreases it; the
    // boundary candidate lets sigma2_u reach exactly zero.
    std::vector<std::pair<double, double>> candidates;
    candidates.emplace_back(rss / n_obs, 0.0);
    if (s.random_intercept) {
        candidates.push_back(gmm_variance_em(res, data, tau, s2e_old, s2u_old, n_obs));
        candidates.push_back(gmm_variance_em(res, data, tau, s2e_old, std::max(s2u_old, 0.1 * s2e_old), n_obs));
    }
    double best_q = -std::numeric_limits<double>::infinity();
    bool have = false;
    for (const auto& [e, u] : candidates) {
        if (!(e >= kVarianceFloor) || !(u >= 0.0)) continue;
        const double q = gmm_objective(res, data, tau, e, u);
        if (!have || q > best_q) {
            best_q = q;
            p.sigma2_e = e;
            p.sigma2_u = u;
            have = true;
        }
    }
    if (!have) return std::nullopt;
    return p;
}

// ------------------------------------------------------------------ driver

template <class Params>
struct StartOutcome {
    bool collapsed = true;
    EmFit<Params> fit;
};

template <class Params, class MStep, class LogJoint>
StartOutcome<Params> run_start(std::size_t n, const EmSettings& s, std::uint64_t start_seed, MStep&& mstep,
                               LogJoint&& log_joint) {
    StartOutcome<Params> out;
    Eigen::MatrixXd tau = random_soft_assignments(n, s.k, start_seed);
    std::optional<Params> params = mstep(tau, nullptr);
    if (!params) return out;
    double prev = -std::numeric_limits<double>::infinity();
    for (int it = 0;; ++it) {
        const double ll = normalize_rows(log_joint(*params), tau);
        if (!std::isfinite(ll)) return out;
        out.fit.trace.push_back(ll);
        out.fit.iterations = it;
        if (it > 0 && ll - prev < s.tol) {
            out.fit.converged = true;
            prev = ll;
            break;
        }
        prev = ll;
        if (it >= s.max_iter) break;
        auto next = mstep(tau, &*params);
        if (!next) return out;
        params = std::move(next);
    }
    out.collapsed = false;
    out.fit.params = std::move(*params);
    out.fit.postprob = std::move(tau);
    out.fit.log_likelihood = prev;
    return out;
}

template <class Params, class StartFn>
EmFit<Params> multi_start(const EmSettings& s, std::uint64_t seed, StartFn&& start) {
    const int starts = std::max(s.starts, 1);
    const int budget = 2 * starts;
    std::vector<StartOutcome<Params>> done;
    int attempted = 0;
    int good = 0;
    while (good < starts && attempted < budget) {
        const int batch = std::min(starts - good, budget - attempted);
        std::vector<StartOutcome<Params>> outcomes(static_cast<std::size_t>(batch));
        parallel_for(static_cast<std::size_t>(batch), s.workers, [&](std::size_t b) {
            outcomes[b] = start(derive_seed(seed, "em-start", static_cast<std::uint64_t>(attempted) + b));
        });
        for (auto& o : outcomes) {
            if (!o.collapsed) ++good;
            done.push_back(std::move(o));
        }
        attempted += batch;
    }
    EmFit<Params> best;
    bool have = false;
    int collapsed = 0;
    for (auto& o : done) {
        if (o.collapsed) {
            ++collapsed;
            continue;
        }
        if (!have || o.fit.log_likelihood > best.log_likelihood) {
            best = std::move(o.fit);
            have = true;
        }
    }
    if (!have) {
        best = EmFit<Params>{};
        best.converged = false;
        best.log_likelihood = -std::numeric_limits<double>::infinity();
    }
    best.collapsed_starts = collapsed;
    return best;
}

void check_input(const Dataset& ds, const EmSettings& s) {
    if (ds.empty()) throw Error(ErrorKind::EmptyDataset, "empty dataset");
    if (s.k < 1) throw Error(ErrorKind::Validation, "nClusters must be >= 1");
    if (s.degree < 0) throw Error(ErrorKind::Validation, "degree must be >= 0");
    if (static_cast<std::size_t>(s.k) > ds.n_trajectories()) {
        throw Error(ErrorKind::Infeasible, "cannot form " + std::to_string(s.k) + " clusters from " +
                                               std::to_string(ds.n_trajectories()) + " trajectories");
    }
    if (static_cast<int>(ds.time_grid().size()) < s.degree + 1) {
        throw Error(ErrorKind::Degenerate, "pooled design is rank deficient: fewer distinct times than coefficients");
    }
}

}  // namespace

Eigen::MatrixXd design_matrix(std::span<const double> times, int degree) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(times.size()), degree + 1);
    for (std::size_t j = 0; j < times.size(); ++j) {
        double p = 1.0;
        for (int b = 0; b <= degree; ++b) {
            x(static_cast<Eigen::Index>(j), b) = p;
            p *= times[j];
        }
    }
    return x;
}

double gmm_marginal_log_density(std::span<const double> y, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta,
                                double sigma2_e, double sigma2_u) {
    const Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())) - x * beta;
    return gmm_density({r.squaredNorm(), r.sum()}, static_cast<double>(y.size()), sigma2_e, sigma2_u);
}

double gbtm_log_likelihood(const Dataset& ds, const GbtmParams& params) {
    auto data = prepare(ds, params.degree);
    Eigen::MatrixXd tau;
    return normalize_rows(gbtm_log_joint(data, params), tau);
}

double gmm_log_likelihood(const Dataset& ds, const GmmParams& params) {
    auto data = prepare(ds, params.degree);
    Eigen::MatrixXd tau;
    return normalize_rows(gmm_log_joint(data, params), tau);
}

int gbtm_parameter_count(int k, int degree, bool cluster_variances) {
    return k * (degree + 1) + (cluster_variances ? k : 1) + (k - 1);
}

int gmm_parameter_count(int k, int degree) { return k * (degree + 1) + 2 + (k - 1); }

GbtmFit fit_gbtm(const Dataset& ds, const EmSettings& settings, std::uint64_t seed) {
    check_input(ds, settings);
    const auto data = prepare(ds, settings.degree);
    return multi_start<GbtmParams>(settings, seed, [&](std::uint64_t start_seed) {
        return run_start<GbtmParams>(
            data.size(), settings, start_seed,
            [&](const Eigen::MatrixXd& tau, const GbtmParams*) { return gbtm_mstep(data, tau, settings); },
            [&](const GbtmParams& p) { return gbtm_log_joint(data, p); });
    });
}

GmmFit fit_gmm(const Dataset& ds, const EmSettings& settings, std::uint64_t seed) {
    check_input(ds, settings);
    const auto data = prepare(ds, settings.degree);
    const double n_obs = total_obs(data);
    return multi_start<GmmParams>(settings, seed, [&](std::uint64_t start_seed) {
        return run_start<GmmParams>(
            data.size(), settings, start_seed,
            [&](const Eigen::MatrixXd& tau, const GmmParams* old) -> std::optional<GmmParams> {
                if (old != nullptr) return gmm_mstep(data, tau, settings, old->sigma2_e, old->sigma2_u, n_obs);
                // first M-step: fixed-effects fit, then one variance step from a
                // moderate random-intercept guess
                auto p0 = gmm_mstep(data, tau, settings, 1.0, 0.0, n_obs);
                if (!p0 || !settings.random_intercept) return p0;
                return gmm_mstep(data, tau, settings, p0->sigma2_e, 0.5 * p0->sigma2_e, n_obs);
            },
            [&](const GmmParams& p) { return gmm_log_joint(data, p); });
    });
}

}  // namespace trajclust
