#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ebpred/dataset.hpp"
#include "ebpred/hyperparams.hpp"
#include "ebpred/linalg.hpp"
#include "ebpred/math.hpp"
#include "ebpred/posterior.hpp"
#include "ebpred/random.hpp"
#include "ebpred/sampler.hpp"

namespace ebpred {

/// Location/scale of the conditional predictive at one configuration.
/// df == 0 encodes a normal; df > 0 a Student-t with that many degrees of freedom.
struct PredictiveParams {
    double location = 0.0;
    double scale = 1.0;
    double df = 0.0;

    double draw(RandomSource& rng) const {
        return location + scale * (df > 0.0 ? rng.student_t(df) : rng.normal());
    }
    double pdf(double y) const {
        return df > 0.0 ? student_t_pdf((y - location) / scale, df) / scale
                        : normal_pdf(y, location, scale);
    }
    double cdf(double y) const {
        return df > 0.0 ? student_t_cdf((y - location) / scale, df)
                        : normal_cdf(y, location, scale);
    }
    double quantile(double q) const {
        return location + scale * (df > 0.0 ? student_t_quantile(q, df) : normal_quantile(q));
    }
};

/// Conditional predictive of a new response given S. Known mode (or an explicit
/// sigma^2 draw): N(x_S^T beta_hat, sigma^2 (1 + qf/(alpha+gamma))). Unknown mode:
/// Student-t with 2 a0 + alpha n df, same location, squared scale
/// [(b0 + alpha/2 rss)/(a0 + alpha n/2)] (1 + qf/(alpha+gamma)).
inline PredictiveParams conditional_predictive(const LsFit& fit, const HyperParams& hp,
                                               const QueryPoint& x,
                                               std::optional<double> sigma2 = std::nullopt) {
    const VectorXd xS = x.select(fit.config);
    const double qf = quadratic_form(fit, xS);
    const double inflate = 1.0 + qf / (hp.alpha + hp.gamma);
    PredictiveParams params;
    params.location = fit.size() ? xS.dot(fit.beta_hat) : 0.0;
    if (sigma2 || hp.known_sigma()) {
        params.scale = std::sqrt((sigma2 ? *sigma2 : hp.sigma2()) * inflate);
        params.df = 0.0;
    } else {
        const auto& ig = hp.inverse_gamma();
        const double n = static_cast<double>(fit.fitted.size());
        const double s2 = (ig.b0 + hp.alpha / 2.0 * fit.rss) / (ig.a0 + hp.alpha * n / 2.0);
        params.scale = std::sqrt(s2 * inflate);
        params.df = 2.0 * ig.a0 + hp.alpha * n;
    }
    return params;
}

/// One draw from the conditional predictive given S.
inline double predictive_draw_given_S(const LsFit& fit, const HyperParams& hp,
                                      const QueryPoint& x, std::optional<double> sigma2,
                                      RandomSource& rng) {
    return conditional_predictive(fit, hp, x, sigma2).draw(rng);
}

/// Monte Carlo sample of the predictive distribution at a query point.
struct PredictiveDraws {
    std::vector<double> draws;
    double point_prediction = 0.0;
    double level = 0.0;
    std::pair<double, double> interval{std::numeric_limits<double>::quiet_NaN(),
                                       std::numeric_limits<double>::quiet_NaN()};
};

/// Empirical (zeta/2, 1 - zeta/2) quantiles of the draws, zeta = 1 - level,
/// with linear interpolation between order statistics.
inline std::pair<double, double> prediction_interval(const std::vector<double>& draws,
                                                     double level) {
    if (draws.size() < 100)
        throw TooFewDraws("prediction_interval needs at least 100 draws, got " +
                          std::to_string(draws.size()));
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must lie in (0,1)");
    std::vector<double> sorted = draws;
    std::sort(sorted.begin(), sorted.end());
    const double zeta = 1.0 - level;
    return {quantile_sorted(sorted, zeta / 2.0), quantile_sorted(sorted, 1.0 - zeta / 2.0)};
}

/// Sample the posterior predictive mixture: each of the m draws resamples a
/// retained chain state uniformly with replacement, then draws from that
/// state's conditional predictive.
inline PredictiveDraws sample_predictive(const ConfigChain& chain, const Dataset& data,
                                         const HyperParams& hp_in, const QueryPoint& x,
                                         int m, RandomSource& rng,
                                         std::optional<double> level = 0.95) {
    if (chain.states.empty()) throw EmptyChain("sample_predictive on an empty chain");
    if (m < 1) throw ConfigError("predictive sample size must be >= 1");
    if (x.x.size() != data.p())
        throw DimensionMismatch("query point has length " + std::to_string(x.x.size()) +
                                ", expected p=" + std::to_string(data.p()));
    const HyperParams hp = hp_in.resolved(data.n(), data.p());

    std::unordered_map<Configuration, PredictiveParams, ConfigurationHash> cache;
    cache.reserve(64);
    const auto params_for = [&](const Configuration& S) -> const PredictiveParams& {
        auto it = cache.find(S);
        if (it == cache.end()) {
            const LsFit fit = fit_configuration(data, S);
            it = cache.emplace(S, conditional_predictive(fit, hp, x)).first;
        }
        return it->second;
    };

    PredictiveDraws out;
    out.draws.resize(m);
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        const auto& S = chain.states[static_cast<std::size_t>(rng.uniform_index(chain.size()))];
        out.draws[static_cast<std::size_t>(i)] = params_for(S).draw(rng);
        sum += out.draws[static_cast<std::size_t>(i)];
    }
    out.point_prediction = sum / m;
    if (level && out.draws.size() >= 100) {
        out.level = *level;
        out.interval = prediction_interval(out.draws, *level);
    }
    return out;
}

/// Closed-form oracle predictive at a known true configuration S*.
/// Known mode: N(psi_hat, sigma^2 (1 + v)), v = qf/(alpha+gamma), the
/// Bernstein-von Mises limit. Unknown mode: the classical predictive Student-t
/// with n - |S*| df and plug-in variance rss/(n - |S*|), whose intervals have
/// exactly nominal coverage.
inline PredictiveParams oracle_predictive(const Dataset& data, const HyperParams& hp,
                                          const Configuration& Sstar, const QueryPoint& x) {
    if (x.x.size() != data.p())
        throw DimensionMismatch("query point has length " + std::to_string(x.x.size()) +
                                ", expected p=" + std::to_string(data.p()));
    const LsFit fit = fit_configuration(data, Sstar);  // throws SingularDesign
    const VectorXd xS = x.select(Sstar);
    const double qf = quadratic_form(fit, xS);
    PredictiveParams params;
    params.location = Sstar.size() ? xS.dot(fit.beta_hat) : 0.0;
    if (hp.known_sigma()) {
        params.scale = std::sqrt(hp.sigma2() * (1.0 + qf / (hp.alpha + hp.gamma)));
        params.df = 0.0;
    } else {
        const int df = data.n() - Sstar.size();
        if (df < 1) throw ConfigError("oracle needs n > |S*| to estimate the variance");
        const double s2 = fit.rss / df;
        params.scale = std::sqrt(s2 * (1.0 + qf));
        params.df = static_cast<double>(df);
    }
    return params;
}

struct BvmDiagnostic {
    double ks = 0.0;
    double mean_abs_diff = 0.0;  // TV surrogate: mean |F_hat - F_oracle| over a grid
};

/// Distance between the sampled predictive and the oracle predictive at x.
inline BvmDiagnostic bvm_diagnostic(const ConfigChain& chain, const Dataset& data,
                                    const HyperParams& hp, const Configuration& Sstar,
                                    const QueryPoint& x, int m, RandomSource& rng) {
    const PredictiveParams oracle = oracle_predictive(data, hp, Sstar, x);
    PredictiveDraws pd = sample_predictive(chain, data, hp, x, m, rng, std::nullopt);
    std::vector<double> sorted = std::move(pd.draws);
    std::sort(sorted.begin(), sorted.end());

    BvmDiagnostic diag;
    diag.ks = ks_statistic(sorted, [&](double t) { return oracle.cdf(t); });

    const int grid_n = 512;
    const double lo = oracle.location - 6.0 * oracle.scale;
    const double hi = oracle.location + 6.0 * oracle.scale;
    double acc = 0.0;
    for (int i = 0; i < grid_n; ++i) {
        const double t = lo + (hi - lo) * i / (grid_n - 1.0);
        const auto rank = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
        const double emp = static_cast<double>(rank) / static_cast<double>(sorted.size());
        acc += std::abs(emp - oracle.cdf(t));
    }
    diag.mean_abs_diff = acc / grid_n;
    return diag;
}

}  // namespace ebpred
