#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "ebpred/dataset.hpp"
#include "ebpred/hyperparams.hpp"
#include "ebpred/linalg.hpp"
#include "ebpred/math.hpp"
#include "ebpred/random.hpp"

namespace ebpred {

/// Natural-log posterior weight. -inf encodes zero mass; NaN is rejected.
struct LogWeight {
    double value = neg_inf;

    LogWeight() = default;
    explicit LogWeight(double v) : value(v) {
        if (std::isnan(v)) throw ConfigError("NaN log-weight");
    }

    static LogWeight zero_mass() { return LogWeight(); }
    bool is_zero_mass() const { return value == neg_inf; }
};

/// log pi(S) up to the q_n normalizer (shared across S, it cancels):
/// -log C(p,|S|) - |S| (log c + a log p), and -inf beyond the size cap R.
inline LogWeight log_prior_config(const Configuration& S, const HyperParams& hp, int p) {
    const int s = S.size();
    const int R = hp.R > 0 ? hp.R : p;  // entry points resolve R = min(n,p) into hp
    if (s > R) return LogWeight::zero_mass();
    const double v = -log_choose(p, s) -
                     s * (std::log(hp.c) + hp.a * std::log(static_cast<double>(p)));
    return LogWeight(v);
}

// shared factor (|S|/2) log(gamma / (alpha + gamma))
inline double log_shrinkage_factor(const HyperParams& hp, int s) {
    return 0.5 * s * std::log(hp.gamma / (hp.alpha + hp.gamma));
}

/// Known-sigma^2 marginal posterior weight of S, up to a shared constant:
/// log pi(S) + (|S|/2) log(gamma/(alpha+gamma)) - alpha/(2 sigma^2) rss.
inline LogWeight log_marginal_post_known(const Configuration& S, const LsFit& fit,
                                         const HyperParams& hp, int p) {
    const double sigma2 = hp.sigma2();  // throws ModeMismatch under IG mode
    const LogWeight prior = log_prior_config(S, hp, p);
    if (prior.is_zero_mass()) return prior;
    return LogWeight(prior.value + log_shrinkage_factor(hp, S.size()) -
                     hp.alpha / (2.0 * sigma2) * fit.rss);
}

/// Unknown-sigma^2 (inverse-gamma) marginal posterior weight of S:
/// log pi(S) + (|S|/2) log(gamma/(alpha+gamma)) - (a0 + alpha n/2) log(b0 + alpha/2 rss).
inline LogWeight log_marginal_post_unknown(const Configuration& S, const LsFit& fit,
                                           const HyperParams& hp, int n, int p) {
    const auto& ig = hp.inverse_gamma();  // throws ModeMismatch under known mode
    const LogWeight prior = log_prior_config(S, hp, p);
    if (prior.is_zero_mass()) return prior;
    return LogWeight(prior.value + log_shrinkage_factor(hp, S.size()) -
                     (ig.a0 + hp.alpha * n / 2.0) *
                         std::log(ig.b0 + hp.alpha / 2.0 * fit.rss));
}

/// Mode-dispatching marginal posterior weight.
inline LogWeight log_marginal_post(const Configuration& S, const LsFit& fit,
                                   const HyperParams& hp, int n, int p) {
    return hp.known_sigma() ? log_marginal_post_known(S, fit, hp, p)
                            : log_marginal_post_unknown(S, fit, hp, n, p);
}

/// Draw from the conditional posterior N(beta_hat_S, sigma^2/(alpha+gamma) (X_S^T X_S)^{-1})
/// using the stored triangular factor. Under IG mode pass the current sigma^2 draw.
inline VectorXd sample_beta_given_S(const LsFit& fit, const HyperParams& hp,
                                    double sigma2, RandomSource& rng) {
    const int s = fit.size();
    if (s == 0) return VectorXd();
    VectorXd z(s);
    for (int i = 0; i < s; ++i) z[i] = rng.normal();
    // cov = c^2 (L L^T)^{-1} with c^2 = sigma2/(alpha+gamma): beta = beta_hat + c L^{-T} z
    const VectorXd w = fit.chol_factor.transpose().triangularView<Eigen::Upper>().solve(z);
    return fit.beta_hat + std::sqrt(sigma2 / (hp.alpha + hp.gamma)) * w;
}

/// Draw from the conditional posterior of sigma^2 given S:
/// InverseGamma(a0 + alpha n/2, b0 + alpha/2 rss).
inline double sample_sigma2_given_S(const LsFit& fit, const HyperParams& hp, int n,
                                    RandomSource& rng) {
    const auto& ig = hp.inverse_gamma();
    return rng.inverse_gamma(ig.a0 + hp.alpha * n / 2.0, ig.b0 + hp.alpha / 2.0 * fit.rss);
}

namespace detail {

inline double log_admissible_count(int p, int R) {
    std::vector<double> terms;
    terms.reserve(R + 1);
    for (int s = 0; s <= R; ++s) terms.push_back(log_choose(p, s));
    return log_sum_exp(terms);
}

// Visit all configurations of each size 0..R in lexicographic order.
template <typename F>
void for_each_configuration(int p, int R, F&& visit) {
    visit(Configuration());
    std::vector<int> comb;
    for (int s = 1; s <= std::min(R, p); ++s) {
        comb.resize(s);
        for (int i = 0; i < s; ++i) comb[i] = i;
        while (true) {
            visit(Configuration(comb));
            int i = s - 1;
            while (i >= 0 && comb[i] == p - s + i) --i;
            if (i < 0) break;
            ++comb[i];
            for (int k = i + 1; k < s; ++k) comb[k] = comb[k - 1] + 1;
        }
    }
}

}  // namespace detail

/// Exact normalized posterior over all admissible configurations. Feasible only
/// when sum_s C(p,s) <= 1e6; the exact oracle behind the sampler tests.
/// Configurations with singular designs carry zero mass.
inline std::vector<std::pair<Configuration, double>> enumerate_posterior(
    const Dataset& data, const HyperParams& hp_in) {
    const int p = data.p();
    const HyperParams hp = hp_in.resolved(data.n(), p);
    const int R = hp.R;
    if (detail::log_admissible_count(p, R) > std::log(1e6))
        throw TooLarge("model space exceeds 1e6 configurations");

    std::vector<std::pair<Configuration, double>> out;
    std::vector<double> logs;
    detail::for_each_configuration(p, R, [&](const Configuration& S) {
        double lw = neg_inf;
        try {
            const LsFit fit = fit_configuration(data, S);
            lw = log_marginal_post(S, fit, hp, data.n(), p).value;
        } catch (const SingularDesign&) {
            // zero mass
        }
        out.emplace_back(S, lw);
        logs.push_back(lw);
    });
    const double lse = log_sum_exp(logs);
    if (!std::isfinite(lse)) throw ConfigError("posterior has no admissible configuration");
    for (auto& [S, w] : out) w = std::exp(w - lse);
    return out;
}

}  // namespace ebpred
