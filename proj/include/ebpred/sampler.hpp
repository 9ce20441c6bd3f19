#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "ebpred/dataset.hpp"
#include "ebpred/hyperparams.hpp"
#include "ebpred/linalg.hpp"
#include "ebpred/posterior.hpp"
#include "ebpred/random.hpp"

namespace ebpred {

enum class ProposalKind { Add, Remove, Swap };

struct Proposal {
    Configuration candidate;
    double log_ratio = 0.0;  // log q(S|S') - log q(S'|S)
    ProposalKind kind = ProposalKind::Add;
};

namespace detail {

struct MoveSet {
    bool add = false, remove = false, swap = false;
    int count() const { return int(add) + int(remove) + int(swap); }
};

inline MoveSet moves_for_size(int s, int p, int R) {
    MoveSet m;
    m.add = s < R && s < p;
    m.remove = s > 0;
    m.swap = s > 0 && s < p;
    return m;
}

// probability of choosing a given move kind from a size-s state
inline double kind_prob(int s, int p, int R) {
    return 1.0 / moves_for_size(s, p, R).count();
}

}  // namespace detail

/// One random-walk proposal: Add/Remove/Swap uniformly over the moves available
/// at the current size (all three in the interior, fewer at the boundaries),
/// with the Hastings correction for the asymmetry.
inline Proposal propose(const Configuration& S, int p, int R, RandomSource& rng) {
    const int s = S.size();
    const auto moves = detail::moves_for_size(s, p, R);
    if (moves.count() == 0)
        throw ConfigError("no proposal moves available (p=" + std::to_string(p) +
                          ", R=" + std::to_string(R) + ")");

    std::vector<ProposalKind> kinds;
    if (moves.add) kinds.push_back(ProposalKind::Add);
    if (moves.remove) kinds.push_back(ProposalKind::Remove);
    if (moves.swap) kinds.push_back(ProposalKind::Swap);
    const ProposalKind kind = kinds[static_cast<std::size_t>(rng.uniform_index(kinds.size()))];

    // uniform draw over indices outside S
    const auto draw_outside = [&]() {
        std::int64_t r = rng.uniform_index(p - s);
        for (int j : S.indices()) {
            if (j <= r) ++r;
            else break;
        }
        return static_cast<int>(r);
    };

    Proposal out;
    out.kind = kind;
    const double kp = detail::kind_prob(s, p, R);
    switch (kind) {
        case ProposalKind::Add: {
            const int j = draw_outside();
            out.candidate = S.with_added(j);
            // forward: kp(s)/(p-s); reverse: Remove from size s+1, kp(s+1)/(s+1)
            out.log_ratio = std::log(detail::kind_prob(s + 1, p, R) / (s + 1.0)) -
                            std::log(kp / (p - s));
            break;
        }
        case ProposalKind::Remove: {
            const int j = S[static_cast<int>(rng.uniform_index(s))];
            out.candidate = S.with_removed(j);
            // forward: kp(s)/s; reverse: Add from size s-1, kp(s-1)/(p-s+1)
            out.log_ratio = std::log(detail::kind_prob(s - 1, p, R) / (p - s + 1.0)) -
                            std::log(kp / static_cast<double>(s));
            break;
        }
        case ProposalKind::Swap: {
            const int drop = S[static_cast<int>(rng.uniform_index(s))];
            const int add = draw_outside();
            out.candidate = S.with_removed(drop).with_added(add);
            out.log_ratio = 0.0;  // size unchanged, kernel symmetric
            break;
        }
    }
    return out;
}

struct MhStepResult {
    Configuration state;
    LogWeight log_weight;
    LsFit fit;
    bool accepted = false;
};

/// One Metropolis-Hastings step from (S, logw, fit). Candidates with singular
/// designs are zero-probability states and count as rejections.
inline MhStepResult mh_step_with_fit(const Configuration& S, const LogWeight& logw,
                                     const LsFit& fit, const Dataset& data,
                                     const HyperParams& hp, RandomSource& rng) {
    const int p = data.p();
    const int R = hp.effective_R(data.n(), p);
    const Proposal prop = propose(S, p, R, rng);

    LsFit cand_fit;
    LogWeight cand_lw;
    try {
        cand_fit = fit_configuration(data, prop.candidate);
        cand_lw = log_marginal_post(prop.candidate, cand_fit, hp, data.n(), p);
    } catch (const SingularDesign&) {
        return {S, logw, fit, false};
    }
    if (cand_lw.is_zero_mass()) return {S, logw, fit, false};

    const double log_accept = cand_lw.value - logw.value + prop.log_ratio;
    if (log_accept < 0.0 && rng.uniform() >= std::exp(log_accept))
        return {S, logw, fit, false};
    return {prop.candidate, cand_lw, std::move(cand_fit), true};
}

/// Spec-level step: returns the next state and weight only.
inline MhStepResult mh_step(const Configuration& S, const LogWeight& logw,
                            const Dataset& data, const HyperParams& hp, RandomSource& rng) {
    return mh_step_with_fit(S, logw, fit_configuration(data, S), data, hp, rng);
}

struct ChainSettings {
    int iters = 20000;
    int burnin = 5000;
    int thin = 1;
    std::uint64_t seed = 0;
    bool draw_sigma2 = false;
};

/// MCMC output: retained configurations, their log-weights, optional sigma^2
/// draws, and the acceptance count over all iterations.
struct ConfigChain {
    std::vector<Configuration> states;
    std::vector<LogWeight> log_weights;
    std::optional<std::vector<double>> sigma2_draws;
    long accept_count = 0;
    long total_steps = 0;
    std::uint64_t seed = 0;

    int size() const { return static_cast<int>(states.size()); }
    double acceptance_rate() const {
        return total_steps ? static_cast<double>(accept_count) / total_steps : 0.0;
    }
};

namespace detail {

// Deterministic start: the singleton maximizing |corr(x_j, y)|; empty model if
// no column gives a usable fit.
inline Configuration initial_state(const Dataset& data) {
    const double ybar = data.y.mean();
    const double ysd = std::sqrt((data.y.array() - ybar).square().sum());
    int best = -1;
    double best_corr = -1.0;
    for (int j = 0; j < data.p(); ++j) {
        const double xbar = data.X.col(j).mean();
        const double xsd = std::sqrt((data.X.col(j).array() - xbar).square().sum());
        if (xsd <= 0.0 || ysd <= 0.0) continue;
        const double cov = ((data.X.col(j).array() - xbar) * (data.y.array() - ybar)).sum();
        const double corr = std::abs(cov / (xsd * ysd));
        if (corr > best_corr) {
            best_corr = corr;
            best = j;
        }
    }
    if (best < 0) return Configuration();
    return Configuration({best});
}

}  // namespace detail

/// Run the Metropolis-Hastings chain over configurations. Deterministic given
/// (seed, data, hp, settings); retains post-burn-in states every `thin` steps.
inline ConfigChain run_chain(const Dataset& data, const HyperParams& hp_in,
                             const ChainSettings& settings) {
    if (settings.iters <= settings.burnin || settings.burnin < 0)
        throw ConfigError("need iters > burnin >= 0");
    if (settings.thin < 1) throw ConfigError("thin must be >= 1");
    const HyperParams hp = hp_in.resolved(data.n(), data.p());

    RandomSource rng(settings.seed);
    Configuration S = detail::initial_state(data);
    LsFit fit;
    try {
        fit = fit_configuration(data, S);
    } catch (const SingularDesign&) {
        S = Configuration();
        fit = fit_configuration(data, S);
    }
    LogWeight lw = log_marginal_post(S, fit, hp, data.n(), data.p());

    ConfigChain chain;
    chain.seed = settings.seed;
    chain.total_steps = settings.iters;
    const int retained = (settings.iters - settings.burnin + settings.thin - 1) / settings.thin;
    chain.states.reserve(retained);
    chain.log_weights.reserve(retained);
    const bool want_sigma2 = settings.draw_sigma2 && !hp.known_sigma();
    if (want_sigma2) chain.sigma2_draws.emplace();

    for (int it = 0; it < settings.iters; ++it) {
        MhStepResult step = mh_step_with_fit(S, lw, fit, data, hp, rng);
        S = std::move(step.state);
        lw = step.log_weight;
        fit = std::move(step.fit);
        chain.accept_count += step.accepted ? 1 : 0;
        if (it >= settings.burnin && (it - settings.burnin) % settings.thin == 0) {
            chain.states.push_back(S);
            chain.log_weights.push_back(lw);
            if (want_sigma2)
                chain.sigma2_draws->push_back(sample_sigma2_given_S(fit, hp, data.n(), rng));
        }
    }
    return chain;
}

/// Per-index inclusion frequency across retained states.
inline VectorXd inclusion_probs(const ConfigChain& chain, int p) {
    if (chain.states.empty()) throw EmptyChain("inclusion_probs on an empty chain");
    VectorXd probs = VectorXd::Zero(p);
    for (const auto& S : chain.states)
        for (int j : S.indices()) probs[j] += 1.0;
    probs /= static_cast<double>(chain.states.size());
    return probs;
}

/// Model-averaged posterior mean of beta: mean over retained states of
/// beta_hat_S padded with zeros (the conditional mean of each slab).
inline VectorXd posterior_mean_beta(const ConfigChain& chain, const Dataset& data) {
    if (chain.states.empty()) throw EmptyChain("posterior_mean_beta on an empty chain");
    std::unordered_map<Configuration, long, ConfigurationHash> counts;
    for (const auto& S : chain.states) ++counts[S];
    VectorXd mean = VectorXd::Zero(data.p());
    for (const auto& [S, count] : counts) {
        const LsFit fit = fit_configuration(data, S);
        const double w = static_cast<double>(count) / chain.states.size();
        for (int i = 0; i < S.size(); ++i) mean[S[i]] += w * fit.beta_hat[i];
    }
    return mean;
}

}  // namespace ebpred
