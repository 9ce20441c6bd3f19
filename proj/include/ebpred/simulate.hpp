#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include "ebpred/dataset.hpp"
#include "ebpred/hyperparams.hpp"
#include "ebpred/predictive.hpp"
#include "ebpred/random.hpp"
#include "ebpred/sampler.hpp"

namespace ebpred {

/// One synthetic experiment setting: AR(1) design, five equal-height signals.
struct SimSetting {
    int n = 100;
    int p = 125;
    double A = 2.0;                                    // signal magnitude
    double r = 0.2;                                    // AR(1) correlation
    std::vector<int> signal_positions{2, 3, 14, 21, 24};  // 0-based
    int reps = 250;
    double noise_sd = 1.0;
    std::uint64_t seed = 0;
    int test_batch = 1;  // fresh test pairs per replication

    void validate() const {
        if (n < 1 || p < 1) throw ConfigError("n and p must be positive");
        if (reps < 1) throw ConfigError("reps must be >= 1");
        if (!(r > -1.0 && r < 1.0)) throw ConfigError("r must lie in (-1,1)");
        if (!(noise_sd > 0.0)) throw ConfigError("noise sd must be positive");
        if (test_batch < 1) throw ConfigError("test batch must be >= 1");
        for (int j : signal_positions)
            if (j < 0 || j >= p) throw ConfigError("signal position out of [0,p)");
    }

    Configuration true_configuration() const { return Configuration(signal_positions); }
};

/// One row of the AR(1) design: x_j = r x_{j-1} + sqrt(1-r^2) eps_j, unit
/// marginal variance, corr(x_j, x_k) = r^|j-k|.
inline VectorXd gen_design_row(int p, double r, RandomSource& rng) {
    VectorXd x(p);
    x[0] = rng.normal();
    const double innov = std::sqrt(1.0 - r * r);
    for (int j = 1; j < p; ++j) x[j] = r * x[j - 1] + innov * rng.normal();
    return x;
}

/// n x p design with i.i.d. AR(1)-correlated Gaussian rows.
inline MatrixXd gen_design(const SimSetting& setting, RandomSource& rng) {
    MatrixXd X(setting.n, setting.p);
    for (int i = 0; i < setting.n; ++i)
        X.row(i) = gen_design_row(setting.p, setting.r, rng).transpose();
    return X;
}

/// Response y = X beta* + noise_sd z with beta* = A at the signal positions.
inline std::pair<VectorXd, VectorXd> gen_response(const MatrixXd& X, const SimSetting& setting,
                                                  RandomSource& rng) {
    VectorXd beta_star = VectorXd::Zero(setting.p);
    for (int j : setting.signal_positions) beta_star[j] = setting.A;
    VectorXd y = X * beta_star;
    for (int i = 0; i < y.size(); ++i) y[i] += setting.noise_sd * rng.normal();
    return {std::move(y), std::move(beta_star)};
}

/// Per-replication outcome (batch-averaged when test_batch > 1).
struct RepRecord {
    int rep = 0;
    std::uint64_t seed = 0;
    double sq_error = 0.0;
    double covered = 0.0;
    double length = 0.0;
    double oracle_covered = 0.0;
    double oracle_length = 0.0;
    double accept_rate = 0.0;
};

struct ExperimentReport {
    double mspe = 0.0;
    double coverage = 0.0;
    double mean_length = 0.0;
    double oracle_coverage = 0.0;
    double oracle_mean_length = 0.0;
    double wall_clock_s = 0.0;
    std::vector<RepRecord> records;
};

namespace detail {

// sub-stream layout per replication: 0 = data, 1 = chain, 2 = predictive
inline std::uint64_t rep_stream(std::uint64_t master, int rep, int what) {
    return substream_seed(master, static_cast<std::uint64_t>(rep) * 4 + what);
}

}  // namespace detail

/// Replicated experiment: per replication, generate (X, y) and fresh test
/// pairs, run the chain, record squared error / coverage / interval length and
/// the oracle interval at the true configuration. Replications are independent
/// and deterministic under the master seed regardless of thread count.
inline ExperimentReport run_experiment(const SimSetting& setting, const HyperParams& hp,
                                       const ChainSettings& mcmc, int m,
                                       double level = 0.95, int threads = 1) {
    setting.validate();
    hp.resolved(setting.n, setting.p).validate(setting.n, setting.p);
    const auto t0 = std::chrono::steady_clock::now();

    ExperimentReport report;
    report.records.resize(setting.reps);
    const Configuration Sstar = setting.true_configuration();

    const auto run_rep_impl = [&](int rep) {
        RandomSource data_rng(detail::rep_stream(setting.seed, rep, 0));
        const MatrixXd X = gen_design(setting, data_rng);
        auto [y, beta_star] = gen_response(X, setting, data_rng);
        const Dataset data(X, y);

        ChainSettings cs = mcmc;
        cs.seed = detail::rep_stream(setting.seed, rep, 1);
        const ConfigChain chain = run_chain(data, hp, cs);

        RandomSource pred_rng(detail::rep_stream(setting.seed, rep, 2));
        RepRecord rec;
        rec.rep = rep;
        rec.seed = cs.seed;
        rec.accept_rate = chain.acceptance_rate();
        for (int b = 0; b < setting.test_batch; ++b) {
            const QueryPoint xnew(gen_design_row(setting.p, setting.r, data_rng));
            const double ynew = xnew.x.dot(beta_star) + setting.noise_sd * data_rng.normal();

            const PredictiveDraws pd = sample_predictive(chain, data, hp, xnew, m, pred_rng, level);
            rec.sq_error += (ynew - pd.point_prediction) * (ynew - pd.point_prediction);
            rec.covered += (pd.interval.first <= ynew && ynew <= pd.interval.second) ? 1.0 : 0.0;
            rec.length += pd.interval.second - pd.interval.first;

            const PredictiveParams oracle = oracle_predictive(data, hp, Sstar, xnew);
            const double olo = oracle.quantile((1.0 - level) / 2.0);
            const double ohi = oracle.quantile(1.0 - (1.0 - level) / 2.0);
            rec.oracle_covered += (olo <= ynew && ynew <= ohi) ? 1.0 : 0.0;
            rec.oracle_length += ohi - olo;
        }
        const double inv_b = 1.0 / setting.test_batch;
        rec.sq_error *= inv_b;
        rec.covered *= inv_b;
        rec.length *= inv_b;
        rec.oracle_covered *= inv_b;
        rec.oracle_length *= inv_b;
        report.records[static_cast<std::size_t>(rep)] = rec;
    };

    // failures abort the whole experiment, annotated with the replication
    std::mutex error_mutex;
    std::string first_error;
    std::atomic<bool> failed{false};
    const auto run_rep = [&](int rep) {
        try {
            run_rep_impl(rep);
        } catch (const std::exception& e) {
            failed.store(true);
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (first_error.empty())
                first_error = "replication " + std::to_string(rep) + " (seed " +
                              std::to_string(detail::rep_stream(setting.seed, rep, 1)) +
                              "): " + e.what();
        }
    };

    if (threads <= 1) {
        for (int rep = 0; rep < setting.reps && !failed.load(); ++rep) run_rep(rep);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (int rep = next.fetch_add(1); rep < setting.reps && !failed.load();
                     rep = next.fetch_add(1))
                    run_rep(rep);
            });
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw Error(first_error);

    // sequential reduce in replication order
    for (const auto& rec : report.records) {
        report.mspe += rec.sq_error;
        report.coverage += rec.covered;
        report.mean_length += rec.length;
        report.oracle_coverage += rec.oracle_covered;
        report.oracle_mean_length += rec.oracle_length;
    }
    const double inv = 1.0 / setting.reps;
    report.mspe *= inv;
    report.coverage *= inv;
    report.mean_length *= inv;
    report.oracle_coverage *= inv;
    report.oracle_mean_length *= inv;
    report.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

struct SplitResult {
    int split = 0;
    int n_train = 0;
    int n_test = 0;
    double mspe = 0.0;
};

struct SplitBenchmark {
    std::vector<SplitResult> splits;
    double mean_mspe = 0.0;
};

/// Repeated random train/test splits of a fixed dataset; reports out-of-sample
/// MSPE per split and the average across splits.
inline SplitBenchmark run_split_benchmark(const Dataset& data, double train_frac, int splits,
                                          const HyperParams& hp, const ChainSettings& mcmc,
                                          int m, RandomSource& rng) {
    if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError("train fraction must lie in (0,1)");
    if (splits < 1) throw ConfigError("need at least one split");
    const int n = data.n();
    const int n_train = static_cast<int>(std::lround(train_frac * n));
    if (n_train < 1 || n_train >= n) throw ConfigError("degenerate train/test split");

    SplitBenchmark bench;
    bench.splits.reserve(static_cast<std::size_t>(splits));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int split = 0; split < splits; ++split) {
        for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
        for (int i = n - 1; i > 0; --i)
            std::swap(order[static_cast<std::size_t>(i)],
                      order[static_cast<std::size_t>(rng.uniform_index(i + 1))]);

        MatrixXd Xtr(n_train, data.p());
        VectorXd ytr(n_train);
        for (int i = 0; i < n_train; ++i) {
            Xtr.row(i) = data.X.row(order[static_cast<std::size_t>(i)]);
            ytr[i] = data.y[order[static_cast<std::size_t>(i)]];
        }
        const Dataset train(Xtr, ytr);

        ChainSettings cs = mcmc;
        cs.seed = substream_seed(mcmc.seed, static_cast<std::uint64_t>(split));
        const ConfigChain chain = run_chain(train, hp, cs);

        RandomSource pred_rng = rng.spawn(static_cast<std::uint64_t>(split) + 7919);
        double sq = 0.0;
        const int n_test = n - n_train;
        for (int i = n_train; i < n; ++i) {
            const int row = order[static_cast<std::size_t>(i)];
            const QueryPoint xnew(data.X.row(row).transpose());
            const PredictiveDraws pd =
                sample_predictive(chain, train, hp, xnew, m, pred_rng, std::nullopt);
            const double err = data.y[row] - pd.point_prediction;
            sq += err * err;
        }
        bench.splits.push_back({split, n_train, n_test, sq / n_test});
        bench.mean_mspe += sq / n_test;
    }
    bench.mean_mspe /= splits;
    return bench;
}

/// Predictive-vs-oracle diagnostic run (the density-overlay figure data).
struct BvmRun {
    std::vector<double> draws;
    std::vector<double> grid;
    std::vector<double> oracle_density;
    PredictiveParams oracle;
    BvmDiagnostic diag;
};

inline BvmRun run_bvm(const SimSetting& setting, const HyperParams& hp,
                      const ChainSettings& mcmc, int m, int grid_n = 401) {
    setting.validate();
    RandomSource data_rng(detail::rep_stream(setting.seed, 0, 0));
    const MatrixXd X = gen_design(setting, data_rng);
    auto [y, beta_star] = gen_response(X, setting, data_rng);
    const Dataset data(X, y);
    const QueryPoint xnew(gen_design_row(setting.p, setting.r, data_rng));

    ChainSettings cs = mcmc;
    cs.seed = detail::rep_stream(setting.seed, 0, 1);
    const ConfigChain chain = run_chain(data, hp, cs);

    BvmRun out;
    out.oracle = oracle_predictive(data, hp, setting.true_configuration(), xnew);
    RandomSource pred_rng(detail::rep_stream(setting.seed, 0, 2));
    out.draws = sample_predictive(chain, data, hp, xnew, m, pred_rng, std::nullopt).draws;

    RandomSource diag_rng(detail::rep_stream(setting.seed, 0, 3));
    out.diag = bvm_diagnostic(chain, data, hp, setting.true_configuration(), xnew, m, diag_rng);

    out.grid.resize(static_cast<std::size_t>(grid_n));
    out.oracle_density.resize(static_cast<std::size_t>(grid_n));
    const double lo = out.oracle.location - 5.0 * out.oracle.scale;
    const double hi = out.oracle.location + 5.0 * out.oracle.scale;
    for (int i = 0; i < grid_n; ++i) {
        out.grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (grid_n - 1.0);
        out.oracle_density[static_cast<std::size_t>(i)] =
            out.oracle.pdf(out.grid[static_cast<std::size_t>(i)]);
    }
    return out;
}

}  // namespace ebpred
