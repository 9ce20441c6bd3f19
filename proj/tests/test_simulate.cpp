#include <catch2/catch_amalgamated.hpp>

#include "ebpred/simulate.hpp"
#include "test_support.hpp"

using namespace ebpred;

namespace {

HyperParams ig_hp() {
    HyperParams hp;
    hp.sigma_mode = InverseGammaSigma{};
    return hp;
}

double column_corr(const MatrixXd& X, int a, int b) {
    const VectorXd xa = X.col(a).array() - X.col(a).mean();
    const VectorXd xb = X.col(b).array() - X.col(b).mean();
    return xa.dot(xb) / std::sqrt(xa.squaredNorm() * xb.squaredNorm());
}

}  // namespace

TEST_CASE("AR(1) design moments", "[simulate]") {
    SimSetting setting;
    setting.n = 10000;
    setting.p = 6;
    setting.signal_positions = {0};

    SECTION("independent columns at r = 0") {
        setting.r = 0.0;
        RandomSource rng(501);
        const MatrixXd X = gen_design(setting, rng);
        const double band = 4.0 / std::sqrt(double(setting.n));
        for (int a = 0; a < setting.p; ++a)
            for (int b = a + 1; b < setting.p; ++b)
                REQUIRE(std::abs(column_corr(X, a, b)) < band);
    }

    SECTION("lag-one correlation at r = 0.8") {
        setting.r = 0.8;
        RandomSource rng(511);
        const MatrixXd X = gen_design(setting, rng);
        for (int a = 0; a + 1 < setting.p; ++a)
            REQUIRE(column_corr(X, a, a + 1) == Catch::Approx(0.8).margin(0.05));
        // two apart decays like r^2
        REQUIRE(column_corr(X, 0, 2) == Catch::Approx(0.64).margin(0.05));
    }

    SECTION("unit marginal variance") {
        setting.r = 0.5;
        RandomSource rng(521);
        const MatrixXd X = gen_design(setting, rng);
        for (int j = 0; j < setting.p; ++j) {
            const double var =
                (X.col(j).array() - X.col(j).mean()).square().sum() / (setting.n - 1);
            REQUIRE(var == Catch::Approx(1.0).margin(0.05));
        }
    }
}

TEST_CASE("response generation", "[simulate]") {
    SimSetting setting;
    setting.n = 10000;
    setting.p = 30;
    setting.r = 0.0;
    setting.signal_positions = {2, 3, 14, 21, 24};

    SECTION("no signal leaves pure noise") {
        setting.A = 0.0;
        setting.noise_sd = 0.7;
        RandomSource rng(531);
        const MatrixXd X = gen_design(setting, rng);
        const auto [y, beta_star] = gen_response(X, setting, rng);
        REQUIRE(beta_star.isZero());
        const double var = (y.array() - y.mean()).square().sum() / (setting.n - 1);
        REQUIRE(var == Catch::Approx(0.49).margin(0.03));
    }

    SECTION("zero noise reproduces X beta*") {
        setting.A = 2.0;
        setting.noise_sd = 0.0;
        RandomSource rng(541);
        const MatrixXd X = gen_design(setting, rng);
        const auto [y, beta_star] = gen_response(X, setting, rng);
        REQUIRE((y - X * beta_star).norm() == 0.0);
        for (int j : setting.signal_positions) REQUIRE(beta_star[j] == 2.0);
    }

    SECTION("variance decomposition at A = 2, five signals, r = 0") {
        setting.A = 2.0;
        setting.noise_sd = 1.0;
        RandomSource rng(551);
        const MatrixXd X = gen_design(setting, rng);
        const auto [y, beta_star] = gen_response(X, setting, rng);
        const double var = (y.array() - y.mean()).square().sum() / (setting.n - 1);
        REQUIRE(var == Catch::Approx(21.0).margin(1.2));  // 5 * 4 + 1
    }
}

TEST_CASE("experiment report is deterministic and well formed", "[simulate]") {
    SimSetting setting;
    setting.n = 40;
    setting.p = 20;
    setting.A = 4.0;
    setting.r = 0.2;
    setting.signal_positions = {2, 3, 14};
    setting.reps = 8;
    setting.seed = 971;

    ChainSettings mcmc;
    mcmc.iters = 3000;
    mcmc.burnin = 800;

    const ExperimentReport a = run_experiment(setting, ig_hp(), mcmc, 2000, 0.95, 1);
    const ExperimentReport b = run_experiment(setting, ig_hp(), mcmc, 2000, 0.95, 2);

    REQUIRE(a.records.size() == 8);
    REQUIRE(a.mspe == b.mspe);  // thread count cannot change results
    REQUIRE(a.coverage == b.coverage);
    REQUIRE(a.mean_length == b.mean_length);
    REQUIRE(a.oracle_mean_length == b.oracle_mean_length);

    REQUIRE(a.mspe > 0.0);
    REQUIRE(a.coverage >= 0.0);
    REQUIRE(a.coverage <= 1.0);
    REQUIRE(a.mean_length > 0.0);
    for (const auto& rec : a.records) {
        REQUIRE(std::isfinite(rec.sq_error));
        REQUIRE(rec.accept_rate > 0.0);
        REQUIRE(rec.accept_rate < 1.0);
    }
}

TEST_CASE("replication failures carry their context", "[simulate]") {
    SimSetting setting;
    setting.n = 3;
    setting.p = 5;
    setting.A = 1.0;
    setting.r = 0.0;
    setting.signal_positions = {0, 1, 2, 3};  // |S*| > n, so the oracle fit is singular
    setting.reps = 4;
    setting.seed = 1;
    ChainSettings mcmc;
    mcmc.iters = 200;
    mcmc.burnin = 50;
    try {
        run_experiment(setting, ig_hp(), mcmc, 200, 0.95, 2);
        FAIL("expected a replication failure");
    } catch (const Error& e) {
        REQUIRE(std::string(e.what()).find("replication") != std::string::npos);
        REQUIRE(std::string(e.what()).find("seed") != std::string::npos);
    }
}

TEST_CASE("oracle intervals cover at the nominal rate", "[simulate]") {
    SimSetting setting;
    setting.n = 50;
    setting.p = 25;
    setting.A = 3.0;
    setting.r = 0.5;
    setting.signal_positions = {1, 7, 12};
    setting.reps = 80;
    setting.seed = 1009;

    ChainSettings mcmc;
    mcmc.iters = 2500;
    mcmc.burnin = 600;

    const ExperimentReport rep = run_experiment(setting, ig_hp(), mcmc, 1500, 0.95, 2);
    // binomial band around 0.95 at 80 replications
    const double band = 3.0 * std::sqrt(0.95 * 0.05 / setting.reps);
    REQUIRE(rep.oracle_coverage == Catch::Approx(0.95).margin(band));
    REQUIRE(rep.oracle_mean_length > 0.0);
}

TEST_CASE("split benchmark", "[simulate]") {
    SECTION("deterministic under a fixed seed") {
        Dataset data = ebtest::synthetic_dataset(40, 15, {2, 9}, 3.0, 1.0, 561);
        ChainSettings mcmc;
        mcmc.iters = 1500;
        mcmc.burnin = 400;
        mcmc.seed = 99;
        RandomSource rng_a(7), rng_b(7);
        const SplitBenchmark a =
            run_split_benchmark(data, 0.75, 4, ig_hp(), mcmc, 1000, rng_a);
        const SplitBenchmark b =
            run_split_benchmark(data, 0.75, 4, ig_hp(), mcmc, 1000, rng_b);
        REQUIRE(a.mean_mspe == b.mean_mspe);
        REQUIRE(a.splits.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) {
            REQUIRE(a.splits[i].mspe == b.splits[i].mspe);
            REQUIRE(a.splits[i].n_train == 30);
            REQUIRE(a.splits[i].n_test == 10);
        }
    }

    SECTION("pure noise predicts at the response variance") {
        Dataset data = ebtest::synthetic_dataset(60, 20, {}, 0.0, 1.0, 571);
        ChainSettings mcmc;
        mcmc.iters = 2000;
        mcmc.burnin = 500;
        mcmc.seed = 101;
        RandomSource rng(11);
        const SplitBenchmark bench =
            run_split_benchmark(data, 0.75, 5, ig_hp(), mcmc, 1500, rng);
        const double var_y = (data.y.array() - data.y.mean()).square().sum() / (data.n() - 1);
        REQUIRE(bench.mean_mspe == Catch::Approx(var_y).margin(0.5));
    }

    SECTION("strong signals predict far below the response variance") {
        Dataset data = ebtest::synthetic_dataset(60, 20, {1, 8, 15}, 4.0, 1.0, 581);
        ChainSettings mcmc;
        mcmc.iters = 3000;
        mcmc.burnin = 800;
        mcmc.seed = 103;
        RandomSource rng(13);
        const SplitBenchmark bench =
            run_split_benchmark(data, 0.75, 5, ig_hp(), mcmc, 1500, rng);
        const double var_y = (data.y.array() - data.y.mean()).square().sum() / (data.n() - 1);
        REQUIRE(bench.mean_mspe < 0.25 * var_y);
    }

    SECTION("degenerate fraction is rejected") {
        Dataset data = ebtest::synthetic_dataset(20, 5, {0}, 2.0, 1.0, 591);
        ChainSettings mcmc;
        RandomSource rng(17);
        REQUIRE_THROWS_AS(run_split_benchmark(data, 1.5, 2, ig_hp(), mcmc, 100, rng),
                          ConfigError);
    }
}

TEST_CASE("bvm run emits grid, density and draws", "[simulate]") {
    SimSetting setting;
    setting.n = 60;
    setting.p = 30;
    setting.A = 4.0;
    setting.r = 0.2;
    setting.signal_positions = {2, 3, 14};
    setting.seed = 601;

    ChainSettings mcmc;
    mcmc.iters = 4000;
    mcmc.burnin = 1000;

    const BvmRun run = run_bvm(setting, ig_hp(), mcmc, 3000, 101);
    REQUIRE(run.draws.size() == 3000);
    REQUIRE(run.grid.size() == 101);
    REQUIRE(run.oracle_density.size() == 101);
    for (double d : run.oracle_density) REQUIRE(d >= 0.0);
    REQUIRE(run.diag.ks >= 0.0);
    REQUIRE(run.diag.ks <= 1.0);
    // grid covers the oracle's bulk
    REQUIRE(run.grid.front() < run.oracle.location);
    REQUIRE(run.grid.back() > run.oracle.location);
}
