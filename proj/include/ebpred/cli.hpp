#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ebpred/csv.hpp"
#include "ebpred/dataset.hpp"
#include "ebpred/hyperparams.hpp"
#include "ebpred/manifest.hpp"
#include "ebpred/posterior.hpp"
#include "ebpred/predictive.hpp"
#include "ebpred/sampler.hpp"
#include "ebpred/simulate.hpp"

namespace ebpred::cli {

namespace fs = std::filesystem;

/// Everything a run needs; serialized verbatim into the run manifest.
struct RunConfig {
    std::string mode;

    // io
    std::string x_path, y_path, xnew_path;
    std::string out_dir = "ebpred_out";

    // hyperparameters
    double alpha = 0.99, gamma = 0.005, prior_a = 0.05, prior_c = 1.0;
    int R = 0;
    std::optional<double> sigma2;  // set => known-sigma2 mode
    double ig_a0 = 0.01, ig_b0 = 4.0;
    bool force = false;

    // mcmc / predictive
    int iters = 20000, burnin = 5000, thin = 1;
    std::uint64_t seed = 0;
    int m = 10000;
    double level = 0.95;
    int threads = 1;
    bool draw_sigma2 = false;

    // simulate
    int n = 100, p = 125;
    double A = 2.0, r = 0.2;
    int reps = 250;
    double noise_sd = 1.0;
    std::vector<int> signals0{2, 3, 14, 21, 24};  // canonical 0-based
    int test_batch = 1;
    bool bvm = false;
    int grid = 401;

    // bench-splits
    double train_frac = 0.75;
    int splits = 20;

    HyperParams hyper() const {
        HyperParams hp;
        hp.alpha = alpha;
        hp.gamma = gamma;
        hp.a = prior_a;
        hp.c = prior_c;
        hp.R = R;
        if (sigma2)
            hp.sigma_mode = KnownSigma{*sigma2};
        else
            hp.sigma_mode = InverseGammaSigma{ig_a0, ig_b0};
        return hp;
    }

    ChainSettings chain_settings() const {
        ChainSettings cs;
        cs.iters = iters;
        cs.burnin = burnin;
        cs.thin = thin;
        cs.seed = seed;
        cs.draw_sigma2 = draw_sigma2;
        return cs;
    }

    SimSetting sim_setting() const {
        SimSetting s;
        s.n = n;
        s.p = p;
        s.A = A;
        s.r = r;
        s.signal_positions = signals0;
        s.reps = reps;
        s.noise_sd = noise_sd;
        s.seed = seed;
        s.test_batch = test_batch;
        return s;
    }
};

namespace detail {

inline std::string join_ints(const std::vector<int>& v, char sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += std::to_string(v[i]);
    }
    return s;
}

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t comma = s.find(',', start);
        const std::string tok = s.substr(start, comma == std::string::npos ? std::string::npos
                                                                           : comma - start);
        if (!tok.empty()) {
            try {
                out.push_back(std::stoi(tok));
            } catch (const std::exception&) {
                throw ParseError("bad integer '" + tok + "' in list '" + s + "'");
            }
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

inline void apply_manifest(RunConfig& cfg, const Manifest& man) {
    const auto get_d = [&](const char* k, double& v) { if (man.has(k)) v = std::stod(man.get(k)); };
    const auto get_i = [&](const char* k, int& v) { if (man.has(k)) v = std::stoi(man.get(k)); };
    const auto get_b = [&](const char* k, bool& v) { if (man.has(k)) v = man.get(k) == "1" || man.get(k) == "true"; };
    const auto get_s = [&](const char* k, std::string& v) { if (man.has(k)) v = man.get(k); };

    get_s("mode", cfg.mode);
    get_s("x", cfg.x_path);
    get_s("y", cfg.y_path);
    get_s("xnew", cfg.xnew_path);
    get_s("out_dir", cfg.out_dir);
    get_d("alpha", cfg.alpha);
    get_d("gamma", cfg.gamma);
    get_d("a", cfg.prior_a);
    get_d("c", cfg.prior_c);
    get_i("R", cfg.R);
    if (man.has("sigma2")) cfg.sigma2 = std::stod(man.get("sigma2"));
    get_d("ig_a0", cfg.ig_a0);
    get_d("ig_b0", cfg.ig_b0);
    get_b("force", cfg.force);
    get_i("iters", cfg.iters);
    get_i("burnin", cfg.burnin);
    get_i("thin", cfg.thin);
    if (man.has("seed")) cfg.seed = std::stoull(man.get("seed"));
    get_i("m", cfg.m);
    get_d("level", cfg.level);
    get_i("threads", cfg.threads);
    get_b("draw_sigma2", cfg.draw_sigma2);
    get_i("n", cfg.n);
    get_i("p", cfg.p);
    get_d("A", cfg.A);
    get_d("r", cfg.r);
    get_i("reps", cfg.reps);
    get_d("noise_sd", cfg.noise_sd);
    if (man.has("signals0")) cfg.signals0 = parse_int_list(man.get("signals0"));
    get_i("test_batch", cfg.test_batch);
    get_b("bvm", cfg.bvm);
    get_i("grid", cfg.grid);
    get_d("train_frac", cfg.train_frac);
    get_i("splits", cfg.splits);
}

inline Manifest to_manifest(const RunConfig& cfg) {
    Manifest man;
    man.set("mode", cfg.mode);
    if (!cfg.x_path.empty()) man.set("x", cfg.x_path);
    if (!cfg.y_path.empty()) man.set("y", cfg.y_path);
    if (!cfg.xnew_path.empty()) man.set("xnew", cfg.xnew_path);
    man.set("out_dir", cfg.out_dir);
    man.set("alpha", format_double(cfg.alpha));
    man.set("gamma", format_double(cfg.gamma));
    man.set("a", format_double(cfg.prior_a));
    man.set("c", format_double(cfg.prior_c));
    man.set("R", format_int(cfg.R));
    if (cfg.sigma2) man.set("sigma2", format_double(*cfg.sigma2));
    man.set("ig_a0", format_double(cfg.ig_a0));
    man.set("ig_b0", format_double(cfg.ig_b0));
    man.set("force", cfg.force ? "1" : "0");
    man.set("iters", format_int(cfg.iters));
    man.set("burnin", format_int(cfg.burnin));
    man.set("thin", format_int(cfg.thin));
    man.set("seed", std::to_string(cfg.seed));
    man.set("m", format_int(cfg.m));
    man.set("level", format_double(cfg.level));
    man.set("threads", format_int(cfg.threads));
    man.set("draw_sigma2", cfg.draw_sigma2 ? "1" : "0");
    if (cfg.mode == "simulate") {
        man.set("n", format_int(cfg.n));
        man.set("p", format_int(cfg.p));
        man.set("A", format_double(cfg.A));
        man.set("r", format_double(cfg.r));
        man.set("reps", format_int(cfg.reps));
        man.set("noise_sd", format_double(cfg.noise_sd));
        man.set("signals0", join_ints(cfg.signals0, ','));
        man.set("test_batch", format_int(cfg.test_batch));
        man.set("bvm", cfg.bvm ? "1" : "0");
        man.set("grid", format_int(cfg.grid));
    }
    if (cfg.mode == "bench-splits") {
        man.set("train_frac", format_double(cfg.train_frac));
        man.set("splits", format_int(cfg.splits));
    }
    return man;
}

inline void hash_inputs(Manifest& man, const RunConfig& cfg) {
    if (!cfg.x_path.empty()) man.set("input_hash_x", git_blob_hash(cfg.x_path));
    if (!cfg.y_path.empty()) man.set("input_hash_y", git_blob_hash(cfg.y_path));
    if (!cfg.xnew_path.empty()) man.set("input_hash_xnew", git_blob_hash(cfg.xnew_path));
}

inline Dataset load_dataset(const RunConfig& cfg) {
    if (cfg.x_path.empty() || cfg.y_path.empty())
        throw ConfigError("this mode needs --x and --y");
    MatrixXd X = load_matrix(cfg.x_path);
    VectorXd y = load_vector(cfg.y_path);
    return Dataset(std::move(X), std::move(y));
}

inline void write_config_column(CsvWriter& w, const Configuration& S,
                                std::vector<std::string>& cells) {
    cells.push_back(join_ints(S.indices(), ';'));
    w.write_row_strings(cells);
    cells.clear();
}

inline int run_fit(const RunConfig& cfg) {
    const Dataset data = load_dataset(cfg);
    HyperParams hp = cfg.hyper().resolved(data.n(), data.p());
    hp.validate(data.n(), data.p(), cfg.force);
    ChainSettings cs = cfg.chain_settings();
    cs.draw_sigma2 = cfg.draw_sigma2 || !hp.known_sigma();
    const ConfigChain chain = run_chain(data, hp, cs);

    const fs::path out(cfg.out_dir);
    const VectorXd incl = inclusion_probs(chain, data.p());
    {
        CsvWriter w(out / "inclusion.csv");
        w.write_header({"index", "inclusion_prob"});
        for (int j = 0; j < data.p(); ++j)
            w.write_row_strings({format_int(j), format_double(incl[j])});
    }
    {
        CsvWriter w(out / "chain.csv");
        const bool has_s2 = chain.sigma2_draws.has_value();
        if (has_s2)
            w.write_header({"draw", "size", "log_weight", "sigma2", "indices"});
        else
            w.write_header({"draw", "size", "log_weight", "indices"});
        std::vector<std::string> cells;
        for (int i = 0; i < chain.size(); ++i) {
            cells = {format_int(i), format_int(chain.states[i].size()),
                     format_double(chain.log_weights[i].value)};
            if (has_s2) cells.push_back(format_double((*chain.sigma2_draws)[i]));
            write_config_column(w, chain.states[i], cells);
        }
    }
    {
        nlohmann::json j;
        j["n"] = data.n();
        j["p"] = data.p();
        j["retained"] = chain.size();
        j["acceptance_rate"] = chain.acceptance_rate();
        j["seed"] = chain.seed;
        const VectorXd beta_bar = posterior_mean_beta(chain, data);
        std::vector<double> bb(beta_bar.data(), beta_bar.data() + beta_bar.size());
        j["posterior_mean_beta"] = bb;
        std::ofstream(out / "summary.json") << j.dump(2) << "\n";
    }
    std::cout << "fit: retained " << chain.size() << " states, acceptance rate "
              << chain.acceptance_rate() << "\n";
    return 0;
}

inline int run_predict(const RunConfig& cfg) {
    const Dataset data = load_dataset(cfg);
    if (cfg.xnew_path.empty()) throw ConfigError("predict needs --xnew");
    MatrixXd Xnew = load_matrix(cfg.xnew_path);
    if (Xnew.cols() != data.p() && Xnew.rows() == data.p() && Xnew.cols() == 1)
        Xnew = Xnew.transpose().eval();
    if (Xnew.cols() != data.p())
        throw DimensionMismatch("xnew has " + std::to_string(Xnew.cols()) +
                                " columns, expected p=" + std::to_string(data.p()));

    HyperParams hp = cfg.hyper().resolved(data.n(), data.p());
    hp.validate(data.n(), data.p(), cfg.force);
    const ConfigChain chain = run_chain(data, hp, cfg.chain_settings());

    const fs::path out(cfg.out_dir);
    CsvWriter draws_csv(out / "draws.csv");
    std::vector<std::string> header;
    for (Eigen::Index i = 0; i < Xnew.rows(); ++i) header.push_back("row" + std::to_string(i));
    draws_csv.write_header(header);

    nlohmann::json intervals = nlohmann::json::array();
    std::vector<PredictiveDraws> all;
    RandomSource rng(substream_seed(cfg.seed, 0x9d));
    for (Eigen::Index i = 0; i < Xnew.rows(); ++i) {
        const QueryPoint xq(Xnew.row(i).transpose());
        RandomSource row_rng = rng.spawn(static_cast<std::uint64_t>(i));
        all.push_back(sample_predictive(chain, data, hp, xq, cfg.m, row_rng, cfg.level));
        const auto& pd = all.back();
        intervals.push_back({{"row", i},
                             {"point", pd.point_prediction},
                             {"level", pd.level},
                             {"lo", pd.interval.first},
                             {"hi", pd.interval.second}});
    }
    std::vector<double> row(all.size());
    for (int k = 0; k < cfg.m; ++k) {
        for (std::size_t i = 0; i < all.size(); ++i)
            row[i] = all[i].draws[static_cast<std::size_t>(k)];
        draws_csv.write_row(row);
    }
    std::ofstream(out / "intervals.json") << intervals.dump(2) << "\n";
    for (const auto& iv : intervals)
        std::cout << "predict row " << iv["row"] << ": point " << iv["point"].get<double>()
                  << ", " << 100 * cfg.level << "% interval [" << iv["lo"].get<double>() << ", "
                  << iv["hi"].get<double>() << "]\n";
    return 0;
}

inline int run_simulate(RunConfig& cfg, Manifest& man) {
    const SimSetting setting = cfg.sim_setting();
    HyperParams hp = cfg.hyper().resolved(setting.n, setting.p);
    hp.validate(setting.n, setting.p, cfg.force);
    const fs::path out(cfg.out_dir);

    if (cfg.bvm) {
        const BvmRun run = run_bvm(setting, hp, cfg.chain_settings(), cfg.m, cfg.grid);
        {
            CsvWriter w(out / "bvm_oracle_density.csv");
            w.write_header({"grid", "oracle_density"});
            for (std::size_t i = 0; i < run.grid.size(); ++i)
                w.write_row({run.grid[i], run.oracle_density[i]});
        }
        {
            CsvWriter w(out / "bvm_draws.csv");
            w.write_header({"draw"});
            for (double d : run.draws) w.write_row({d});
        }
        man.set("bvm_ks", format_double(run.diag.ks));
        man.set("bvm_mean_abs_diff", format_double(run.diag.mean_abs_diff));
        std::cout << "bvm: ks " << run.diag.ks << ", mean |dCDF| " << run.diag.mean_abs_diff
                  << "\n";
        return 0;
    }

    const ExperimentReport report =
        run_experiment(setting, hp, cfg.chain_settings(), cfg.m, cfg.level, cfg.threads);
    {
        CsvWriter w(out / "results.csv");
        w.write_header({"n", "p", "A", "r", "reps", "seed", "mspe", "coverage", "mean_length",
                        "oracle_coverage", "oracle_length"});
        w.write_row_strings({format_int(setting.n), format_int(setting.p),
                             format_double(setting.A), format_double(setting.r),
                             format_int(setting.reps), std::to_string(setting.seed),
                             format_double(report.mspe), format_double(report.coverage),
                             format_double(report.mean_length),
                             format_double(report.oracle_coverage),
                             format_double(report.oracle_mean_length)});
    }
    {
        CsvWriter w(out / "replications.csv");
        w.write_header({"rep", "sq_error", "covered", "length", "oracle_covered",
                        "oracle_length", "accept_rate"});
        for (const auto& rec : report.records)
            w.write_row_strings({format_int(rec.rep), format_double(rec.sq_error),
                                 format_double(rec.covered), format_double(rec.length),
                                 format_double(rec.oracle_covered),
                                 format_double(rec.oracle_length),
                                 format_double(rec.accept_rate)});
    }
    man.set("wall_clock_s", format_double(report.wall_clock_s));
    std::cout << "simulate: mspe " << report.mspe << ", coverage " << report.coverage
              << ", mean length " << report.mean_length << ", oracle length "
              << report.oracle_mean_length << " (" << report.wall_clock_s << " s)\n";
    return 0;
}

inline int run_enumerate(const RunConfig& cfg) {
    const Dataset data = load_dataset(cfg);
    HyperParams hp = cfg.hyper().resolved(data.n(), data.p());
    hp.validate(data.n(), data.p(), cfg.force);
    auto post = enumerate_posterior(data, hp);
    std::sort(post.begin(), post.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first.to_string() < b.first.to_string();
    });
    const fs::path out(cfg.out_dir);
    CsvWriter w(out / "posterior.csv");
    w.write_header({"probability", "size", "indices"});
    std::vector<std::string> cells;
    for (const auto& [S, prob] : post) {
        cells = {format_double(prob), format_int(S.size())};
        write_config_column(w, S, cells);
    }
    std::cout << "enumerate: " << post.size() << " configurations\n";
    return 0;
}

inline int run_bench_splits(const RunConfig& cfg, Manifest& man) {
    const Dataset data = load_dataset(cfg);
    HyperParams hp = cfg.hyper().resolved(data.n(), data.p());
    hp.validate(data.n(), data.p(), cfg.force);
    RandomSource rng(cfg.seed);
    ChainSettings cs = cfg.chain_settings();
    const SplitBenchmark bench =
        run_split_benchmark(data, cfg.train_frac, cfg.splits, hp, cs, cfg.m, rng);
    const fs::path out(cfg.out_dir);
    CsvWriter w(out / "splits.csv");
    w.write_header({"split", "n_train", "n_test", "mspe"});
    for (const auto& s : bench.splits)
        w.write_row_strings({format_int(s.split), format_int(s.n_train), format_int(s.n_test),
                             format_double(s.mspe)});
    man.set("bench_mean_mspe", format_double(bench.mean_mspe));
    std::cout << "bench-splits: mean out-of-sample mspe " << bench.mean_mspe << " over "
              << cfg.splits << " splits\n";
    return 0;
}

}  // namespace detail

/// Parse argv and run one subcommand. Returns the process exit status.
inline int cli_dispatch(int argc, const char* const* argv) {
    RunConfig cfg;

    // --config is applied before the regular flags so flags take precedence
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        std::string path;
        if (arg == "--config" && i + 1 < argc)
            path = argv[i + 1];
        else if (arg.rfind("--config=", 0) == 0)
            path = arg.substr(9);
        if (!path.empty()) {
            try {
                detail::apply_manifest(cfg, Manifest::load(path));
            } catch (const Error& e) {
                std::cerr << "error[" << e.code() << "]: " << e.what() << "\n";
                return 1;
            }
        }
    }
    if (const char* env = std::getenv("EBPRED_THREADS"); env && cfg.threads == 1)
        cfg.threads = std::max(1, std::atoi(env));

    CLI::App app{"Empirical-Bayes prediction for sparse high-dimensional linear regression"};
    app.require_subcommand(1);
    std::string config_dummy;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_dummy, "manifest/config file (flags override it)");
        sub->add_option("--out-dir", cfg.out_dir, "output directory");
        sub->add_option("--alpha", cfg.alpha, "likelihood fraction in (0,1)");
        sub->add_option("--gamma", cfg.gamma, "slab precision multiplier");
        sub->add_option("--a", cfg.prior_a, "complexity-prior exponent");
        sub->add_option("--c", cfg.prior_c, "complexity-prior base");
        sub->add_option("--R", cfg.R, "max model size (0 = min(n,p))");
        sub->add_option("--sigma2", [&cfg](const std::vector<std::string>& v) {
            cfg.sigma2 = std::stod(v.front());
            return true;
        }, "known error variance (switches off the inverse-gamma prior)");
        sub->add_option("--ig-a0", cfg.ig_a0, "inverse-gamma shape");
        sub->add_option("--ig-b0", cfg.ig_b0, "inverse-gamma scale");
        sub->add_flag("--force", cfg.force, "allow alpha + gamma > 1");
        sub->add_option("--iters", cfg.iters, "MCMC iterations");
        sub->add_option("--burnin", cfg.burnin, "burn-in iterations");
        sub->add_option("--thin", cfg.thin, "thinning stride");
        sub->add_option("--seed", cfg.seed, "master seed");
        sub->add_option("--m", cfg.m, "predictive Monte Carlo size");
        sub->add_option("--level", cfg.level, "interval coverage level");
        sub->add_option("--threads", cfg.threads, "worker threads (EBPRED_THREADS fallback)");
    };

    auto* fit = app.add_subcommand("fit", "sample the configuration posterior");
    add_common(fit);
    fit->add_option("--x", cfg.x_path, "covariate CSV (n x p)")->required(cfg.x_path.empty());
    fit->add_option("--y", cfg.y_path, "response CSV (n)")->required(cfg.y_path.empty());
    fit->add_flag("--draw-sigma2", cfg.draw_sigma2, "attach sigma^2 draws (IG mode)");

    auto* predict = app.add_subcommand("predict", "posterior predictive at new points");
    add_common(predict);
    predict->add_option("--x", cfg.x_path, "covariate CSV")->required(cfg.x_path.empty());
    predict->add_option("--y", cfg.y_path, "response CSV")->required(cfg.y_path.empty());
    predict->add_option("--xnew", cfg.xnew_path, "query rows CSV")->required(cfg.xnew_path.empty());

    auto* simulate = app.add_subcommand("simulate", "replicated synthetic experiment");
    add_common(simulate);
    std::string signals_raw;
    int signals_base = 1;
    simulate->add_option("--n", cfg.n, "observations per replication");
    simulate->add_option("--p", cfg.p, "number of covariates");
    simulate->add_option("--A", cfg.A, "signal magnitude");
    simulate->add_option("--r", cfg.r, "AR(1) correlation");
    simulate->add_option("--reps", cfg.reps, "replications");
    simulate->add_option("--noise-sd", cfg.noise_sd, "error standard deviation");
    simulate->add_option("--signals", signals_raw, "signal positions, comma separated");
    simulate->add_option("--signals-base", signals_base, "0- or 1-based --signals (default 1)");
    simulate->add_option("--test-batch", cfg.test_batch, "fresh test pairs per replication");
    simulate->add_flag("--bvm", cfg.bvm, "emit predictive-vs-oracle density data instead");
    simulate->add_option("--grid", cfg.grid, "density grid size for --bvm");

    auto* enumerate = app.add_subcommand("enumerate", "exact posterior over small model spaces");
    add_common(enumerate);
    enumerate->add_option("--x", cfg.x_path, "covariate CSV")->required(cfg.x_path.empty());
    enumerate->add_option("--y", cfg.y_path, "response CSV")->required(cfg.y_path.empty());

    auto* bench = app.add_subcommand("bench-splits", "random train/test split benchmark");
    add_common(bench);
    bench->add_option("--x", cfg.x_path, "covariate CSV")->required(cfg.x_path.empty());
    bench->add_option("--y", cfg.y_path, "response CSV")->required(cfg.y_path.empty());
    bench->add_option("--train-frac", cfg.train_frac, "train fraction in (0,1)");
    bench->add_option("--splits", cfg.splits, "number of random splits");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error[UsageError]: " << e.what() << "\n";
        return 1;
    }

    try {
        if (simulate->parsed() && !signals_raw.empty()) {
            cfg.signals0 = detail::parse_int_list(signals_raw);
            for (int& j : cfg.signals0) j -= signals_base;
        }
        if (fit->parsed()) cfg.mode = "fit";
        if (predict->parsed()) cfg.mode = "predict";
        if (simulate->parsed()) cfg.mode = "simulate";
        if (enumerate->parsed()) cfg.mode = "enumerate";
        if (bench->parsed()) cfg.mode = "bench-splits";

        fs::create_directories(cfg.out_dir);
        Manifest man = detail::to_manifest(cfg);
        detail::hash_inputs(man, cfg);

        int status = 1;
        if (cfg.mode == "fit") status = detail::run_fit(cfg);
        else if (cfg.mode == "predict") status = detail::run_predict(cfg);
        else if (cfg.mode == "simulate") status = detail::run_simulate(cfg, man);
        else if (cfg.mode == "enumerate") status = detail::run_enumerate(cfg);
        else if (cfg.mode == "bench-splits") status = detail::run_bench_splits(cfg, man);

        man.save(fs::path(cfg.out_dir) / "manifest.txt");
        return status;
    } catch (const Error& e) {
        std::cerr << "error[" << e.code() << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error[Unexpected]: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace ebpred::cli
