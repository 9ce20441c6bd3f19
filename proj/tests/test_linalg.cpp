#include <catch2/catch_amalgamated.hpp>

#include "ebpred/linalg.hpp"
#include "test_support.hpp"

using namespace ebpred;
using ebtest::dense_ls;
using ebtest::random_matrix;
using ebtest::random_vector;

TEST_CASE("identity design recovers y exactly", "[linalg]") {
    Dataset data(MatrixXd::Identity(3, 3), (VectorXd(3) << 1, 2, 3).finished());
    const LsFit fit = fit_configuration(data, Configuration({0, 1, 2}));
    REQUIRE(fit.beta_hat.isApprox((VectorXd(3) << 1, 2, 3).finished(), 1e-12));
    REQUIRE(fit.rss == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("empty configuration is the zero fit", "[linalg]") {
    Dataset data(random_matrix(7, 4, 11), random_vector(7, 12));
    const LsFit fit = fit_configuration(data, Configuration());
    REQUIRE(fit.beta_hat.size() == 0);
    REQUIRE(fit.fitted.isZero());
    REQUIRE(fit.rss == Catch::Approx(data.y.squaredNorm()));
}

TEST_CASE("fit matches the dense normal-equation oracle", "[linalg]") {
    Dataset data(random_matrix(10, 4, 21), random_vector(10, 22));
    const LsFit fit = fit_configuration(data, Configuration({1, 3}));
    const auto oracle = dense_ls(data, {1, 3});
    REQUIRE(fit.beta_hat.isApprox(oracle.beta, 1e-10));
    REQUIRE(fit.rss == Catch::Approx(oracle.rss).epsilon(1e-10));
}

TEST_CASE("quadratic form", "[linalg]") {
    SECTION("identity Gram gives the squared norm") {
        // orthonormal columns via QR
        const MatrixXd Q = Eigen::HouseholderQR<MatrixXd>(random_matrix(8, 3, 31))
                               .householderQ() *
                           MatrixXd::Identity(8, 3);
        Dataset data(Q, random_vector(8, 32));
        const LsFit fit = fit_configuration(data, Configuration({0, 1, 2}));
        VectorXd e = VectorXd::Zero(3);
        e[1] = 1.0;
        REQUIRE(quadratic_form(fit, e) == Catch::Approx(1.0).epsilon(1e-10));
        REQUIRE(quadratic_form(fit, VectorXd::Zero(3)) == Catch::Approx(0.0).margin(1e-14));
    }
    SECTION("matches explicit inverse-then-quadratic") {
        Dataset data(random_matrix(8, 3, 41), random_vector(8, 42));
        const LsFit fit = fit_configuration(data, Configuration({0, 1, 2}));
        const VectorXd xS = (VectorXd(3) << 1, -1, 2).finished();
        const auto oracle = dense_ls(data, {0, 1, 2});
        REQUIRE(quadratic_form(fit, xS) ==
                Catch::Approx(xS.dot(oracle.gram_inv * xS)).epsilon(1e-10));
    }
    SECTION("dimension mismatch throws") {
        Dataset data(random_matrix(8, 3, 51), random_vector(8, 52));
        const LsFit fit = fit_configuration(data, Configuration({0, 2}));
        REQUIRE_THROWS_AS(quadratic_form(fit, VectorXd::Zero(3)), DimensionMismatch);
    }
}

TEST_CASE("factor reconstructs the Gram matrix", "[linalg]") {
    std::mt19937_64 eng(71);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 12 + static_cast<int>(eng() % 8);
        const int p = 11;
        const int s = 1 + static_cast<int>(eng() % 10);
        Dataset data(random_matrix(n, p, eng()), random_vector(n, eng()));
        std::vector<int> idx(p);
        for (int j = 0; j < p; ++j) idx[static_cast<std::size_t>(j)] = j;
        std::shuffle(idx.begin(), idx.end(), eng);
        idx.resize(static_cast<std::size_t>(s));
        std::sort(idx.begin(), idx.end());
        const Configuration S(idx);

        const LsFit fit = fit_configuration(data, S);
        const MatrixXd G = ebpred::detail::select_columns(data.X, S).transpose() *
                           ebpred::detail::select_columns(data.X, S);
        const MatrixXd recon = fit.chol_factor * fit.chol_factor.transpose();
        REQUIRE((recon - G).cwiseAbs().maxCoeff() <= 1e-10 * G.cwiseAbs().maxCoeff());

        // quadratic form vs dense inverse
        const VectorXd xS = random_vector(s, eng());
        const auto oracle = dense_ls(data, idx);
        const double expect = xS.dot(oracle.gram_inv * xS);
        REQUIRE(quadratic_form(fit, xS) == Catch::Approx(expect).epsilon(1e-8));
    }
}

TEST_CASE("rss shrinks along nested configurations", "[linalg]") {
    std::mt19937_64 eng(81);
    for (int trial = 0; trial < 50; ++trial) {
        Dataset data(random_matrix(15, 8, eng()), random_vector(15, eng()));
        std::vector<int> idx{0, 2, 5};
        const LsFit small = fit_configuration(data, Configuration(idx));
        idx.push_back(static_cast<int>(1 + eng() % 2 * 5));  // add 1 or 6
        const LsFit big = fit_configuration(data, Configuration(idx));
        REQUIRE(big.rss <= small.rss + 1e-9 * data.y.squaredNorm());
    }
}

TEST_CASE("collinear columns raise SingularDesign", "[linalg]") {
    MatrixXd X = random_matrix(9, 3, 91);
    X.col(2) = 2.0 * X.col(0);
    Dataset data(X, random_vector(9, 92));
    REQUIRE_THROWS_AS(fit_configuration(data, Configuration({0, 1, 2})), SingularDesign);
    // the independent pair still fits
    REQUIRE_NOTHROW(fit_configuration(data, Configuration({0, 1})));
}
