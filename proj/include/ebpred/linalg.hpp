#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "ebpred/dataset.hpp"
#include "ebpred/errors.hpp"

namespace ebpred {

/// Least-squares summary of one configuration: beta_hat_S, the lower Cholesky
/// factor of X_S^T X_S, fitted values and residual sum of squares.
struct LsFit {
    Configuration config;
    VectorXd beta_hat;    // |S|
    MatrixXd chol_factor; // lower triangular L, L L^T = X_S^T X_S
    VectorXd fitted;      // n
    double rss = 0.0;

    int size() const { return config.size(); }
};

namespace detail {

// Lower Cholesky with an explicit pivot guard: a pivot below
// tol_rel * max(diag(G)) signals a collinear/duplicated column set.
inline MatrixXd cholesky_lower(const MatrixXd& G, double tol_rel = 1e-10) {
    const int s = static_cast<int>(G.rows());
    const double floor = tol_rel * G.diagonal().maxCoeff();
    MatrixXd L = MatrixXd::Zero(s, s);
    for (int j = 0; j < s; ++j) {
        double d = G(j, j);
        for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (!(d > floor))
            throw SingularDesign("Cholesky pivot " + std::to_string(d) +
                                 " below tolerance at column " + std::to_string(j));
        L(j, j) = std::sqrt(d);
        for (int i = j + 1; i < s; ++i) {
            double v = G(i, j);
            for (int k = 0; k < j; ++k) v -= L(i, k) * L(j, k);
            L(i, j) = v / L(j, j);
        }
    }
    return L;
}

inline MatrixXd select_columns(const MatrixXd& X, const Configuration& S) {
    MatrixXd Xs(X.rows(), S.size());
    for (int i = 0; i < S.size(); ++i) {
        if (S[i] >= X.cols())
            throw DimensionMismatch("configuration index " + std::to_string(S[i]) +
                                    " out of range for p=" + std::to_string(X.cols()));
        Xs.col(i) = X.col(S[i]);
    }
    return Xs;
}

}  // namespace detail

/// Least-squares fit of y on X_S. Empty S is the zero fit with rss = ||y||^2.
inline LsFit fit_configuration(const Dataset& data, const Configuration& S) {
    LsFit fit;
    fit.config = S;
    if (S.empty()) {
        fit.beta_hat = VectorXd();
        fit.chol_factor = MatrixXd();
        fit.fitted = VectorXd::Zero(data.n());
        fit.rss = data.y.squaredNorm();
        return fit;
    }
    const MatrixXd Xs = detail::select_columns(data.X, S);
    const MatrixXd G = Xs.transpose() * Xs;
    fit.chol_factor = detail::cholesky_lower(G);
    const VectorXd Xty = Xs.transpose() * data.y;
    const VectorXd w = fit.chol_factor.triangularView<Eigen::Lower>().solve(Xty);
    fit.beta_hat = fit.chol_factor.transpose().triangularView<Eigen::Upper>().solve(w);
    fit.fitted = Xs * fit.beta_hat;
    fit.rss = (data.y - fit.fitted).squaredNorm();
    return fit;
}

/// x_S^T (X_S^T X_S)^{-1} x_S via one triangular solve; >= 0 by construction.
inline double quadratic_form(const LsFit& fit, const VectorXd& xS) {
    if (xS.size() != fit.size())
        throw DimensionMismatch("quadratic_form: vector length " + std::to_string(xS.size()) +
                                " vs configuration size " + std::to_string(fit.size()));
    if (fit.size() == 0) return 0.0;
    const VectorXd w = fit.chol_factor.triangularView<Eigen::Lower>().solve(xS);
    return w.squaredNorm();
}

}  // namespace ebpred
