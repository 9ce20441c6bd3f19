#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ebpred/errors.hpp"

namespace ebpred {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Regression data (X, y) with n rows and p covariates.
struct Dataset {
    MatrixXd X;
    VectorXd y;

    Dataset(MatrixXd X_, VectorXd y_) : X(std::move(X_)), y(std::move(y_)) {
        if (X.rows() < 1 || X.cols() < 1)
            throw ConfigError("dataset needs at least one row and one column");
        if (y.size() != X.rows())
            throw DimensionMismatch("y has length " + std::to_string(y.size()) +
                                    ", X has " + std::to_string(X.rows()) + " rows");
        if (!X.allFinite() || !y.allFinite())
            throw ConfigError("dataset contains non-finite entries");
    }

    int n() const { return static_cast<int>(X.rows()); }
    int p() const { return static_cast<int>(X.cols()); }
};

/// Active-covariate index set S: strictly increasing, within [0, p).
class Configuration {
  public:
    Configuration() = default;

    explicit Configuration(std::vector<int> indices) : idx_(std::move(indices)) {
        std::sort(idx_.begin(), idx_.end());
        for (std::size_t i = 0; i + 1 < idx_.size(); ++i)
            if (idx_[i] == idx_[i + 1])
                throw ConfigError("duplicate index " + std::to_string(idx_[i]) +
                                  " in configuration");
        if (!idx_.empty() && idx_.front() < 0)
            throw ConfigError("negative covariate index");
    }

    int size() const { return static_cast<int>(idx_.size()); }
    bool empty() const { return idx_.empty(); }
    const std::vector<int>& indices() const { return idx_; }
    int operator[](int i) const { return idx_[static_cast<std::size_t>(i)]; }

    bool contains(int j) const {
        return std::binary_search(idx_.begin(), idx_.end(), j);
    }

    Configuration with_added(int j) const {
        auto v = idx_;
        v.insert(std::upper_bound(v.begin(), v.end(), j), j);
        return Configuration(Unchecked{}, std::move(v));
    }

    Configuration with_removed(int j) const {
        auto v = idx_;
        v.erase(std::find(v.begin(), v.end(), j));
        return Configuration(Unchecked{}, std::move(v));
    }

    bool operator==(const Configuration& o) const { return idx_ == o.idx_; }

    std::string to_string() const {
        std::string s = "{";
        for (std::size_t i = 0; i < idx_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(idx_[i]);
        }
        return s + "}";
    }

  private:
    struct Unchecked {};
    Configuration(Unchecked, std::vector<int> sorted) : idx_(std::move(sorted)) {}
    std::vector<int> idx_;
};

struct ConfigurationHash {
    std::size_t operator()(const Configuration& c) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (int j : c.indices()) {
            h ^= static_cast<std::uint64_t>(j) + 1;
            h *= 0x100000001b3ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

/// New covariate row at which to predict.
struct QueryPoint {
    VectorXd x;

    explicit QueryPoint(VectorXd x_) : x(std::move(x_)) {
        if (!x.allFinite()) throw ConfigError("query point has non-finite entries");
    }

    // subvector x_S
    VectorXd select(const Configuration& S) const {
        VectorXd out(S.size());
        for (int i = 0; i < S.size(); ++i) {
            if (S[i] >= x.size()) throw DimensionMismatch("configuration index beyond query length");
            out[i] = x[S[i]];
        }
        return out;
    }
};

}  // namespace ebpred
