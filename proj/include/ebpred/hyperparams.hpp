#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>

#include "ebpred/errors.hpp"

namespace ebpred {

/// Error variance treated as known (a user-supplied estimate).
struct KnownSigma {
    double sigma2 = 1.0;
};

/// Inverse-gamma prior on the error variance.
struct InverseGammaSigma {
    double a0 = 0.01;
    double b0 = 4.0;
};

using SigmaMode = std::variant<KnownSigma, InverseGammaSigma>;

/// Hyperparameters of the prior/posterior. R == 0 means "use min(n, p)".
struct HyperParams {
    double alpha = 0.99;  // likelihood fraction
    double gamma = 0.005; // slab precision multiplier
    double a = 0.05;      // complexity-prior exponent
    double c = 1.0;       // complexity-prior base
    int R = 0;            // max model size; 0 = min(n, p)
    SigmaMode sigma_mode = InverseGammaSigma{};

    bool known_sigma() const { return std::holds_alternative<KnownSigma>(sigma_mode); }

    double sigma2() const {
        if (const auto* k = std::get_if<KnownSigma>(&sigma_mode)) return k->sigma2;
        throw ModeMismatch("sigma2 requested under inverse-gamma mode");
    }

    const InverseGammaSigma& inverse_gamma() const {
        if (const auto* ig = std::get_if<InverseGammaSigma>(&sigma_mode)) return *ig;
        throw ModeMismatch("inverse-gamma parameters requested under known-sigma2 mode");
    }

    int effective_R(int n, int p) const {
        return R > 0 ? R : std::min(n, p);
    }

    /// Copy with R pinned to its effective value for the given data shape.
    HyperParams resolved(int n, int p) const {
        HyperParams out = *this;
        out.R = effective_R(n, p);
        return out;
    }

    /// Validate against a dataset shape. alpha + gamma <= 1 is the predictive
    /// calibration condition; `force` downgrades its violation to a pass.
    void validate(int n, int p, bool force = false) const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0,1)");
        if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
        if (!force && alpha + gamma > 1.0)
            throw ConfigError("alpha + gamma = " + std::to_string(alpha + gamma) +
                              " exceeds 1; pass --force to override the calibration condition");
        if (!(a > 0.0)) throw ConfigError("a must be positive");
        if (!(c > 0.0)) throw ConfigError("c must be positive");
        if (!(c * std::pow(static_cast<double>(p), a) > 1.0))
            throw ConfigError("c * p^a must exceed 1 for the size prior to decay");
        const int r = effective_R(n, p);
        if (r < 1 || r > std::min(n, p))
            throw ConfigError("R must lie in [1, min(n,p)]");
        if (const auto* k = std::get_if<KnownSigma>(&sigma_mode)) {
            if (!(k->sigma2 > 0.0)) throw ConfigError("sigma2 must be positive");
        } else {
            const auto& ig = std::get<InverseGammaSigma>(sigma_mode);
            if (!(ig.a0 > 0.0 && ig.b0 > 0.0)) throw ConfigError("a0, b0 must be positive");
        }
    }
};

}  // namespace ebpred
