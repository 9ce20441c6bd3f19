#pragma once

#include <cstdint>
#include <random>

namespace ebpred {

// splitmix64; used to derive independent sub-stream seeds from a master seed.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based seed fan-out: stream k of a master seed.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream) {
    return mix64(master ^ mix64(stream + 1));
}

/// Random source owned by exactly one thread of execution.
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // U(0,1)
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    // uniform integer in [0, n)
    std::int64_t uniform_index(std::int64_t n) {
        return std::uniform_int_distribution<std::int64_t>(0, n - 1)(engine_);
    }

    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

    double gamma(double shape, double scale) {
        return std::gamma_distribution<double>(shape, scale)(engine_);
    }

    double chi_squared(double df) {
        return std::chi_squared_distribution<double>(df)(engine_);
    }

    // sigma^2 ~ InverseGamma(shape, scale): density scale^shape/Gamma(shape) x^-(shape+1) exp(-scale/x)
    double inverse_gamma(double shape, double scale) {
        return scale / std::gamma_distribution<double>(shape, 1.0)(engine_);
    }

    // standard Student-t via normal / sqrt(chi2/df)
    double student_t(double df) { return normal() / std::sqrt(chi_squared(df) / df); }

    // spawn an independent child source (consumes nothing from this engine)
    RandomSource spawn(std::uint64_t stream) const { return RandomSource(substream_seed(seed_, stream)); }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

}  // namespace ebpred
