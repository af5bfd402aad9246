#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace mpcsb {

namespace detail {

// splitmix64; used to derive independent streams from (seed, stream) pairs.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// Seedable pseudo-random source. Rng(seed, stream) yields streams that are
// independent for distinct stream ids, so environment draws and learner
// randomness never share state.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : Rng(seed, 0) {}

    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
        std::seed_seq seq{detail::splitmix64(s), detail::splitmix64(s),
                          detail::splitmix64(s), detail::splitmix64(s)};
        engine_.seed(seq);
    }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform(0.0, 1.0) < p;
    }

    double gamma(double shape) {
        return std::gamma_distribution<double>(shape, 1.0)(engine_);
    }

    // Beta(a, b) via the two-gamma ratio; valid for any a, b >= 1.
    double beta(double a, double b) {
        for (int attempt = 0; attempt < 64; ++attempt) {
            const double x = gamma(a);
            const double y = gamma(b);
            if (x + y > 0.0) return x / (x + y);
        }
        throw std::runtime_error("beta: degenerate gamma draws");
    }

    // Index k with probability weights[k] / sum(weights).
    int categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw std::invalid_argument("categorical: negative weight");
            total += w;
        }
        if (total <= 0.0) throw std::invalid_argument("categorical: zero total weight");
        double u = uniform(0.0, 1.0) * total;
        for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
            u -= weights[k];
            if (u < 0.0) return static_cast<int>(k);
        }
        return static_cast<int>(weights.size()) - 1;
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

}  // namespace mpcsb
