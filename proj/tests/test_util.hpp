#pragma once

// Shared helpers for the test suites: a seeded RNG wrapper (every
// randomized suite fixes its own seed so failures replay exactly) and
// small tolerance utilities.

#include <cmath>
#include <cstdint>
#include <random>

namespace qbd::test {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * std::generate_canonical<double, 53>(engine_);
    }

    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    double normal() { return normal_(engine_); }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

inline double rel_err(double got, double want) {
    const double scale = std::abs(want) > 0.0 ? std::abs(want) : 1.0;
    return std::abs(got - want) / scale;
}

}  // namespace qbd::test
