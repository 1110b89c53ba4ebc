#pragma once

#include <cstdint>
#include <random>

namespace sprint {

// Seeded generator with hand-rolled distributions so that identical seeds
// give identical streams on every platform (std:: distributions are
// implementation-defined).
class Rng {
  public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n); n must be positive
    int uniform_int(int n) { return static_cast<int>(gen_() % static_cast<uint64_t>(n)); }

  private:
    std::mt19937_64 gen_;
};

}  // namespace sprint
