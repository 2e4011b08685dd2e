#pragma once

#include <cstdint>
#include <vector>

namespace epora {

// xoshiro256++ seeded through splitmix64.  Self-contained so replication
// streams are bit-identical across standard libraries and platforms, which
// the simulator's determinism contract requires.
class Rng {
  public:
    explicit Rng(std::uint64_t seed);

    // Independent stream keyed by (master seed, replication, purpose).
    // Streams never touch shared state, so replications can run on any
    // thread in any order.
    static Rng stream(std::uint64_t master, std::uint64_t replication,
                      std::uint64_t purpose);

    std::uint64_t next();

    // Uniform in [0, 1) with 53 random bits.
    double u01();

    // Exponential with the given rate (rate > 0).
    double exponential(double rate);

    // Uniform integer in [0, n), n >= 1.
    std::uint64_t below(std::uint64_t n);

    // Standard normal (Box-Muller, one value per call).
    double normal();

    // Uniform random permutation of {0, ..., n-1} (Fisher-Yates).
    std::vector<int> permutation(int n);

  private:
    std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace epora
