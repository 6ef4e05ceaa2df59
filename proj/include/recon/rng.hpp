#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace recon {

// All randomness in the simulator flows through this wrapper so that runs are
// reproducible bit-for-bit across platforms and standard libraries. The core
// generator is std::mt19937_64 (fully specified by the standard); everything
// layered on top (bounded draws, doubles, shuffles) is hand-rolled here
// because the std distributions are implementation-defined.
//
// Stream derivation uses SplitMix64 so that (master seed, stream indices)
// yields decorrelated, documented sub-seeds: derive(master, a, b, ...) mixes
// each index in turn.
std::uint64_t splitmix64(std::uint64_t& state);

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : core_(seed) {}

    std::uint64_t u64() { return core_(); }

    // Uniform in [0, bound) by rejection; bound >= 1.
    std::uint64_t below(std::uint64_t bound);

    // Uniform in [0, 1) with 53 random bits.
    double real() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return real() < p; }

    // Fisher-Yates, last position first.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 core_;
};

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c);

}  // namespace recon
