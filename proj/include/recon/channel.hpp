#pragma once

#include <cstdint>
#include <vector>

#include "recon/gf.hpp"

namespace recon {

// q-ary symmetric channel: a symbol survives with probability 1-p and
// otherwise flips to one of the q-1 other values uniformly.
struct ChannelParams {
    unsigned q = 2;
    double p = 0.0;  // symbol error probability (the QBER)
};

struct QaryFrame {
    unsigned q = 2;
    std::size_t n = 0;
    std::vector<gf_elem> x;  // sender's string
    std::vector<gf_elem> y;  // receiver's string
    std::uint64_t seed = 0;
};

enum class EntropyBase { base_q, base_2 };

// x i.i.d. uniform over [0, q); y_i = x_i with probability 1-p, otherwise
// uniform over the other q-1 values. Deterministic given the seed.
QaryFrame sample_frame(const ChannelParams& params, std::size_t n, std::uint64_t seed);

// H(X|Y) of the symmetric channel; the base-2 value is v times the base-q one.
double conditional_entropy(const ChannelParams& params, EntropyBase base);

// f = leak_bits / (n * H_2(X|Y)). Returns +inf when H = 0 and leak > 0.
double efficiency(std::uint64_t leak_bits, std::size_t n, const ChannelParams& params);

}  // namespace recon
