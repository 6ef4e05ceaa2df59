#include "recon/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "recon/rng.hpp"

namespace recon {

QaryFrame sample_frame(const ChannelParams& params, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("channel: frame length must be positive");
    if (params.p < 0.0 || params.p >= 1.0)
        throw std::invalid_argument("channel: transition probability out of range");
    QaryFrame frame;
    frame.q = params.q;
    frame.n = n;
    frame.seed = seed;
    frame.x.resize(n);
    frame.y.resize(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        gf_elem xi = static_cast<gf_elem>(rng.below(params.q));
        frame.x[i] = xi;
        if (rng.chance(params.p)) {
            // XOR with a uniform nonzero offset hits each other value once.
            gf_elem d = static_cast<gf_elem>(1 + rng.below(params.q - 1));
            frame.y[i] = xi ^ d;
        } else {
            frame.y[i] = xi;
        }
    }
    return frame;
}

double conditional_entropy(const ChannelParams& params, EntropyBase base) {
    double p = params.p;
    if (p == 0.0) return 0.0;
    double q = static_cast<double>(params.q);
    double lnq = std::log(q);
    double h = -((1.0 - p) * std::log(1.0 - p) + p * std::log(p / (q - 1.0))) / lnq;
    if (base == EntropyBase::base_q) return h;
    return h * std::log2(q);
}

double efficiency(std::uint64_t leak_bits, std::size_t n, const ChannelParams& params) {
    double h2 = conditional_entropy(params, EntropyBase::base_2);
    if (h2 == 0.0) {
        if (leak_bits == 0) return 0.0;
        return std::numeric_limits<double>::infinity();
    }
    return static_cast<double>(leak_bits) / (static_cast<double>(n) * h2);
}

}  // namespace recon
