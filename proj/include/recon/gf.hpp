#pragma once

#include <array>
#include <cstdint>

namespace recon {

using gf_elem = std::uint8_t;

// Arithmetic tables for GF(q), q = 2^v, 2 <= q <= 256.
// Elements are integers in [0, q) whose bits are polynomial coefficients,
// so addition is XOR and the binary mapping of a symbol is its bit pattern.
// Multiplication runs through exp/log tables built from a fixed primitive
// polynomial per v; element 2 (the polynomial x) generates the full
// multiplicative group for every polynomial used here.
struct GfContext {
    unsigned q = 0;
    unsigned v = 0;
    unsigned primitive_poly = 0;
    std::array<gf_elem, 256> exp_table{};  // exp_table[i] = 2^i, i in [0, q-1)
    std::array<gf_elem, 256> log_table{};  // log_table[a] = i with 2^i = a, a != 0

    // Throws std::invalid_argument unless q is a power of two in [2, 256].
    static GfContext make(unsigned q);

    gf_elem add(gf_elem a, gf_elem b) const { return a ^ b; }
    gf_elem sub(gf_elem a, gf_elem b) const { return a ^ b; }

    gf_elem mul(gf_elem a, gf_elem b) const {
        if (a == 0 || b == 0) return 0;
        return exp_table[(log_table[a] + log_table[b]) % (q - 1)];
    }

    // Throws std::domain_error when b == 0.
    gf_elem div(gf_elem a, gf_elem b) const;

    gf_elem inv(gf_elem a) const { return div(1, a); }
};

}  // namespace recon
