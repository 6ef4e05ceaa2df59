#pragma once

#include "recon/gf.hpp"
#include "recon/rng.hpp"
#include "recon/transcript.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace recon {

// Binary view of a q-ary string: v = log2(q) bits per symbol, laid out
// symbol-major (bit position sym*v + b holds bit b of symbol sym,
// big-endian, so b = 0 is the most significant bit). The other v-1 bits of
// the same symbol are a bit's "partners".
struct BinaryFrameView {
    unsigned v = 1;
    std::size_t n = 0;  // symbols
    std::size_t N = 0;  // bits, = n * v
    std::vector<std::uint8_t> bits;

    std::size_t symbol_of(std::size_t pos) const { return pos / v; }
    unsigned plane_of(std::size_t pos) const { return static_cast<unsigned>(pos % v); }
};

BinaryFrameView map_to_bits(const std::vector<gf_elem>& symbols, unsigned q);
std::vector<gf_elem> map_from_bits(const BinaryFrameView& view);

// Expected bit error rate of the mapped string for symbol error rate p:
// q/(2(q-1)) * p.
double qber_bin(unsigned q, double qber_sym);

// Parity of an odd (even) number of errors among t bits flipping
// independently with probability p.
double p_odd(std::size_t t, double p);
double p_even(std::size_t t, double p);

// Residual error rate entering iteration 2 for bits whose smallest
// matching block in iteration 1 had size t.
double qber_2nd(std::size_t t, double qber_bin_rate);

// Top-level block sizes. k1 and k2 come from the rounded-exponent rules
// (round half up on the log2), clamped to half the frame; the remaining
// iterations double from N/16 up to N/2.
struct CascadeSchedule {
    std::size_t k1 = 0;
    std::size_t k2 = 0;
    std::array<std::size_t, 4> tail{};  // k3..k6
    unsigned iterations = 6;
};
CascadeSchedule top_block_sizes(double qber_bin_rate, unsigned q, std::size_t N);

// Full two-endpoint protocol state for one frame, exposed so that tests
// can drive single operations (a binary search, a Cascade step) against a
// hand-built situation. Alice's bits never change; Bob's are corrected in
// place. Per iteration, seq maps iteration coordinates (the order blocks
// are laid out in after that iteration's permutation) to bit positions and
// pos_in is its inverse. Smallest-block records are kept per (iteration,
// bit position) in iteration coordinates, with Alice's parity as announced
// or inferred and a processed flag per the Cascade-step bookkeeping.
struct CascadeState {
    static constexpr unsigned MAX_ITERS = 6;

    unsigned q = 2;          // symbol order of the input strings
    unsigned v = 1;          // bits per symbol
    unsigned formula_q = 2;  // order used in the k2 block-size formula
    bool partners = false;   // request partner bits of located errors
    bool serial = false;     // one event per parity instead of batches
    std::size_t n = 0, N = 0;

    std::vector<std::uint8_t> alice_bits, bob_bits;
    std::array<std::vector<std::uint32_t>, MAX_ITERS> seq, pos_in;
    unsigned iterations_run = 0;

    // Smallest-block store, indexed [iteration][bit position]; a record
    // exists when hi > lo.
    struct BlockStore {
        std::vector<std::uint32_t> lo, hi;
        std::vector<std::uint8_t> alice_parity;
        std::vector<std::uint8_t> processed;
    };
    std::array<BlockStore, MAX_ITERS> store;

    std::vector<std::uint8_t> symbol_disclosed;  // partner bits already sent

    Transcript* tr = nullptr;
    std::uint64_t round = 0;

    // Bob's parity of seq[it][lo, hi).
    int bob_parity(unsigned it, std::uint32_t lo, std::uint32_t hi) const;
    int alice_parity(unsigned it, std::uint32_t lo, std::uint32_t hi) const;

    // Overwrite the record for every bit of the block if it shrinks it.
    void record_block(unsigned it, std::uint32_t lo, std::uint32_t hi, int parity);
};

// Initialize a state over the mapped strings (identity layouts, empty
// stores). Used by the protocol runners and by fixtures.
CascadeState make_cascade_state(const std::vector<gf_elem>& x, const std::vector<gf_elem>& y,
                                unsigned q, Transcript& tr);

// One binary search on a block of iteration `it` whose parities mismatch.
// Alice discloses one sub-parity per split (the sibling is inferred);
// every matching sub-block created updates the smallest-block store. The
// located bit is corrected in Bob's string, recorded as a size-1 block,
// and its iteration flagged processed. Returns the bit position.
std::uint32_t binary_search_block(CascadeState& st, unsigned it, std::uint32_t lo,
                                  std::uint32_t hi);

// The back-propagation step: errors (already corrected in Bob's string)
// select their smallest unprocessed block per iteration; mismatching
// blocks are searched, fresh errors corrected, partner bits requested,
// and the loop repeats until every error has all its iterations flagged.
// max_rounds = 0 means no early stop.
void cascade_step(CascadeState& st, std::vector<std::uint32_t> errors,
                  std::size_t max_rounds = 0);

struct CascadeParams {
    double qber_sym_estimate = 0.0;
    std::size_t early_stop_rounds = 0;  // Cascade-step budget, 0 = full
};

struct CascadeResult {
    FrameOutcome outcome;
    std::vector<gf_elem> alice_key, bob_key;
};

// Classic parallel-scheduled binary Cascade on the mapped bit string: six
// iterations, iteration-2 confidence grouping by smallest matched block,
// batched parity waves, back-propagation after each iteration. Efficiency
// is reported against the conditional symbol entropy of the q-ary channel
// the bits were mapped from, so it is directly comparable across modes.
CascadeResult run_binary_cascade(const std::vector<gf_elem>& x, const std::vector<gf_elem>& y,
                                 unsigned q, const CascadeParams& params, Transcript& tr,
                                 std::uint64_t seed);

// Serial high-dimensional variant: global permutations, blocks processed
// one at a time, every located error immediately triggers the partner
// request and a work stack that re-searches every stale block before the
// protocol moves on. One transcript event per parity. Reduces to (and at
// q = 2 delegates to) binary Cascade.
CascadeResult run_hd_cascade_serial(const std::vector<gf_elem>& x, const std::vector<gf_elem>& y,
                                    unsigned q, const CascadeParams& params, Transcript& tr,
                                    std::uint64_t seed);

// Parallel high-dimensional variant: iteration 1 runs per bit plane with
// the expected error rate discounted by earlier planes' partner requests,
// parities batched one event per wave, partner disclosures batched per
// plane, and all cascading deferred to the Cascade step after each
// iteration. Reduces to binary Cascade at q = 2.
CascadeResult run_hd_cascade_parallel(const std::vector<gf_elem>& x,
                                      const std::vector<gf_elem>& y, unsigned q,
                                      const CascadeParams& params, Transcript& tr,
                                      std::uint64_t seed);

}  // namespace recon
