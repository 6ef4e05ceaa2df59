#pragma once

#include "recon/channel.hpp"
#include "recon/gf.hpp"
#include "recon/nbldpc.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace recon {

// Log-domain components are clamped to +-LLR_CLAMP natural-log units;
// probabilities are floored at PROB_FLOOR before any log.
inline constexpr double LLR_CLAMP = 30.0;
inline constexpr double PROB_FLOOR = 1e-30;

// Generalized log-likelihood ratio: values[k] = log(p_0 / p_k), so
// values[0] = 0 after normalization.
struct LlrVector {
    std::vector<double> values;
};

// Channel prior for one observed symbol. With error rate p the candidate
// equal to the observation carries probability 1-p, everything else
// p/(q-1). p = 0 degenerates to a certainty prior pinning the observation.
LlrVector llr_from_channel(gf_elem observed, const ChannelParams& params);

// Punctured symbol: no information, uniform belief.
LlrVector llr_punctured(unsigned q);

// Shortened symbol with disclosed value w: certainty at the clamp limit.
// Normalized so component 0 stays zero: for w != 0 the pattern is
// values[w] = -LLR_CLAMP and 0 elsewhere; for w = 0 it is +LLR_CLAMP
// everywhere except component 0.
LlrVector llr_shortened(gf_elem w, unsigned q);

// values[k] = log(p[0]/p[k]) for a strictly positive probability vector,
// and back: p_k proportional to exp(-values[k]).
LlrVector llr_from_probs(const std::vector<double>& p);
std::vector<double> probs_from_llr(const LlrVector& m);

enum class PermuteMode { multiply, divide };

// Index permutation by a nonzero field element: multiply gives
// out[k] = msg[k*a], divide gives out[k] = msg[k/a] (all in GF(q)).
LlrVector gf_permute(const LlrVector& msg, gf_elem a, PermuteMode mode, const GfContext& ctx);

// In-place Walsh-Hadamard butterfly. Forward is unnormalized; inverse
// divides by the length. Length must be a power of two.
void walsh_hadamard(std::vector<double>& vec);
void walsh_hadamard_inverse(std::vector<double>& vec);

// Message state for the sum-product decoder. Edges are stored row-major:
// edges of check i occupy [row_ptr[i], row_ptr[i+1]) in the per-edge
// arrays, matching the column order of the parity matrix rows.
struct DecoderState {
    unsigned q = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::uint32_t> edge_col;
    std::vector<gf_elem> edge_weight;
    std::vector<std::vector<std::size_t>> col_edges;
    std::vector<LlrVector> cv_messages;
    std::vector<LlrVector> vc_messages;
    std::vector<LlrVector> prior;
    std::vector<LlrVector> aposteriori;
    std::vector<gf_elem> hard_decision;
    std::size_t iteration = 0;
    std::size_t max_iterations = 100;
};

DecoderState make_state(const SparseParityMatrix& H, const std::vector<LlrVector>& priors,
                        std::size_t max_iterations = 100);

// Check-to-variable update for one edge: transform-domain product over the
// row's other edges, inverse transform, index permutation by the edge
// weight, coset shift by the weighted syndrome, then renormalize and clamp.
LlrVector check_to_variable(const DecoderState& state, std::size_t row, std::size_t edge,
                            gf_elem syndrome_val, const GfContext& ctx);

// Variable-side update for one column: a-posteriori = prior plus incoming
// check messages, each outgoing message drops its own edge's contribution,
// hard decision is the argmin component (lowest index on ties).
void variable_update_and_decision(DecoderState& state, std::uint32_t column);

struct DecodeResult {
    bool success = false;
    std::vector<gf_elem> x;
    std::size_t iterations = 0;
};

// Syndrome decoding with a flooding schedule. Succeeds as soon as the hard
// decision reproduces the target syndrome (checked before the first pass
// and after every iteration); gives up after max_iterations.
DecodeResult decode(const SparseParityMatrix& H, const std::vector<gf_elem>& s,
                    const std::vector<LlrVector>& priors, const GfContext& ctx,
                    std::size_t max_iterations = 100);

}  // namespace recon
