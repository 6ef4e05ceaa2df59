#pragma once

#include "recon/channel.hpp"
#include "recon/gf.hpp"
#include "recon/nbldpc.hpp"
#include "recon/transcript.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace recon {

// One designed code available to the rate selector: its design rate, the
// decoding threshold estimated for the ensemble, the efficiency at that
// threshold, and the degree file it was built from.
struct CodeCatalogEntry {
    double rate = 0.0;
    double det = 0.0;
    double eeff = 0.0;
    std::filesystem::path degree_file;
};

// Catalog text format: one `rate det eeff degree-file` line per code,
// '#' comments allowed; file paths resolve relative to the catalog.
std::vector<CodeCatalogEntry> load_catalog(const std::filesystem::path& path);

struct CodeChoice {
    std::size_t index = 0;
    bool fallback = false;  // no code supports the estimate; lowest rate used
};

// Highest-rate code whose threshold is at or above estimate*margin; falls
// back to the lowest-rate code (flagged) when none qualifies.
CodeChoice select_code(const std::vector<CodeCatalogEntry>& catalog, double qber_estimate,
                       double margin = 1.0);

enum class BlindStatus { running, succeeded, aborted_full_reveal };

// Reserved-position bookkeeping of one session. The reserved list is a
// fixed seeded permutation prefix; conversions walk it front to back, so
// punctured = reserved.size() - shortened at any time.
struct RateAdaptState {
    std::vector<std::uint32_t> reserved;
    std::size_t shortened = 0;
    std::size_t revealed = 0;  // plain key symbols disclosed after exhaustion
};

struct BlindParams {
    double delta_fraction = 0.10;
    std::size_t max_iterations = 100;
};

struct BlindResult {
    FrameOutcome outcome;
    BlindStatus status = BlindStatus::running;
    RateAdaptState adapt;
    std::vector<gf_elem> alice_key;  // x at the non-reserved positions
    std::vector<gf_elem> bob_key;    // decoded values at those positions
};

// Blind rate adaptation: Alice overwrites the reserved positions with
// random padding, sends the syndrome once, and on every decoding failure
// converts a step of punctured positions to shortened by disclosing their
// padding. Once the reserve is exhausted she reveals plain key symbols in
// same-sized steps until Bob succeeds or nothing is left. All disclosures
// and the exact leakage go through the transcript.
//
// Leakage accounting: the syndrome is charged max(0, m - punctured) * v
// bits up front; each conversion is charged v bits per symbol only as it
// unlocks syndrome information still masked by remaining padding; plain
// reveals are charged v bits per symbol. Efficiency is measured against
// the n - reserved symbols that actually form the key.
BlindResult run_blind(const SparseParityMatrix& H, const QaryFrame& frame,
                      const ChannelParams& channel, const BlindParams& params,
                      const GfContext& ctx, Transcript& transcript, std::uint64_t seed);

}  // namespace recon
