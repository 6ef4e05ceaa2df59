#include "recon/blind.hpp"

#include "recon/decoder.hpp"
#include "recon/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace recon {

std::vector<CodeCatalogEntry> load_catalog(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("catalog: cannot open " + path.string());
    std::vector<CodeCatalogEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        CodeCatalogEntry e;
        std::string file;
        if (!(ls >> e.rate >> e.det >> e.eeff >> file))
            throw std::runtime_error("catalog: bad line '" + line + "' in " + path.string());
        e.degree_file = path.parent_path() / file;
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw std::runtime_error("catalog: no entries in " + path.string());
    return entries;
}

CodeChoice select_code(const std::vector<CodeCatalogEntry>& catalog, double qber_estimate,
                       double margin) {
    if (catalog.empty()) throw std::invalid_argument("select_code: empty catalog");
    CodeChoice choice;
    bool any = false;
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        if (catalog[i].det >= qber_estimate * margin) {
            if (!any || catalog[i].rate > catalog[choice.index].rate) choice.index = i;
            any = true;
        }
    }
    if (!any) {
        choice.fallback = true;
        choice.index = 0;
        for (std::size_t i = 1; i < catalog.size(); ++i)
            if (catalog[i].rate < catalog[choice.index].rate) choice.index = i;
    }
    return choice;
}

namespace {

// Syndrome information available to Bob while `punctured` padding symbols
// remain unknown: only m - punctured of the m constraints are effective.
std::uint64_t unlocked_bits(std::size_t m, std::size_t punctured, unsigned v) {
    return m > punctured ? static_cast<std::uint64_t>(m - punctured) * v : 0;
}

}  // namespace

BlindResult run_blind(const SparseParityMatrix& H, const QaryFrame& frame,
                      const ChannelParams& channel, const BlindParams& params,
                      const GfContext& ctx, Transcript& transcript, std::uint64_t seed) {
    const std::size_t n = H.n, m = H.m;
    const unsigned q = H.q, v = ctx.v;
    if (frame.x.size() != n || frame.y.size() != n)
        throw std::invalid_argument("blind: frame length does not match the code");
    if (frame.q != q || channel.q != q)
        throw std::invalid_argument("blind: field order mismatch");
    if (params.delta_fraction < 0.0 || params.delta_fraction >= 1.0)
        throw std::invalid_argument("blind: delta fraction out of range");

    const auto r = static_cast<std::size_t>(std::llround(params.delta_fraction * n));

    BlindResult res;
    Rng rng(derive_seed(seed, 0x626c6e64));

    // Reserved set, its conversion order, and the reveal order afterwards:
    // all from one seeded permutation fixed at session start.
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    res.adapt.reserved.assign(order.begin(), order.begin() + r);
    const std::vector<std::uint32_t> reveal_order(order.begin() + r, order.end());

    // Alice swaps the reserved positions for random padding before taking
    // the syndrome; the originals elsewhere are the key.
    std::vector<gf_elem> ax = frame.x;
    std::vector<gf_elem> padding(r);
    for (std::size_t k = 0; k < r; ++k) {
        padding[k] = static_cast<gf_elem>(rng.below(q));
        ax[res.adapt.reserved[k]] = padding[k];
    }
    const std::vector<gf_elem> s = syndrome(H, ax, ctx);

    // Bob's initial belief: channel observation outside the reserve,
    // nothing inside it.
    std::vector<LlrVector> priors(n);
    const LlrVector flat = llr_punctured(q);
    for (std::size_t j = 0; j < n; ++j) priors[j] = llr_from_channel(frame.y[j], channel);
    for (auto pos : res.adapt.reserved) priors[pos] = flat;

    std::uint64_t round = 0;
    transcript.append({Direction::alice_to_bob, EventKind::syndrome, m,
                       static_cast<std::uint64_t>(m) * v, unlocked_bits(m, r, v), round});

    res.status = BlindStatus::running;
    DecodeResult dec;
    while (res.status == BlindStatus::running) {
        dec = decode(H, s, priors, ctx, params.max_iterations);
        res.outcome.tries += 1;
        if (dec.success) {
            res.status = BlindStatus::succeeded;
            break;
        }

        std::size_t punctured = r - res.adapt.shortened;
        double rate = code_rate(n, m, punctured, res.adapt.shortened);
        std::size_t step = shorten_step_size(n, rate);
        ++round;

        if (punctured > 0) {
            // Convert the next block of punctured positions to shortened by
            // disclosing their padding values.
            std::size_t count = std::min(step, punctured);
            std::uint64_t before = unlocked_bits(m, punctured, v);
            std::uint64_t after = unlocked_bits(m, punctured - count, v);
            for (std::size_t k = 0; k < count; ++k) {
                std::size_t idx = res.adapt.shortened + k;
                priors[res.adapt.reserved[idx]] = llr_shortened(padding[idx], q);
            }
            res.adapt.shortened += count;
            transcript.append({Direction::alice_to_bob, EventKind::shortened_values, count,
                               static_cast<std::uint64_t>(count) * v, after - before, round});
        } else if (res.adapt.revealed < reveal_order.size()) {
            // Reserve exhausted: disclose actual key symbols.
            std::size_t count = std::min(step, reveal_order.size() - res.adapt.revealed);
            for (std::size_t k = 0; k < count; ++k) {
                auto pos = reveal_order[res.adapt.revealed + k];
                priors[pos] = llr_shortened(frame.x[pos], q);
            }
            res.adapt.revealed += count;
            transcript.append({Direction::alice_to_bob, EventKind::plain_reveal, count,
                               static_cast<std::uint64_t>(count) * v,
                               static_cast<std::uint64_t>(count) * v, round});
        } else {
            res.status = BlindStatus::aborted_full_reveal;
        }
    }

    // The distilled keys: non-reserved positions in index order.
    std::vector<bool> is_reserved(n, false);
    for (auto pos : res.adapt.reserved) is_reserved[pos] = true;
    res.alice_key.reserve(n - r);
    res.bob_key.reserve(n - r);
    for (std::size_t j = 0; j < n; ++j)
        if (!is_reserved[j]) {
            res.alice_key.push_back(frame.x[j]);
            res.bob_key.push_back(dec.x[j]);
        }

    res.outcome.leak_bits = transcript.leak_bits();
    res.outcome.message_rounds = transcript.message_rounds();
    res.outcome.serial_messages = transcript.serial_message_count();
    res.outcome.key_length = n - r;
    res.outcome.mismatches = 0;
    for (std::size_t k = 0; k < res.alice_key.size(); ++k)
        if (res.alice_key[k] != res.bob_key[k]) ++res.outcome.mismatches;
    // A syndrome match with a wrong codeword is an undetected error, not a
    // success: success always implies identical keys.
    res.outcome.success =
        res.status == BlindStatus::succeeded && res.outcome.mismatches == 0;
    res.outcome.f = efficiency(res.outcome.leak_bits, n - r, channel);
    return res;
}

}  // namespace recon
