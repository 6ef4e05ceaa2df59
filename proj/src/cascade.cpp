#include "recon/cascade.hpp"

#include "recon/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace recon {

namespace {

unsigned bits_per_symbol(unsigned q) {
    if (q < 2 || q > 256 || (q & (q - 1)) != 0) {
        throw std::invalid_argument("cascade: q must be a power of two in [2, 256]");
    }
    unsigned v = 0;
    while ((1u << (v + 1)) <= q) ++v;
    return v;
}

// Round-half-up on the exponent: 2^[log2(x)].
std::size_t rounded_pow2(double x) {
    double e = std::floor(std::log2(x) + 0.5);
    if (!(e >= 1.0)) e = 1.0;
    if (e > 62.0) e = 62.0;
    return std::size_t{1} << static_cast<unsigned>(e);
}

std::size_t clamp_block(std::size_t k, std::size_t span) {
    std::size_t cap = span / 2;
    if (cap == 0) cap = 1;
    return std::min(std::max<std::size_t>(k, 1), cap);
}

void sort_unique(std::vector<std::uint32_t>& xs) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
}

void emit_one(CascadeState& st, EventKind kind, std::uint64_t items, std::uint64_t bits,
              bool fresh_round) {
    TranscriptEvent ev;
    ev.direction = Direction::alice_to_bob;
    ev.kind = kind;
    ev.items = items;
    ev.payload_bits = bits;
    ev.leak_bits = bits;
    if (fresh_round || st.round == 0) {
        ev.round = st.round++;
    } else {
        ev.round = st.round - 1;
    }
    st.tr->append(ev);
}

// One batched exchange (or, in serial mode, one event per parity).
void emit_parity_wave(CascadeState& st, std::size_t count, bool fresh_round = true) {
    if (count == 0) return;
    if (st.serial) {
        for (std::size_t i = 0; i < count; ++i) emit_one(st, EventKind::parity, 1, 1, true);
    } else {
        emit_one(st, EventKind::parity_batch, count, count, fresh_round);
    }
}

void emit_partner_wave(CascadeState& st, std::size_t symbols) {
    if (symbols == 0 || st.v < 2) return;
    std::uint64_t per = st.v - 1;
    if (st.serial) {
        for (std::size_t i = 0; i < symbols; ++i) {
            emit_one(st, EventKind::partner_bits, per, per, true);
        }
    } else {
        emit_one(st, EventKind::partner_bits, symbols * per, symbols * per, true);
    }
}

struct ActiveSearch {
    unsigned it = 0;
    std::uint32_t lo = 0, hi = 0;
    int ap = 0;  // Alice's parity of [lo, hi), announced or inferred
    std::vector<std::uint32_t> triggers;
};

// Lockstep binary searches: one parity disclosure per split per block, all
// active blocks sharing a wave. Blocks resolved by a concurrent correction
// are re-recorded and dropped. Located bits are corrected, recorded as
// size-1 blocks, and their iteration flagged for them and the triggers.
std::vector<std::uint32_t> lockstep_search(CascadeState& st, std::vector<ActiveSearch> active) {
    std::vector<std::uint32_t> found;
    while (!active.empty()) {
        std::vector<ActiveSearch> keep;
        for (auto& a : active) {
            int bp = st.bob_parity(a.it, a.lo, a.hi);
            if (bp == a.ap) {
                st.record_block(a.it, a.lo, a.hi, a.ap);
                for (auto t : a.triggers) st.store[a.it].processed[t] = 1;
                continue;
            }
            if (a.hi - a.lo == 1) {
                std::uint32_t pos = st.seq[a.it][a.lo];
                st.bob_bits[pos] ^= 1u;
                st.record_block(a.it, a.lo, a.hi, a.ap);
                st.store[a.it].processed[pos] = 1;
                for (auto t : a.triggers) st.store[a.it].processed[t] = 1;
                found.push_back(pos);
                continue;
            }
            keep.push_back(std::move(a));
        }
        active = std::move(keep);
        if (active.empty()) break;
        emit_parity_wave(st, active.size());
        for (auto& a : active) {
            std::uint32_t mid = a.lo + (a.hi - a.lo + 1) / 2;
            int ap1 = st.alice_parity(a.it, a.lo, mid);
            int bp1 = st.bob_parity(a.it, a.lo, mid);
            if (ap1 == bp1) {
                st.record_block(a.it, a.lo, mid, ap1);
                a.ap ^= ap1;
                a.lo = mid;
            } else {
                st.record_block(a.it, mid, a.hi, a.ap ^ ap1);
                a.ap = ap1;
                a.hi = mid;
            }
        }
    }
    sort_unique(found);
    return found;
}

// Disclose the partner bits of every freshly located error whose symbol has
// not been disclosed yet; correct Bob's wrong partners and return them.
std::vector<std::uint32_t> request_partners(CascadeState& st,
                                            const std::vector<std::uint32_t>& found,
                                            std::size_t* requested_symbols = nullptr) {
    std::vector<std::uint32_t> bad;
    if (!st.partners || st.v < 2) {
        if (requested_symbols) *requested_symbols = 0;
        return bad;
    }
    std::vector<std::uint32_t> symbols;
    for (auto pos : found) {
        std::uint32_t s = pos / st.v;
        if (!st.symbol_disclosed[s]) {
            st.symbol_disclosed[s] = 1;
            symbols.push_back(s);
        }
    }
    emit_partner_wave(st, symbols.size());
    for (auto s : symbols) {
        for (unsigned b = 0; b < st.v; ++b) {
            std::uint32_t pos = s * st.v + b;
            if (st.bob_bits[pos] != st.alice_bits[pos]) {
                st.bob_bits[pos] ^= 1u;
                bad.push_back(pos);
            }
        }
    }
    if (requested_symbols) *requested_symbols = symbols.size();
    return bad;
}

void build_layout(CascadeState& st, unsigned it, const std::vector<std::vector<std::uint32_t>>& groups) {
    auto& s = st.seq[it];
    auto& p = st.pos_in[it];
    s.clear();
    s.reserve(st.N);
    for (const auto& g : groups) s.insert(s.end(), g.begin(), g.end());
    p.assign(st.N, 0);
    for (std::uint32_t i = 0; i < st.N; ++i) p[s[i]] = i;
}

struct GroupPlan {
    std::vector<std::uint32_t> members;
    std::size_t t = 0;  // smallest-block size the group is keyed by
};

// Iteration-2 grouping: bits bucketed by the exact size of their smallest
// iteration-1 block, least confident (largest t) first; groups below the
// floor are merged into their more-error-prone neighbor.
std::vector<GroupPlan> confidence_groups(const CascadeState& st, std::size_t min_group) {
    std::map<std::size_t, std::vector<std::uint32_t>, std::greater<>> buckets;
    const auto& bs = st.store[0];
    for (std::uint32_t pos = 0; pos < st.N; ++pos) {
        std::size_t t = bs.hi[pos] - bs.lo[pos];
        buckets[t].push_back(pos);
    }
    std::vector<GroupPlan> groups;
    for (auto& [t, members] : buckets) {
        groups.push_back(GroupPlan{std::move(members), t});
    }
    bool merged = true;
    while (merged && groups.size() > 1) {
        merged = false;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            if (groups[i].members.size() >= min_group) continue;
            std::size_t j = (i > 0) ? i - 1 : 1;
            auto& dst = groups[j];
            auto& src = groups[i];
            if (j < i) {
                dst.members.insert(dst.members.end(), src.members.begin(), src.members.end());
            } else {
                dst.members.insert(dst.members.begin(), src.members.begin(), src.members.end());
                dst.t = std::max(dst.t, src.t);
            }
            groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(i));
            merged = true;
            break;
        }
    }
    return groups;
}

std::size_t group_k2(const CascadeState& st, double est_bin, const GroupPlan& g) {
    std::size_t size = g.members.size();
    if (g.t <= 1) return clamp_block(size, size);
    double q2 = qber_2nd(g.t, est_bin);
    if (!(q2 > 0.0)) return clamp_block(size, size);
    return clamp_block(rounded_pow2(2.0 * st.formula_q / q2), size);
}

// One iteration of the batched schedule. Returns the Cascade-step input:
// erroneous partners throughout, plus the searched-out errors themselves
// from iteration 2 onward (in iteration 1 they have no earlier blocks).
std::vector<std::uint32_t> run_batch_iteration(CascadeState& st, unsigned it, double est_bin,
                                               std::vector<std::vector<std::uint32_t>> members,
                                               const std::vector<std::size_t>& block_sizes_hint,
                                               bool plane_discount, std::uint64_t seed) {
    for (std::size_t g = 0; g < members.size(); ++g) {
        Rng rng(derive_seed(seed, 0x63617363u, it, static_cast<std::uint64_t>(g)));
        rng.shuffle(members[g]);
    }
    build_layout(st, it, members);
    st.iterations_run = std::max(st.iterations_run, it + 1);

    std::vector<std::uint32_t> deferred, found_all;
    std::vector<double> pb(members.size(), 0.0);
    std::size_t off = 0;
    bool prev_clean = false;
    for (std::size_t g = 0; g < members.size(); ++g) {
        std::size_t size = members[g].size();
        std::size_t k;
        if (it == 0 && plane_discount) {
            double discount = 0.0;
            for (std::size_t j = 0; j < g; ++j) discount += pb[j];
            double qi = est_bin - discount / (2.0 * static_cast<double>(st.n) * st.v);
            k = (qi > 0.0) ? clamp_block(rounded_pow2(1.0 / qi), size) : clamp_block(size, size);
        } else {
            k = clamp_block(block_sizes_hint[g], size);
        }

        std::size_t nblocks = (size + k - 1) / k;
        emit_parity_wave(st, nblocks, /*fresh_round=*/!(g > 0 && prev_clean));
        std::vector<ActiveSearch> mism;
        for (std::size_t b = 0; b < nblocks; ++b) {
            std::uint32_t lo = static_cast<std::uint32_t>(off + b * k);
            std::uint32_t hi = static_cast<std::uint32_t>(std::min(off + (b + 1) * k, off + size));
            int ap = st.alice_parity(it, lo, hi);
            if (st.bob_parity(it, lo, hi) == ap) {
                st.record_block(it, lo, hi, ap);
            } else {
                mism.push_back(ActiveSearch{it, lo, hi, ap, {}});
            }
        }
        prev_clean = mism.empty();
        auto found = lockstep_search(st, std::move(mism));
        if (!found.empty() && st.partners) {
            std::size_t nsyms = 0;
            auto bad = request_partners(st, found, &nsyms);
            pb[g] += static_cast<double>((st.v - 1) * nsyms);
            for (auto p : bad) {
                if (it == 0 && !(st.store[0].hi[p] > st.store[0].lo[p])) continue;
                deferred.push_back(p);
            }
        }
        found_all.insert(found_all.end(), found.begin(), found.end());
        off += size;
    }
    if (it > 0) deferred.insert(deferred.end(), found_all.begin(), found_all.end());
    sort_unique(deferred);
    return deferred;
}

void run_batch_protocol(CascadeState& st, double est_bin, std::uint64_t seed, std::size_t budget,
                        bool plane_groups) {
    auto sched = top_block_sizes(est_bin, st.formula_q, st.N);
    for (unsigned it = 0; it < CascadeState::MAX_ITERS; ++it) {
        std::vector<std::vector<std::uint32_t>> members;
        std::vector<std::size_t> sizes;
        if (it == 0) {
            if (plane_groups) {
                members.assign(st.v, {});
                for (std::uint32_t pos = 0; pos < st.N; ++pos) {
                    members[pos % st.v].push_back(pos);
                }
                sizes.assign(st.v, sched.k1);  // overridden by the running discount
            } else {
                members.emplace_back(st.N);
                std::iota(members[0].begin(), members[0].end(), 0u);
                sizes.push_back(sched.k1);
            }
        } else if (it == 1) {
            auto groups = confidence_groups(st, 64);
            for (auto& g : groups) {
                sizes.push_back(group_k2(st, est_bin, g));
                members.push_back(std::move(g.members));
            }
        } else {
            members.emplace_back(st.N);
            std::iota(members[0].begin(), members[0].end(), 0u);
            sizes.push_back(sched.tail[it - 2]);
        }
        auto input = run_batch_iteration(st, it, est_bin, std::move(members), sizes,
                                         plane_groups, seed);
        cascade_step(st, std::move(input), budget);
    }
}

// Immediate cascading: every located error discloses its partners and
// re-searches each of its stale recorded blocks before anything else runs.
void propagate_serial(CascadeState& st, std::uint32_t first) {
    std::vector<std::uint32_t> stack{first};
    while (!stack.empty()) {
        std::uint32_t b = stack.back();
        stack.pop_back();
        auto bad = request_partners(st, {b});
        stack.insert(stack.end(), bad.begin(), bad.end());
        for (unsigned it = 0; it < st.iterations_run; ++it) {
            auto& bs = st.store[it];
            if (bs.processed[b]) continue;
            std::uint32_t lo = bs.lo[b], hi = bs.hi[b];
            if (hi <= lo) continue;
            int ap = bs.alice_parity[b];
            if (st.bob_parity(it, lo, hi) != ap) {
                auto found = lockstep_search(st, {ActiveSearch{it, lo, hi, ap, {b}}});
                stack.insert(stack.end(), found.begin(), found.end());
            } else {
                bs.processed[b] = 1;
            }
        }
    }
}

void run_serial_protocol(CascadeState& st, double est_bin, std::uint64_t seed) {
    auto sched = top_block_sizes(est_bin, st.formula_q, st.N);
    std::array<std::size_t, CascadeState::MAX_ITERS> sizes{
        sched.k1, sched.k2, sched.tail[0], sched.tail[1], sched.tail[2], sched.tail[3]};
    for (unsigned it = 0; it < CascadeState::MAX_ITERS; ++it) {
        std::vector<std::vector<std::uint32_t>> members(1);
        members[0].resize(st.N);
        std::iota(members[0].begin(), members[0].end(), 0u);
        Rng rng(derive_seed(seed, 0x63617363u, it, 0));
        rng.shuffle(members[0]);
        build_layout(st, it, members);
        st.iterations_run = it + 1;
        std::size_t k = clamp_block(sizes[it], st.N);
        for (std::size_t lo = 0; lo < st.N; lo += k) {
            std::uint32_t l = static_cast<std::uint32_t>(lo);
            std::uint32_t h = static_cast<std::uint32_t>(std::min(lo + k, st.N));
            emit_parity_wave(st, 1);
            int ap = st.alice_parity(it, l, h);
            if (st.bob_parity(it, l, h) == ap) {
                st.record_block(it, l, h, ap);
                continue;
            }
            auto found = lockstep_search(st, {ActiveSearch{it, l, h, ap, {}}});
            for (auto e : found) propagate_serial(st, e);
        }
    }
}

CascadeResult finish(CascadeState& st, double est_sym) {
    CascadeResult res;
    BinaryFrameView av{st.v, st.n, st.N, st.alice_bits};
    BinaryFrameView bv{st.v, st.n, st.N, st.bob_bits};
    res.alice_key = map_from_bits(av);
    res.bob_key = map_from_bits(bv);
    std::size_t mism = 0;
    for (std::size_t i = 0; i < st.n; ++i) {
        if (res.alice_key[i] != res.bob_key[i]) ++mism;
    }
    auto& o = res.outcome;
    o.success = (mism == 0);
    o.mismatches = mism;
    o.tries = 1;
    o.key_length = st.n;
    o.leak_bits = st.tr->leak_bits();
    o.message_rounds = st.tr->message_rounds();
    o.serial_messages = st.tr->serial_message_count();
    o.f = efficiency(o.leak_bits, st.n, ChannelParams{st.q, est_sym});
    return res;
}

}  // namespace

BinaryFrameView map_to_bits(const std::vector<gf_elem>& symbols, unsigned q) {
    unsigned v = bits_per_symbol(q);
    BinaryFrameView view;
    view.v = v;
    view.n = symbols.size();
    view.N = symbols.size() * v;
    view.bits.resize(view.N);
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (symbols[i] >= q) throw std::invalid_argument("map_to_bits: symbol out of range");
        for (unsigned b = 0; b < v; ++b) {
            view.bits[i * v + b] = static_cast<std::uint8_t>((symbols[i] >> (v - 1 - b)) & 1u);
        }
    }
    return view;
}

std::vector<gf_elem> map_from_bits(const BinaryFrameView& view) {
    if (view.bits.size() != view.N || view.N != view.n * view.v) {
        throw std::invalid_argument("map_from_bits: inconsistent view");
    }
    std::vector<gf_elem> out(view.n);
    for (std::size_t i = 0; i < view.n; ++i) {
        unsigned val = 0;
        for (unsigned b = 0; b < view.v; ++b) {
            val = (val << 1) | view.bits[i * view.v + b];
        }
        out[i] = static_cast<gf_elem>(val);
    }
    return out;
}

double qber_bin(unsigned q, double qber_sym) {
    if (q < 2) throw std::invalid_argument("qber_bin: q must be at least 2");
    if (qber_sym < 0.0 || qber_sym > 1.0) throw std::invalid_argument("qber_bin: rate outside [0, 1]");
    return qber_sym * q / (2.0 * (q - 1));
}

double p_odd(std::size_t t, double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("p_odd: p outside [0, 1]");
    return (1.0 - std::pow(1.0 - 2.0 * p, static_cast<double>(t))) / 2.0;
}

double p_even(std::size_t t, double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("p_even: p outside [0, 1]");
    return (1.0 + std::pow(1.0 - 2.0 * p, static_cast<double>(t))) / 2.0;
}

double qber_2nd(std::size_t t, double qber_bin_rate) {
    if (t < 1) throw std::invalid_argument("qber_2nd: block size must be at least 1");
    return qber_bin_rate * p_odd(t - 1, qber_bin_rate) / p_even(t, qber_bin_rate);
}

CascadeSchedule top_block_sizes(double qber_bin_rate, unsigned q, std::size_t N) {
    if (N < 2) throw std::invalid_argument("top_block_sizes: frame too short");
    if (qber_bin_rate < 0.0 || qber_bin_rate > 1.0) {
        throw std::invalid_argument("top_block_sizes: rate outside [0, 1]");
    }
    CascadeSchedule s;
    if (qber_bin_rate > 0.0) {
        s.k1 = clamp_block(rounded_pow2(1.0 / qber_bin_rate), N);
        s.k2 = clamp_block(rounded_pow2(2.0 * q / qber_bin_rate), N);
    } else {
        s.k1 = clamp_block(N, N);
        s.k2 = clamp_block(N, N);
    }
    s.tail = {std::max<std::size_t>(1, N / 16), std::max<std::size_t>(1, N / 8),
              std::max<std::size_t>(1, N / 4), std::max<std::size_t>(1, N / 2)};
    return s;
}

int CascadeState::bob_parity(unsigned it, std::uint32_t lo, std::uint32_t hi) const {
    int p = 0;
    for (std::uint32_t i = lo; i < hi; ++i) p ^= bob_bits[seq[it][i]];
    return p;
}

int CascadeState::alice_parity(unsigned it, std::uint32_t lo, std::uint32_t hi) const {
    int p = 0;
    for (std::uint32_t i = lo; i < hi; ++i) p ^= alice_bits[seq[it][i]];
    return p;
}

void CascadeState::record_block(unsigned it, std::uint32_t lo, std::uint32_t hi, int parity) {
    auto& bs = store[it];
    std::uint32_t size = hi - lo;
    for (std::uint32_t i = lo; i < hi; ++i) {
        std::uint32_t b = seq[it][i];
        std::uint32_t cur = bs.hi[b] - bs.lo[b];
        if (cur == 0 || size < cur) {
            bs.lo[b] = lo;
            bs.hi[b] = hi;
            bs.alice_parity[b] = static_cast<std::uint8_t>(parity);
        }
    }
}

CascadeState make_cascade_state(const std::vector<gf_elem>& x, const std::vector<gf_elem>& y,
                                unsigned q, Transcript& tr) {
    if (x.empty() || x.size() != y.size()) {
        throw std::invalid_argument("make_cascade_state: strings empty or of different length");
    }
    auto av = map_to_bits(x, q);
    auto bv = map_to_bits(y, q);
    CascadeState st;
    st.q = q;
    st.v = av.v;
    st.formula_q = q;
    st.n = av.n;
    st.N = av.N;
    st.alice_bits = std::move(av.bits);
    st.bob_bits = std::move(bv.bits);
    for (unsigned it = 0; it < CascadeState::MAX_ITERS; ++it) {
        st.seq[it].resize(st.N);
        std::iota(st.seq[it].begin(), st.seq[it].end(), 0u);
        st.pos_in[it] = st.seq[it];
        st.store[it].lo.assign(st.N, 0);
        st.store[it].hi.assign(st.N, 0);
        st.store[it].alice_parity.assign(st.N, 0);
        st.store[it].processed.assign(st.N, 0);
    }
    st.symbol_disclosed.assign(st.n, 0);
    st.tr = &tr;
    st.round = tr.events().empty() ? 0 : tr.events().back().round + 1;
    return st;
}

std::uint32_t binary_search_block(CascadeState& st, unsigned it, std::uint32_t lo,
                                  std::uint32_t hi) {
    if (it >= CascadeState::MAX_ITERS || hi > st.N || lo >= hi) {
        throw std::invalid_argument("binary_search_block: bad block");
    }
    int ap = st.alice_parity(it, lo, hi);
    if (st.bob_parity(it, lo, hi) == ap) {
        throw std::logic_error("binary_search_block: block parities match");
    }
    auto found = lockstep_search(st, {ActiveSearch{it, lo, hi, ap, {}}});
    return found.at(0);
}

void cascade_step(CascadeState& st, std::vector<std::uint32_t> errors, std::size_t max_rounds) {
    sort_unique(errors);
    std::size_t waves = 0;
    while (!errors.empty()) {
        if (max_rounds != 0 && waves == max_rounds) break;
        ++waves;

        std::map<std::tuple<unsigned, std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>>
            selected;
        for (auto e : errors) {
            unsigned best_it = CascadeState::MAX_ITERS;
            std::uint32_t best_size = 0;
            for (unsigned it = 0; it < st.iterations_run; ++it) {
                const auto& bs = st.store[it];
                if (bs.processed[e]) continue;
                std::uint32_t size = bs.hi[e] - bs.lo[e];
                if (size == 0) continue;
                if (best_it == CascadeState::MAX_ITERS || size < best_size) {
                    best_it = it;
                    best_size = size;
                }
            }
            if (best_it < CascadeState::MAX_ITERS) {
                const auto& bs = st.store[best_it];
                selected[{best_it, bs.lo[e], bs.hi[e]}].push_back(e);
            }
        }

        if (!selected.empty()) {
            std::vector<ActiveSearch> to_search;
            for (auto& [key, triggers] : selected) {
                auto [it, lo, hi] = key;
                int ap = st.store[it].alice_parity[triggers.front()];
                if (st.bob_parity(it, lo, hi) == ap) {
                    for (auto t : triggers) st.store[it].processed[t] = 1;
                } else {
                    to_search.push_back(ActiveSearch{it, lo, hi, ap, triggers});
                }
            }
            auto found = lockstep_search(st, std::move(to_search));
            auto fresh = found;
            auto bad = request_partners(st, found);
            fresh.insert(fresh.end(), bad.begin(), bad.end());
            errors.insert(errors.end(), fresh.begin(), fresh.end());
            sort_unique(errors);
        }

        std::erase_if(errors, [&](std::uint32_t e) {
            for (unsigned it = 0; it < st.iterations_run; ++it) {
                const auto& bs = st.store[it];
                if (!bs.processed[e] && bs.hi[e] > bs.lo[e]) return false;
            }
            return true;
        });
    }
}

CascadeResult run_binary_cascade(const std::vector<gf_elem>& x, const std::vector<gf_elem>& y,
                                 unsigned q, const CascadeParams& params, Transcript& tr,
                                 std::uint64_t seed) {
    CascadeState st = make_cascade_state(x, y, q, tr);
    st.partners = false;
    st.serial = false;
    st.formula_q = 2;
    double est_bin = qber_bin(q, params.qber_sym_estimate);
    run_batch_protocol(st, est_bin, seed, params.early_stop_rounds, /*plane_groups=*/false);
    return finish(st, params.qber_sym_estimate);
}

CascadeResult run_hd_cascade_serial(const std::vector<gf_elem>& x, const std::vector<gf_elem>& y,
                                    unsigned q, const CascadeParams& params, Transcript& tr,
                                    std::uint64_t seed) {
    if (q == 2) return run_binary_cascade(x, y, q, params, tr, seed);
    if (q < 4) throw std::invalid_argument("run_hd_cascade_serial: q must be 2 or at least 4");
    CascadeState st = make_cascade_state(x, y, q, tr);
    st.partners = true;
    st.serial = true;
    st.formula_q = q;
    run_serial_protocol(st, qber_bin(q, params.qber_sym_estimate), seed);
    return finish(st, params.qber_sym_estimate);
}

CascadeResult run_hd_cascade_parallel(const std::vector<gf_elem>& x,
                                      const std::vector<gf_elem>& y, unsigned q,
                                      const CascadeParams& params, Transcript& tr,
                                      std::uint64_t seed) {
    if (q == 2) return run_binary_cascade(x, y, q, params, tr, seed);
    if (q < 4) throw std::invalid_argument("run_hd_cascade_parallel: q must be 2 or at least 4");
    CascadeState st = make_cascade_state(x, y, q, tr);
    st.partners = true;
    st.serial = false;
    st.formula_q = q;
    run_batch_protocol(st, qber_bin(q, params.qber_sym_estimate), seed,
                       params.early_stop_rounds, /*plane_groups=*/true);
    return finish(st, params.qber_sym_estimate);
}

}  // namespace recon
