#include "doctest.h"

#include "recon/cascade.hpp"
#include "recon/channel.hpp"
#include "recon/rng.hpp"
#include "recon/transcript.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

using namespace recon;

namespace {

// Exhaustive parity-of-errors probability: sum binomial terms over the
// outcomes with odd (even) popcount among t independent flips.
double enum_parity_prob(std::size_t t, double p, bool odd) {
    double total = 0.0;
    for (std::size_t k = odd ? 1 : 0; k <= t; k += 2) {
        double term = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            term *= p * static_cast<double>(t - i) / static_cast<double>(i + 1);
        }
        for (std::size_t i = 0; i < t - k; ++i) term *= 1.0 - p;
        total += term;
    }
    return total;
}

std::vector<gf_elem> random_symbols(unsigned q, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<gf_elem> out(n);
    for (auto& s : out) s = static_cast<gf_elem>(rng.below(q));
    return out;
}

std::size_t symbol_distance(const std::vector<gf_elem>& a, const std::vector<gf_elem>& b) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

std::size_t block_count(std::size_t N, std::size_t k) { return (N + k - 1) / k; }

}  // namespace

TEST_SUITE("cascade") {

TEST_CASE("bit mapping is symbol-major with the high bit first") {
    std::vector<gf_elem> syms{3, 5};
    auto view = map_to_bits(syms, 8);
    CHECK(view.v == 3);
    CHECK(view.n == 2);
    CHECK(view.N == 6);
    std::vector<std::uint8_t> want{0, 1, 1, 1, 0, 1};
    CHECK(view.bits == want);
    CHECK(view.symbol_of(0) == 0);
    CHECK(view.symbol_of(2) == 0);
    CHECK(view.symbol_of(3) == 1);
    CHECK(view.plane_of(3) == 0);
    CHECK(view.plane_of(5) == 2);
    CHECK(map_from_bits(view) == syms);
}

TEST_CASE("bit mapping round-trips random strings and rejects bad symbols") {
    for (unsigned q : {2u, 4u, 16u, 256u}) {
        auto syms = random_symbols(q, 300, 77 + q);
        auto view = map_to_bits(syms, q);
        CHECK(view.N == view.n * view.v);
        CHECK(map_from_bits(view) == syms);
    }
    // q = 2 is the identity map.
    std::vector<gf_elem> bits{1, 0, 0, 1, 1};
    auto v2 = map_to_bits(bits, 2);
    CHECK(v2.v == 1);
    for (std::size_t i = 0; i < bits.size(); ++i) CHECK(v2.bits[i] == bits[i]);

    std::vector<gf_elem> bad{0, 4};
    CHECK_THROWS_AS((void)map_to_bits(bad, 4), std::invalid_argument);
}

TEST_CASE("mapped bit error rate scales the symbol rate by q/(2(q-1))") {
    CHECK(qber_bin(2, 0.05) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(qber_bin(4, 0.10) == doctest::Approx(0.10 * 4.0 / 6.0).epsilon(1e-12));
    CHECK(qber_bin(16, 0.05) == doctest::Approx(0.05 * 16.0 / 30.0).epsilon(1e-12));
    for (unsigned q : {2u, 4u, 8u, 32u, 256u}) {
        CHECK(qber_bin(q, 0.2) <= 0.2 + 1e-15);
        CHECK(qber_bin(q, 0.0) == 0.0);
    }
}

TEST_CASE("parity-of-errors probabilities match exhaustive enumeration") {
    for (std::size_t t = 0; t <= 10; ++t) {
        for (double p : {0.0, 0.01, 0.1, 0.3, 0.5}) {
            CAPTURE(t);
            CAPTURE(p);
            CHECK(p_odd(t, p) == doctest::Approx(enum_parity_prob(t, p, true)).epsilon(1e-12));
            CHECK(p_even(t, p) == doctest::Approx(enum_parity_prob(t, p, false)).epsilon(1e-12));
            CHECK(p_odd(t, p) + p_even(t, p) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    CHECK(p_odd(0, 0.3) == 0.0);
    CHECK(p_even(0, 0.3) == 1.0);
}

TEST_CASE("residual rate after a matched block follows the closed form") {
    double r = 0.05;
    CHECK(qber_2nd(1, r) == doctest::Approx(r * p_odd(0, r) / p_even(1, r)).epsilon(1e-12));
    CHECK(qber_2nd(2, r) == doctest::Approx(0.05 * 0.05 / ((1.0 + 0.9 * 0.9) / 2.0))
                                .epsilon(1e-9));
    for (std::size_t t : {1, 2, 8, 32}) {
        CHECK(qber_2nd(t, r) == doctest::Approx(r * p_odd(t - 1, r) / p_even(t, r))
                                    .epsilon(1e-12));
        // A block that matched leaves its bits less suspect than fresh ones.
        CHECK(qber_2nd(t, r) < r);
    }
    CHECK_THROWS_AS((void)qber_2nd(0, 0.1), std::invalid_argument);
}

TEST_CASE("top block sizes follow the rounded power-of-two rules") {
    std::size_t N = 65536;

    auto s16 = top_block_sizes(qber_bin(16, 0.05), 16, N);
    CHECK(s16.k1 == 32);
    CHECK(s16.k2 == 1024);

    auto s4 = top_block_sizes(qber_bin(4, 0.10), 4, N);
    CHECK(s4.k1 == 16);
    CHECK(s4.k2 == 128);

    CHECK(s4.tail == std::array<std::size_t, 4>{4096, 8192, 16384, 32768});
    CHECK(s4.iterations == 6);

    auto s0 = top_block_sizes(0.0, 8, N);
    CHECK(s0.k1 == N / 2);
    CHECK(s0.k2 == N / 2);

    // Tiny frames clamp everything to at least one bit per block.
    auto tiny = top_block_sizes(0.5, 2, 8);
    CHECK(tiny.k1 == 2);
    CHECK(tiny.tail == std::array<std::size_t, 4>{1, 1, 2, 4});

    CHECK_THROWS_AS((void)top_block_sizes(0.1, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)top_block_sizes(-0.1, 4, N), std::invalid_argument);
    CHECK_THROWS_AS((void)top_block_sizes(1.5, 4, N), std::invalid_argument);
}

TEST_CASE("block size rules give powers of two unless clamped to half the frame") {
    for (unsigned q : {2u, 4u, 16u, 64u}) {
        for (double p : {0.001, 0.01, 0.05, 0.2, 0.9}) {
            for (std::size_t N : {64, 1000, 65536}) {
                auto s = top_block_sizes(p, q, N);
                CAPTURE(q);
                CAPTURE(p);
                CAPTURE(N);
                std::size_t cap = std::max<std::size_t>(N / 2, 1);
                CHECK((std::has_single_bit(s.k1) || s.k1 == cap));
                CHECK((std::has_single_bit(s.k2) || s.k2 == cap));
                CHECK(s.k1 <= cap);
                CHECK(s.k2 <= cap);
                CHECK(s.tail[0] <= s.tail[1]);
                CHECK(s.tail[1] <= s.tail[2]);
                CHECK(s.tail[2] <= s.tail[3]);
            }
        }
    }
}

TEST_CASE("fresh state mirrors the mapped strings with identity layouts") {
    auto x = random_symbols(8, 50, 11);
    auto y = x;
    y[3] ^= 1;
    Transcript tr;
    auto st = make_cascade_state(x, y, 8, tr);
    CHECK(st.q == 8);
    CHECK(st.v == 3);
    CHECK(st.formula_q == 8);
    CHECK(st.n == 50);
    CHECK(st.N == 150);
    CHECK_FALSE(st.partners);
    CHECK_FALSE(st.serial);
    CHECK(st.iterations_run == 0);
    CHECK(st.round == 0);
    CHECK(st.tr == &tr);
    CHECK(st.alice_bits == map_to_bits(x, 8).bits);
    CHECK(st.bob_bits == map_to_bits(y, 8).bits);
    for (unsigned it = 0; it < CascadeState::MAX_ITERS; ++it) {
        for (std::uint32_t i = 0; i < st.N; ++i) {
            CHECK(st.seq[it][i] == i);
            CHECK(st.pos_in[it][i] == i);
        }
        CHECK(st.store[it].lo == std::vector<std::uint32_t>(st.N, 0));
        CHECK(st.store[it].hi == std::vector<std::uint32_t>(st.N, 0));
        CHECK(st.store[it].processed == std::vector<std::uint8_t>(st.N, 0));
    }
    CHECK(st.symbol_disclosed == std::vector<std::uint8_t>(50, 0));
}

TEST_CASE("state creation continues the round counter of a used transcript") {
    auto x = random_symbols(4, 10, 5);
    Transcript tr;
    TranscriptEvent ev;
    ev.kind = EventKind::syndrome;
    ev.items = 3;
    ev.payload_bits = 6;
    ev.leak_bits = 6;
    ev.round = 7;
    tr.append(ev);
    auto st = make_cascade_state(x, x, 4, tr);
    CHECK(st.round == 8);
}

TEST_CASE("parity helpers and the smallest-block store agree with direct computation") {
    auto x = random_symbols(2, 64, 21);
    auto y = x;
    Transcript tr;
    auto st = make_cascade_state(x, y, 2, tr);
    int direct = 0;
    for (std::uint32_t i = 8; i < 24; ++i) direct ^= st.alice_bits[i];
    CHECK(st.alice_parity(0, 8, 24) == direct);
    CHECK(st.bob_parity(0, 8, 24) == direct);

    st.record_block(0, 8, 24, direct);
    for (std::uint32_t b = 8; b < 24; ++b) {
        CHECK(st.store[0].lo[b] == 8);
        CHECK(st.store[0].hi[b] == 24);
        CHECK(st.store[0].alice_parity[b] == direct);
    }
    // A larger block never overwrites a smaller record.
    st.record_block(0, 0, 64, st.alice_parity(0, 0, 64));
    CHECK(st.store[0].lo[10] == 8);
    CHECK(st.store[0].hi[10] == 24);
    CHECK(st.store[0].lo[30] == 0);
    CHECK(st.store[0].hi[30] == 64);
    st.record_block(0, 8, 12, st.alice_parity(0, 8, 12));
    CHECK(st.store[0].lo[10] == 8);
    CHECK(st.store[0].hi[10] == 12);
}

TEST_CASE("binary search rejects bad blocks and blocks whose parities match") {
    auto x = random_symbols(2, 64, 31);
    auto y = x;
    y[20] ^= 1;
    Transcript tr;
    auto st = make_cascade_state(x, y, 2, tr);
    CHECK_THROWS_AS((void)binary_search_block(st, 6, 0, 8), std::invalid_argument);
    CHECK_THROWS_AS((void)binary_search_block(st, 0, 8, 8), std::invalid_argument);
    CHECK_THROWS_AS((void)binary_search_block(st, 0, 60, 65), std::invalid_argument);
    // [0, 16) holds no error, so its parities agree.
    CHECK_THROWS_AS((void)binary_search_block(st, 0, 0, 16), std::logic_error);
}

TEST_CASE("binary search on a single-bit block corrects it without any disclosure") {
    auto x = random_symbols(2, 64, 41);
    auto y = x;
    y[20] ^= 1;
    Transcript tr;
    auto st = make_cascade_state(x, y, 2, tr);
    CHECK(binary_search_block(st, 0, 20, 21) == 20);
    CHECK(st.bob_bits == st.alice_bits);
    CHECK(tr.events().empty());
    CHECK(st.store[0].lo[20] == 20);
    CHECK(st.store[0].hi[20] == 21);
    CHECK(st.store[0].processed[20] == 1);
}

TEST_CASE("binary search on an eight-bit block discloses exactly three parities") {
    auto x = random_symbols(2, 64, 51);
    auto y = x;
    y[13] ^= 1;
    Transcript tr;
    auto st = make_cascade_state(x, y, 2, tr);
    st.serial = true;
    CHECK(binary_search_block(st, 0, 8, 16) == 13);
    CHECK(st.bob_bits == st.alice_bits);
    REQUIRE(tr.events().size() == 3);
    for (const auto& ev : tr.events()) {
        CHECK(ev.kind == EventKind::parity);
        CHECK(ev.direction == Direction::alice_to_bob);
        CHECK(ev.items == 1);
        CHECK(ev.leak_bits == 1);
    }
    CHECK(tr.leak_bits() == 3);
    CHECK(tr.message_rounds() == 3);
    CHECK(st.store[0].processed[13] == 1);
    CHECK(st.store[0].hi[13] - st.store[0].lo[13] == 1);
}

TEST_CASE("batched binary search announces each split as a one-item batch") {
    auto x = random_symbols(2, 64, 61);
    auto y = x;
    y[13] ^= 1;
    Transcript tr;
    auto st = make_cascade_state(x, y, 2, tr);
    CHECK(binary_search_block(st, 0, 8, 16) == 13);
    REQUIRE(tr.events().size() == 3);
    for (const auto& ev : tr.events()) {
        CHECK(ev.kind == EventKind::parity_batch);
        CHECK(ev.items == 1);
    }
}

TEST_CASE("a cascade step replays a worked multi-iteration correction") {
    // One corrected bit (865) whose stored iteration-1 block still hides a
    // second error (35475); finding it discloses its partner bits, which
    // uncovers a third error (35476) in the same symbol.
    const unsigned q = 8;
    const std::size_t n = 11826;
    auto x = random_symbols(q, n, 71);
    auto xb = map_to_bits(x, q).bits;
    auto yb = xb;
    yb[35475] ^= 1;
    yb[35476] ^= 1;
    auto y = map_from_bits(BinaryFrameView{3, n, 3 * n, yb});

    Transcript tr;
    auto st = make_cascade_state(x, y, q, tr);
    st.partners = true;
    st.iterations_run = 2;

    // Iteration-1 layout: identity except indices 866 and 35475 swap, so
    // the block [860, 876) holds bits 860..875 with 35475 in place of 866.
    st.seq[0][866] = 35475;
    st.seq[0][35475] = 866;
    st.pos_in[0][35475] = 866;
    st.pos_in[0][866] = 35475;
    st.record_block(0, 860, 876, st.alice_parity(0, 860, 876));
    // Bit 865 already carries a processed iteration-2 record.
    st.store[1].lo[865] = 800;
    st.store[1].hi[865] = 864;
    st.store[1].processed[865] = 1;

    cascade_step(st, {865});

    CHECK(st.bob_bits == st.alice_bits);

    // Four halving announcements (16 -> 8 -> 4 -> 2 -> 1), then the two
    // partner bits of symbol 11825 in one message.
    REQUIRE(tr.events().size() == 5);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(tr.events()[i].kind == EventKind::parity_batch);
        CHECK(tr.events()[i].items == 1);
        CHECK(tr.events()[i].leak_bits == 1);
        CHECK(tr.events()[i].direction == Direction::alice_to_bob);
    }
    CHECK(tr.events()[4].kind == EventKind::partner_bits);
    CHECK(tr.events()[4].items == 2);
    CHECK(tr.events()[4].leak_bits == 2);
    CHECK(tr.leak_bits() == 6);
    CHECK(tr.message_rounds() == 5);
    CHECK(tr.serial_message_count() == 6);
    CHECK(st.round == 5);

    CHECK(st.symbol_disclosed[11825] == 1);
    CHECK(st.symbol_disclosed[288] == 0);

    // Matching sub-blocks shrank the records along the search path.
    auto span = [&](std::uint32_t b) { return st.store[0].hi[b] - st.store[0].lo[b]; };
    for (std::uint32_t b = 868; b < 876; ++b) CHECK(span(b) == 8);
    for (std::uint32_t b = 860; b < 864; ++b) CHECK(span(b) == 4);
    CHECK(span(864) == 2);
    CHECK(span(865) == 2);
    CHECK(span(867) == 1);
    CHECK(st.store[0].lo[35475] == 866);
    CHECK(st.store[0].hi[35475] == 867);
    CHECK(st.store[0].processed[35475] == 1);
    CHECK(st.store[0].processed[865] == 1);
}

TEST_CASE("a step on a block whose errors cancel flags it without disclosure") {
    auto x = random_symbols(2, 64, 81);
    Transcript tr;
    auto st = make_cascade_state(x, x, 2, tr);
    st.iterations_run = 1;
    st.record_block(0, 8, 16, st.alice_parity(0, 8, 16));
    // Both bits were corrected elsewhere; their shared block now matches.
    cascade_step(st, {10, 12});
    CHECK(tr.events().empty());
    CHECK(st.store[0].processed[10] == 1);
    CHECK(st.store[0].processed[12] == 1);
}

TEST_CASE("binary keys give identical transcripts through all three entry points") {
    auto frame = sample_frame(ChannelParams{2, 0.05}, 256, 90001);
    CascadeParams params{0.05, 0};

    Transcript t1, t2, t3;
    auto r1 = run_binary_cascade(frame.x, frame.y, 2, params, t1, 4242);
    auto r2 = run_hd_cascade_serial(frame.x, frame.y, 2, params, t2, 4242);
    auto r3 = run_hd_cascade_parallel(frame.x, frame.y, 2, params, t3, 4242);

    CHECK(t1.serialize() == t2.serialize());
    CHECK(t1.serialize() == t3.serialize());
    CHECK(r1.outcome.leak_bits == r2.outcome.leak_bits);
    CHECK(r1.outcome.f == r3.outcome.f);
    CHECK(r1.outcome.success);
    CHECK(r1.outcome.mismatches == 0);
    CHECK(r1.bob_key == frame.x);
}

TEST_CASE("error-free serial run leaks one parity per block over six iterations") {
    const unsigned q = 8;
    const std::size_t n = 4096;
    auto frame = sample_frame(ChannelParams{q, 0.0}, n, 90002);
    CascadeParams params{0.05, 0};
    Transcript tr;
    auto res = run_hd_cascade_serial(frame.x, frame.y, q, params, tr, 7);

    auto sched = top_block_sizes(qber_bin(q, 0.05), q, 3 * n);
    std::uint64_t blocks = block_count(3 * n, sched.k1) + block_count(3 * n, sched.k2);
    for (auto k : sched.tail) blocks += block_count(3 * n, k);

    CHECK(res.outcome.success);
    CHECK(res.outcome.mismatches == 0);
    CHECK(res.outcome.leak_bits == blocks);
    CHECK(res.outcome.serial_messages == blocks);
    CHECK(res.outcome.message_rounds == blocks);
    for (const auto& ev : tr.events()) {
        CHECK(ev.kind == EventKind::parity);
        CHECK(ev.items == 1);
    }
}

TEST_CASE("error-free parallel run batches every iteration into six rounds") {
    const unsigned q = 8;
    const std::size_t n = 4096;
    auto frame = sample_frame(ChannelParams{q, 0.0}, n, 90003);
    CascadeParams params{0.05, 0};
    Transcript tr;
    auto res = run_hd_cascade_parallel(frame.x, frame.y, q, params, tr, 7);

    CHECK(res.outcome.success);
    CHECK(res.outcome.message_rounds == 6);
    CHECK(res.outcome.leak_bits == res.outcome.serial_messages);
    CHECK(res.outcome.leak_bits < 3 * n / 8);
    for (const auto& ev : tr.events()) {
        CHECK(ev.kind == EventKind::parity_batch);
        CHECK(ev.direction == Direction::alice_to_bob);
        CHECK(ev.leak_bits == ev.items);
    }
}

TEST_CASE("serial high-dimensional run reconciles and accounts every bit") {
    const unsigned q = 4;
    const std::size_t n = 3000;
    auto frame = sample_frame(ChannelParams{q, 0.08}, n, 90004);
    CascadeParams params{0.08, 0};
    Transcript tr;
    auto res = run_hd_cascade_serial(frame.x, frame.y, q, params, tr, 99);

    CHECK(res.outcome.success);
    CHECK(res.outcome.mismatches == 0);
    CHECK(res.bob_key == frame.x);
    CHECK(res.alice_key == frame.x);
    CHECK(res.outcome.tries == 1);
    CHECK(res.outcome.key_length == n);

    std::uint64_t leak = 0, serial = 0;
    for (const auto& ev : tr.events()) {
        CHECK((ev.kind == EventKind::parity || ev.kind == EventKind::partner_bits));
        CHECK(ev.direction == Direction::alice_to_bob);
        if (ev.kind == EventKind::partner_bits) CHECK(ev.items == 1);  // v - 1
        leak += ev.leak_bits;
        serial += ev.items;
    }
    CHECK(res.outcome.leak_bits == leak);
    CHECK(res.outcome.serial_messages == serial);
    auto totals = tr.recompute_totals();
    CHECK(totals.leak_bits == tr.leak_bits());
    CHECK(res.outcome.f ==
          doctest::Approx(efficiency(leak, n, ChannelParams{q, 0.08})).epsilon(1e-12));
    CHECK(res.outcome.f > 1.0);
}

TEST_CASE("parallel high-dimensional run keeps partner batches whole") {
    const unsigned q = 8;
    const std::size_t n = 2000;
    auto frame = sample_frame(ChannelParams{q, 0.03}, n, 90005);
    CascadeParams params{0.03, 0};
    Transcript tr;
    auto res = run_hd_cascade_parallel(frame.x, frame.y, q, params, tr, 123);

    CHECK(res.outcome.success);
    CHECK(res.outcome.mismatches == 0);
    CHECK(res.bob_key == frame.x);
    bool saw_partners = false;
    for (const auto& ev : tr.events()) {
        if (ev.kind == EventKind::partner_bits) {
            saw_partners = true;
            CHECK(ev.items % 2 == 0);  // v - 1 = 2 bits per disclosed symbol
            CHECK(ev.leak_bits == ev.items);
        }
    }
    CHECK(saw_partners);
    CHECK(res.outcome.f ==
          doctest::Approx(efficiency(res.outcome.leak_bits, n, ChannelParams{q, 0.03}))
              .epsilon(1e-12));
}

TEST_CASE("runs are reproducible for a seed and sensitive to it") {
    const unsigned q = 16;
    auto frame = sample_frame(ChannelParams{q, 0.05}, 1500, 90006);
    CascadeParams params{0.05, 0};

    Transcript a, b, c;
    auto ra = run_hd_cascade_parallel(frame.x, frame.y, q, params, a, 555);
    auto rb = run_hd_cascade_parallel(frame.x, frame.y, q, params, b, 555);
    auto rc = run_hd_cascade_parallel(frame.x, frame.y, q, params, c, 556);
    CHECK(a.serialize() == b.serialize());
    CHECK(ra.outcome.leak_bits == rb.outcome.leak_bits);
    CHECK(ra.outcome.f == rb.outcome.f);
    CHECK(a.serialize() != c.serialize());
    CHECK(rc.outcome.success);
}

TEST_CASE("an exhausted step budget leaves honest mismatch counts") {
    const unsigned q = 4;
    const std::size_t n = 1000;
    auto frame = sample_frame(ChannelParams{q, 0.30}, n, 90007);
    CascadeParams params{0.30, 1};
    Transcript tr;
    auto res = run_hd_cascade_parallel(frame.x, frame.y, q, params, tr, 31);

    CHECK(res.outcome.mismatches == symbol_distance(res.alice_key, res.bob_key));
    CHECK(res.outcome.success == (res.outcome.mismatches == 0));
    CHECK(res.alice_key == frame.x);
    // The budget cuts the back-propagation short, so this noisy frame
    // cannot finish clean.
    CHECK(res.outcome.mismatches > 0);
    CHECK_FALSE(res.outcome.success);
    CHECK(res.outcome.leak_bits == tr.leak_bits());
}

}  // TEST_SUITE
