#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace recon {

enum class Direction { alice_to_bob, bob_to_alice };

enum class EventKind {
    syndrome,
    parity,
    parity_batch,
    partner_bits,
    shortened_values,
    plain_reveal,
};

// One classical message. leak_bits is the key information charged against
// the secret key (nonzero only for Alice's disclosures); payload_bits is the
// raw message size; items counts the atomic disclosures inside the message
// (parities in a batch, symbols in a reveal).
struct TranscriptEvent {
    Direction direction = Direction::alice_to_bob;
    EventKind kind = EventKind::parity;
    std::uint64_t items = 0;
    std::uint64_t payload_bits = 0;
    std::uint64_t leak_bits = 0;
    std::uint64_t round = 0;
};

// What one reconciliation run produced, with the accounting needed to audit
// it against the transcript: f must recompute from leak_bits over
// key_length symbols, and the counters must match the transcript totals.
struct FrameOutcome {
    bool success = false;
    double f = 0.0;
    std::size_t tries = 0;
    std::uint64_t leak_bits = 0;
    std::uint64_t message_rounds = 0;
    std::uint64_t serial_messages = 0;
    std::size_t key_length = 0;  // symbols forming the distilled key
    std::size_t mismatches = 0;  // residual symbol errors after the run
};

// Append-only ledger of every classical exchange in a reconciliation run.
// Running totals are maintained incrementally and can be recomputed from
// the event list for auditing.
class Transcript {
  public:
    // Rejects out-of-order round indices and leakage attributed to Bob.
    void append(const TranscriptEvent& ev);

    const std::vector<TranscriptEvent>& events() const { return events_; }
    std::uint64_t leak_bits() const { return leak_bits_; }
    std::uint64_t message_rounds() const { return rounds_; }
    // Total information-bearing messages: sum of items over Alice's events.
    std::uint64_t serial_message_count() const { return serial_messages_; }

    struct Totals {
        std::uint64_t leak_bits = 0;
        std::uint64_t message_rounds = 0;
        std::uint64_t serial_message_count = 0;
    };
    // Recomputed from scratch; must equal the running totals.
    Totals recompute_totals() const;

    // One line per event plus a totals line; stable byte-exact format.
    std::string serialize() const;

  private:
    std::vector<TranscriptEvent> events_;
    std::uint64_t leak_bits_ = 0;
    std::uint64_t rounds_ = 0;
    std::uint64_t serial_messages_ = 0;
    std::uint64_t last_round_ = 0;
    bool any_event_ = false;
};

}  // namespace recon
