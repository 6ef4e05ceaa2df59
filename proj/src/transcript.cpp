#include "recon/transcript.hpp"

#include <set>
#include <sstream>
#include <stdexcept>

namespace recon {

namespace {

const char* kind_name(EventKind k) {
    switch (k) {
        case EventKind::syndrome: return "syndrome";
        case EventKind::parity: return "parity";
        case EventKind::parity_batch: return "parity-batch";
        case EventKind::partner_bits: return "partner-bits";
        case EventKind::shortened_values: return "shortened-values";
        case EventKind::plain_reveal: return "plain-reveal";
    }
    return "?";
}

}  // namespace

void Transcript::append(const TranscriptEvent& ev) {
    if (any_event_ && ev.round < last_round_)
        throw std::logic_error("transcript: round index went backwards");
    if (ev.direction == Direction::bob_to_alice && ev.leak_bits != 0)
        throw std::logic_error("transcript: leakage must be attributed to Alice");
    if (!any_event_ || ev.round != last_round_) ++rounds_;
    any_event_ = true;
    last_round_ = ev.round;
    leak_bits_ += ev.leak_bits;
    if (ev.direction == Direction::alice_to_bob) serial_messages_ += ev.items;
    events_.push_back(ev);
}

Transcript::Totals Transcript::recompute_totals() const {
    Totals t;
    std::set<std::uint64_t> rounds;
    for (const auto& ev : events_) {
        t.leak_bits += ev.leak_bits;
        if (ev.direction == Direction::alice_to_bob) t.serial_message_count += ev.items;
        rounds.insert(ev.round);
    }
    t.message_rounds = rounds.size();
    return t;
}

std::string Transcript::serialize() const {
    std::ostringstream out;
    for (const auto& ev : events_) {
        out << (ev.direction == Direction::alice_to_bob ? "A>B" : "B>A") << ' '
            << kind_name(ev.kind) << ' ' << ev.items << ' ' << ev.payload_bits << ' '
            << ev.leak_bits << ' ' << ev.round << '\n';
    }
    out << "totals " << leak_bits_ << ' ' << rounds_ << ' ' << serial_messages_ << '\n';
    return out.str();
}

}  // namespace recon
