#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "nfcsim/link.hpp"
#include "nfcsim/readiness.hpp"
#include "nfcsim/timing.hpp"
#include "nfcsim/variant.hpp"

namespace nfcsim {

// Result of one transfer experiment. Time fields are milliseconds.
//
// total_time spans first command sent to last response received; the initial
// tap/detection that precedes any data is setup, not transfer. latency is the
// steady-state delivery time of a single message: one switch gap plus one
// exchange. bandwidth counts one-way payload bits over total_time. On a
// failed run latency and bandwidth are zero and switch_count holds the number
// of switches that completed.
struct TransferReport {
    Variant variant = Variant::EnablingDisabling;
    int n_round_trips = 0;
    std::size_t chunk_bytes = 0;
    double total_time_ms = 0.0;
    double latency_ms = 0.0;
    double bandwidth_kbps = 0.0;
    int switch_count = 0;
    int failed_switch = 0;  // 1-based ordinal; 0 means the run succeeded

    bool success() const { return failed_switch == 0; }
};

namespace detail {

inline Bytes pattern_payload(std::size_t n) {
    Bytes b(n);
    for (std::size_t i = 0; i < n; ++i)
        b[i] = static_cast<std::uint8_t>((i * 31 + 7) & 0xff);
    return b;
}

inline void stage_echo_pair(Simulation& sim, DeviceId a, DeviceId b, const Bytes& payload) {
    sim.dev(a).storage.clear();
    sim.dev(b).storage.clear();
    sim.dev(a).storage.set_message_to_send(payload, 0);
    sim.dev(a).apdu_handler = storage_responder(sim, a);
    sim.dev(b).apdu_handler = storage_responder(sim, b);
}

}  // namespace detail

// Legacy baseline: every direction change is a fresh human tap. One message
// out, one back, no programmatic switches.
inline TransferReport run_two_tap(Simulation& sim, const ProtocolConfig& cfg, DeviceId a,
                                  DeviceId b, int n_round_trips, std::size_t payload_bytes) {
    if (n_round_trips != 1)
        throw UnsupportedByVariant("two-tap cannot chain round trips without more taps");
    if (payload_bytes > kMaxMessageBytes)
        throw MessageTooLarge(std::to_string(payload_bytes));

    SimClock& clk = sim.clock();
    TraceLog& trace = sim.trace();
    const Micros t_start = clk.now();
    const Micros push = sim.timing.t_apdu(payload_bytes);

    auto tap_and_push = [&](DeviceId from, DeviceId to, int which) {
        trace.record(clk.now(), sim.dev(from).profile.name, "tap",
                     "tap " + std::to_string(which));
        const Micros send_at = clk.now() + cfg.tap_latency;
        clk.advance_to(send_at);
        trace.record(send_at, sim.dev(from).profile.name, "ndef_sent",
                     "bytes=" + std::to_string(payload_bytes));
        clk.advance_to(send_at + push);
        trace.record(clk.now(), sim.dev(to).profile.name, "ndef_received",
                     "bytes=" + std::to_string(payload_bytes));
        sim.add_power(from, PowerState::NfcTransfer, send_at, clk.now());
        sim.add_power(to, PowerState::NfcTransfer, send_at, clk.now());
    };

    tap_and_push(a, b, 1);
    tap_and_push(b, a, 2);

    TransferReport r;
    r.variant = Variant::TwoTap;
    r.n_round_trips = 1;
    r.chunk_bytes = payload_bytes;
    r.total_time_ms = to_ms(clk.now() - t_start);
    r.latency_ms = to_ms(cfg.tap_latency + push);
    r.bandwidth_kbps = bandwidth(static_cast<double>(payload_bytes), r.total_time_ms);
    r.switch_count = 0;
    return r;
}

// One tap to push the message, then a single switch into reader mode to pull
// the reply. Cannot go around again, which is exactly its limitation.
inline TransferReport run_hce_one_tap(Simulation& sim, const ProtocolConfig& cfg, DeviceId a,
                                      DeviceId b, int n_round_trips,
                                      std::size_t payload_bytes) {
    if (n_round_trips != 1)
        throw UnsupportedByVariant("one-tap HCE supports a single round trip: after the "
                                   "switch the devices cannot swap roles again");
    if (payload_bytes > kMaxMessageBytes)
        throw MessageTooLarge(std::to_string(payload_bytes));

    SimClock& clk = sim.clock();
    TraceLog& trace = sim.trace();
    const Micros t_start = clk.now();

    // Tap, then the initiator beams the message across.
    trace.record(clk.now(), sim.dev(a).profile.name, "tap", "tap 1");
    const Micros send_at = clk.now() + cfg.tap_latency;
    clk.advance_to(send_at);
    trace.record(send_at, sim.dev(a).profile.name, "ndef_sent",
                 "bytes=" + std::to_string(payload_bytes));
    const Micros push = sim.timing.t_apdu(payload_bytes);
    clk.advance_to(send_at + push);
    trace.record(clk.now(), sim.dev(b).profile.name, "ndef_received",
                 "bytes=" + std::to_string(payload_bytes));
    sim.add_power(a, PowerState::NfcTransfer, send_at, clk.now());
    sim.add_power(b, PowerState::NfcTransfer, send_at, clk.now());

    // The receiver stages the reply; the initiator turns into a reader.
    const Bytes reply = detail::pattern_payload(std::min(payload_bytes, kMaxChunkBytes));
    sim.dev(b).storage.clear();
    const auto chunks = fragment(reply);
    for (std::size_t i = 0; i < chunks.size(); ++i)
        sim.dev(b).storage.set_message_to_send(chunks[i], static_cast<ChunkIndex>(i));
    sim.dev(b).apdu_handler = storage_responder(sim, b);
    sim.set_role(b, Role::EmulatedCard);
    sim.begin_switch_to_reader(a, clk.now() + sim.link.switch_settle);
    clk.advance_to(clk.now() + sim.link.switch_settle);
    const SessionId sid = sim.establish_connection(a, b);

    for (std::size_t i = 0; i < chunks.size(); ++i)
        read_chunk(sim, sid, static_cast<ChunkIndex>(i));

    TransferReport r;
    r.variant = Variant::HceOneTap;
    r.n_round_trips = 1;
    r.chunk_bytes = payload_bytes;
    r.total_time_ms = to_ms(clk.now() - t_start);
    r.latency_ms = to_ms(sim.link.switch_settle + sim.link.detection +
                         sim.timing.t_apdu(reply.size()));
    r.bandwidth_kbps = bandwidth(static_cast<double>(payload_bytes), r.total_time_ms);
    r.switch_count = 1;
    return r;
}

namespace detail {

// One role swap under the disabling-enabling discipline: the reader drops
// the field immediately, the deactivated peer waits t before enabling its
// reader, the old reader settles back into card emulation meanwhile.
inline SessionId switch_disabling_enabling(Simulation& sim, SessionId sid, DeviceId old_reader,
                                           DeviceId old_card, const ProtocolConfig& cfg) {
    SimClock& clk = sim.clock();
    const Micros at_break = clk.now();
    sim.break_connection(sid);
    const Micros enable_at = at_break + sim.link.deactivation + cfg.t;
    const Micros card_ready_at = at_break + sim.link.switch_settle;
    sim.begin_switch_to_reader(old_card, enable_at);
    sim.begin_switch_to_card(old_reader, card_ready_at);
    clk.advance_to(std::max(enable_at, card_ready_at));
    return sim.establish_connection(old_card, old_reader);
}

// One role swap under the enabling-disabling discipline: the card side arms
// its reader t1 after answering, so the new reader is already up when the
// old one finishes falling back to card emulation t2+settle later.
inline SessionId switch_enabling_disabling(Simulation& sim, SessionId sid, DeviceId old_reader,
                                           DeviceId old_card, const ProtocolConfig& cfg) {
    SimClock& clk = sim.clock();
    const Micros response_sent = sim.last_exchange().response_sent_at;
    const Micros response_received = sim.last_exchange().response_received_at;
    const Micros enable_at = response_sent + cfg.t1;
    const Micros disable_at = response_received + cfg.t2;
    const Micros card_ready_at = disable_at + sim.link.switch_settle;
    clk.schedule(disable_at, [&sim, sid] { sim.break_connection(sid); });
    sim.begin_switch_to_reader(old_card, enable_at);
    sim.begin_switch_to_card(old_reader, card_ready_at);
    clk.advance_to(std::max(enable_at, card_ready_at));
    return sim.establish_connection(old_card, old_reader);
}

// Shared round-trip rig for the two switching protocols. The initiator a
// starts as the card holding the message; the peer b reads it, they swap,
// and the message bounces back, n times in total.
inline TransferReport run_switched(Simulation& sim, const ProtocolConfig& cfg, DeviceId a,
                                   DeviceId b, int n_round_trips, std::size_t chunk_bytes,
                                   const ReadinessModel& model, Rng* switch_rng) {
    if (n_round_trips < 1) throw std::invalid_argument("need at least one round trip");
    if (chunk_bytes > kMaxChunkBytes) throw ChunkTooLarge(std::to_string(chunk_bytes));
    if (sim.stochastic && switch_rng == nullptr)
        throw std::invalid_argument("stochastic runs need a switch rng");

    const Bytes payload = pattern_payload(chunk_bytes);
    stage_echo_pair(sim, a, b, payload);
    sim.set_role(a, Role::EmulatedCard);
    sim.set_role(b, Role::CardReader);

    TransferReport r;
    r.variant = cfg.variant;
    r.n_round_trips = n_round_trips;
    r.chunk_bytes = chunk_bytes;

    SessionId sid = sim.establish_connection(b, a);
    SimClock& clk = sim.clock();
    const Micros t_start = clk.now();

    DeviceId reader = b;
    DeviceId card = a;
    const int exchanges = 2 * n_round_trips;
    const double p_switch = per_switch_probability(model, cfg.variant, cfg);

    for (int k = 1; k <= exchanges; ++k) {
        ApduResponse resp = read_chunk(sim, sid, 0);
        sim.dev(reader).storage.set_message_to_send(resp.payload, 0);
        if (k == exchanges) break;

        if (sim.stochastic && !switch_rng->bernoulli(p_switch)) {
            sim.trace().record(clk.now(), sim.dev(card).profile.name, "switch_failed",
                               "switch=" + std::to_string(k) + " variant=" +
                                   variant_name(cfg.variant));
            r.total_time_ms = to_ms(clk.now() - t_start);
            r.switch_count = k - 1;
            r.failed_switch = k;
            return r;
        }
        sid = cfg.variant == Variant::DisablingEnabling
                  ? switch_disabling_enabling(sim, sid, reader, card, cfg)
                  : switch_enabling_disabling(sim, sid, reader, card, cfg);
        std::swap(reader, card);
    }

    r.total_time_ms = to_ms(clk.now() - t_start);
    r.switch_count = exchanges - 1;
    const double apdu_ms = to_ms(sim.timing.t_apdu(chunk_bytes));
    const double gap_ms = t_switching_avg(r.total_time_ms, n_round_trips, apdu_ms);
    r.latency_ms = gap_ms + apdu_ms;
    r.bandwidth_kbps = bandwidth(static_cast<double>(n_round_trips) *
                                     static_cast<double>(chunk_bytes),
                                 r.total_time_ms);
    return r;
}

}  // namespace detail

inline TransferReport run_disabling_enabling(Simulation& sim, const ProtocolConfig& cfg,
                                             DeviceId a, DeviceId b, int n_round_trips,
                                             std::size_t chunk_bytes,
                                             const ReadinessModel& model = {},
                                             Rng* switch_rng = nullptr) {
    ProtocolConfig c = cfg;
    c.variant = Variant::DisablingEnabling;
    return detail::run_switched(sim, c, a, b, n_round_trips, chunk_bytes, model, switch_rng);
}

inline TransferReport run_enabling_disabling(Simulation& sim, const ProtocolConfig& cfg,
                                             DeviceId a, DeviceId b, int n_round_trips,
                                             std::size_t chunk_bytes,
                                             const ReadinessModel& model = {},
                                             Rng* switch_rng = nullptr) {
    ProtocolConfig c = cfg;
    c.variant = Variant::EnablingDisabling;
    return detail::run_switched(sim, c, a, b, n_round_trips, chunk_bytes, model, switch_rng);
}

inline TransferReport run_protocol(Simulation& sim, const ProtocolConfig& cfg, DeviceId a,
                                   DeviceId b, int n_round_trips, std::size_t chunk_bytes,
                                   const ReadinessModel& model = {},
                                   Rng* switch_rng = nullptr) {
    switch (cfg.variant) {
        case Variant::TwoTap:
            return run_two_tap(sim, cfg, a, b, n_round_trips, chunk_bytes);
        case Variant::HceOneTap:
            return run_hce_one_tap(sim, cfg, a, b, n_round_trips, chunk_bytes);
        case Variant::DisablingEnabling:
            return run_disabling_enabling(sim, cfg, a, b, n_round_trips, chunk_bytes, model,
                                          switch_rng);
        case Variant::EnablingDisabling:
            return run_enabling_disabling(sim, cfg, a, b, n_round_trips, chunk_bytes, model,
                                          switch_rng);
    }
    throw std::logic_error("unreachable");
}

// Moves one whole message from the card side of an active session to the
// reader, chunk by chunk, without any role switch in between. The report's
// n_round_trips is 0 to mark the transfer as one-way; latency here is the
// full delivery time of the message.
inline TransferReport transfer_message(Simulation& sim, SessionId sid, const Bytes& message,
                                       const std::string& aid_base = kDefaultAidBase) {
    const DeviceId sender = sim.session(sid).card;
    const auto chunks = fragment(message);
    sim.dev(sender).storage.clear();
    for (std::size_t i = 0; i < chunks.size(); ++i)
        sim.dev(sender).storage.set_message_to_send(chunks[i], static_cast<ChunkIndex>(i));
    sim.dev(sender).apdu_handler = storage_responder(sim, sender);

    SimClock& clk = sim.clock();
    const Micros t_start = clk.now();
    for (std::size_t i = 0; i < chunks.size(); ++i)
        read_chunk(sim, sid, static_cast<ChunkIndex>(i), aid_base);

    TransferReport r;
    r.variant = Variant::EnablingDisabling;
    r.n_round_trips = 0;
    r.chunk_bytes = message.size();
    r.total_time_ms = to_ms(clk.now() - t_start);
    r.latency_ms = r.total_time_ms;
    r.bandwidth_kbps = bandwidth(static_cast<double>(message.size()),
                                 std::max(r.total_time_ms, 1e-9));
    r.switch_count = 0;
    return r;
}

// Collects chunks 0..count-1 of a device inbox back into one message.
inline Bytes collect_received(const MessageStorage& storage, int count) {
    std::vector<Bytes> chunks;
    chunks.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) chunks.push_back(storage.get_message_received(i));
    return assemble(chunks);
}

}  // namespace nfcsim
