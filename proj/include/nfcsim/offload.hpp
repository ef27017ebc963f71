#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nfcsim/link.hpp"
#include "nfcsim/protocols.hpp"
#include "nfcsim/rsa.hpp"
#include "nfcsim/workloads.hpp"

namespace nfcsim {

constexpr std::uint8_t kAppNQueens = 1;
constexpr std::uint8_t kAppRsa = 2;

enum class WorkloadKind { NQueens, Rsa };

inline const char* workload_name(WorkloadKind k) {
    return k == WorkloadKind::NQueens ? "nqueens" : "rsa";
}

inline WorkloadKind workload_from_name(const std::string& s) {
    if (s == "nqueens") return WorkloadKind::NQueens;
    if (s == "rsa") return WorkloadKind::Rsa;
    throw UnknownWorkload(s);
}

// Everything needed to run one task either locally or across the link.
struct TaskSpec {
    WorkloadKind kind = WorkloadKind::NQueens;
    std::uint8_t application_number = kAppNQueens;
    int nqueens_n = 8;
    int rsa_key_bits = 2048;
    std::uint64_t rsa_seed = 1;
    Bytes rsa_plaintext;
    Micros base_cost_override = 0;  // 0 means use the built-in cost tables

    Micros base_cost() const {
        if (base_cost_override > 0) return base_cost_override;
        return kind == WorkloadKind::NQueens ? nqueens_base_cost(nqueens_n)
                                             : rsa_base_cost(rsa_key_bits);
    }

    // Request bytes as sent across the link. The first byte names the
    // application; the rest is application specific.
    Bytes request_payload() const {
        if (kind == WorkloadKind::NQueens)
            return serialize_nqueens(application_number, nqueens_n);
        Bytes out;
        out.push_back(application_number);
        out.push_back(static_cast<std::uint8_t>(rsa_key_bits >> 8));
        out.push_back(static_cast<std::uint8_t>(rsa_key_bits & 0xff));
        for (int i = 0; i < 8; ++i)
            out.push_back(static_cast<std::uint8_t>(rsa_seed >> (8 * (7 - i))));
        out.insert(out.end(), rsa_plaintext.begin(), rsa_plaintext.end());
        return out;
    }

    // Runs the actual computation and frames its result for transfer.
    std::vector<Bytes> compute_result_chunks() const {
        if (kind == WorkloadKind::NQueens)
            return {serialize_nqueens_result(application_number, nqueens_count(nqueens_n))};
        const RsaKeyPair kp = rsa_keygen(rsa_key_bits, rsa_seed);
        const Bytes ct = rsa_encrypt(kp.pub, rsa_plaintext);
        return frame_rsa_result(ct, encode_public_key(kp.pub), encode_private_key(kp.priv));
    }
};

inline TaskSpec make_nqueens_task(int n) {
    TaskSpec t;
    t.kind = WorkloadKind::NQueens;
    t.application_number = kAppNQueens;
    t.nqueens_n = n;
    return t;
}

inline TaskSpec make_rsa_task(int key_bits, Bytes plaintext, std::uint64_t seed = 1) {
    check_key_length(key_bits);
    TaskSpec t;
    t.kind = WorkloadKind::Rsa;
    t.application_number = kAppRsa;
    t.rsa_key_bits = key_bits;
    t.rsa_seed = seed;
    t.rsa_plaintext = std::move(plaintext);
    return t;
}

// Offloadee-side decoding of a request payload.
inline TaskSpec parse_request(const Bytes& payload) {
    if (payload.empty()) throw MalformedPayload("empty request");
    const std::uint8_t app = payload[0];
    if (app == kAppNQueens) {
        const auto [num, n] = deserialize_nqueens(payload);
        TaskSpec t = make_nqueens_task(n);
        t.application_number = num;
        return t;
    }
    if (app == kAppRsa) {
        if (payload.size() < 11) throw MalformedPayload("rsa request shorter than header");
        const int bits = (payload[1] << 8) | payload[2];
        std::uint64_t seed = 0;
        for (int i = 0; i < 8; ++i) seed = (seed << 8) | payload[3 + i];
        check_key_length(bits);
        return make_rsa_task(bits, Bytes(payload.begin() + 11, payload.end()), seed);
    }
    throw UnknownWorkload("application number " + std::to_string(app));
}

// Integrates power over a device timeline. Intervals must not overlap; a
// device cannot be in two power states at once.
inline double energy_of_trace(std::vector<PowerInterval> intervals,
                              const DeviceProfile& profile) {
    for (const auto& iv : intervals) {
        if (iv.end < iv.begin) throw std::invalid_argument("interval ends before it begins");
    }
    std::sort(intervals.begin(), intervals.end(),
              [](const PowerInterval& a, const PowerInterval& b) {
                  return a.begin != b.begin ? a.begin < b.begin : a.end < b.end;
              });
    double mw_us = 0.0;
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        if (i > 0 && intervals[i].begin < intervals[i - 1].end)
            throw OverlappingIntervals("power intervals overlap at " +
                                       std::to_string(intervals[i].begin));
        mw_us += profile.power_mw(intervals[i].state) *
                 static_cast<double>(intervals[i].end - intervals[i].begin);
    }
    return mw_us / 1e6;  // mW*us -> mJ
}

struct TaskOutcome {
    std::vector<Bytes> result_chunks;
    Bytes result;  // chunks concatenated
    double wall_time_ms = 0.0;
    double main_energy_mj = 0.0;
    double offloadee_energy_mj = 0.0;
    bool offloaded = false;
};

// Runs the task on the device itself: full-power compute for the scaled
// cost, nothing on the radio.
inline TaskOutcome execute_local(const TaskSpec& task, const DeviceProfile& device) {
    TaskOutcome out;
    out.result_chunks = task.compute_result_chunks();
    out.result = assemble(out.result_chunks);
    const Micros wall = static_cast<Micros>(
        std::llround(static_cast<double>(task.base_cost()) / device.speed_factor));
    out.wall_time_ms = to_ms(wall);
    out.main_energy_mj =
        energy_of_trace({PowerInterval{0, wall, PowerState::Compute}}, device);
    out.offloaded = false;
    return out;
}

namespace detail {

inline void ndef_push(Simulation& sim, DeviceId from, DeviceId to, const Bytes& payload) {
    SimClock& clk = sim.clock();
    const Micros send_at = clk.now();
    sim.trace().record(send_at, sim.dev(from).profile.name, "ndef_sent",
                       "bytes=" + std::to_string(payload.size()));
    clk.advance_to(send_at + sim.timing.t_apdu(payload.size()));
    sim.trace().record(clk.now(), sim.dev(to).profile.name, "ndef_received",
                       "bytes=" + std::to_string(payload.size()));
    sim.add_power(from, PowerState::NfcTransfer, send_at, clk.now());
    sim.add_power(to, PowerState::NfcTransfer, send_at, clk.now());
}

}  // namespace detail

// Ships the task to the offloadee over the configured protocol, computes it
// there, and brings the framed result back. The result bytes are identical
// to what execute_local would produce; RSA results are verified by
// decrypting the returned ciphertext with the returned key.
inline TaskOutcome offload_task(Simulation& sim, const TaskSpec& task, DeviceId main_id,
                                DeviceId offloadee_id, const ProtocolConfig& cfg,
                                const ReadinessModel& model = {}, Rng* switch_rng = nullptr) {
    SimClock& clk = sim.clock();
    const Micros t0 = clk.now();
    const Bytes request = task.request_payload();
    const double off_speed = sim.dev(offloadee_id).profile.speed_factor;
    const Micros compute_cost = static_cast<Micros>(
        std::llround(static_cast<double>(task.base_cost()) / off_speed));

    std::vector<Bytes> result_chunks;
    TaskSpec parsed;

    auto compute_on_offloadee = [&](const Bytes& request_bytes) {
        parsed = parse_request(request_bytes);
        const Micros start = clk.now();
        sim.trace().record(start, sim.dev(offloadee_id).profile.name, "compute_started",
                           std::string(workload_name(parsed.kind)));
        result_chunks = parsed.compute_result_chunks();
        sim.add_power(offloadee_id, PowerState::Compute, start, start + compute_cost);
        clk.schedule(start + compute_cost, [&sim, offloadee_id] {
            sim.trace().record(sim.clock().now(), sim.dev(offloadee_id).profile.name,
                               "compute_finished");
        });
        return start + compute_cost;
    };

    Micros compute_end = 0;

    if (cfg.variant == Variant::TwoTap) {
        sim.trace().record(clk.now(), sim.dev(main_id).profile.name, "tap", "tap 1");
        clk.advance_to(clk.now() + cfg.tap_latency);
        detail::ndef_push(sim, main_id, offloadee_id, request);
        compute_end = compute_on_offloadee(request);
        clk.advance_to(compute_end);
        sim.trace().record(clk.now(), sim.dev(offloadee_id).profile.name, "tap", "tap 2");
        clk.advance_to(clk.now() + cfg.tap_latency);
        for (const auto& chunk : result_chunks)
            detail::ndef_push(sim, offloadee_id, main_id, chunk);
    } else if (cfg.variant == Variant::HceOneTap) {
        sim.trace().record(clk.now(), sim.dev(main_id).profile.name, "tap", "tap 1");
        clk.advance_to(clk.now() + cfg.tap_latency);
        detail::ndef_push(sim, main_id, offloadee_id, request);
        compute_end = compute_on_offloadee(request);
        Device& off = sim.dev(offloadee_id);
        off.storage.clear();
        for (std::size_t i = 0; i < result_chunks.size(); ++i)
            off.storage.set_message_to_send(result_chunks[i], static_cast<ChunkIndex>(i));
        off.apdu_handler = storage_responder(sim, offloadee_id);
        sim.set_role(offloadee_id, Role::EmulatedCard);
        sim.begin_switch_to_reader(main_id, clk.now() + sim.link.switch_settle);
        clk.advance_to(clk.now() + sim.link.switch_settle);
        SessionId sid = sim.establish_connection(main_id, offloadee_id);
        if (clk.now() < compute_end) clk.advance_to(compute_end);
        for (std::size_t i = 0; i < result_chunks.size(); ++i)
            read_chunk(sim, sid, static_cast<ChunkIndex>(i));
    } else {
        // Switching protocols: the offloadee reads the request, both swap
        // roles while the computation runs, then the main device reads the
        // framed result.
        Device& mn = sim.dev(main_id);
        mn.storage.clear();
        const auto req_chunks = fragment(request);
        for (std::size_t i = 0; i < req_chunks.size(); ++i)
            mn.storage.set_message_to_send(req_chunks[i], static_cast<ChunkIndex>(i));
        mn.apdu_handler = storage_responder(sim, main_id);
        sim.set_role(main_id, Role::EmulatedCard);
        sim.set_role(offloadee_id, Role::CardReader);

        SessionId sid = sim.establish_connection(offloadee_id, main_id);
        for (std::size_t i = 0; i < req_chunks.size(); ++i)
            read_chunk(sim, sid, static_cast<ChunkIndex>(i));

        const Bytes got = collect_received(sim.dev(offloadee_id).storage,
                                           static_cast<int>(req_chunks.size()));
        compute_end = compute_on_offloadee(got);

        Device& off = sim.dev(offloadee_id);
        off.storage.clear();
        for (std::size_t i = 0; i < result_chunks.size(); ++i)
            off.storage.set_message_to_send(result_chunks[i], static_cast<ChunkIndex>(i));
        off.apdu_handler = storage_responder(sim, offloadee_id);

        if (sim.stochastic) {
            if (switch_rng == nullptr)
                throw std::invalid_argument("stochastic runs need a switch rng");
            const double p = per_switch_probability(model, cfg.variant, cfg);
            if (!switch_rng->bernoulli(p))
                throw TagLost("role switch failed while offloading");
        }
        sid = cfg.variant == Variant::DisablingEnabling
                  ? detail::switch_disabling_enabling(sim, sid, offloadee_id, main_id, cfg)
                  : detail::switch_enabling_disabling(sim, sid, offloadee_id, main_id, cfg);

        if (clk.now() < compute_end) clk.advance_to(compute_end);
        for (std::size_t i = 0; i < result_chunks.size(); ++i)
            read_chunk(sim, sid, static_cast<ChunkIndex>(i));
    }

    TaskOutcome out;
    out.result_chunks = result_chunks;
    out.result = assemble(result_chunks);
    out.offloaded = true;
    out.wall_time_ms = to_ms(clk.now() - t0);

    // Receiver-side verification before accepting the result.
    if (task.kind == WorkloadKind::Rsa) {
        const RsaResultFraming f = unframe_rsa_result(result_chunks, task.rsa_key_bits);
        const RsaPrivateKey priv = decode_private_key(f.private_key_der);
        if (rsa_decrypt(priv, f.ciphertext) != task.rsa_plaintext)
            throw KeyMismatch("returned ciphertext does not decrypt to the plaintext");
    } else {
        const auto [app, count] = deserialize_nqueens_result(out.result);
        if (app != task.application_number)
            throw MalformedPayload("result labeled for application " + std::to_string(app));
        (void)count;
    }

    sim.fill_idle(main_id, t0, clk.now());
    sim.fill_idle(offloadee_id, t0, clk.now());
    out.main_energy_mj = energy_of_trace(sim.dev(main_id).power, sim.dev(main_id).profile);
    out.offloadee_energy_mj =
        energy_of_trace(sim.dev(offloadee_id).power, sim.dev(offloadee_id).profile);
    return out;
}

struct CrossoverRow {
    int size = 0;
    double local_wall_ms = 0.0;
    double local_energy_mj = 0.0;
    double offload_wall_ms = 0.0;
    double offload_main_energy_mj = 0.0;
    double offloadee_energy_mj = 0.0;
    double offloadee_local_wall_ms = 0.0;  // bare compute time on the offloadee
    double energy_ratio = 0.0;             // local energy / offloaded main energy
};

struct CrossoverReport {
    std::vector<CrossoverRow> rows;
    std::optional<int> crossover_size;  // smallest size where offloading wins on energy
};

// Sweeps a task family over problem sizes and compares staying local against
// offloading, from the main device's point of view.
inline CrossoverReport crossover_analysis(WorkloadKind kind, const std::vector<int>& sizes,
                                          const DeviceProfile& main_profile,
                                          const DeviceProfile& offloadee_profile,
                                          const TimingModel& timing, const LinkConfig& link,
                                          const ProtocolConfig& cfg) {
    std::vector<int> ordered = sizes;
    std::sort(ordered.begin(), ordered.end());
    CrossoverReport report;
    for (int size : ordered) {
        const TaskSpec task = kind == WorkloadKind::NQueens
                                  ? make_nqueens_task(size)
                                  : make_rsa_task(size, Bytes{0x42}, 1);
        const TaskOutcome local = execute_local(task, main_profile);

        Simulation sim(timing, link);
        sim.trace().enabled = false;
        const DeviceId main_id = sim.add_device(main_profile);
        const DeviceId off_id = sim.add_device(offloadee_profile);
        const TaskOutcome off = offload_task(sim, task, main_id, off_id, cfg);

        CrossoverRow row;
        row.size = size;
        row.local_wall_ms = local.wall_time_ms;
        row.local_energy_mj = local.main_energy_mj;
        row.offload_wall_ms = off.wall_time_ms;
        row.offload_main_energy_mj = off.main_energy_mj;
        row.offloadee_energy_mj = off.offloadee_energy_mj;
        row.offloadee_local_wall_ms =
            to_ms(static_cast<Micros>(std::llround(static_cast<double>(task.base_cost()) /
                                                   offloadee_profile.speed_factor)));
        row.energy_ratio = off.main_energy_mj > 0.0
                               ? local.main_energy_mj / off.main_energy_mj
                               : 0.0;
        if (!report.crossover_size && off.main_energy_mj < local.main_energy_mj)
            report.crossover_size = size;
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace nfcsim
