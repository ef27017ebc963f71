#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nfcsim/apdu.hpp"
#include "nfcsim/clock.hpp"
#include "nfcsim/errors.hpp"
#include "nfcsim/rng.hpp"
#include "nfcsim/storage.hpp"
#include "nfcsim/time.hpp"
#include "nfcsim/timing.hpp"
#include "nfcsim/trace.hpp"

namespace nfcsim {

using DeviceId = int;
using SessionId = int;

enum class Role { Idle, EmulatedCard, CardReader, SwitchingToReader, SwitchingToCard };
enum class PowerState { Off, Idle, NfcTransfer, Compute };
enum class SessionState { Active, Lost };

inline const char* role_name(Role r) {
    switch (r) {
        case Role::Idle: return "Idle";
        case Role::EmulatedCard: return "EmulatedCard";
        case Role::CardReader: return "CardReader";
        case Role::SwitchingToReader: return "SwitchingToReader";
        case Role::SwitchingToCard: return "SwitchingToCard";
    }
    return "?";
}

struct DeviceProfile {
    std::string name;
    double speed_factor = 1.0;
    double power_compute_mw = 2000.0;
    double power_nfc_mw = 800.0;
    double power_idle_mw = 300.0;

    void validate() const {
        if (name.empty()) throw ConfigParse("device needs a name");
        if (speed_factor <= 0.0) throw ConfigParse("speed factor must be positive");
        if (power_compute_mw < 0 || power_nfc_mw < 0 || power_idle_mw < 0)
            throw ConfigParse("power draws must be non-negative");
        if (!(power_nfc_mw < power_compute_mw))
            throw ConfigParse("radio transfer must draw less than full compute");
    }

    double power_mw(PowerState s) const {
        switch (s) {
            case PowerState::Off: return 0.0;
            case PowerState::Idle: return power_idle_mw;
            case PowerState::NfcTransfer: return power_nfc_mw;
            case PowerState::Compute: return power_compute_mw;
        }
        return 0.0;
    }
};

struct PowerInterval {
    Micros begin = 0;
    Micros end = 0;
    PowerState state = PowerState::Idle;
};

struct LinkConfig {
    Micros detection = from_ms(10);      // reader polling until it sees a card
    Micros switch_settle = from_ms(150); // leaving reader mode until card emulation answers
    Micros deactivation = 0;             // lag before the card side learns the link died
};

struct Device {
    DeviceProfile profile;
    Role role = Role::Idle;
    MessageStorage storage;
    std::function<ApduResponse(const ApduCommand&)> apdu_handler;
    std::function<void(Micros)> on_deactivated;
    std::vector<PowerInterval> power;
};

struct LinkSession {
    DeviceId reader = -1;
    DeviceId card = -1;
    SessionState state = SessionState::Lost;
    bool in_flight = false;
    Micros established_at = 0;
};

struct ExchangeTimes {
    Micros started_at = 0;
    Micros command_at = 0;
    Micros response_sent_at = 0;
    Micros response_received_at = 0;
};

// Two (or more) devices joined by a half-duplex reader/card link, driven by
// one discrete event clock. All blocking operations pump the clock until the
// matching completion event fires, so callers read like straight-line code
// while every state change still happens at an exact simulated instant.
class Simulation {
  public:
    TimingModel timing;
    LinkConfig link;
    bool stochastic = false;
    bool record_power = true;

    explicit Simulation(TimingModel t = {}, LinkConfig l = {}, bool stochastic_mode = false,
                        std::uint64_t seed = 1)
        : timing(t), link(l), stochastic(stochastic_mode), seed_(seed),
          jitter_rng_(seed, "jitter") {
        if (timing.command_leg <= 0 || timing.command_leg >= timing.apdu_overhead)
            throw ConfigParse("command leg must lie strictly inside the exchange overhead");
        if (timing.jitter < 0 || link.detection < 0 || link.switch_settle < 0 ||
            link.deactivation < 0)
            throw ConfigParse("durations must be non-negative");
    }

    DeviceId add_device(DeviceProfile profile) {
        profile.validate();
        devices_.push_back(Device{std::move(profile)});
        return static_cast<DeviceId>(devices_.size() - 1);
    }

    Device& dev(DeviceId id) { return devices_.at(static_cast<std::size_t>(id)); }
    const Device& dev(DeviceId id) const { return devices_.at(static_cast<std::size_t>(id)); }

    SimClock& clock() { return clock_; }
    TraceLog& trace() { return trace_; }
    const TraceLog& trace() const { return trace_; }

    Rng substream(std::string_view name, std::uint64_t index = 0) const {
        return Rng(seed_, name, index);
    }

    // Immediate role change; used when staging a scenario, not mid-protocol.
    void set_role(DeviceId id, Role role) { dev(id).role = role; }

    // Device leaves its current mode and is a usable reader at ready_at.
    void begin_switch_to_reader(DeviceId id, Micros ready_at) {
        Device& d = dev(id);
        d.role = Role::SwitchingToReader;
        clock_.schedule(ready_at, [this, id] {
            Device& dd = dev(id);
            dd.role = Role::CardReader;
            trace_.record(clock_.now(), dd.profile.name, "reader_enabled");
        });
    }

    // Device drops reader mode; card emulation answers again at ready_at.
    void begin_switch_to_card(DeviceId id, Micros ready_at) {
        Device& d = dev(id);
        d.role = Role::SwitchingToCard;
        clock_.schedule(ready_at, [this, id] {
            Device& dd = dev(id);
            dd.role = Role::EmulatedCard;
            trace_.record(clock_.now(), dd.profile.name, "reader_disabled",
                          "card emulation ready");
        });
    }

    // Starts polling now; the field is evaluated when detection fires.
    SessionId establish_connection(DeviceId reader, DeviceId card) {
        dev(reader);
        dev(card);
        bool done = false;
        bool no_card = false;
        SessionId sid = -1;
        clock_.schedule(clock_.now() + link.detection, [&] {
            if (devices_[static_cast<std::size_t>(card)].role != Role::EmulatedCard ||
                devices_[static_cast<std::size_t>(reader)].role != Role::CardReader) {
                no_card = true;
            } else {
                sessions_.push_back(LinkSession{reader, card, SessionState::Active, false,
                                                clock_.now()});
                sid = static_cast<SessionId>(sessions_.size() - 1);
                trace_.record(clock_.now(), devices_[static_cast<std::size_t>(reader)].profile.name,
                              "connection_established",
                              "reader=" + devices_[static_cast<std::size_t>(reader)].profile.name +
                                  " card=" + devices_[static_cast<std::size_t>(card)].profile.name);
            }
            done = true;
        });
        pump(done);
        if (no_card)
            throw NoCardInField("no emulated card facing " +
                                dev(reader).profile.name + " when detection fired");
        return sid;
    }

    const LinkSession& session(SessionId sid) const {
        return sessions_.at(static_cast<std::size_t>(sid));
    }

    bool session_active(SessionId sid) const {
        return session(sid).state == SessionState::Active;
    }

    // Full command/response cycle. Blocks (in simulated time) until the
    // response lands or the link dies under it.
    ApduResponse exchange_apdu(SessionId sid, const ApduCommand& cmd) {
        LinkSession& s = sessions_.at(static_cast<std::size_t>(sid));
        if (s.state != SessionState::Active)
            throw TagLost("exchange on a session that is already lost");
        if (s.in_flight) throw Busy("a command is already in flight");
        cmd.validate();
        Device& rd = devices_[static_cast<std::size_t>(s.reader)];
        Device& cd = devices_[static_cast<std::size_t>(s.card)];
        if (rd.role != Role::CardReader || cd.role != Role::EmulatedCard)
            throw TagLost("link roles no longer held");

        s.in_flight = true;
        const Micros t0 = clock_.now();
        ex_ = ExchangeTimes{t0, t0 + timing.command_leg, 0, 0};

        enum class St { AwaitCommand, AwaitResponse, Done, Aborted };
        St st = St::AwaitCommand;
        ApduResponse resp;

        trace_.record(t0, rd.profile.name, "command_sent",
                      "aid=" + cmd.aid + " chunk=" + std::to_string(decode_aid(cmd.aid)));

        clock_.schedule(ex_.command_at, [&] {
            if (s.state != SessionState::Active) {
                st = St::Aborted;
                return;
            }
            trace_.record(clock_.now(), cd.profile.name, "command_received", "aid=" + cmd.aid);
            ApduResponse out;
            if (cd.apdu_handler) {
                try {
                    out = cd.apdu_handler(cmd);
                } catch (const SimError&) {
                    out = ApduResponse({}, kStatusNotFound);
                }
            } else {
                out = ApduResponse({}, kStatusNotFound);
            }
            ex_.response_sent_at = clock_.now();
            trace_.record(clock_.now(), cd.profile.name, "response_sent",
                          "bytes=" + std::to_string(out.payload.size()) + " sw=" + sw_hex(out));
            Micros dur = timing.t_apdu(out.payload.size());
            if (stochastic && timing.jitter > 0) dur += jitter_rng_.uniform(0, timing.jitter);
            const Micros resp_at = t0 + std::max<Micros>(dur, timing.command_leg + 1);
            clock_.schedule(resp_at, [&, out] {
                if (s.state != SessionState::Active) {
                    st = St::Aborted;
                    return;
                }
                resp = out;
                ex_.response_received_at = clock_.now();
                trace_.record(clock_.now(), rd.profile.name, "response_received",
                              "bytes=" + std::to_string(out.payload.size()) + " sw=" + sw_hex(out));
                st = St::Done;
            });
            st = St::AwaitResponse;
        });

        while (st == St::AwaitCommand || st == St::AwaitResponse) {
            if (!clock_.step()) throw std::logic_error("clock stalled mid exchange");
        }
        s.in_flight = false;

        add_power(s.reader, PowerState::NfcTransfer, t0, clock_.now());
        add_power(s.card, PowerState::NfcTransfer, t0, clock_.now());
        if (st == St::Aborted) throw TagLost("link lost mid exchange");
        return resp;
    }

    // Reader side drops the field. The card side observes the loss after the
    // configured deactivation lag.
    void break_connection(SessionId sid) {
        LinkSession& s = sessions_.at(static_cast<std::size_t>(sid));
        if (s.state == SessionState::Lost) throw AlreadyLost("session already lost");
        s.state = SessionState::Lost;
        trace_.record(clock_.now(), devices_[static_cast<std::size_t>(s.reader)].profile.name,
                      "connection_lost", "by reader");
        const DeviceId card = s.card;
        clock_.schedule(clock_.now() + link.deactivation, [this, card] {
            Device& cd = devices_[static_cast<std::size_t>(card)];
            trace_.record(clock_.now(), cd.profile.name, "deactivated", "field dropped");
            if (cd.on_deactivated) cd.on_deactivated(clock_.now());
        });
    }

    const ExchangeTimes& last_exchange() const { return ex_; }

    void add_power(DeviceId id, PowerState state, Micros begin, Micros end) {
        if (!record_power || end <= begin) return;
        dev(id).power.push_back(PowerInterval{begin, end, state});
    }

    // Pads every gap in [begin, end] not covered by recorded activity with
    // idle time, so the power timeline accounts for the whole window.
    void fill_idle(DeviceId id, Micros begin, Micros end) {
        if (!record_power) return;
        Device& d = dev(id);
        std::vector<PowerInterval> sorted = d.power;
        std::sort(sorted.begin(), sorted.end(),
                  [](const PowerInterval& a, const PowerInterval& b) {
                      return a.begin < b.begin;
                  });
        Micros cursor = begin;
        for (const auto& iv : sorted) {
            if (iv.begin > cursor)
                d.power.push_back(PowerInterval{cursor, iv.begin, PowerState::Idle});
            cursor = std::max(cursor, iv.end);
        }
        if (cursor < end) d.power.push_back(PowerInterval{cursor, end, PowerState::Idle});
    }

  private:
    void pump(bool& done) {
        while (!done) {
            if (!clock_.step()) throw std::logic_error("clock stalled");
        }
    }

    static std::string sw_hex(const ApduResponse& r) {
        static const char* digits = "0123456789abcdef";
        std::string s(4, '0');
        s[0] = digits[r.status[0] >> 4];
        s[1] = digits[r.status[0] & 0xf];
        s[2] = digits[r.status[1] >> 4];
        s[3] = digits[r.status[1] & 0xf];
        return s;
    }

    SimClock clock_;
    TraceLog trace_;
    std::vector<Device> devices_;
    std::vector<LinkSession> sessions_;
    ExchangeTimes ex_;
    std::uint64_t seed_;
    Rng jitter_rng_;
};

// Serves get_message_to_send(chunk index) over the link: the standard card
// side behaviour during chunked transfers.
inline std::function<ApduResponse(const ApduCommand&)> storage_responder(Simulation& sim,
                                                                         DeviceId id) {
    return [&sim, id](const ApduCommand& cmd) {
        const ChunkIndex idx = decode_aid(cmd.aid);
        Device& d = sim.dev(id);
        if (!d.storage.has_message_to_send(idx)) return ApduResponse({}, kStatusNotFound);
        return ApduResponse(d.storage.get_message_to_send(idx));
    };
}

// Reads one chunk from the card of an active session into the reader's
// inbox. Verifies the status word before accepting the payload.
inline ApduResponse read_chunk(Simulation& sim, SessionId sid, ChunkIndex index,
                               const std::string& aid_base = kDefaultAidBase) {
    const DeviceId reader = sim.session(sid).reader;
    ApduResponse resp = sim.exchange_apdu(sid, ApduCommand(encode_aid(aid_base, index)));
    if (!resp.ok())
        throw CorruptResponse("chunk " + std::to_string(index) + " answered with sw " +
                              std::to_string(resp.status[0]) + "," +
                              std::to_string(resp.status[1]));
    sim.dev(reader).storage.set_message_received(resp.payload, index);
    return resp;
}

}  // namespace nfcsim
