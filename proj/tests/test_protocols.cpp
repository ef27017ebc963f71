#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "nfcsim/protocols.hpp"

using namespace nfcsim;

namespace {

DeviceProfile profile(const char* name) { return DeviceProfile{name, 1.0, 2000, 800, 300}; }

struct Pair {
    Simulation sim;
    DeviceId a;
    DeviceId b;

    explicit Pair(bool stochastic = false, std::uint64_t seed = 1)
        : sim({}, {}, stochastic, seed),
          a(sim.add_device(profile("alpha"))),
          b(sim.add_device(profile("beta"))) {}
};

}  // namespace

TEST_CASE("two-tap baseline moves one message each way") {
    Pair p;
    const auto r = run_two_tap(p.sim, ProtocolConfig{}, p.a, p.b, 1, 2048);
    REQUIRE(r.total_time_ms == Catch::Approx(2658.0));
    REQUIRE(r.latency_ms == Catch::Approx(1329.0));
    REQUIRE(r.switch_count == 0);
    REQUIRE(r.bandwidth_kbps == Catch::Approx(16384.0 / 2658.0));
    REQUIRE(r.success());
}

TEST_CASE("two-tap cannot chain round trips") {
    Pair p;
    REQUIRE_THROWS_AS(run_two_tap(p.sim, ProtocolConfig{}, p.a, p.b, 2, 2048),
                      UnsupportedByVariant);
}

TEST_CASE("one-tap HCE switches exactly once and cannot switch back") {
    Pair p;
    const auto r = run_hce_one_tap(p.sim, ProtocolConfig{}, p.a, p.b, 1, 2048);
    // tap 1000 + push 329 + settle 150 + detect 10 + pull 329
    REQUIRE(r.total_time_ms == Catch::Approx(1818.0));
    REQUIRE(r.latency_ms == Catch::Approx(489.0));
    REQUIRE(r.switch_count == 1);
    REQUIRE_THROWS_AS(run_hce_one_tap(p.sim, ProtocolConfig{}, p.a, p.b, 2, 2048),
                      UnsupportedByVariant);
}

TEST_CASE("switched transfers sustain arbitrarily many round trips") {
    struct Expect {
        int n;
        double de_ms;
        double ed_ms;
    };
    // 2n exchanges of 329ms plus 2n-1 gaps: 710ms after a disable-first
    // switch, 260ms after an enable-first switch.
    const std::vector<Expect> table = {
        {1, 1368.0, 918.0},
        {2, 3446.0, 2096.0},
        {10, 20070.0, 11520.0},
        {50, 103190.0, 58640.0},
    };
    for (const auto& e : table) {
        Pair de;
        const auto rd = run_disabling_enabling(de.sim, ProtocolConfig{}, de.a, de.b, e.n, 2048);
        REQUIRE(rd.total_time_ms == Catch::Approx(e.de_ms));
        REQUIRE(rd.latency_ms == Catch::Approx(1039.0));
        REQUIRE(rd.switch_count == 2 * e.n - 1);
        REQUIRE(rd.success());

        Pair ed;
        const auto re = run_enabling_disabling(ed.sim, ProtocolConfig{}, ed.a, ed.b, e.n, 2048);
        REQUIRE(re.total_time_ms == Catch::Approx(e.ed_ms));
        REQUIRE(re.latency_ms == Catch::Approx(589.0));
        REQUIRE(re.switch_count == 2 * e.n - 1);
        REQUIRE(re.success());

        // closed form: total = 2n*apdu + (2n-1)*gap
        REQUIRE(rd.total_time_ms == Catch::Approx(t_round_trip(e.n, 329.0, 710.0)));
        REQUIRE(re.total_time_ms == Catch::Approx(t_round_trip(e.n, 329.0, 260.0)));
    }
}

TEST_CASE("the echoed payload survives every round trip") {
    Pair p;
    run_enabling_disabling(p.sim, ProtocolConfig{}, p.a, p.b, 3, 512);
    // after an even number of exchanges the message is back in a's outbox copy
    const Bytes expect = detail::pattern_payload(512);
    REQUIRE(p.sim.dev(p.a).storage.get_message_received(0) == expect);
    REQUIRE(p.sim.dev(p.b).storage.get_message_received(0) == expect);
}

TEST_CASE("enable-first switching arms the new reader before the old one is gone") {
    Pair p;
    run_enabling_disabling(p.sim, ProtocolConfig{}, p.a, p.b, 4, 2048);
    // Per switch: the answering side arms its reader after response_sent,
    // strictly before the old reader finishes falling back to card emulation,
    // and the next session only establishes after that.
    Micros last_response_sent = -1;
    Micros last_enabled = -1;
    int switches_seen = 0;
    for (const auto& e : p.sim.trace().events()) {
        if (e.kind == "response_sent") last_response_sent = e.at;
        if (e.kind == "reader_enabled") {
            REQUIRE(last_response_sent >= 0);
            REQUIRE(e.at > last_response_sent);
            last_enabled = e.at;
        }
        if (e.kind == "reader_disabled") {
            REQUIRE(last_enabled >= 0);
            REQUIRE(e.at > last_enabled);
            ++switches_seen;
            last_enabled = -1;
        }
    }
    REQUIRE(switches_seen == 7);
}

TEST_CASE("stochastic switching fails at the modeled rate") {
    const ReadinessModel model = fit_readiness_model(builtin_success_tables());
    ProtocolConfig cfg;  // ED at t1=310ms, t2=100ms: run success is 0.85
    const int experiments = 200;
    int ok = 0;
    for (int i = 0; i < experiments; ++i) {
        Pair p(true, 42);
        p.sim.trace().enabled = false;
        p.sim.record_power = false;
        Rng rng(42, "readiness", static_cast<std::uint64_t>(i));
        const auto r = run_enabling_disabling(p.sim, cfg, p.a, p.b, 50, 2048, model, &rng);
        if (r.success()) ++ok;
    }
    const double rate = static_cast<double>(ok) / experiments;
    REQUIRE(rate > 0.75);
    REQUIRE(rate < 0.93);
}

TEST_CASE("a failed switch reports where the run died") {
    const ReadinessModel model = fit_readiness_model(builtin_success_tables());
    ProtocolConfig cfg;
    cfg.t1 = from_ms(250);  // calibrated success zero: every switch fails
    Pair p(true, 7);
    Rng rng(7, "readiness");
    const auto r = run_enabling_disabling(p.sim, cfg, p.a, p.b, 2, 2048, model, &rng);
    REQUIRE_FALSE(r.success());
    REQUIRE(r.failed_switch == 1);
    REQUIRE(r.switch_count == 0);
    REQUIRE(r.total_time_ms == Catch::Approx(329.0));  // one exchange, then death
    REQUIRE(r.latency_ms == 0.0);
    REQUIRE(r.bandwidth_kbps == 0.0);
    bool traced = false;
    for (const auto& e : p.sim.trace().events())
        if (e.kind == "switch_failed") traced = true;
    REQUIRE(traced);
}

TEST_CASE("stochastic runs demand a switch rng") {
    const ReadinessModel model = fit_readiness_model(builtin_success_tables());
    Pair p(true, 1);
    REQUIRE_THROWS_AS(
        run_enabling_disabling(p.sim, ProtocolConfig{}, p.a, p.b, 1, 2048, model, nullptr),
        std::invalid_argument);
}

TEST_CASE("one-way chunked transfer reassembles the original message") {
    Pair p;
    p.sim.set_role(p.a, Role::CardReader);
    p.sim.set_role(p.b, Role::EmulatedCard);
    const SessionId sid = p.sim.establish_connection(p.a, p.b);

    Rng rng(99);
    Bytes message(5000);
    for (auto& x : message) x = rng.byte();

    const auto r = transfer_message(p.sim, sid, message);
    REQUIRE(r.switch_count == 0);
    REQUIRE(r.n_round_trips == 0);
    REQUIRE(r.latency_ms == Catch::Approx(r.total_time_ms));
    REQUIRE(collect_received(p.sim.dev(p.a).storage, 3) == message);

    int established = 0;
    for (const auto& e : p.sim.trace().events())
        if (e.kind == "connection_established") ++established;
    REQUIRE(established == 1);
}

TEST_CASE("a corrupt status word aborts the transfer") {
    Pair p;
    p.sim.set_role(p.a, Role::CardReader);
    p.sim.set_role(p.b, Role::EmulatedCard);
    const SessionId sid = p.sim.establish_connection(p.a, p.b);
    p.sim.dev(p.b).apdu_handler = [](const ApduCommand&) {
        return ApduResponse({}, kStatusNotFound);
    };
    REQUIRE_THROWS_AS(read_chunk(p.sim, sid, 0), CorruptResponse);
}

TEST_CASE("oversized chunks are rejected up front") {
    Pair p;
    REQUIRE_THROWS_AS(
        run_enabling_disabling(p.sim, ProtocolConfig{}, p.a, p.b, 1, 2049),
        ChunkTooLarge);
}
