#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "nfcsim/offload.hpp"

using namespace nfcsim;

namespace {

const DeviceProfile kMain{"main", 1.0, 2000, 800, 300};
const DeviceProfile kOffloadee{"offloadee", 2.5, 2000, 800, 300};

}  // namespace

TEST_CASE("energy integrates power over the recorded timeline") {
    // one second of full compute at 2000 mW is two joules
    REQUIRE(energy_of_trace({{0, 1000000, PowerState::Compute}}, kMain) ==
            Catch::Approx(2000.0));
    REQUIRE(energy_of_trace({}, kMain) == 0.0);

    // disjoint intervals add up; order of appearance does not matter
    const double mixed = energy_of_trace({{500000, 1000000, PowerState::Idle},
                                          {0, 500000, PowerState::NfcTransfer}},
                                         kMain);
    REQUIRE(mixed == Catch::Approx(0.5 * 800.0 + 0.5 * 300.0));

    // touching endpoints are fine, overlap is not
    REQUIRE_NOTHROW(energy_of_trace({{0, 10, PowerState::Idle}, {10, 20, PowerState::Idle}},
                                    kMain));
    REQUIRE_THROWS_AS(
        energy_of_trace({{0, 10, PowerState::Idle}, {9, 20, PowerState::Idle}}, kMain),
        OverlappingIntervals);
    REQUIRE_THROWS_AS(energy_of_trace({{10, 5, PowerState::Idle}}, kMain),
                      std::invalid_argument);
}

TEST_CASE("local execution scales with the device speed factor") {
    const TaskSpec task = make_nqueens_task(11);

    const TaskOutcome slow = execute_local(task, kMain);
    REQUIRE(slow.wall_time_ms == Catch::Approx(112.0));
    REQUIRE(slow.main_energy_mj == Catch::Approx(224.0));
    REQUIRE_FALSE(slow.offloaded);

    const TaskOutcome fast = execute_local(task, kOffloadee);
    REQUIRE(fast.wall_time_ms == Catch::Approx(44.8));
    REQUIRE(fast.main_energy_mj == Catch::Approx(89.6));

    const auto [app, count] = deserialize_nqueens_result(slow.result);
    REQUIRE(app == kAppNQueens);
    REQUIRE(count == 2680);
}

TEST_CASE("offloading returns byte-identical results to local execution") {
    for (const TaskSpec& task :
         {make_nqueens_task(9), make_rsa_task(512, Bytes{'m', 's', 'g'}, 5)}) {
        const TaskOutcome local = execute_local(task, kMain);

        Simulation sim;
        const DeviceId m = sim.add_device(kMain);
        const DeviceId o = sim.add_device(kOffloadee);
        const TaskOutcome off = offload_task(sim, task, m, o, ProtocolConfig{});
        REQUIRE(off.offloaded);
        REQUIRE(off.result == local.result);
        REQUIRE(off.result_chunks.size() == local.result_chunks.size());
    }
}

TEST_CASE("offload timeline and energy for a small task") {
    // 11-queens over the enable-first switching protocol at default delays:
    // detect 10 + request apdu 150.175 + switch gap 260 + result apdu 150.787.
    // The 44.8 ms of remote compute hides entirely inside the switch gap.
    Simulation sim;
    const DeviceId m = sim.add_device(kMain);
    const DeviceId o = sim.add_device(kOffloadee);
    const TaskOutcome off = offload_task(sim, make_nqueens_task(11), m, o, ProtocolConfig{});

    REQUIRE(off.wall_time_ms == Catch::Approx(570.962));
    // main: radio for both exchanges, idle elsewhere
    const double nfc_ms = 150.175 + 150.787;
    const double expect_main = nfc_ms * 0.8 + (570.962 - nfc_ms) * 0.3;
    REQUIRE(off.main_energy_mj == Catch::Approx(expect_main).margin(1e-6));
    // offloadee additionally computes for 44.8 ms at full draw
    const double expect_off =
        nfc_ms * 0.8 + 44.8 * 2.0 + (570.962 - nfc_ms - 44.8) * 0.3;
    REQUIRE(off.offloadee_energy_mj == Catch::Approx(expect_off).margin(1e-6));
}

TEST_CASE("compute longer than the switch delays the result pull") {
    // 14-queens needs 8.27 s on the offloadee, far beyond the 260 ms gap.
    Simulation sim;
    const DeviceId m = sim.add_device(kMain);
    const DeviceId o = sim.add_device(kOffloadee);
    const TaskOutcome off = offload_task(sim, make_nqueens_task(14), m, o, ProtocolConfig{});
    const double compute_ms = 20673.0 / 2.5;
    // request apdu ends at 160.175; compute runs from there; result pull after
    REQUIRE(off.wall_time_ms ==
            Catch::Approx(10.0 + 150.175 + compute_ms + 150.787).margin(1e-6));
}

TEST_CASE("crossover search finds where offloading starts paying off") {
    const auto report =
        crossover_analysis(WorkloadKind::NQueens, {12, 10, 11}, kMain, kOffloadee, {}, {},
                           ProtocolConfig{});
    REQUIRE(report.rows.size() == 3);
    REQUIRE(report.rows[0].size == 10);  // sorted by size
    REQUIRE(report.crossover_size.has_value());
    REQUIRE(*report.crossover_size == 12);
    for (std::size_t i = 1; i < report.rows.size(); ++i)
        REQUIRE(report.rows[i].energy_ratio > report.rows[i - 1].energy_ratio);
}

TEST_CASE("tiny problems never cross over") {
    const auto report = crossover_analysis(WorkloadKind::NQueens, {4, 5, 6}, kMain,
                                           kOffloadee, {}, {}, ProtocolConfig{});
    REQUIRE_FALSE(report.crossover_size.has_value());
    for (const auto& row : report.rows) REQUIRE(row.energy_ratio < 1.0);
}

TEST_CASE("tap based protocols can offload too") {
    for (Variant v : {Variant::TwoTap, Variant::HceOneTap}) {
        ProtocolConfig cfg;
        cfg.variant = v;
        Simulation sim;
        const DeviceId m = sim.add_device(kMain);
        const DeviceId o = sim.add_device(kOffloadee);
        const TaskSpec task = make_nqueens_task(10);
        const TaskOutcome off = offload_task(sim, task, m, o, cfg);
        REQUIRE(off.result == execute_local(task, kMain).result);
        REQUIRE(off.offloaded);
    }
}

TEST_CASE("a failed role switch loses the offloaded task") {
    ProtocolConfig cfg;
    cfg.t1 = from_ms(250);  // calibrated success zero
    const ReadinessModel model = fit_readiness_model(builtin_success_tables());
    Simulation sim({}, {}, true, 5);
    const DeviceId m = sim.add_device(kMain);
    const DeviceId o = sim.add_device(kOffloadee);
    Rng rng(5, "readiness");
    REQUIRE_THROWS_AS(offload_task(sim, make_nqueens_task(9), m, o, cfg, model, &rng),
                      TagLost);
}
