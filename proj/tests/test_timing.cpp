#include <catch2/catch_amalgamated.hpp>

#include <stdexcept>

#include "nfcsim/timing.hpp"

using namespace nfcsim;

TEST_CASE("apdu exchange time is affine in the chunk size") {
    TimingModel tm;
    REQUIRE(tm.t_apdu(0) == 150000);
    REQUIRE(tm.t_apdu(2) == 150175);
    REQUIRE(tm.t_apdu(9) == 150787);
    REQUIRE(tm.t_apdu(75) == 156555);
    REQUIRE(tm.t_apdu(1024) == 239500);
    REQUIRE(tm.t_apdu(2048) == 329000);
    for (int s = 1; s <= 2048; ++s) REQUIRE(tm.t_apdu(s) >= tm.t_apdu(s - 1));
}

TEST_CASE("round trip time closed form") {
    REQUIRE(t_round_trip(1, 658.0, 300.0) == Catch::Approx(1616.0));
    REQUIRE(t_round_trip(50, 329.0, 100.0) == Catch::Approx(42800.0));
    REQUIRE_THROWS_AS(t_round_trip(0, 329.0, 100.0), std::invalid_argument);
}

TEST_CASE("average switching time inverts the round trip form") {
    REQUIRE(t_switching_avg(1616.0, 1, 658.0) == Catch::Approx(300.0));
    REQUIRE(t_switching_avg(42800.0, 50, 329.0) == Catch::Approx(100.0));
    for (int n : {1, 2, 7, 50}) {
        for (double a : {150.0, 329.0}) {
            for (double s : {10.0, 260.0, 710.0}) {
                REQUIRE(t_switching_avg(t_round_trip(n, a, s), n, a) ==
                        Catch::Approx(s));
            }
        }
    }
    // total time must exceed the pure transfer time
    REQUIRE_THROWS_AS(t_switching_avg(2 * 658.0, 1, 658.0), NonPositiveSwitchTime);
    REQUIRE_THROWS_AS(t_switching_avg(100.0, 1, 658.0), NonPositiveSwitchTime);
}

TEST_CASE("bandwidth in kilobits per second") {
    REQUIRE(bandwidth(2048, 658.0) == Catch::Approx(16384.0 / 658.0));
    REQUIRE(bandwidth(0, 100.0) == 0.0);
    REQUIRE(bandwidth(4096, 500.0) == Catch::Approx(2.0 * bandwidth(2048, 500.0)));
    REQUIRE_THROWS_AS(bandwidth(2048, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(bandwidth(2048, -1.0), std::invalid_argument);
}
