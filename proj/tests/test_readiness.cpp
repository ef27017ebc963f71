#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "nfcsim/readiness.hpp"

using namespace nfcsim;

// 99 switches per 50 round-trip run, so a run success rate r pins the
// per-switch probability at r^(1/99). Reference values below were computed
// independently with arbitrary-precision arithmetic and frozen.
TEST_CASE("per-switch probability from an end-to-end rate") {
    REQUIRE(per_switch_from_rate(0.05, 50) == Catch::Approx(0.9701933262).margin(1e-9));
    REQUIRE(per_switch_from_rate(0.40, 50) == Catch::Approx(0.9907872380).margin(1e-9));
    REQUIRE(per_switch_from_rate(0.82, 50) == Catch::Approx(0.9979974528).margin(1e-9));
    REQUIRE(per_switch_from_rate(0.95, 50) == Catch::Approx(0.9994820201).margin(1e-9));
    REQUIRE(per_switch_from_rate(0.85, 50) == Catch::Approx(0.9983597413).margin(1e-9));
    REQUIRE(per_switch_from_rate(0.0, 50) == 0.0);
    REQUIRE(per_switch_from_rate(1.0, 50) == 1.0);
    // single round trip crosses a single switch
    REQUIRE(per_switch_from_rate(0.7, 1) == Catch::Approx(0.7));
}

TEST_CASE("curve interpolates, clamps, and flags out-of-range queries") {
    const ReadinessModel m = fit_readiness_model(builtin_success_tables());
    const ReadinessCurve& c = m.reader_enable_delay;

    REQUIRE(c.at(from_ms(680)) == Catch::Approx(0.9701933262).margin(1e-9));
    REQUIRE(c.at(from_ms(690)) == Catch::Approx(0.9907872380).margin(1e-9));
    REQUIRE(c.at(from_ms(700)) == Catch::Approx(0.9979974528).margin(1e-9));
    REQUIRE(c.at(from_ms(710)) == Catch::Approx(0.9979974528).margin(1e-9));
    // linear between calibrated delays
    REQUIRE(c.at(from_ms(685)) == Catch::Approx(0.9804902821).margin(1e-9));

    bool flagged = false;
    REQUIRE(c.at(from_ms(680), &flagged) == Catch::Approx(0.9701933262).margin(1e-9));
    REQUIRE_FALSE(flagged);  // exactly on the span edge is in range
    REQUIRE(c.at(from_ms(600), &flagged) == Catch::Approx(0.9701933262).margin(1e-9));
    REQUIRE(flagged);
    flagged = false;
    REQUIRE(c.at(from_ms(10000), &flagged) == Catch::Approx(0.9979974528).margin(1e-9));
    REQUIRE(flagged);
}

TEST_CASE("an empty curve assumes success") {
    ReadinessCurve c;
    REQUIRE(c.empty());
    REQUIRE(c.at(from_ms(123)) == 1.0);
}

TEST_CASE("fit validation and monotone repair") {
    REQUIRE_THROWS_AS(
        ReadinessCurve::fit({{from_ms(100), 0.5}, {from_ms(100), 0.6}}),
        ConfigParse);
    REQUIRE_THROWS_AS(
        ReadinessCurve::fit({{from_ms(200), 0.5}, {from_ms(100), 0.6}}),
        ConfigParse);
    REQUIRE_THROWS_AS(ReadinessCurve::fit({{from_ms(100), 1.5}}), ConfigParse);

    std::vector<std::string> warnings;
    const auto c = ReadinessCurve::fit({{from_ms(100), 0.5}, {from_ms(200), 0.4}}, &warnings);
    REQUIRE(warnings.size() == 1);
    REQUIRE(warnings[0].find("NonMonotoneInput") != std::string::npos);
    REQUIRE(c.at(from_ms(200)) == Catch::Approx(0.5));  // pulled up, not down
}

TEST_CASE("two-stage fit isolates the disable stage") {
    const ReadinessModel m = fit_readiness_model(builtin_success_tables());
    // The t2 sweep observed the product of both stages at t1=310ms; dividing
    // by the enable stage leaves the disable stage alone.
    REQUIRE(m.disable_stage.at(from_ms(100)) ==
            Catch::Approx(0.9988771396).margin(1e-9));
    REQUIRE(m.disable_stage.at(from_ms(90)) == 0.0);
    // the held safe delay is appended as a known-good anchor
    const auto& pts = m.disable_stage.points();
    REQUIRE(pts.size() == 5);
    REQUIRE(pts.back().delay == from_ms(1000));
    REQUIRE(pts.back().probability == 1.0);
}

TEST_CASE("per-switch probability by protocol variant") {
    const ReadinessModel m = fit_readiness_model(builtin_success_tables());
    ProtocolConfig cfg;  // defaults: t=700ms, t1=310ms, t2=100ms

    REQUIRE(per_switch_probability(m, Variant::TwoTap, cfg) == 1.0);
    REQUIRE(per_switch_probability(m, Variant::HceOneTap, cfg) == 1.0);
    REQUIRE(per_switch_probability(m, Variant::DisablingEnabling, cfg) ==
            Catch::Approx(0.9979974528).margin(1e-9));
    // enable and disable stages multiply; at the defaults the product equals
    // the per-switch probability observed in the t2 sweep itself
    REQUIRE(per_switch_probability(m, Variant::EnablingDisabling, cfg) ==
            Catch::Approx(0.9983597413).margin(1e-9));

    bool flagged = false;
    cfg.t1 = from_ms(200);
    per_switch_probability(m, Variant::EnablingDisabling, cfg, &flagged);
    REQUIRE(flagged);
}

TEST_CASE("modeled curves never decrease with more delay") {
    const ReadinessModel m = fit_readiness_model(builtin_success_tables());
    for (const ReadinessCurve* c :
         {&m.reader_enable_delay, &m.enable_stage, &m.disable_stage}) {
        double prev = -1.0;
        for (Micros d = 0; d <= from_ms(1100); d += from_ms(5)) {
            const double p = c->at(d);
            REQUIRE(p >= prev);
            prev = p;
        }
    }
}

TEST_CASE("recommended delays clear the threshold at the smallest table entry") {
    const SuccessTables& tables = builtin_success_tables();
    const ReadinessModel m = fit_readiness_model(tables);

    const auto rec = recommend_delays(m, tables, 0.8);
    REQUIRE(rec.t == from_ms(700));
    REQUIRE(rec.t1 == from_ms(310));
    REQUIRE(rec.t2 == from_ms(100));

    // a stricter threshold that no tabulated delay reaches comes back empty
    const auto strict = recommend_delays(m, tables, 0.9);
    REQUIRE(strict.t == -1);
    REQUIRE(strict.t1 == from_ms(310));
    REQUIRE(strict.t2 == -1);

    REQUIRE_THROWS_AS(recommend_delays(m, tables, 0.0), ConfigParse);
    REQUIRE_THROWS_AS(recommend_delays(m, tables, 1.5), ConfigParse);
}
