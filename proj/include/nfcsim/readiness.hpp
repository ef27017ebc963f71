#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nfcsim/errors.hpp"
#include "nfcsim/time.hpp"
#include "nfcsim/variant.hpp"

namespace nfcsim {

struct CalibrationPoint {
    Micros delay = 0;
    double probability = 0.0;
};

// Monotone piecewise-linear map from a configured delay to a per-switch
// success probability. Queries outside the calibrated span clamp to the
// nearest endpoint and raise the out-of-range flag.
class ReadinessCurve {
  public:
    ReadinessCurve() = default;

    // Points must arrive sorted by delay. Probabilities that dip below an
    // earlier point are pulled up to keep the curve monotone; when that
    // happens a NonMonotoneInput warning is appended.
    static ReadinessCurve fit(std::vector<CalibrationPoint> points,
                              std::vector<std::string>* warnings = nullptr) {
        for (std::size_t i = 1; i < points.size(); ++i) {
            if (points[i].delay <= points[i - 1].delay)
                throw ConfigParse("calibration delays must be strictly increasing");
        }
        for (auto& p : points) {
            if (p.probability < 0.0 || p.probability > 1.0)
                throw ConfigParse("probability outside [0, 1]");
        }
        bool repaired = false;
        for (std::size_t i = 1; i < points.size(); ++i) {
            if (points[i].probability < points[i - 1].probability) {
                points[i].probability = points[i - 1].probability;
                repaired = true;
            }
        }
        if (repaired && warnings)
            warnings->push_back("NonMonotoneInput: success did not increase with delay; "
                                "curve repaired upward");
        ReadinessCurve c;
        c.points_ = std::move(points);
        return c;
    }

    bool empty() const { return points_.empty(); }

    const std::vector<CalibrationPoint>& points() const { return points_; }

    // out_of_range is set (never cleared) when the query clamps.
    double at(Micros delay, bool* out_of_range = nullptr) const {
        if (points_.empty()) return 1.0;  // no calibration data: assume safe
        if (delay <= points_.front().delay) {
            if (out_of_range && delay < points_.front().delay) *out_of_range = true;
            return points_.front().probability;
        }
        if (delay >= points_.back().delay) {
            if (out_of_range && delay > points_.back().delay) *out_of_range = true;
            return points_.back().probability;
        }
        for (std::size_t i = 1; i < points_.size(); ++i) {
            if (delay <= points_[i].delay) {
                const auto& a = points_[i - 1];
                const auto& b = points_[i];
                const double f = static_cast<double>(delay - a.delay) /
                                 static_cast<double>(b.delay - a.delay);
                return a.probability + f * (b.probability - a.probability);
            }
        }
        return points_.back().probability;
    }

  private:
    std::vector<CalibrationPoint> points_;
};

// Observed end-to-end success rates of repeated round-trip experiments,
// per configured delay. Each sweep varies one delay and holds the others.
struct SuccessTables {
    struct Row {
        Micros delay = 0;
        double rate = 0.0;
    };

    std::vector<Row> reader_enable;  // disabling-enabling, sweep over t
    std::vector<Row> enable_stage;   // enabling-disabling, sweep over t1
    std::vector<Row> disable_stage;  // enabling-disabling, sweep over t2
    Micros held_safe_t2 = from_ms(1000);  // t2 while sweeping t1
    Micros held_t1 = from_ms(310);        // t1 while sweeping t2
    int round_trips = 50;
};

// Measured on a pair of handsets: 50 round trips per run, success meaning
// all of them completed.
inline const SuccessTables& builtin_success_tables() {
    static const SuccessTables t = [] {
        SuccessTables s;
        s.reader_enable = {{from_ms(680), 0.05},
                           {from_ms(690), 0.40},
                           {from_ms(700), 0.82},
                           {from_ms(710), 0.82}};
        s.enable_stage = {{from_ms(250), 0.00}, {from_ms(260), 0.00},
                          {from_ms(270), 0.30}, {from_ms(280), 0.55},
                          {from_ms(290), 0.60}, {from_ms(300), 0.65},
                          {from_ms(310), 0.95}};
        s.disable_stage = {{from_ms(50), 0.00},
                           {from_ms(70), 0.00},
                           {from_ms(90), 0.00},
                           {from_ms(100), 0.85}};
        s.held_safe_t2 = from_ms(1000);
        s.held_t1 = from_ms(310);
        s.round_trips = 50;
        return s;
    }();
    return t;
}

struct ReadinessModel {
    ReadinessCurve reader_enable_delay;  // disabling-enabling, keyed by t
    ReadinessCurve enable_stage;         // enabling-disabling, keyed by t1
    ReadinessCurve disable_stage;        // enabling-disabling, keyed by t2
    int fitted_round_trips = 50;
};

// An n round-trip run crosses 2n-1 switches; an end-to-end success rate r
// therefore pins the per-switch probability at r^(1/(2n-1)).
inline double per_switch_from_rate(double rate, int round_trips) {
    if (rate <= 0.0) return 0.0;
    const double switches = 2.0 * round_trips - 1.0;
    return std::pow(rate, 1.0 / switches);
}

// Two-stage fit. The t1 sweep ran with t2 held at a safe value, so its rates
// expose the enable stage alone: p1 = rate^(1/switches). The t2 sweep ran at
// a fixed t1, so its rates expose the product p1(t1_held) * p2(t2); dividing
// out the first stage isolates p2. The safe held value is appended to the
// disable-stage curve as a known-good anchor.
inline ReadinessModel fit_readiness_model(const SuccessTables& tables,
                                          std::vector<std::string>* warnings = nullptr) {
    if (tables.round_trips < 1) throw ConfigParse("round trips must be at least 1");
    ReadinessModel m;
    m.fitted_round_trips = tables.round_trips;

    auto to_points = [&](const std::vector<SuccessTables::Row>& rows) {
        std::vector<CalibrationPoint> pts;
        pts.reserve(rows.size());
        for (const auto& r : rows) {
            if (r.rate < 0.0 || r.rate > 1.0)
                throw ConfigParse("success rate outside [0, 1]");
            pts.push_back({r.delay, per_switch_from_rate(r.rate, tables.round_trips)});
        }
        return pts;
    };

    if (!tables.reader_enable.empty())
        m.reader_enable_delay = ReadinessCurve::fit(to_points(tables.reader_enable), warnings);

    if (!tables.enable_stage.empty())
        m.enable_stage = ReadinessCurve::fit(to_points(tables.enable_stage), warnings);

    if (!tables.disable_stage.empty()) {
        const double p1_held = m.enable_stage.at(tables.held_t1);
        std::vector<CalibrationPoint> pts;
        for (const auto& r : tables.disable_stage) {
            if (r.rate < 0.0 || r.rate > 1.0)
                throw ConfigParse("success rate outside [0, 1]");
            const double joint = per_switch_from_rate(r.rate, tables.round_trips);
            double p2 = 0.0;
            if (joint > 0.0 && p1_held <= 0.0) {
                if (warnings)
                    warnings->push_back("disable-stage sweep succeeded while the held t1 "
                                        "never did; stage probability forced to 0");
            } else if (joint > 0.0) {
                p2 = std::min(1.0, joint / p1_held);
            }
            pts.push_back({r.delay, p2});
        }
        if (tables.held_safe_t2 > (pts.empty() ? 0 : pts.back().delay))
            pts.push_back({tables.held_safe_t2, 1.0});
        m.disable_stage = ReadinessCurve::fit(std::move(pts), warnings);
    }
    return m;
}

// Probability that one role switch completes, given the configured delays.
inline double per_switch_probability(const ReadinessModel& model, Variant variant,
                                     const ProtocolConfig& cfg,
                                     bool* out_of_range = nullptr) {
    switch (variant) {
        case Variant::TwoTap:
        case Variant::HceOneTap:
            return 1.0;  // tap-driven transitions, no timing race to lose
        case Variant::DisablingEnabling:
            return model.reader_enable_delay.at(cfg.t, out_of_range);
        case Variant::EnablingDisabling:
            return model.enable_stage.at(cfg.t1, out_of_range) *
                   model.disable_stage.at(cfg.t2, out_of_range);
    }
    return 1.0;
}

struct CalibrationRecommendation {
    Micros t = 0;
    Micros t1 = 0;
    Micros t2 = 0;
    double threshold = 0.8;
};

// Smallest table delay whose modeled end-to-end rate clears the threshold.
inline CalibrationRecommendation recommend_delays(const ReadinessModel& model,
                                                  const SuccessTables& tables,
                                                  double threshold = 0.8) {
    if (threshold <= 0.0 || threshold > 1.0)
        throw ConfigParse("threshold must lie in (0, 1]");
    CalibrationRecommendation rec;
    rec.threshold = threshold;
    const double switches = 2.0 * tables.round_trips - 1.0;
    auto rate_of = [&](double per_switch) { return std::pow(per_switch, switches); };

    rec.t = -1;
    for (const auto& row : tables.reader_enable) {
        if (rate_of(model.reader_enable_delay.at(row.delay)) >= threshold) {
            rec.t = row.delay;
            break;
        }
    }
    rec.t1 = -1;
    for (const auto& row : tables.enable_stage) {
        if (rate_of(model.enable_stage.at(row.delay)) >= threshold) {
            rec.t1 = row.delay;
            break;
        }
    }
    rec.t2 = -1;
    for (const auto& row : tables.disable_stage) {
        const double joint =
            model.enable_stage.at(tables.held_t1) * model.disable_stage.at(row.delay);
        if (rate_of(joint) >= threshold) {
            rec.t2 = row.delay;
            break;
        }
    }
    return rec;
}

}  // namespace nfcsim
