#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nfcsim/offload.hpp"
#include "nfcsim/protocols.hpp"
#include "nfcsim/readiness.hpp"

namespace nfcsim {

struct ExperimentConfig {
    int round_trips = 50;
    std::size_t chunk_bytes = kMaxChunkBytes;
    std::vector<std::size_t> sizes_bytes = {2048, 4096, 8192, 16384};  // comparison sweep
    std::vector<int> offload_sizes = {9, 10, 11, 12, 13, 14, 15};
};

struct WorkloadConfig {
    WorkloadKind kind = WorkloadKind::NQueens;
    int n = 11;
    int key_bits = 2048;
    std::uint64_t keygen_seed = 1;
    Bytes plaintext = {'h', 'e', 'l', 'l', 'o'};
    Micros base_cost_override = 0;
    double offloadee_speed_factor = 0.0;  // 0 keeps the device profile's factor
};

struct Scenario {
    std::string id;
    std::uint64_t seed = 1;
    int repeats = 1;
    bool stochastic = false;
    DeviceProfile main_device{"main", 1.0, 2000.0, 800.0, 300.0};
    DeviceProfile offloadee_device{"offloadee", 2.5, 2000.0, 800.0, 300.0};
    ProtocolConfig protocol;
    TimingModel timing;
    LinkConfig link;
    ExperimentConfig experiment;
    WorkloadConfig workload;
};

namespace scenario_detail {

using nlohmann::json;

inline Micros ms_field(const json& j, const char* key, Micros fallback) {
    if (!j.contains(key)) return fallback;
    const double ms = j.at(key).get<double>();
    return static_cast<Micros>(std::llround(ms * 1000.0));
}

template <typename T>
inline T plain_field(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

inline DeviceProfile device_from_json(const json& j, DeviceProfile base) {
    base.name = plain_field<std::string>(j, "name", base.name);
    base.speed_factor = plain_field<double>(j, "speed_factor", base.speed_factor);
    base.power_compute_mw = plain_field<double>(j, "power_compute_mw", base.power_compute_mw);
    base.power_nfc_mw = plain_field<double>(j, "power_nfc_mw", base.power_nfc_mw);
    base.power_idle_mw = plain_field<double>(j, "power_idle_mw", base.power_idle_mw);
    base.validate();
    return base;
}

}  // namespace scenario_detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
    using scenario_detail::ms_field;
    using scenario_detail::plain_field;
    try {
        if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
            throw ConfigParse("scenario schema_version must be 1");
        Scenario s;
        s.id = plain_field<std::string>(j, "id", "");
        if (s.id.empty()) throw ConfigParse("scenario needs a non-empty id");
        s.seed = plain_field<std::uint64_t>(j, "seed", 1);
        s.repeats = plain_field<int>(j, "repeats", 1);
        if (s.repeats < 1) throw ConfigParse("repeats must be at least 1");
        const std::string mode = plain_field<std::string>(j, "mode", "deterministic");
        if (mode == "stochastic")
            s.stochastic = true;
        else if (mode == "deterministic")
            s.stochastic = false;
        else
            throw ConfigParse("mode must be deterministic or stochastic");

        if (j.contains("devices")) {
            const auto& devs = j.at("devices");
            if (!devs.is_array() || devs.size() != 2)
                throw ConfigParse("devices must be an array of exactly two profiles");
            s.main_device = scenario_detail::device_from_json(devs[0], s.main_device);
            s.offloadee_device =
                scenario_detail::device_from_json(devs[1], s.offloadee_device);
        }

        if (j.contains("protocol")) {
            const auto& p = j.at("protocol");
            s.protocol.variant = variant_from_name(
                plain_field<std::string>(p, "variant", variant_name(s.protocol.variant)));
            s.protocol.t = ms_field(p, "t_ms", s.protocol.t);
            s.protocol.t1 = ms_field(p, "t1_ms", s.protocol.t1);
            s.protocol.t2 = ms_field(p, "t2_ms", s.protocol.t2);
            s.protocol.tap_latency = ms_field(p, "tap_latency_ms", s.protocol.tap_latency);
            if (s.protocol.t < 0 || s.protocol.t1 < 0 || s.protocol.t2 < 0 ||
                s.protocol.tap_latency < 0)
                throw ConfigParse("protocol delays must be non-negative");
        }

        if (j.contains("timing")) {
            const auto& t = j.at("timing");
            s.timing.apdu_overhead = ms_field(t, "apdu_overhead_ms", s.timing.apdu_overhead);
            s.timing.apdu_bulk_per_chunk =
                ms_field(t, "apdu_bulk_per_chunk_ms", s.timing.apdu_bulk_per_chunk);
            s.timing.command_leg = ms_field(t, "command_leg_ms", s.timing.command_leg);
            s.timing.jitter = ms_field(t, "jitter_ms", s.timing.jitter);
        }

        if (j.contains("link")) {
            const auto& l = j.at("link");
            s.link.detection = ms_field(l, "detection_ms", s.link.detection);
            s.link.switch_settle = ms_field(l, "switch_settle_ms", s.link.switch_settle);
            s.link.deactivation = ms_field(l, "deactivation_ms", s.link.deactivation);
        }

        if (j.contains("experiment")) {
            const auto& e = j.at("experiment");
            s.experiment.round_trips = plain_field<int>(e, "round_trips", s.experiment.round_trips);
            if (s.experiment.round_trips < 1)
                throw ConfigParse("round_trips must be at least 1");
            s.experiment.chunk_bytes = plain_field<std::size_t>(e, "chunk_bytes",
                                                                s.experiment.chunk_bytes);
            if (s.experiment.chunk_bytes > kMaxChunkBytes)
                throw ConfigParse("chunk_bytes exceeds " + std::to_string(kMaxChunkBytes));
            if (e.contains("sizes_bytes"))
                s.experiment.sizes_bytes =
                    e.at("sizes_bytes").get<std::vector<std::size_t>>();
            if (e.contains("offload_sizes"))
                s.experiment.offload_sizes = e.at("offload_sizes").get<std::vector<int>>();
        }

        if (j.contains("workload")) {
            const auto& w = j.at("workload");
            s.workload.kind = workload_from_name(
                plain_field<std::string>(w, "name", workload_name(s.workload.kind)));
            s.workload.n = plain_field<int>(w, "n", s.workload.n);
            s.workload.key_bits = plain_field<int>(w, "key_bits", s.workload.key_bits);
            s.workload.keygen_seed =
                plain_field<std::uint64_t>(w, "keygen_seed", s.workload.keygen_seed);
            if (w.contains("plaintext")) {
                const std::string text = w.at("plaintext").get<std::string>();
                s.workload.plaintext.assign(text.begin(), text.end());
            }
            s.workload.base_cost_override =
                ms_field(w, "base_cost_ms", s.workload.base_cost_override);
            s.workload.offloadee_speed_factor = plain_field<double>(
                w, "offloadee_speed_factor", s.workload.offloadee_speed_factor);
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParse(std::string("scenario: ") + e.what());
    }
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigParse("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParse(std::string("scenario json: ") + e.what());
    }
    return scenario_from_json(j);
}

inline SuccessTables tables_from_json(const nlohmann::json& j) {
    using scenario_detail::plain_field;
    try {
        if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
            throw ConfigParse("tables schema_version must be 1");
        SuccessTables t;
        t.round_trips = plain_field<int>(j, "round_trips", 50);
        auto rows_of = [](const nlohmann::json& arr) {
            std::vector<SuccessTables::Row> rows;
            for (const auto& r : arr) {
                SuccessTables::Row row;
                row.delay = static_cast<Micros>(
                    std::llround(r.at("delay_ms").get<double>() * 1000.0));
                row.rate = r.at("success_rate").get<double>();
                rows.push_back(row);
            }
            return rows;
        };
        if (j.contains("reader_enable_delay"))
            t.reader_enable = rows_of(j.at("reader_enable_delay").at("rows"));
        if (j.contains("enable_stage")) {
            t.enable_stage = rows_of(j.at("enable_stage").at("rows"));
            t.held_safe_t2 = static_cast<Micros>(std::llround(
                j.at("enable_stage").value("held_t2_ms", 1000.0) * 1000.0));
        }
        if (j.contains("disable_stage")) {
            t.disable_stage = rows_of(j.at("disable_stage").at("rows"));
            t.held_t1 = static_cast<Micros>(std::llround(
                j.at("disable_stage").value("held_t1_ms", 310.0) * 1000.0));
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParse(std::string("tables: ") + e.what());
    }
}

inline SuccessTables load_tables(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigParse("cannot open tables file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigParse(std::string("tables json: ") + e.what());
    }
    return tables_from_json(j);
}

// ---- report rows ----

struct ReportRow {
    std::string scenario_id;
    std::string metric;
    double size = 0.0;
    double value = 0.0;
    bool has_stddev = false;
    double stddev = 0.0;
};

namespace scenario_detail {

inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace scenario_detail

inline std::string to_csv(const std::vector<ReportRow>& rows) {
    std::string out = "scenario_id,metric,size,value,stddev\n";
    for (const auto& r : rows) {
        out += r.scenario_id;
        out += ',';
        out += r.metric;
        out += ',';
        out += scenario_detail::fmt_num(r.size);
        out += ',';
        out += scenario_detail::fmt_num(r.value);
        out += ',';
        if (r.has_stddev) out += scenario_detail::fmt_num(r.stddev);
        out += '\n';
    }
    return out;
}

inline std::string to_json(const std::vector<ReportRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json o;
        o["scenario_id"] = r.scenario_id;
        o["metric"] = r.metric;
        o["size"] = r.size;
        o["value"] = r.value;
        if (r.has_stddev) o["stddev"] = r.stddev;
        arr.push_back(o);
    }
    return arr.dump(2) + "\n";
}

// ---- runners ----

// Called after each repeat with the finished simulation and its report;
// lets the CLI stream summaries or full traces without the runner knowing.
using RunObserver = std::function<void(int, const Simulation&, const TransferReport&)>;

namespace scenario_detail {

inline void append_stat(std::vector<ReportRow>& rows, const std::string& id,
                        const std::string& metric, double size,
                        const std::vector<double>& samples, bool want_stddev) {
    if (samples.empty()) return;
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(samples.size());
    ReportRow row{id, metric, size, mean, false, 0.0};
    if (want_stddev) {
        double acc = 0.0;
        for (double v : samples) acc += (v - mean) * (v - mean);
        row.stddev = samples.size() > 1
                         ? std::sqrt(acc / static_cast<double>(samples.size() - 1))
                         : 0.0;
        row.has_stddev = true;
    }
    rows.push_back(row);
}

inline std::uint64_t repeat_seed(std::uint64_t seed, int repeat) {
    return Rng(seed, "repeat", static_cast<std::uint64_t>(repeat)).next();
}

}  // namespace scenario_detail

// Repeated round-trip experiments under the scenario's protocol variant.
inline std::vector<ReportRow> run_simulate(const Scenario& sc,
                                           const RunObserver& observer = {}) {
    const ReadinessModel model = fit_readiness_model(builtin_success_tables());
    std::vector<double> totals, latencies, bandwidths, gaps, switches;
    int successes = 0;

    for (int i = 0; i < sc.repeats; ++i) {
        const std::uint64_t rep_seed = scenario_detail::repeat_seed(sc.seed, i);
        Simulation sim(sc.timing, sc.link, sc.stochastic, rep_seed);
        const DeviceId a = sim.add_device(sc.main_device);
        const DeviceId b = sim.add_device(sc.offloadee_device);
        Rng switch_rng(rep_seed, "readiness");
        const TransferReport r =
            run_protocol(sim, sc.protocol, a, b, sc.experiment.round_trips,
                         sc.experiment.chunk_bytes, model, &switch_rng);
        if (observer) observer(i, sim, r);
        if (r.success()) {
            ++successes;
            totals.push_back(r.total_time_ms);
            latencies.push_back(r.latency_ms);
            bandwidths.push_back(r.bandwidth_kbps);
            gaps.push_back(r.latency_ms -
                           to_ms(sc.timing.t_apdu(sc.experiment.chunk_bytes)));
            switches.push_back(static_cast<double>(r.switch_count));
        }
    }

    std::vector<ReportRow> rows;
    const double size = static_cast<double>(sc.experiment.chunk_bytes);
    const bool want_sd = sc.repeats > 1;
    rows.push_back({sc.id, "success_rate", size,
                    static_cast<double>(successes) / static_cast<double>(sc.repeats),
                    false, 0.0});
    scenario_detail::append_stat(rows, sc.id, "total_time_ms", size, totals, want_sd);
    scenario_detail::append_stat(rows, sc.id, "latency_ms", size, latencies, want_sd);
    scenario_detail::append_stat(rows, sc.id, "bandwidth_kbps", size, bandwidths, want_sd);
    scenario_detail::append_stat(rows, sc.id, "t_switching_avg_ms", size, gaps, want_sd);
    scenario_detail::append_stat(rows, sc.id, "switch_count", size, switches, want_sd);
    return rows;
}

// Deterministic head-to-head of the two switching protocols over a size
// sweep. Messages are moved in full chunks: a size of c*2048 bytes becomes
// c round trips.
inline std::vector<ReportRow> run_compare_protocols(const Scenario& sc) {
    std::vector<ReportRow> rows;
    for (std::size_t size : sc.experiment.sizes_bytes) {
        const int n = static_cast<int>((size + kMaxChunkBytes - 1) / kMaxChunkBytes);
        const std::size_t chunk = std::min(size, kMaxChunkBytes);
        TransferReport rep[2];
        for (int v = 0; v < 2; ++v) {
            Simulation sim(sc.timing, sc.link, false, sc.seed);
            const DeviceId a = sim.add_device(sc.main_device);
            const DeviceId b = sim.add_device(sc.offloadee_device);
            ProtocolConfig cfg = sc.protocol;
            cfg.variant = v == 0 ? Variant::DisablingEnabling : Variant::EnablingDisabling;
            rep[v] = run_protocol(sim, cfg, a, b, n, chunk);
        }
        const double s = static_cast<double>(size);
        const TransferReport& de = rep[0];
        const TransferReport& ed = rep[1];
        rows.push_back({sc.id, "de_total_time_ms", s, de.total_time_ms, false, 0.0});
        rows.push_back({sc.id, "ed_total_time_ms", s, ed.total_time_ms, false, 0.0});
        rows.push_back({sc.id, "de_latency_ms", s, de.latency_ms, false, 0.0});
        rows.push_back({sc.id, "ed_latency_ms", s, ed.latency_ms, false, 0.0});
        rows.push_back({sc.id, "de_bandwidth_kbps", s, de.bandwidth_kbps, false, 0.0});
        rows.push_back({sc.id, "ed_bandwidth_kbps", s, ed.bandwidth_kbps, false, 0.0});
        const double apdu_ms = to_ms(sc.timing.t_apdu(chunk));
        const double de_gap = t_switching_avg(de.total_time_ms, n, apdu_ms);
        const double ed_gap = t_switching_avg(ed.total_time_ms, n, apdu_ms);
        rows.push_back({sc.id, "de_t_switching_avg_ms", s, de_gap, false, 0.0});
        rows.push_back({sc.id, "ed_t_switching_avg_ms", s, ed_gap, false, 0.0});
        rows.push_back({sc.id, "latency_ratio", s, ed.latency_ms / de.latency_ms, false, 0.0});
        rows.push_back(
            {sc.id, "bandwidth_ratio", s, ed.bandwidth_kbps / de.bandwidth_kbps, false, 0.0});
        rows.push_back({sc.id, "t_switching_ratio", s, ed_gap / de_gap, false, 0.0});
    }
    return rows;
}

// Fits the readiness model from success tables and reports, per stage, the
// smallest calibrated delay that clears the threshold, plus the fitted
// per-switch curves.
inline std::vector<ReportRow> run_calibrate(const SuccessTables& tables, double threshold,
                                            std::vector<std::string>* warnings = nullptr) {
    const ReadinessModel model = fit_readiness_model(tables, warnings);
    const CalibrationRecommendation rec = recommend_delays(model, tables, threshold);
    std::vector<ReportRow> rows;
    const std::string id = "calibration";
    rows.push_back({id, "recommended_t_ms", 0.0, to_ms(rec.t), false, 0.0});
    rows.push_back({id, "recommended_t1_ms", 0.0, to_ms(rec.t1), false, 0.0});
    rows.push_back({id, "recommended_t2_ms", 0.0, to_ms(rec.t2), false, 0.0});
    rows.push_back({id, "threshold", 0.0, rec.threshold, false, 0.0});
    for (const auto& p : model.reader_enable_delay.points())
        rows.push_back({id, "per_switch_p_t", to_ms(p.delay), p.probability, false, 0.0});
    for (const auto& p : model.enable_stage.points())
        rows.push_back({id, "per_switch_p_t1", to_ms(p.delay), p.probability, false, 0.0});
    for (const auto& p : model.disable_stage.points())
        rows.push_back({id, "per_switch_p_t2", to_ms(p.delay), p.probability, false, 0.0});
    return rows;
}

// Local-versus-offloaded comparison. A board-count workload sweeps the
// configured sizes and reports the energy crossover; an RSA workload runs the
// single configured key length.
inline std::vector<ReportRow> run_offload_bench(const Scenario& sc) {
    std::vector<ReportRow> rows;
    DeviceProfile offloadee = sc.offloadee_device;
    if (sc.workload.offloadee_speed_factor > 0.0)
        offloadee.speed_factor = sc.workload.offloadee_speed_factor;

    if (sc.workload.kind == WorkloadKind::NQueens) {
        const CrossoverReport rep =
            crossover_analysis(WorkloadKind::NQueens, sc.experiment.offload_sizes,
                               sc.main_device, offloadee, sc.timing, sc.link, sc.protocol);
        for (const auto& row : rep.rows) {
            const double s = row.size;
            rows.push_back({sc.id, "local_wall_ms", s, row.local_wall_ms, false, 0.0});
            rows.push_back({sc.id, "offload_wall_ms", s, row.offload_wall_ms, false, 0.0});
            rows.push_back(
                {sc.id, "offloadee_local_wall_ms", s, row.offloadee_local_wall_ms, false, 0.0});
            rows.push_back({sc.id, "local_energy_mj", s, row.local_energy_mj, false, 0.0});
            rows.push_back(
                {sc.id, "offload_main_energy_mj", s, row.offload_main_energy_mj, false, 0.0});
            rows.push_back(
                {sc.id, "offloadee_energy_mj", s, row.offloadee_energy_mj, false, 0.0});
            rows.push_back({sc.id, "energy_ratio", s, row.energy_ratio, false, 0.0});
        }
        rows.push_back({sc.id, "crossover_n", 0.0,
                        rep.crossover_size ? static_cast<double>(*rep.crossover_size) : -1.0,
                        false, 0.0});
        return rows;
    }

    TaskSpec task = make_rsa_task(sc.workload.key_bits, sc.workload.plaintext,
                                  sc.workload.keygen_seed);
    if (sc.workload.base_cost_override > 0)
        task.base_cost_override = sc.workload.base_cost_override;
    const TaskOutcome local = execute_local(task, sc.main_device);

    Simulation sim(sc.timing, sc.link, false, sc.seed);
    const DeviceId main_id = sim.add_device(sc.main_device);
    const DeviceId off_id = sim.add_device(offloadee);
    const TaskOutcome off = offload_task(sim, task, main_id, off_id, sc.protocol);

    const double s = static_cast<double>(sc.workload.key_bits);
    rows.push_back({sc.id, "local_wall_ms", s, local.wall_time_ms, false, 0.0});
    rows.push_back({sc.id, "offload_wall_ms", s, off.wall_time_ms, false, 0.0});
    rows.push_back({sc.id, "wall_ratio", s, off.wall_time_ms / local.wall_time_ms, false, 0.0});
    rows.push_back({sc.id, "local_energy_mj", s, local.main_energy_mj, false, 0.0});
    rows.push_back({sc.id, "offload_main_energy_mj", s, off.main_energy_mj, false, 0.0});
    rows.push_back({sc.id, "offloadee_energy_mj", s, off.offloadee_energy_mj, false, 0.0});
    rows.push_back({sc.id, "energy_fraction", s, off.main_energy_mj / local.main_energy_mj,
                    false, 0.0});
    rows.push_back({sc.id, "result_bytes", s, static_cast<double>(off.result.size()), false,
                    0.0});
    return rows;
}

}  // namespace nfcsim
