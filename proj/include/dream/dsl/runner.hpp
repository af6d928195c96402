#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dream/dsl/scenarios.hpp"

namespace dream::dsl {

/// One CSV row: metric value after `step` interactions (0 is the initial state).
struct MetricRow {
    std::string scenario;
    std::size_t step = 0;
    std::string metric;
    double value = 0;
};

struct RunResult {
    std::vector<MetricRow> rows;
    std::vector<StepRecord> steps;
    bool quiescent = false;
    double elapsed_ms = 0;  // engine stepping only
};

/// Number of distinct `dir` values among instances that have one.
inline std::size_t flock_count(const Configuration& cfg) {
    std::set<std::string> dirs;
    for (const auto& ms : cfg.motifs)
        for (const auto& [id, inst] : ms.instances) {
            auto it = inst.valuation.find("dir");
            if (it != inst.valuation.end()) dirs.insert(to_string(it->second));
        }
    return dirs.size();
}

inline double metric_value(const std::string& name, const Configuration& cfg, const StepRecord* rec, double step_ms) {
    if (name == "flocks") return static_cast<double>(flock_count(cfg));
    if (name == "instances") return static_cast<double>(cfg.instance_count());
    if (name == "interaction_size") return rec ? static_cast<double>(rec->interaction.size()) : 0.0;
    if (name == "ops") return rec ? static_cast<double>(rec->op_count) : 0.0;
    if (name == "runtime_ms") return step_ms;
    if (name.rfind("sum(", 0) == 0) {
        const std::string inner = name.substr(4, name.size() - 5);
        const auto dot = inner.find('.');
        const std::string type = inner.substr(0, dot), var = inner.substr(dot + 1);
        double total = 0;
        for (const auto& ms : cfg.motifs)
            for (const auto& [id, inst] : ms.instances)
                if (inst.type->name == type) total += inst.valuation.at(var).as_real();
        return total;
    }
    throw ModelError("unknown metric " + name);
}

/// Runs `sc.run.steps` steps with the scenario's seed, recording every
/// metric of the run block after each step and for the initial state.
inline RunResult run_scenario(const Scenario& sc, EngineOptions opts = {}) {
    System sys = sc.system;
    sys.seed = sc.run.seed;
    Engine engine(std::move(sys), opts);
    RunResult out;
    auto record = [&](std::size_t step, const StepRecord* rec, double ms) {
        for (const auto& m : sc.run.metrics)
            out.rows.push_back({sc.name, step, m, metric_value(m, engine.config(), rec, ms)});
    };
    record(0, nullptr, 0.0);
    for (std::size_t i = 1; i <= sc.run.steps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        auto rec = engine.step();
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        out.elapsed_ms += ms;
        if (!rec) {
            out.quiescent = true;
            break;
        }
        record(i, &*rec, ms);
        out.steps.push_back(std::move(*rec));
    }
    return out;
}

/// Shortest text that reads back to the same double; integers without a point.
inline std::string format_number(double v) {
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) return std::to_string(static_cast<long long>(v));
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string run_csv(const std::vector<MetricRow>& rows) {
    std::string out = "scenario,step,metric,value\n";
    for (const auto& r : rows)
        out += r.scenario + "," + std::to_string(r.step) + "," + r.metric + "," + format_number(r.value) + "\n";
    return out;
}

/// First step at which `metric` equals `value`, if any.
inline std::optional<std::size_t> first_step(const std::vector<MetricRow>& rows, const std::string& metric, double value) {
    for (const auto& r : rows)
        if (r.metric == metric && r.value == value) return r.step;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Benchmarks

struct BenchRow {
    std::string scenario;
    std::string param;
    std::int64_t value = 0;
    std::size_t reps = 0;
    std::size_t steps = 0;
    double mean_ms = 0;
    double stddev_ms = 0;  // population standard deviation over reps
    std::optional<std::size_t> converged_at;  // first step with one flock
    std::string status = "ok";  // "limit" when the enumeration bound was hit
};

/// Times `reps` runs of a built-in scenario for each value of `param`.
inline std::vector<BenchRow> bench(const std::string& scenario, const std::string& param,
                                   const std::vector<std::int64_t>& values, std::size_t reps, const Params& base = {},
                                   EngineOptions opts = {}) {
    if (reps == 0) throw ModelError("bench needs at least one repetition");
    std::vector<BenchRow> out;
    for (std::int64_t v : values) {
        Params p = base;
        p[param] = v;
        Scenario sc = builtin(scenario, p);
        BenchRow row{scenario, param, v, reps, 0, 0, 0, std::nullopt, "ok"};
        std::vector<double> times;
        try {
            for (std::size_t r = 0; r < reps; ++r) {
                RunResult res = run_scenario(sc, opts);
                times.push_back(res.elapsed_ms);
                if (r == 0) {
                    row.steps = res.steps.size();
                    row.converged_at = first_step(res.rows, "flocks", 1);
                }
            }
        } catch (const LimitError&) {
            row.status = "limit";
            times.clear();
        }
        if (!times.empty()) {
            double sum = 0;
            for (double t : times) sum += t;
            row.mean_ms = sum / static_cast<double>(times.size());
            double sq = 0;
            for (double t : times) sq += (t - row.mean_ms) * (t - row.mean_ms);
            row.stddev_ms = std::sqrt(sq / static_cast<double>(times.size()));
        }
        out.push_back(std::move(row));
    }
    return out;
}

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::string out = "scenario,param,value,reps,steps,mean_ms,stddev_ms,converged_at,status\n";
    for (const auto& r : rows) {
        char mean[32], sd[32];
        std::snprintf(mean, sizeof mean, "%.3f", r.mean_ms);
        std::snprintf(sd, sizeof sd, "%.3f", r.stddev_ms);
        out += r.scenario + "," + r.param + "," + std::to_string(r.value) + "," + std::to_string(r.reps) + "," +
               std::to_string(r.steps) + "," + mean + "," + sd + "," +
               (r.converged_at ? std::to_string(*r.converged_at) : "") + "," + r.status + "\n";
    }
    return out;
}

}  // namespace dream::dsl
