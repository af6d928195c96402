#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dream/dsl/parser.hpp"

namespace dream::dsl {

using Params = std::map<std::string, std::int64_t>;

/// Robot initial directions in instance-id order: the eight compass
/// directions counter-clockwise from east, then north again.
inline const std::vector<std::pair<std::int64_t, std::int64_t>>& robot_directions() {
    static const std::vector<std::pair<std::int64_t, std::int64_t>> d = {
        {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {0, 1}};
    return d;
}

namespace detail {

inline std::int64_t param(const Params& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end()) throw ModelError("missing scenario parameter " + key);
    return it->second;
}

inline std::string run_text(const Params& p, const std::string& metrics) {
    return "run {\n    steps " + std::to_string(param(p, "steps")) + ";\n    seed " + std::to_string(param(p, "seed")) +
           ";\n    metrics " + metrics + ";\n}\n";
}

inline std::string robot_type_text() {
    return R"(type Robot {
    locations r0;
    initial r0;
    var clock: int = 0;
    var range: int;
    var ts: int;
    var dir: vec;
    ports tick;
    r0 -tick-> r0;
    on tick { self.clock := self.clock + 1; }
}
)";
}

// 9 robots uniformly spaced on the s x s torus: a 3 x 3 lattice with
// spacing s/3, offset by half a spacing.
inline std::string robot_placements(std::int64_t s, std::int64_t range) {
    const std::int64_t step = s / 3;
    std::string out;
    std::size_t k = 0;
    for (std::int64_t y = 0; y < 3; ++y)
        for (std::int64_t x = 0; x < 3; ++x, ++k) {
            const auto [dx, dy] = robot_directions()[k];
            out += "    place Robot in swarm at [" + std::to_string(x * step + step / 2) + ", " +
                   std::to_string(y * step + step / 2) + "] with { range = " + std::to_string(range) + ", dir = [" +
                   std::to_string(dx) + ", " + std::to_string(dy) + "] };\n";
        }
    return out;
}

inline void check_size(std::int64_t s) {
    if (s < 3) throw ModelError("size must be >= 3 (9 robots on a 3 x 3 lattice)");
}

}  // namespace detail

/// Dynamic master/slave binding: masters collect two slaves, then work
/// with both, summing their memories into the buffer.
inline std::string master_slaves_source(const Params& p) {
    const std::int64_t masters = detail::param(p, "masters");
    const std::int64_t slaves = detail::param(p, "slaves");
    if (masters < 1 || slaves < 1) throw ModelError("masters and slaves must be >= 1");
    std::string s = "scenario \"master-slaves\";\n\n";
    s += R"(type Master {
    locations m;
    initial m;
    var slaves: set = {};
    var buffer: int;
    ports link, work;
    m -link-> m;
    m -work-> m;
    on work { self.slaves := {}; }
}

// mem is fixed to the instance id so runs are reproducible.
type Slave {
    locations wait, ready;
    initial wait;
    var master: int = 0;
    var mem: int = self;
    ports bind, serve;
    wait -bind-> ready;
    ready -serve-> wait;
    on serve { self.master := 0; }
}

motif main {
    map single;
    term AtMost(1)(Master)
       & AtMost(1)(Slave.bind)
       & AtMost(2)(Slave.serve)
       & forall m: Master, exists s: Slave . m.link => size(m.slaves) < 2 && s.bind { m.slaves := m.slaves union {s}; }
       & forall s: Slave, exists m: Master . s.bind => m.link { s.master := m; }
       & forall m: Master, exists s1: Slave, exists s2: Slave .
             m.work => s1 != s2 && size(m.slaves) == 2 && s1 in m.slaves && s2 in m.slaves && s1.serve && s2.serve
             { m.buffer := s1.mem + s2.mem; }
       & forall s: Slave, exists m: Master . s.serve => s.master == m && m.work {};
}

system {
)";
    s += "    place " + std::to_string(masters) + " Master in main;\n";
    s += "    place " + std::to_string(slaves) + " Slave in main;\n}\n\n";
    return s + detail::run_text(p, "interaction_size, ops, sum(Master.buffer)");
}

/// Robots sensing peers within `range` and adopting the fresher direction.
inline std::string flock_source(const Params& p) {
    const std::int64_t size = detail::param(p, "size");
    const std::int64_t range = detail::param(p, "range");
    detail::check_size(size);
    std::string s = "scenario \"flock\";\n\n" + detail::robot_type_text() + "\n";
    s += "motif swarm {\n    map torus(" + std::to_string(size) + ");\n";
    s += R"(    term forall r: Robot . r.tick => true { move(r, at(r) + r.dir); }
       & forall r1: Robot, forall r2: Robot . r1.tick => r2.tick {
             if r1 != r2 {
                 if distance(at(r1), at(r2)) < r1.range && (r1.ts < r2.ts || r1.ts == r2.ts && r1 < r2) {
                     r1.dir := r2.dir;
                     r1.ts := r1.clock;
                     r2.ts := r2.clock;
                 }
             }
         };
}

// Directions in id order: E, NE, N, NW, W, SW, S, SE, N.
system {
)";
    s += detail::robot_placements(size, range) + "}\n\n";
    return s + detail::run_text(p, "flocks");
}

/// Robots marking nodes with direction and timestamp instead of sensing.
inline std::string stigmergy_source(const Params& p) {
    const std::int64_t size = detail::param(p, "size");
    detail::check_size(size);
    std::string s = "scenario \"stigmergy\";\n\n" + detail::robot_type_text() + "\n";
    s += "motif swarm {\n    map torus(" + std::to_string(size) + ");\n";
    s += R"(    attr ts: int = 0;
    attr dir: vec = [0, 0];
    term forall r: Robot . r.tick -> {
             if at(r).ts > r.ts {
                 r.dir := at(r).dir;
                 r.ts := r.clock;
                 at(r).ts := r.clock;
             } else {
                 at(r).ts := r.clock;
                 at(r).dir := r.dir;
             }
             move(r, at(r) + r.dir);
         };
}

// Same placement and directions as the flock scenario; range is unused.
system {
)";
    s += detail::robot_placements(size, 0) + "}\n\n";
    return s + detail::run_text(p, "flocks");
}

struct BuiltinScenario {
    std::string name;
    Params defaults;
    std::function<std::string(const Params&)> source;
};

inline const std::vector<BuiltinScenario>& builtin_scenarios() {
    static const std::vector<BuiltinScenario> all = {
        {"master-slaves", {{"masters", 1}, {"slaves", 2}, {"steps", 20}, {"seed", 1}}, master_slaves_source},
        {"flock", {{"size", 9}, {"range", 3}, {"steps", 30}, {"seed", 1}}, flock_source},
        {"stigmergy", {{"size", 9}, {"steps", 100}, {"seed", 1}}, stigmergy_source},
    };
    return all;
}

inline const BuiltinScenario* find_builtin(const std::string& name) {
    for (const auto& b : builtin_scenarios())
        if (b.name == name) return &b;
    return nullptr;
}

/// Defaults merged with `overrides`. For master-slaves, an explicit
/// `masters` without `slaves` keeps two slaves per master.
inline Params resolve_params(const BuiltinScenario& b, const Params& overrides) {
    Params p = b.defaults;
    for (const auto& [k, v] : overrides) {
        if (!p.count(k)) {
            std::string known;
            for (const auto& [dk, dv] : b.defaults) known += (known.empty() ? "" : ", ") + dk;
            throw ModelError("scenario " + b.name + " has no parameter '" + k + "' (known: " + known + ")");
        }
        p[k] = v;
    }
    if (b.name == "master-slaves" && overrides.count("masters") && !overrides.count("slaves"))
        p["slaves"] = 2 * p["masters"];
    if (p["steps"] < 0 || p["seed"] < 0) throw ModelError("steps and seed must be >= 0");
    return p;
}

inline std::string builtin_source(const std::string& name, const Params& overrides = {}) {
    const BuiltinScenario* b = find_builtin(name);
    if (!b) throw ModelError("unknown scenario " + name + " (built-in: master-slaves, flock, stigmergy)");
    return b->source(resolve_params(*b, overrides));
}

inline Scenario builtin(const std::string& name, const Params& overrides = {}) {
    return parse_or_throw(builtin_source(name, overrides));
}

}  // namespace dream::dsl
