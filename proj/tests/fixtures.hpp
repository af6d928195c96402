#pragma once

// Hand-built models shared by the test suites. They do not go through the
// DSL, so parser tests can compare against them.

#include <map>
#include <random>
#include <string>
#include <vector>

#include "dream/system/engine.hpp"

namespace fx {

using namespace dream;

inline ExprPtr self_var(const std::string& x) { return expr::var("self", x); }
inline ExprPtr lit(std::int64_t v) { return expr::lit(Value(v)); }
inline FormulaPtr pv(const std::string& var, const std::string& port) { return pil::port(var, port); }
inline FormulaPtr pred(ExprPtr e) { return pil::pred(std::move(e)); }

/// One-location type whose ports are self-loops.
inline TypePtr loop_type(const std::string& name, const std::vector<std::string>& ports) {
    ComponentType t;
    t.name = name;
    t.locations = {"s"};
    t.initial = "s";
    t.ports = ports;
    for (const auto& p : ports) t.transitions.push_back({"s", p, "s"});
    return make_type(std::move(t));
}

/// Propositional setting: each named port lives on its own instance, so any
/// subset of the names is an interaction.
struct Abstract {
    Configuration cfg;
    std::map<std::string, Port> ports;
    std::vector<Port> universe;

    explicit Abstract(const std::vector<std::string>& names) {
        cfg.add_motif("main");
        InstanceId id = 1;
        for (const auto& n : names) {
            cfg.add_instance("main", instantiate(loop_type("T_" + n, {n}), id));
            ports[n] = Port{id, n};
            universe.push_back(ports[n]);
            ++id;
        }
    }

    Port operator[](const std::string& n) const { return ports.at(n); }
    FormulaPtr p(const std::string& n) const { return pil::port(ports.at(n)); }
    FormulaPtr np(const std::string& n) const { return pil::negate(p(n)); }

    Interaction of(const std::vector<std::string>& names) const {
        Interaction a;
        for (const auto& n : names) a.insert(ports.at(n));
        return a;
    }
    std::set<Interaction> set_of(const std::vector<std::vector<std::string>>& xs) const {
        std::set<Interaction> out;
        for (const auto& x : xs) out.insert(of(x));
        return out;
    }
};

// ---------------------------------------------------------------------------
// The two-slave system with data of the propositional examples: Master #1 and
// slaves #2, #3 with indexed port names.

inline TypePtr small_master_type() {
    ComponentType t;
    t.name = "Master";
    t.locations = {"m00", "m10", "m01", "m11"};
    t.initial = "m00";
    t.ports = {"link1", "link2", "work"};
    t.transitions = {{"m00", "link1", "m10"},
                     {"m00", "link2", "m01"},
                     {"m10", "link2", "m11"},
                     {"m01", "link1", "m11"},
                     {"m11", "work", "m00"}};
    t.variables = {{"buffer", ValueKind::Int, nullptr}};
    return make_type(std::move(t));
}

inline TypePtr small_slave_type(int i) {
    const std::string n = std::to_string(i);
    ComponentType t;
    t.name = "Slave" + n;
    t.locations = {"wait", "ready"};
    t.initial = "wait";
    t.ports = {"bind" + n, "serve" + n};
    t.transitions = {{"wait", "bind" + n, "ready"}, {"ready", "serve" + n, "wait"}};
    t.variables = {{"mem", ValueKind::Int, nullptr}};
    return make_type(std::move(t));
}

struct SmallMS {
    Configuration cfg;
    std::map<std::string, Port> ports;
    std::vector<Port> universe;

    SmallMS(std::int64_t mem1 = 3, std::int64_t mem2 = 4) {
        cfg.add_motif("main");
        cfg.add_instance("main", instantiate(small_master_type(), 1));
        auto s1 = instantiate(small_slave_type(1), 2);
        s1.valuation["mem"] = mem1;
        auto s2 = instantiate(small_slave_type(2), 3);
        s2.valuation["mem"] = mem2;
        cfg.add_instance("main", s1);
        cfg.add_instance("main", s2);
        for (auto [name, id] : std::vector<std::pair<std::string, InstanceId>>{
                 {"link1", 1}, {"link2", 1}, {"work", 1}, {"bind1", 2}, {"serve1", 2}, {"bind2", 3}, {"serve2", 3}}) {
            ports[name] = Port{id, name};
            universe.push_back(ports[name]);
        }
    }
    FormulaPtr p(const std::string& n) const { return pil::port(ports.at(n)); }
    Interaction of(const std::vector<std::string>& names) const {
        Interaction a;
        for (const auto& n : names) a.insert(ports.at(n));
        return a;
    }

    FormulaPtr psi_disj() const {
        return pil::disj({pil::conj({p("link1"), p("bind1"), pil::idle(InstanceTerm::concrete(3))}),
                          pil::conj({p("link2"), p("bind2"), pil::idle(InstanceTerm::concrete(2))}),
                          pil::conj({p("work"), p("serve1"), p("serve2")})});
    }
    FormulaPtr psi_conj() const {
        using pil::implies;
        return pil::conj({implies(p("link1"), p("bind1")), implies(p("link2"), p("bind2")),
                          implies(p("bind1"), p("link1")), implies(p("bind2"), p("link2")),
                          implies(p("work"), pil::conj(p("serve1"), p("serve2"))), implies(p("serve1"), p("work")),
                          implies(p("serve2"), p("work"))});
    }
    OperationSet buffer_op() const {
        return {op::assign(expr::var(expr::id_ref(1), "buffer"),
                           expr::add(expr::var(expr::id_ref(2), "mem"), expr::var(expr::id_ref(3), "mem")))};
    }
    TermPtr phi_disj() const {
        return term::any({term::rule(pil::conj({p("link1"), p("bind1"), pil::idle(InstanceTerm::concrete(3))})),
                          term::rule(pil::conj({p("link2"), p("bind2"), pil::idle(InstanceTerm::concrete(2))})),
                          term::rule(pil::conj({p("work"), p("serve1"), p("serve2")}), buffer_op())});
    }
    TermPtr phi_conj() const {
        return term::all({conjunctive_term(ports.at("link1"), p("bind1"), {}),
                          conjunctive_term(ports.at("link2"), p("bind2"), {}),
                          conjunctive_term(ports.at("bind1"), p("link1"), {}),
                          conjunctive_term(ports.at("bind2"), p("link2"), {}),
                          conjunctive_term(ports.at("work"), pil::conj(p("serve1"), p("serve2")), buffer_op()),
                          conjunctive_term(ports.at("serve1"), p("work"), {}),
                          conjunctive_term(ports.at("serve2"), p("work"), {})});
    }
};

// ---------------------------------------------------------------------------
// Master-Slaves with dynamic binding.

inline TypePtr ms_master_type() {
    ComponentType t;
    t.name = "Master";
    t.locations = {"m"};
    t.initial = "m";
    t.ports = {"link", "work"};
    t.transitions = {{"m", "link", "m"}, {"m", "work", "m"}};
    t.variables = {{"slaves", ValueKind::Set, expr::set_lit({})}, {"buffer", ValueKind::Int, nullptr}};
    t.port_ops["work"] = {op::assign(self_var("slaves"), expr::set_lit({}))};
    return make_type(std::move(t));
}

inline TypePtr ms_slave_type() {
    ComponentType t;
    t.name = "Slave";
    t.locations = {"wait", "ready"};
    t.initial = "wait";
    t.ports = {"bind", "serve"};
    t.transitions = {{"wait", "bind", "ready"}, {"ready", "serve", "wait"}};
    t.variables = {{"master", ValueKind::Int, lit(0)}, {"mem", ValueKind::Int, expr::var_ref("self")}};
    t.port_ops["serve"] = {op::assign(self_var("master"), lit(0))};
    return make_type(std::move(t));
}

inline CoordPtr ms_rho() {
    using namespace expr;
    auto m = [](const std::string& x) { return var("m", x); };
    auto link_rule = conjunctive_term(
        PortRef{InstanceTerm::variable("m"), "link"},
        pil::conj(pred(lt(unary(UnOp::Size, m("slaves")), lit(2))), pv("s", "bind")),
        {op::assign(m("slaves"), binary(BinOp::Union, m("slaves"), set_lit({var_ref("s")})))});
    auto bind_rule = conjunctive_term(PortRef{InstanceTerm::variable("s"), "bind"}, pv("m", "link"),
                                      {op::assign(var("s", "master"), var_ref("m"))});
    auto in_slaves = [&](const std::string& s) { return binary(BinOp::In, var_ref(s), m("slaves")); };
    auto work_rule = conjunctive_term(
        PortRef{InstanceTerm::variable("m"), "work"},
        pil::conj({pred(ne(var_ref("s1"), var_ref("s2"))), pred(eq(unary(UnOp::Size, m("slaves")), lit(2))),
                   pred(in_slaves("s1")), pred(in_slaves("s2")), pv("s1", "serve"), pv("s2", "serve")}),
        {op::assign(m("buffer"), add(var("s1", "mem"), var("s2", "mem")))});
    auto serve_rule = conjunctive_term(PortRef{InstanceTerm::variable("s"), "serve"},
                                       pil::conj(pred(eq(var("s", "master"), var_ref("m"))), pv("m", "work")), {});
    return coord::all({
        coord::restriction(1, "Master"),
        coord::restriction(1, "Slave", "bind"),
        coord::restriction(2, "Slave", "serve"),
        coord::quantified({coord::forall("m", "Master"), coord::exists("s", "Slave")}, link_rule),
        coord::quantified({coord::forall("s", "Slave"), coord::exists("m", "Master")}, bind_rule),
        coord::quantified({coord::forall("m", "Master"), coord::exists("s1", "Slave"), coord::exists("s2", "Slave")},
                          work_rule),
        coord::quantified({coord::forall("s", "Slave"), coord::exists("m", "Master")}, serve_rule),
    });
}

/// Masters take ids 1..masters, slaves follow.
inline System ms_system(int masters, int slaves, std::uint64_t seed = 1) {
    System sys;
    auto mt = ms_master_type();
    auto st = ms_slave_type();
    sys.types = {{"Master", mt}, {"Slave", st}};
    sys.motifs.push_back({"main", ms_rho()});
    sys.initial.add_motif("main");
    InstanceId id = 1;
    for (int i = 0; i < masters; ++i, ++id) sys.initial.add_instance("main", instantiate(mt, id));
    for (int i = 0; i < slaves; ++i, ++id) sys.initial.add_instance("main", instantiate(st, id));
    sys.seed = seed;
    return sys;
}

// ---------------------------------------------------------------------------
// Robots on a torus.

inline TypePtr robot_type() {
    ComponentType t;
    t.name = "Robot";
    t.locations = {"r0"};
    t.initial = "r0";
    t.ports = {"tick"};
    t.transitions = {{"r0", "tick", "r0"}};
    t.variables = {{"clock", ValueKind::Int, nullptr},
                   {"range", ValueKind::Int, nullptr},
                   {"ts", ValueKind::Int, nullptr},
                   {"dir", ValueKind::Vector, nullptr}};
    t.port_ops["tick"] = {op::assign(self_var("clock"), expr::add(self_var("clock"), lit(1)))};
    return make_type(std::move(t));
}

inline CoordPtr flock_rho() {
    using namespace expr;
    auto move_rule = conjunctive_term(PortRef{InstanceTerm::variable("r"), "tick"}, pil::truth(),
                                      {op::move(var_ref("r"), add(address(var_ref("r")), var("r", "dir")))});
    auto fresher = lor(lt(var("r1", "ts"), var("r2", "ts")),
                       land(eq(var("r1", "ts"), var("r2", "ts")), lt(var_ref("r1"), var_ref("r2"))));
    auto close = lt(distance(address(var_ref("r1")), address(var_ref("r2"))), var("r1", "range"));
    auto inner = op::conditional(land(close, fresher), {op::assign(var("r1", "dir"), var("r2", "dir")),
                                                         op::assign(var("r1", "ts"), var("r1", "clock")),
                                                         op::assign(var("r2", "ts"), var("r2", "clock"))});
    auto sense_rule = conjunctive_term(PortRef{InstanceTerm::variable("r1"), "tick"}, pv("r2", "tick"),
                                       {op::conditional(ne(var_ref("r1"), var_ref("r2")), {inner})});
    return coord::all({coord::quantified({coord::forall("r", "Robot")}, move_rule),
                       coord::quantified({coord::forall("r1", "Robot"), coord::forall("r2", "Robot")}, sense_rule)});
}

inline const std::vector<std::vector<std::int64_t>>& compass() {
    static const std::vector<std::vector<std::int64_t>> dirs = {{1, 0},  {1, 1},   {0, 1},  {-1, 1}, {-1, 0},
                                                                {-1, -1}, {0, -1}, {1, -1}, {0, 1}};
    return dirs;
}

/// 9 robots on a 3x3 lattice of an s-torus, compass directions in id order.
inline System flock_system(std::int64_t s, std::int64_t range, std::uint64_t seed = 1) {
    System sys;
    auto rt = robot_type();
    sys.types = {{"Robot", rt}};
    sys.motifs.push_back({"swarm", flock_rho()});
    sys.initial.add_motif("swarm", torus_map(s));
    const std::int64_t step = s / 3;
    InstanceId id = 1;
    for (std::int64_t y = 0; y < 3; ++y)
        for (std::int64_t x = 0; x < 3; ++x, ++id) {
            auto r = instantiate(rt, id);
            r.valuation["range"] = range;
            r.valuation["dir"] = Value::vec(compass()[static_cast<std::size_t>(id - 1)]);
            sys.initial.add_instance("swarm", r, NodeId{x * step + step / 2, y * step + step / 2});
        }
    sys.seed = seed;
    return sys;
}

inline std::size_t distinct_dirs(const Configuration& cfg) {
    std::set<std::vector<std::int64_t>> dirs;
    for (const auto& ms : cfg.motifs)
        for (const auto& [id, inst] : ms.instances)
            if (inst.type->name == "Robot") dirs.insert(inst.valuation.at("dir").as_coords());
    return dirs.size();
}

}  // namespace fx
