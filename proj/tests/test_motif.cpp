#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"

using namespace dream;

namespace {

ExprPtr node_lit(std::int64_t x, std::int64_t y) { return expr::lit(Value::node({x, y})); }

struct Field {
    Configuration cfg;
    TypeTable types{{"Slave", fx::ms_slave_type()}};
    Field() {
        cfg.add_motif("m", Map::explicit_map({NodeId{0}, NodeId{1}, NodeId{2}}, {{NodeId{0}, NodeId{1}}, {NodeId{1}, NodeId{2}}}));
        cfg.add_instance("m", instantiate(types.at("Slave"), 1), NodeId{0});
        cfg.add_instance("m", instantiate(types.at("Slave"), 2), NodeId{1});
    }
};

ExprPtr n1(std::int64_t i) { return expr::lit(Value::node({i})); }

}  // namespace

TEST(Reconfig, MoveUpdatesAddressOnly) {
    Configuration cfg;
    cfg.add_motif("t", torus_map(9));
    cfg.add_instance("t", instantiate(fx::robot_type(), 4), NodeId{0, 0});
    auto before = cfg.instance(4).valuation;
    auto out = apply_reconfig(op::move(expr::id_ref(4), node_lit(2, 3)), cfg, "t");
    EXPECT_EQ(out.motif("t").address.at(4), (NodeId{2, 3}));
    EXPECT_EQ(out.instance(4).valuation, before);
    EXPECT_EQ(out.instance(4).location, "r0");
}

TEST(Reconfig, MoveIsNotBoundToEdges) {
    Field f;
    auto out = apply_reconfig(op::move(expr::id_ref(1), n1(2)), f.cfg, "m");
    EXPECT_EQ(out.motif("m").address.at(1), NodeId{2});
}

TEST(Reconfig, RemoveNodeCascades) {
    Field f;
    auto out = apply_reconfig(op::remove_node(n1(1)), f.cfg, "m");
    const auto& m = out.motif("m");
    EXPECT_FALSE(m.instances.count(2));
    EXPECT_FALSE(m.address.count(2));
    EXPECT_TRUE(m.instances.count(1));
    EXPECT_FALSE(m.map.contains(NodeId{1}));
    EXPECT_TRUE(m.map.edges().empty());
    EXPECT_NO_THROW(out.check_well_formed());
}

TEST(Reconfig, CreateStartsAtInitialState) {
    Field f;
    auto out = apply_reconfig(op::create("Slave", n1(2)), f.cfg, "m", &f.types);
    const auto& m = out.motif("m");
    ASSERT_EQ(m.instances.size(), 3u);
    const auto& s = m.instances.at(3);
    EXPECT_EQ(s.location, "wait");
    EXPECT_EQ(s.valuation.at("master"), Value(0));
    EXPECT_EQ(s.valuation.at("mem"), Value(3));
    EXPECT_EQ(m.address.at(3), NodeId{2});
}

TEST(Reconfig, FreshIdsAreNeverReused) {
    Field f;
    auto gone = apply_reconfig(op::delete_instance(expr::id_ref(2)), f.cfg, "m");
    EXPECT_FALSE(gone.has_instance(2));
    EXPECT_FALSE(gone.motif("m").address.count(2));
    auto out = apply_reconfig(op::create("Slave", n1(0)), gone, "m", &f.types);
    EXPECT_TRUE(out.has_instance(3));
    EXPECT_FALSE(out.has_instance(2));
}

TEST(Reconfig, Errors) {
    Field f;
    EXPECT_THROW(apply_reconfig(op::create("Slave", n1(7)), f.cfg, "m", &f.types), EvalError);
    EXPECT_THROW(apply_reconfig(op::create("Ghost", n1(0)), f.cfg, "m", &f.types), EvalError);
    EXPECT_THROW(apply_reconfig(op::move(expr::id_ref(9), n1(0)), f.cfg, "m"), EvalError);
    EXPECT_THROW(apply_reconfig(op::move(expr::id_ref(1), n1(7)), f.cfg, "m"), EvalError);
}

TEST(Reconfig, BenignNoOps) {
    Field f;
    auto same = apply_reconfig(op::add_node(n1(1)), f.cfg, "m");
    EXPECT_EQ(same.canonical(), f.cfg.canonical());
    auto also = apply_reconfig(op::remove_edge(n1(2), n1(0)), f.cfg, "m");
    EXPECT_EQ(also.canonical(), f.cfg.canonical());
    auto grown = apply_reconfig(op::add_edge(n1(2), n1(0)), apply_reconfig(op::add_node(n1(5)), f.cfg, "m"), "m");
    EXPECT_TRUE(grown.motif("m").map.has_edge(NodeId{2}, NodeId{0}));
    EXPECT_TRUE(grown.motif("m").map.contains(NodeId{5}));
}

TEST(Torus, WrapsAndMeasures) {
    auto t = torus_map(9);
    EXPECT_EQ(t.normalize(NodeId{9, 0}), (NodeId{0, 0}));
    EXPECT_EQ(t.normalize(NodeId{-1, 4}), (NodeId{8, 4}));
    EXPECT_DOUBLE_EQ(t.distance(NodeId{0, 0}, NodeId{8, 0}), 1.0);
    EXPECT_EQ(t.nodes().size(), 81u);
    EXPECT_TRUE(t.has_edge(NodeId{8, 3}, NodeId{0, 3}));
    EXPECT_THROW(torus_map(0), ModelError);
}

TEST(Torus, DistanceMatchesWrapOracle) {
    std::mt19937_64 g(7);
    for (std::int64_t s : {1, 2, 5, 9, 21}) {
        auto t = torus_map(s);
        for (int rep = 0; rep < 200; ++rep) {
            std::int64_t ax = g() % s, ay = g() % s, bx = g() % s, by = g() % s;
            double best = 1e18;
            for (std::int64_t wx = -1; wx <= 1; ++wx)
                for (std::int64_t wy = -1; wy <= 1; ++wy) {
                    double dx = static_cast<double>(bx + wx * s - ax), dy = static_cast<double>(by + wy * s - ay);
                    best = std::min(best, std::sqrt(dx * dx + dy * dy));
                }
            ASSERT_DOUBLE_EQ(t.distance(NodeId{ax, ay}, NodeId{bx, by}), best);
        }
    }
}

TEST(Torus, FlockStartsOnUniformLattice) {
    auto sys = fx::flock_system(9, 4);
    std::set<NodeId> seen;
    for (const auto& [id, n] : sys.initial.motif("swarm").address) seen.insert(n);
    std::set<NodeId> want;
    for (std::int64_t y : {1, 4, 7})
        for (std::int64_t x : {1, 4, 7}) want.insert(NodeId{x, y});
    EXPECT_EQ(seen, want);
}

// ---------------------------------------------------------------------------
// Motif steps

namespace {

// Master 1 bound to slaves 2 and 3, both ready.
System bound_pair() {
    auto sys = fx::ms_system(1, 2);
    auto& c = sys.initial;
    c.find_instance(1)->valuation["slaves"] = Value::set({2, 3});
    for (InstanceId s : {2, 3}) {
        c.find_instance(s)->location = "ready";
        c.find_instance(s)->valuation["master"] = Value(1);
    }
    return sys;
}

}  // namespace

TEST(MotifStep, WorkStepAggregatesAndResets) {
    auto sys = bound_pair();
    Interaction a{{1, "work"}, {2, "serve"}, {3, "serve"}};
    auto out = motif_step(sys.initial, sys.motif("main"), a, &sys.types);
    ASSERT_EQ(out.size(), 1u);
    const auto& c = out[0];
    EXPECT_EQ(c.instance(1).valuation.at("buffer"), Value(5));  // mem is the id: 2 + 3
    EXPECT_EQ(c.instance(1).valuation.at("slaves"), Value::set({}));
    for (InstanceId s : {2, 3}) {
        EXPECT_EQ(c.instance(s).valuation.at("master"), Value(0));
        EXPECT_EQ(c.instance(s).location, "wait");
    }
}

TEST(MotifStep, EmptyInteractionLeavesStateAlone) {
    auto sys = fx::ms_system(1, 2);
    auto out = motif_step(sys.initial, sys.motif("main"), Interaction{}, &sys.types);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].canonical(), sys.initial.canonical());
}

TEST(MotifStep, RejectsUnsatisfyingInteraction) {
    auto sys = fx::ms_system(1, 2);
    EXPECT_THROW(motif_step(sys.initial, sys.motif("main"), Interaction{{1, "link"}}, &sys.types), SemanticsError);
    EXPECT_THROW(motif_step(sys.initial, sys.motif("main"), Interaction{{42, "link"}}, &sys.types), SemanticsError);
}

TEST(MotifStep, TickMovesAlongDirection) {
    System sys;
    sys.types = {{"Robot", fx::robot_type()}};
    sys.motifs.push_back({"swarm", fx::flock_rho()});
    sys.initial.add_motif("swarm", torus_map(9));
    auto r = instantiate(sys.types.at("Robot"), 1);
    r.valuation["dir"] = Value::vec({0, 1});
    sys.initial.add_instance("swarm", r, NodeId{4, 4});
    auto out = motif_step(sys.initial, sys.motif("swarm"), Interaction{{1, "tick"}}, &sys.types);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].motif("swarm").address.at(1), (NodeId{4, 5}));
    EXPECT_EQ(out[0].instance(1).valuation.at("clock"), Value(1));

    sys.initial.motif("swarm").address[1] = NodeId{4, 8};
    out = motif_step(sys.initial, sys.motif("swarm"), Interaction{{1, "tick"}}, &sys.types);
    EXPECT_EQ(out[0].motif("swarm").address.at(1), (NodeId{4, 0}));
}

TEST(MotifStep, CreatedInstanceEntersAfterTheStep) {
    ComponentType t;
    t.name = "Cell";
    t.locations = {"young", "old"};
    t.initial = "young";
    t.ports = {"split"};
    t.transitions = {{"young", "split", "old"}};
    System sys;
    sys.types = {{"Cell", make_type(t)}};
    auto rule = conjunctive_term(PortRef{InstanceTerm::variable("c"), "split"}, pil::truth(),
                                 {op::create("Cell", expr::address(expr::var_ref("c")))});
    sys.motifs.push_back({"dish", coord::quantified({coord::forall("c", "Cell")}, rule)});
    sys.initial.add_motif("dish");
    sys.initial.add_instance("dish", instantiate(sys.types.at("Cell"), 1), NodeId{0});
    auto out = motif_step(sys.initial, sys.motif("dish"), Interaction{{1, "split"}}, &sys.types);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].instance(1).location, "old");
    EXPECT_EQ(out[0].instance(2).location, "young");
    EXPECT_EQ(out[0].motif("dish").address.at(2), NodeId{0});
}

// Without operations a step is exactly fire.
TEST(MotifProperty, NoOpsMeansFireOnly) {
    fx::Abstract u({"p", "q", "r"});
    Motif m{"main", coord::lifted(term::rule(pil::implies(u.p("q"), u.p("p"))))};
    for_each_interaction(u.universe, [&](const Interaction& a) {
        if (!pilops_satisfies(a, u.cfg, expand_motif(m, u.cfg, nullptr))) return;
        auto out = motif_step(u.cfg, m, a);
        ASSERT_EQ(out.size(), 1u);
        Configuration fired = u.cfg;
        fire(fired.motif("main").instances, a);
        EXPECT_EQ(out[0].canonical(), fired.canonical());
    });
}

// Both ways of computing a step's operations agree on reachable states.
TEST(MotifProperty, BindingEvaluationMatchesExpansion) {
    auto sys = fx::ms_system(2, 3);
    std::vector<Configuration> frontier{sys.initial};
    std::set<std::string> seen;
    std::vector<Port> universe;
    for (const auto& [id, inst] : sys.initial.motif("main").instances)
        for (const auto& p : inst.type->ports) universe.push_back({id, p});
    int steps = 0;
    while (!frontier.empty() && steps < 40) {
        Configuration c = frontier.back();
        frontier.pop_back();
        if (!seen.insert(c.canonical()).second) continue;
        const Motif& m = sys.motif("main");
        auto expanded = expand_motif(m, c, &sys.types);
        for_each_interaction(universe, [&](const Interaction& a) {
            if (!pilops_satisfies(a, c, expanded)) return;
            auto ref = motif_step_ops(m, expanded, c, a);
            auto fast = motif_step_ops(m, c, a, &sys.types);
            ASSERT_EQ(ref.size(), fast.size());
            for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_EQ(ref[i].text(), fast[i].text());
            bool enabled = true;
            for (const auto& p : a) {
                auto ps = enabled_ports(c.instance(p.instance));
                enabled = enabled && std::find(ps.begin(), ps.end(), p) != ps.end();
            }
            if (!enabled || a.empty()) return;
            for (auto& next : motif_step(c, m, a, &sys.types)) {
                next.check_well_formed();
                frontier.push_back(std::move(next));
            }
        });
        ++steps;
    }
    EXPECT_GT(seen.size(), 5u);
}
