#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace dream;

namespace {

std::set<Interaction> as_set(const std::vector<Interaction>& v) { return {v.begin(), v.end()}; }

// Brute force over every interaction of the enabled ports, judged on the
// materialised expansion of each motif term (and of μ).
std::set<Interaction> reference_candidates(const System& sys, const Configuration& cfg) {
    std::vector<Port> enabled;
    for (const auto& ms : cfg.motifs)
        for (const auto& [id, inst] : ms.instances) {
            auto ps = enabled_ports(inst);
            enabled.insert(enabled.end(), ps.begin(), ps.end());
        }
    std::set<Interaction> out;
    for_each_interaction(enabled, [&](const Interaction& a) {
        if (a.empty()) return;
        Configuration post = cfg;
        std::vector<ResolvedOp> ops;
        for (const auto& m : sys.motifs) {
            const MotifState& ms = cfg.motif(m.name);
            Interaction am;
            for (const auto& p : a)
                if (ms.instances.count(p.instance)) am.insert(p);
            auto expanded = expand_motif(m, cfg, &sys.types);
            if (!pilops_satisfies(am, EvalScope{cfg, &ms}, expanded)) return;
            auto part = motif_step_ops(m, expanded, cfg, am);
            ops.insert(ops.end(), part.begin(), part.end());
            fire(post.motif(m.name).instances, am);
        }
        if (sys.migration) {
            bool any = false;
            for (const auto& c : apply_resolved_all(post, ops, &sys.types))
                any = any || pilops_satisfies(a, c, expand_declarations(sys.migration, ExpandContext{c, {}, &sys.types}));
            if (!any) return;
        }
        out.insert(a);
    });
    return out;
}

// Two motifs "left" and "right" with one node each; walkers hop across.
System hopping(int walkers) {
    ComponentType t;
    t.name = "Walker";
    t.locations = {"s"};
    t.initial = "s";
    t.ports = {"hop", "stay"};
    t.transitions = {{"s", "hop", "s"}, {"s", "stay", "s"}};
    System sys;
    sys.types = {{"Walker", make_type(t)}};
    auto free = [](const std::string& m) {
        return coord::quantified({coord::forall("w", "Walker", m)},
                                 term::rule(pil::truth()));
    };
    sys.motifs.push_back({"left", free("left")});
    sys.motifs.push_back({"right", free("right")});
    sys.initial.add_motif("left");
    sys.initial.add_motif("right");
    for (int i = 1; i <= walkers; ++i)
        sys.initial.add_instance("left", instantiate(sys.types.at("Walker"), i), NodeId{0});
    auto go = conjunctive_term(PortRef{InstanceTerm::variable("w"), "hop"}, pil::truth(),
                               {op::migrate(expr::var_ref("w"), "right", expr::lit(Value::node({0})))});
    auto back = conjunctive_term(PortRef{InstanceTerm::variable("w"), "hop"}, pil::truth(),
                                 {op::migrate(expr::var_ref("w"), "left", expr::lit(Value::node({0})))});
    sys.migration = coord::all({coord::quantified({coord::forall("w", "Walker", "left")}, go),
                                coord::quantified({coord::forall("w", "Walker", "right")}, back)});
    sys.seed = 3;
    return sys;
}

std::size_t count_in(const Configuration& c, const std::string& m) { return c.motif(m).instances.size(); }

}  // namespace

TEST(Candidates, OneMasterTwoSlaves) {
    Engine e(fx::ms_system(1, 2));
    std::set<Interaction> want{Interaction{{1, "link"}, {2, "bind"}}, Interaction{{1, "link"}, {3, "bind"}}};
    EXPECT_EQ(as_set(e.candidate_interactions()), want);
}

TEST(Candidates, NoEnabledPortsIsQuiescent) {
    System sys;
    sys.types = {{"Rock", fx::loop_type("Rock", {})}};
    sys.motifs.push_back({"main", coord::lifted(term::neutral())});
    sys.initial.add_motif("main");
    sys.initial.add_instance("main", instantiate(sys.types.at("Rock"), 1));
    Engine e(sys);
    EXPECT_TRUE(e.candidate_interactions().empty());
    auto t = e.run(5);
    EXPECT_TRUE(t.quiescent);
    EXPECT_TRUE(t.steps.empty());
}

TEST(Candidates, RobotsTickTogether) {
    System sys;
    sys.types = {{"Robot", fx::robot_type()}};
    sys.motifs.push_back({"swarm", fx::flock_rho()});
    sys.initial.add_motif("swarm", torus_map(9));
    for (InstanceId id : {1, 2}) {
        auto r = instantiate(sys.types.at("Robot"), id);
        r.valuation["dir"] = Value::vec({1, 0});
        sys.initial.add_instance("swarm", r, NodeId{id, 0});
    }
    Engine e(sys);
    auto c = e.candidate_interactions();
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0], (Interaction{{1, "tick"}, {2, "tick"}}));
}

TEST(Selection, OnlyMaximalCandidatesAreChosen) {
    fx::Abstract u({"t", "r1", "r2"});
    System sys;
    for (const auto& [id, inst] : u.cfg.motif("main").instances) sys.types[inst.type->name] = inst.type;
    using pil::implies;
    auto f2 = pil::conj({implies(pil::truth(), u.p("t")), implies(u.p("r1"), u.p("t")), implies(u.p("r2"), u.p("t"))});
    sys.motifs.push_back({"main", coord::lifted(term::rule(f2))});
    sys.initial = u.cfg;
    Engine e(sys);
    EXPECT_EQ(as_set(e.candidate_interactions()), u.set_of({{"t"}, {"t", "r1"}, {"t", "r2"}, {"t", "r1", "r2"}}));
    EXPECT_EQ(e.maximal_candidates(), (std::vector<Interaction>{u.of({"t", "r1", "r2"})}));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        sys.seed = seed;
        Engine again(sys);
        EXPECT_EQ(again.step()->interaction, u.of({"t", "r1", "r2"}));
    }
}

TEST(Selection, AnyRandomCanPickNonMaximal) {
    fx::Abstract u({"t", "r1"});
    System sys;
    for (const auto& [id, inst] : u.cfg.motif("main").instances) sys.types[inst.type->name] = inst.type;
    sys.motifs.push_back({"main", coord::lifted(term::rule(pil::implies(u.p("r1"), u.p("t"))))});
    sys.initial = u.cfg;
    EngineOptions opts;
    opts.selection = Selection::AnyRandom;
    std::set<Interaction> picked;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        sys.seed = seed;
        Engine e(sys, opts);
        picked.insert(e.step()->interaction);
    }
    EXPECT_EQ(picked.size(), 2u);
}

TEST(Run, MasterSlavesCompleteCycle) {
    Engine e(fx::ms_system(1, 2), EngineOptions{kDefaultPortBound, true});
    auto t = e.run(3);
    ASSERT_EQ(t.steps.size(), 3u);
    std::set<Interaction> binds{t.steps[0].interaction, t.steps[1].interaction};
    EXPECT_EQ(binds, (std::set<Interaction>{Interaction{{1, "link"}, {2, "bind"}}, Interaction{{1, "link"}, {3, "bind"}}}));
    EXPECT_EQ(t.steps[2].interaction, (Interaction{{1, "work"}, {2, "serve"}, {3, "serve"}}));
    const auto& c = e.config();
    EXPECT_EQ(c.instance(1).valuation.at("buffer"), Value(5));
    EXPECT_EQ(c.instance(1).valuation.at("slaves"), Value::set({}));
    EXPECT_EQ(c.instance(2).valuation.at("master"), Value(0));
    EXPECT_EQ(t.steps[0].step, 0u);
    EXPECT_EQ(t.steps[2].step, 2u);
}

TEST(Run, ZeroStepsIsEmpty) {
    Engine e(fx::ms_system(1, 2));
    auto t = e.run(0);
    EXPECT_TRUE(t.steps.empty());
    EXPECT_FALSE(t.quiescent);
}

TEST(Run, SameSeedSameTrace) {
    auto digests = [](std::uint64_t seed) {
        Engine e(fx::ms_system(2, 4, seed));
        std::vector<std::uint64_t> out;
        for (const auto& r : e.run(12).steps) out.push_back(r.digest);
        return out;
    };
    EXPECT_EQ(digests(7), digests(7));
    bool differs = false;
    for (std::uint64_t s = 1; s < 6 && !differs; ++s) differs = digests(s) != digests(7);
    EXPECT_TRUE(differs);
}

TEST(Run, MetricsHookSeesPostState) {
    Engine e(fx::ms_system(1, 2));
    auto t = e.run(3, [](const Configuration& c) {
        return Metrics{{"buffer", static_cast<double>(c.instance(1).valuation.at("buffer").as_int())}};
    });
    EXPECT_EQ(t.steps[2].metrics.at(0).second, 5.0);
}

TEST(Run, PortBoundIsEnforced) {
    EngineOptions opts;
    opts.port_bound = 3;
    Engine e(fx::ms_system(2, 4), opts);
    EXPECT_THROW(e.candidate_interactions(), LimitError);
}

TEST(Migration, WalkersCrossBetweenMotifs) {
    Engine e(hopping(2), EngineOptions{kDefaultPortBound, true});
    auto first = e.step();
    ASSERT_TRUE(first);
    // Maximal: both walkers act; whoever hops leaves "left".
    std::size_t hops = 0;
    for (const auto& p : first->interaction) hops += p.name == "hop";
    EXPECT_EQ(first->interaction.size(), 2u);
    EXPECT_EQ(count_in(e.config(), "right"), hops);
    EXPECT_EQ(count_in(e.config(), "left") + count_in(e.config(), "right"), 2u);
    for (int i = 0; i < 10; ++i) {
        ASSERT_TRUE(e.step());
        EXPECT_NO_THROW(e.config().check_well_formed());
        EXPECT_EQ(e.config().instance_count(), 2u);
        for (InstanceId id : {1, 2}) EXPECT_EQ(e.config().owner(id)->address.at(id), NodeId{0});
    }
}

TEST(Migration, OnlyMigrateOperationsAllowed) {
    auto sys = hopping(1);
    sys.migration = coord::quantified(
        {coord::forall("w", "Walker", "left")},
        term::rule(fx::pv("w", "hop"), {op::delete_instance(expr::var_ref("w"))}));
    EXPECT_THROW(Engine{sys}, ModelError);
}

TEST(Validate, RejectsOverlapsAndFreeVariables) {
    auto sys = fx::ms_system(1, 2);
    sys.motifs.push_back({"main", sys.motifs[0].term});
    EXPECT_THROW(Engine{sys}, ModelError);
    auto bad = fx::ms_system(1, 2);
    bad.motifs[0].term = coord::lifted(term::rule(fx::pv("m", "link")));
    EXPECT_THROW(Engine{bad}, ModelError);
}

// ---------------------------------------------------------------------------
// The compiled search agrees with brute force over the expanded terms, on
// every configuration visited by a run.

namespace {

void cross_check(System sys, std::size_t steps) {
    Engine e(sys, EngineOptions{kDefaultPortBound, true});
    for (std::size_t i = 0; i <= steps; ++i) {
        ASSERT_EQ(as_set(e.candidate_interactions()), reference_candidates(e.system(), e.config())) << "step " << i;
        if (!e.step()) break;
    }
}

}  // namespace

TEST(EngineProperty, CompiledSearchMatchesReferenceOnMasterSlaves) {
    for (std::uint64_t seed : {1, 2, 3}) cross_check(fx::ms_system(2, 4, seed), 15);
    cross_check(fx::ms_system(3, 3, 9), 10);
}

TEST(EngineProperty, CompiledSearchMatchesReferenceOnFlock) { cross_check(fx::flock_system(9, 3), 8); }

TEST(EngineProperty, CompiledSearchMatchesReferenceWithMigration) { cross_check(hopping(3), 8); }

TEST(EngineProperty, DecompositionAcrossMotifs) {
    Engine e(hopping(3));
    for (int i = 0; i < 10; ++i) {
        auto rec = e.step();
        ASSERT_TRUE(rec);
        std::set<InstanceId> seen;
        for (const auto& p : rec->interaction) EXPECT_TRUE(seen.insert(p.instance).second);
        std::set<InstanceId> all;
        for (const auto& ms : e.config().motifs)
            for (const auto& [id, inst] : ms.instances) EXPECT_TRUE(all.insert(id).second);
    }
}
