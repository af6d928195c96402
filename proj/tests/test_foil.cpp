#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace dream;

namespace {

bool mentions(const std::vector<Diagnostic>& ds, const std::string& what) {
    for (const auto& d : ds)
        if (d.message.find(what) != std::string::npos) return true;
    return false;
}

// Instances 3 and 5 of a one-port type.
struct Pair {
    Configuration cfg;
    TypeTable types{{"B", fx::loop_type("B", {"p"})}, {"E", fx::loop_type("E", {"p"})}};
    Pair() {
        cfg.add_motif("main");
        cfg.add_instance("main", instantiate(types.at("B"), 3));
        cfg.add_instance("main", instantiate(types.at("B"), 5));
    }
    ExpandContext ctx() const { return {cfg, "main", &types}; }
};

}  // namespace

TEST(WellFormed, ExampleRulesAreClosed) { EXPECT_TRUE(check_well_formed(fx::ms_rho()).empty()); }

TEST(WellFormed, UndeclaredVariableIsNamed) {
    auto body = term::rule(pil::conj(fx::pv("s", "bind"), fx::pv("s2", "bind")));
    auto ds = check_well_formed(coord::quantified({coord::forall("s", "Slave")}, body));
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_TRUE(mentions(ds, "'s2'"));
}

TEST(WellFormed, SlaveRuleWithoutQuantifierOnMasterIsRejected) {
    // ∀s:Slave, m:Master as printed: m carries no quantifier, so it is free.
    auto bind_rule = conjunctive_term(PortRef{InstanceTerm::variable("s"), "bind"}, fx::pv("m", "link"),
                                      {op::assign(expr::var("s", "master"), expr::var_ref("m"))});
    auto ds = check_well_formed(coord::quantified({coord::forall("s", "Slave")}, bind_rule));
    EXPECT_TRUE(mentions(ds, "'m'"));
}

TEST(WellFormed, DuplicateDeclarationAndBadBounds) {
    auto body = term::rule(fx::pv("s", "bind"));
    EXPECT_FALSE(check_well_formed(coord::quantified({coord::forall("s", "Slave"), coord::exists("s", "Slave")}, body))
                     .empty());
    EXPECT_FALSE(check_well_formed(coord::restriction(-1, "Slave")).empty());
    MacroConstraint mc;
    mc.kind = MacroKind::AtMost;
    mc.k = 0;
    mc.anchor_type = "A";
    mc.anchor_port = "p";
    mc.items = {{"q", "B", "j"}, {"q", "B", "j"}};
    auto ds = check_well_formed(coord::macro(mc));
    EXPECT_TRUE(mentions(ds, "k >= 1"));
    EXPECT_TRUE(mentions(ds, "'j' used twice"));
}

TEST(Expand, ForallIsConjunctionOverInstances) {
    Pair pr;
    auto body = term::rule(fx::pv("c", "p"));
    auto e = expand_declarations(coord::quantified({coord::forall("c", "B")}, body), pr.ctx());
    auto want = term::both(term::rule(pil::port(3, "p")), term::rule(pil::port(5, "p")));
    EXPECT_EQ(to_string(e), to_string(want));
    auto ex = expand_declarations(coord::quantified({coord::exists("c", "B")}, body), pr.ctx());
    EXPECT_EQ(to_string(ex), to_string(term::either(term::rule(pil::port(3, "p")), term::rule(pil::port(5, "p")))));
}

TEST(Expand, EmptyDomains) {
    Pair pr;
    auto body = term::rule(fx::pv("c", "p"));
    auto ex = expand_declarations(coord::quantified({coord::exists("c", "E")}, body), pr.ctx());
    EXPECT_EQ(ex->kind, TermKind::Rule);
    EXPECT_EQ(ex->guard->kind, FormulaKind::False);
    auto fa = expand_declarations(coord::quantified({coord::forall("c", "E")}, body), pr.ctx());
    EXPECT_EQ(fa->guard->kind, FormulaKind::True);
    EXPECT_TRUE(fa->ops.empty());
}

TEST(Expand, UnknownTypeOrMotif) {
    Pair pr;
    auto body = term::rule(fx::pv("c", "p"));
    EXPECT_THROW(expand_declarations(coord::quantified({coord::forall("c", "Nope")}, body), pr.ctx()), ModelError);
    EXPECT_THROW(expand_declarations(coord::quantified({coord::forall("c", "B", "elsewhere")}, body), pr.ctx()),
                 ModelError);
}

TEST(Expand, ReflectsCurrentInstances) {
    Pair pr;
    auto rho = coord::quantified({coord::forall("c", "B")}, term::rule(fx::pv("c", "p")));
    EXPECT_EQ(rule_count(expand_declarations(rho, pr.ctx())), 2u);
    pr.cfg.add_instance("main", instantiate(pr.types.at("B"), 9));
    EXPECT_EQ(rule_count(expand_declarations(rho, pr.ctx())), 3u);
}

TEST(Restriction, ExampleBounds) {
    auto sys = fx::ms_system(2, 3);  // masters 1, 2; slaves 3, 4, 5
    ExpandContext ctx{sys.initial, "main", &sys.types};
    auto sat = [&](const CoordPtr& r, Interaction a) {
        return pilops_satisfies(a, sys.initial, expand_declarations(r, ctx));
    };
    EXPECT_FALSE(sat(coord::restriction(1, "Slave", "bind"), Interaction{{3, "bind"}, {5, "bind"}}));
    EXPECT_TRUE(sat(coord::restriction(1, "Slave", "bind"), Interaction{{3, "bind"}}));
    EXPECT_TRUE(sat(coord::restriction(2, "Slave", "serve"), Interaction{{3, "serve"}, {5, "serve"}}));
    EXPECT_FALSE(sat(coord::restriction(1, "Master"), Interaction{{1, "link"}, {2, "work"}}));
    EXPECT_TRUE(sat(coord::restriction(1, "Master"), Interaction{{1, "link"}, {3, "bind"}}));
    EXPECT_THROW(expand_declarations(coord::restriction(1, "Slave", "nope"), ctx), ModelError);
    EXPECT_TRUE(expand_declarations(coord::restriction(1, "Slave"), ctx)->ops.empty());
}

// ---------------------------------------------------------------------------
// Macros against a direct reading of the quantified definitions.

using fx::all_ports;
using fx::make_macro;
using fx::MacroWorld;
using fx::oracle;

TEST(Macro, AtLeastTwoFootnote) {
    MacroWorld w(1, 3);  // A #1, B #2..#4
    auto mc = make_macro(MacroKind::AtLeast, 2, {{"q", "B", "j"}}, nullptr);
    auto f = expand_macro(mc, 1, w.ctx());
    EXPECT_TRUE(pil_satisfies(Interaction{{2, "q"}, {3, "q"}}, w.cfg, f));
    EXPECT_FALSE(pil_satisfies(Interaction{{2, "q"}}, w.cfg, f));
    EXPECT_TRUE(pil_satisfies(Interaction{}, w.cfg, f));
    EXPECT_TRUE(pil_satisfies(Interaction{{2, "r"}}, w.cfg, f));
}

TEST(Macro, UniqueForcesOneInstance) {
    MacroWorld w(1, 3);
    auto f = expand_macro(make_macro(MacroKind::Unique, 1, {{"q", "B", "j"}}, nullptr), 1, w.ctx());
    EXPECT_FALSE(pil_satisfies(Interaction{{2, "q"}, {3, "q"}}, w.cfg, f));
    EXPECT_TRUE(pil_satisfies(Interaction{{2, "q"}}, w.cfg, f));
}

TEST(Macro, RequireOtherInstance) {
    MacroWorld w(2, 0);  // A #1, #2
    auto mc = make_macro(MacroKind::Require, 1, {{"q", "A", "j"}}, expr::ne(expr::var_ref("j"), expr::var_ref("self")));
    auto f = expand_macro(mc, 1, w.ctx());
    for_each_interaction(w.universe, [&](const Interaction& a) {
        EXPECT_EQ(pil_satisfies(a, w.cfg, f), a.contains({2, "q"})) << to_string(a);
    });
}

TEST(Macro, ExactlyIsAtMostAndAtLeast) {
    MacroWorld w(1, 3);
    for (std::int64_t k = 1; k <= 3; ++k) {
        auto items = std::vector<MacroItem>{{"q", "B", "j"}};
        auto ex = expand_macro(make_macro(MacroKind::Exactly, k, items, nullptr), 1, w.ctx());
        auto both = pil::conj(expand_macro(make_macro(MacroKind::AtMost, k, items, nullptr), 1, w.ctx()),
                              expand_macro(make_macro(MacroKind::AtLeast, k, items, nullptr), 1, w.ctx()));
        EXPECT_EQ(models_of(ex, w.universe, w.cfg), models_of(both, w.universe, w.cfg));
    }
}

TEST(Macro, LoweringGuardsTheAnchorPort) {
    MacroWorld w(2, 2);
    auto mc = make_macro(MacroKind::Require, 1, {{"q", "B", "j"}}, nullptr);
    auto t = lower_macro(mc, w.ctx());
    // Anchor idle: nothing required.
    EXPECT_TRUE(pilops_satisfies(Interaction{}, w.cfg, t));
    EXPECT_FALSE(pilops_satisfies(Interaction{{1, "p"}}, w.cfg, t));
    EXPECT_TRUE(pilops_satisfies(Interaction{{1, "p"}, {3, "q"}}, w.cfg, t));
    EXPECT_THROW(lower_macro(make_macro(MacroKind::Require, 1, {{"zz", "B", "j"}}, nullptr), w.ctx()), ModelError);
}

TEST(MacroProperty, MatchesDirectOracle) {
    using namespace expr;
    const std::vector<std::vector<MacroItem>> item_sets = {
        {{"q", "B", "j"}}, {{"q", "A", "j"}}, {{"p", "A", "j"}}, {{"q", "A", "j1"}, {"r", "B", "j2"}}};
    auto psis = [&](const std::vector<MacroItem>& items) {
        std::vector<ExprPtr> out{nullptr};
        const auto& j = items[0].index;
        out.push_back(ne(var_ref(j), var_ref("self")));
        out.push_back(binary(BinOp::Le, var_ref(j), lit(Value(2))));
        if (items.size() == 2) out.push_back(lt(var_ref(items[0].index), binary(BinOp::Sub, var_ref(items[1].index), lit(Value(3)))));
        return out;
    };
    const std::vector<MacroKind> kinds = {MacroKind::Require, MacroKind::Accept,  MacroKind::AtMost,
                                          MacroKind::AtLeast, MacroKind::Unique, MacroKind::Exactly};
    std::size_t checked = 0;
    for (auto [as, bs] : std::vector<std::pair<int, int>>{{1, 3}, {3, 3}, {2, 1}}) {
        MacroWorld w(as, bs);
        std::vector<Interaction> all;
        for_each_interaction(w.universe, [&](const Interaction& a) { all.push_back(a); });
        for (const auto& items : item_sets)
            for (const auto& psi : psis(items))
                for (auto kind : kinds)
                    for (std::int64_t k : {1, 2}) {
                        if (!macro_counts(kind) && k > 1) continue;
                        auto mc = make_macro(kind, k, items, psi);
                        for (InstanceId self : w.of("A")) {
                            auto f = expand_macro(mc, self, w.ctx());
                            for (const auto& a : all) {
                                ASSERT_EQ(pil_satisfies(a, w.cfg, f), oracle(w, mc, self, a, kind))
                                    << macro_name(kind) << "(" << k << ") self=" << self << " a=" << to_string(a)
                                    << " psi=" << (psi ? to_string(psi) : "tt") << " items=" << items.size();
                                ++checked;
                            }
                        }
                    }
    }
    EXPECT_GT(checked, 100000u);
}

// ---------------------------------------------------------------------------
// Evaluation with bindings agrees with the materialised expansion.

namespace {

void expect_same(const CoordPtr& rho, const Configuration& cfg, const std::string& motif, const TypeTable& types) {
    ExpandContext ctx{cfg, motif, &types};
    auto expanded = expand_declarations(rho, ctx);
    EvalScope scope{cfg, cfg.find_motif(motif)};
    for_each_interaction(all_ports(cfg), [&](const Interaction& a) {
        auto got = coord_eval(a, rho, ctx);
        ASSERT_EQ(got.sat, pilops_satisfies(a, scope, expanded)) << to_string(a);
        ASSERT_EQ(got.ops, ops_of(a, scope, expanded)) << to_string(a);
    });
}

}  // namespace

TEST(CoordEval, MatchesExpansionOnMasterSlaves) {
    std::mt19937_64 g(5);
    for (auto [m, s] : std::vector<std::pair<int, int>>{{1, 2}, {2, 3}, {1, 4}}) {
        auto sys = fx::ms_system(m, s);
        for (int rep = 0; rep < 4; ++rep) {
            Configuration cfg = sys.initial;
            // Scramble the binding state so the data guards go both ways.
            auto slaves = cfg.instances_of("main", "Slave");
            for (InstanceId mid : cfg.instances_of("main", "Master")) {
                std::set<std::int64_t> bound;
                for (InstanceId sid : slaves)
                    if (g() % 3 == 0) {
                        bound.insert(sid);
                        cfg.find_instance(sid)->valuation["master"] = Value(mid);
                    }
                cfg.find_instance(mid)->valuation["slaves"] = Value::set(bound);
            }
            expect_same(fx::ms_rho(), cfg, "main", sys.types);
        }
    }
}

TEST(CoordEval, MatchesExpansionOnFlock) {
    auto sys = fx::flock_system(9, 4);
    expect_same(fx::flock_rho(), sys.initial, "swarm", sys.types);
}

TEST(CoordEval, MatchesExpansionWithMacrosAndRestrictions) {
    MacroWorld w(2, 3);
    auto rho = coord::any({coord::all({coord::restriction(2, "B", "q"),
                                       coord::macro(make_macro(MacroKind::Require, 1, {{"q", "B", "j"}}, nullptr))}),
                           coord::quantified({coord::exists("x", "A")}, term::rule(fx::pv("x", "q")))});
    expect_same(rho, w.cfg, "main", w.types);
}
