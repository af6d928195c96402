#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace dream;

TEST(Instantiate, SlaveStartsWaitingWithMasterZero) {
    auto st = fx::ms_slave_type();
    auto s = instantiate(st, 7);
    EXPECT_EQ(s.id, 7);
    EXPECT_EQ(s.location, "wait");
    EXPECT_EQ(s.valuation.at("master"), Value(0));
    // mem is initialised from the identifier
    EXPECT_EQ(s.valuation.at("mem"), Value(7));
    EXPECT_EQ(s.valuation.size(), 2u);
}

TEST(Instantiate, MasterDefaultsBufferToZero) {
    auto m = instantiate(fx::ms_master_type(), 1);
    EXPECT_EQ(m.location, "m");
    EXPECT_EQ(m.valuation.at("slaves"), Value::set({}));
    EXPECT_EQ(m.valuation.at("buffer"), Value(0));
}

TEST(Instantiate, DuplicateIdRejected) {
    Configuration cfg;
    cfg.add_motif("main");
    cfg.add_instance("main", instantiate(fx::ms_slave_type(), 3));
    EXPECT_THROW(instantiate(fx::ms_slave_type(), 3, &cfg), ModelError);
    EXPECT_THROW(cfg.add_instance("main", instantiate(fx::ms_master_type(), 3)), ModelError);
}

TEST(Instantiate, InitialiserReadingRuntimeStateRejected) {
    ComponentType t;
    t.name = "Bad";
    t.locations = {"s"};
    t.initial = "s";
    t.variables = {{"x", ValueKind::Int, expr::var(expr::id_ref(1), "y")}};
    EXPECT_THROW(instantiate(make_type(t), 2), ModelError);
}

TEST(Instantiate, InitialiserTypeMismatchIsEvalError) {
    ComponentType t;
    t.name = "Bad";
    t.locations = {"s"};
    t.initial = "s";
    t.variables = {{"x", ValueKind::Set, fx::lit(3)}};
    EXPECT_THROW(instantiate(make_type(t), 2), EvalError);
}

TEST(ComponentType, ValidationCatchesMalformedTypes) {
    ComponentType t;
    t.name = "T";
    t.locations = {"a", "b"};
    t.initial = "a";
    t.ports = {"p", "q"};
    t.transitions = {{"a", "p", "b"}, {"a", "p", "a"}};
    EXPECT_THROW(make_type(t), ModelError);  // p is ambiguous at a
    t.transitions = {{"a", "p", "b"}, {"b", "p", "a"}};
    EXPECT_NO_THROW(make_type(t));
    t.transitions = {{"a", "p", "b"}};
    t.initial = "c";
    EXPECT_THROW(make_type(t), ModelError);
    t.initial = "a";
    t.ports = {"p", "idle"};
    EXPECT_THROW(make_type(t), ModelError);
    t.ports = {"p"};
    t.transitions = {{"a", "x", "b"}};
    EXPECT_THROW(make_type(t), ModelError);
}

TEST(EnabledPorts, FollowTheTransitionRelation) {
    auto s = instantiate(fx::ms_slave_type(), 7);
    EXPECT_EQ(enabled_ports(s), (std::vector<Port>{{7, "bind"}}));
    s.location = "ready";
    EXPECT_EQ(enabled_ports(s), (std::vector<Port>{{7, "serve"}}));
    auto lone = instantiate(fx::loop_type("Empty", {}), 9);
    EXPECT_TRUE(enabled_ports(lone).empty());
}

TEST(Fire, MovesParticipantsOnly) {
    fx::SmallMS ms;
    auto& inst = ms.cfg.motif("main").instances;
    auto before = inst;
    fire(inst, ms.of({"link1"}));
    EXPECT_EQ(inst.at(1).location, "m10");
    EXPECT_EQ(inst.at(2).location, "wait");
    EXPECT_EQ(inst.at(1).valuation, before.at(1).valuation);
}

TEST(Fire, EmptyInteractionIsIdentity) {
    fx::SmallMS ms;
    auto before = ms.cfg.canonical();
    fire(ms.cfg.motif("main").instances, Interaction{});
    EXPECT_EQ(ms.cfg.canonical(), before);
}

TEST(Fire, DisabledPortRejected) {
    Configuration cfg;
    cfg.add_motif("main");
    cfg.add_instance("main", instantiate(fx::ms_slave_type(), 7));
    auto before = cfg.canonical();
    EXPECT_THROW(fire(cfg.motif("main").instances, Interaction{{7, "serve"}}), SemanticsError);
    EXPECT_EQ(cfg.canonical(), before);
}

TEST(Interaction, AtMostOnePortPerInstance) {
    Interaction a{{1, "p"}};
    EXPECT_THROW(a.insert({1, "q"}), SemanticsError);
    EXPECT_THROW(a.insert({2, kIdlePort}), SemanticsError);
    a.insert({1, "p"});
    EXPECT_EQ(a.size(), 1u);
}

TEST(Value, CoercionsAndEquality) {
    EXPECT_EQ(Value::instance(4), Value(4));
    EXPECT_EQ(Value::node({1, 2}), Value::vec({1, 2}));
    EXPECT_EQ(Value::set({1, 2}), Value::set({2, 1}));
    EXPECT_EQ(coerce(Value::instance(4), ValueKind::Int).kind(), ValueKind::Int);
    EXPECT_THROW(coerce(Value(true), ValueKind::Int), EvalError);
    EXPECT_THROW(coerce(Value::set({}), ValueKind::Vector), EvalError);
}

namespace {

Value eval_text(const ExprPtr& e) {
    Configuration cfg;
    return evaluate(e, {cfg});
}

}  // namespace

TEST(Eval, Arithmetic) {
    using namespace expr;
    EXPECT_EQ(eval_text(add(fx::lit(3), fx::lit(4))), Value(7));
    EXPECT_EQ(eval_text(binary(BinOp::Mod, fx::lit(-1), fx::lit(9))), Value(8));
    EXPECT_THROW(eval_text(binary(BinOp::Div, fx::lit(1), fx::lit(0))), EvalError);
    EXPECT_THROW(eval_text(binary(BinOp::Mod, fx::lit(1), fx::lit(0))), EvalError);
    EXPECT_EQ(eval_text(add(lit(Value::vec({1, 2})), lit(Value::vec({3, -4})))), Value::vec({4, -2}));
    EXPECT_THROW(eval_text(add(lit(Value::vec({1, 2})), lit(Value::vec({3})))), EvalError);
}

TEST(Eval, Sets) {
    using namespace expr;
    auto s = lit(Value::set({1, 2}));
    EXPECT_EQ(eval_text(binary(BinOp::Union, s, set_lit({fx::lit(5)}))), Value::set({1, 2, 5}));
    EXPECT_EQ(eval_text(binary(BinOp::Minus, s, set_lit({fx::lit(1)}))), Value::set({2}));
    EXPECT_EQ(eval_text(binary(BinOp::In, fx::lit(2), s)), Value(true));
    EXPECT_EQ(eval_text(unary(UnOp::Size, s)), Value(2));
}

TEST(Eval, DanglingReferencesAreErrors) {
    Configuration cfg;
    cfg.add_motif("main");
    EXPECT_THROW(evaluate(expr::var(expr::id_ref(9), "x"), {cfg}), EvalError);
    EXPECT_THROW(evaluate(expr::var_ref("c"), {cfg}), EvalError);
    cfg.add_instance("main", instantiate(fx::ms_slave_type(), 9));
    EXPECT_THROW(evaluate(expr::var(expr::id_ref(9), "nope"), {cfg}), EvalError);
    EXPECT_THROW(evaluate(expr::address(expr::id_ref(9)), {cfg}), EvalError);
}

TEST(Eval, BindingsResolveVariables) {
    Configuration cfg;
    cfg.add_motif("main");
    cfg.add_instance("main", instantiate(fx::ms_slave_type(), 9));
    Bindings env{{"s", 9}};
    EXPECT_EQ(evaluate(expr::var("s", "mem"), {cfg, nullptr, &env}), Value(9));
}

TEST(Configuration, FreshIdsSkipUsedOnes) {
    Configuration cfg;
    cfg.add_motif("main");
    cfg.add_instance("main", instantiate(fx::ms_slave_type(), 1));
    cfg.add_instance("main", instantiate(fx::ms_slave_type(), 2));
    EXPECT_EQ(cfg.fresh_id(), 3);
    EXPECT_EQ(cfg.fresh_id(), 4);
}

TEST(Configuration, WellFormednessChecks) {
    fx::SmallMS ms;
    EXPECT_NO_THROW(ms.cfg.check_well_formed());
    ms.cfg.motif("main").instances.at(1).location = "nowhere";
    EXPECT_THROW(ms.cfg.check_well_formed(), ModelError);
}

// fire(·, ∅) is the identity and fire never touches valuations, for every
// reachable location combination of the small system.
TEST(FireProperty, PreservesInstancesAndValuations) {
    fx::SmallMS ms;
    std::vector<Interaction> all;
    for_each_interaction(ms.universe, [&](const Interaction& a) { all.push_back(a); });
    for (const auto& a : all) {
        auto inst = ms.cfg.motif("main").instances;
        bool enabled = true;
        for (const auto& p : a) {
            auto ps = enabled_ports(inst.at(p.instance));
            enabled = enabled && std::find(ps.begin(), ps.end(), p) != ps.end();
        }
        if (!enabled) {
            EXPECT_THROW(fire(inst, a), SemanticsError);
            continue;
        }
        fire(inst, a);
        ASSERT_EQ(inst.size(), 3u);
        for (const auto& [id, i] : inst) {
            EXPECT_EQ(i.valuation, ms.cfg.motif("main").instances.at(id).valuation);
            for (const auto& p : enabled_ports(i)) EXPECT_TRUE(i.type->has_port(p.name));
        }
    }
}
