#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dream/core/configuration.hpp"

namespace dream {

/// Component variables bound to instances without rewriting the term.
using Bindings = std::vector<std::pair<std::string, InstanceId>>;

/// Where expressions are evaluated: a configuration, optionally the motif
/// whose map interprets `distance`, and optional variable bindings.
struct EvalScope {
    const Configuration& cfg;
    const MotifState* motif = nullptr;
    const Bindings* env = nullptr;

    /// Instance designated by `t`, or nullopt for an unbound variable.
    [[nodiscard]] std::optional<InstanceId> resolve(const InstanceTerm& t) const {
        if (t.id) return t.id;
        if (env)
            for (auto it = env->rbegin(); it != env->rend(); ++it)
                if (it->first == t.var) return it->second;
        return std::nullopt;
    }
};

namespace detail {

inline const MotifState& owner_or_throw(const Configuration& cfg, InstanceId id) {
    const MotifState* m = cfg.owner(id);
    if (!m) throw EvalError("dangling reference to instance #" + std::to_string(id));
    return *m;
}

inline NodeId address_of(const Configuration& cfg, InstanceId id) {
    const MotifState& m = owner_or_throw(cfg, id);
    auto it = m.address.find(id);
    if (it == m.address.end())
        throw EvalError("instance #" + std::to_string(id) + " has no address in motif " + m.name);
    return it->second;
}

inline Value arith(BinOp op, const Value& a, const Value& b) {
    if (a.is_coords() && b.is_coords()) {
        if (op != BinOp::Add && op != BinOp::Sub)
            throw EvalError(std::string("operator ") + op_text(op) + " is not defined on vectors");
        const auto& x = a.as_coords();
        const auto& y = b.as_coords();
        if (x.size() != y.size()) throw EvalError("vector arithmetic on vectors of different length");
        std::vector<std::int64_t> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = op == BinOp::Add ? x[i] + y[i] : x[i] - y[i];
        // A node shifted by a vector is still a node.
        if (a.is(ValueKind::Node) || b.is(ValueKind::Node)) return Value::node(NodeId(std::move(out)));
        return Value::vec(std::move(out));
    }
    if (a.is_integral() && b.is_integral()) {
        std::int64_t x = a.as_int(), y = b.as_int();
        switch (op) {
            case BinOp::Add: return x + y;
            case BinOp::Sub: return x - y;
            case BinOp::Mul: return x * y;
            case BinOp::Div:
                if (y == 0) throw EvalError("division by zero");
                return x / y;
            case BinOp::Mod:
                if (y == 0) throw EvalError("modulo by zero");
                return ((x % y) + y) % y;
            default: break;
        }
    } else if (a.is_numeric() && b.is_numeric()) {
        double x = a.as_real(), y = b.as_real();
        switch (op) {
            case BinOp::Add: return x + y;
            case BinOp::Sub: return x - y;
            case BinOp::Mul: return x * y;
            case BinOp::Div:
                if (y == 0) throw EvalError("division by zero");
                return x / y;
            case BinOp::Mod: throw EvalError("modulo is defined on integers only");
            default: break;
        }
    }
    throw EvalError(std::string("operator ") + op_text(op) + " is not defined on " +
                    kind_name(a.kind()) + " and " + kind_name(b.kind()));
}

inline bool compare(BinOp op, const Value& a, const Value& b) {
    if (op == BinOp::Eq) return a == b;
    if (op == BinOp::Ne) return !(a == b);
    if (!a.is_numeric() || !b.is_numeric())
        throw EvalError(std::string("ordering ") + op_text(op) + " needs numbers, got " +
                        kind_name(a.kind()) + " and " + kind_name(b.kind()));
    if (a.is_integral() && b.is_integral()) {
        std::int64_t x = a.as_int(), y = b.as_int();
        switch (op) {
            case BinOp::Lt: return x < y;
            case BinOp::Le: return x <= y;
            case BinOp::Gt: return x > y;
            default: return x >= y;
        }
    }
    double x = a.as_real(), y = b.as_real();
    switch (op) {
        case BinOp::Lt: return x < y;
        case BinOp::Le: return x <= y;
        case BinOp::Gt: return x > y;
        default: return x >= y;
    }
}

}  // namespace detail

/// Evaluates `e` in `scope`. Every referenced instance, variable and node must
/// exist; failures raise EvalError.
inline Value evaluate(const ExprPtr& e, const EvalScope& scope) {
    const Configuration& cfg = scope.cfg;
    switch (e->kind) {
        case ExprKind::Literal: return e->literal;
        case ExprKind::Instance:
            if (auto id = scope.resolve(e->inst)) return Value::instance(*id);
            throw EvalError("unbound component variable '" + e->inst.var + "'" +
                            (e->inst.pos.known() ? " at " + e->inst.pos.str() : ""));
        case ExprKind::Var: {
            InstanceId id = evaluate(e->kids[0], scope).as_instance();
            const ComponentInstance& inst = cfg.instance(id);
            auto it = inst.valuation.find(e->name);
            if (it == inst.valuation.end())
                throw EvalError("instance #" + std::to_string(id) + " of type " + inst.type->name +
                                " has no variable '" + e->name + "'");
            return it->second;
        }
        case ExprKind::Address:
            return Value::node(detail::address_of(cfg, evaluate(e->kids[0], scope).as_instance()));
        case ExprKind::NodeAttr: {
            InstanceId id = evaluate(e->kids[0], scope).as_instance();
            const MotifState& m = detail::owner_or_throw(cfg, id);
            return m.map.attribute(detail::address_of(cfg, id), e->name);
        }
        case ExprKind::Unary: {
            Value v = evaluate(e->kids[0], scope);
            switch (e->unop) {
                case UnOp::Not: return !v.as_bool();
                case UnOp::Neg:
                    if (v.is_coords()) {
                        auto c = v.as_coords();
                        for (auto& x : c) x = -x;
                        return v.is(ValueKind::Node) ? Value::node(NodeId(c)) : Value::vec(c);
                    }
                    if (v.is(ValueKind::Real)) return -v.as_real();
                    return -v.as_int();
                case UnOp::Size:
                    if (v.is(ValueKind::Set)) return static_cast<std::int64_t>(v.as_set().size());
                    if (v.is_coords()) return static_cast<std::int64_t>(v.as_coords().size());
                    throw EvalError(std::string("size() of ") + kind_name(v.kind()));
            }
            break;
        }
        case ExprKind::Binary: {
            switch (e->binop) {
                case BinOp::And:
                    return evaluate(e->kids[0], scope).as_bool() && evaluate(e->kids[1], scope).as_bool();
                case BinOp::Or:
                    return evaluate(e->kids[0], scope).as_bool() || evaluate(e->kids[1], scope).as_bool();
                case BinOp::Implies:
                    return !evaluate(e->kids[0], scope).as_bool() || evaluate(e->kids[1], scope).as_bool();
                default: break;
            }
            Value a = evaluate(e->kids[0], scope);
            Value b = evaluate(e->kids[1], scope);
            switch (e->binop) {
                case BinOp::Add: case BinOp::Sub: case BinOp::Mul: case BinOp::Div: case BinOp::Mod:
                    return detail::arith(e->binop, a, b);
                case BinOp::Eq: case BinOp::Ne: case BinOp::Lt: case BinOp::Le: case BinOp::Gt: case BinOp::Ge:
                    return detail::compare(e->binop, a, b);
                case BinOp::In: return b.as_set().count(a.as_int()) > 0;
                case BinOp::Union: {
                    auto s = a.as_set();
                    s.insert(b.as_set().begin(), b.as_set().end());
                    return Value::set(std::move(s));
                }
                case BinOp::Minus: {
                    auto s = a.as_set();
                    for (auto x : b.as_set()) s.erase(x);
                    return Value::set(std::move(s));
                }
                default: break;
            }
            break;
        }
        case ExprKind::Distance: {
            NodeId a = evaluate(e->kids[0], scope).as_node();
            NodeId b = evaluate(e->kids[1], scope).as_node();
            if (scope.motif) return scope.motif->map.distance(a, b);
            return Map::explicit_map().distance(a, b);
        }
        case ExprKind::SetLit: {
            std::set<std::int64_t> s;
            for (const auto& k : e->kids) s.insert(evaluate(k, scope).as_int());
            return Value::set(std::move(s));
        }
        case ExprKind::VecLit: {
            std::vector<std::int64_t> v;
            for (const auto& k : e->kids) v.push_back(evaluate(k, scope).as_int());
            return Value::vec(std::move(v));
        }
        case ExprKind::PortLit:
        case ExprKind::Idle:
            throw EvalError("port literal " + to_string(e) + " used where a value is expected");
    }
    throw EvalError("cannot evaluate " + to_string(e));
}

inline bool evaluate_bool(const ExprPtr& e, const EvalScope& scope) { return evaluate(e, scope).as_bool(); }

/// A fresh instance of `type` with identifier `id`, at the initial location.
/// Initializers may mention `self`; anything touching runtime state is an
/// error. When `cfg` is given, `id` must be unused there.
inline ComponentInstance instantiate(const TypePtr& type, InstanceId id, const Configuration* cfg = nullptr) {
    if (cfg && cfg->has_instance(id))
        throw ModelError("duplicate instance identifier #" + std::to_string(id));
    ComponentInstance inst{id, type, type->initial, {}};
    static const Configuration empty;
    for (const auto& v : type->variables) {
        if (!v.init) {
            inst.valuation[v.name] = default_value(v.kind);
            continue;
        }
        Value init;
        try {
            init = evaluate(substitute(v.init, "self", id), {empty});
        } catch (const EvalError& err) {
            throw ModelError("initializer of " + type->name + "." + v.name + " (" + to_string(v.init) +
                             ") cannot be evaluated without runtime state: " + err.what());
        }
        inst.valuation[v.name] = coerce(init, v.kind);
    }
    return inst;
}

}  // namespace dream
