#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dream/core/value.hpp"

namespace dream {

/// Designates a component instance inside an expression or port literal:
/// either a concrete identifier or a (not yet substituted) component variable.
struct InstanceTerm {
    std::optional<InstanceId> id;
    std::string var;
    SourcePos pos;

    static InstanceTerm concrete(InstanceId i) { return {i, {}, {}}; }
    static InstanceTerm variable(std::string name, SourcePos p = {}) {
        return {std::nullopt, std::move(name), p};
    }
    [[nodiscard]] bool is_var() const { return !id.has_value(); }
    [[nodiscard]] std::string str() const { return id ? "#" + std::to_string(*id) : var; }
};

enum class ExprKind {
    Literal,
    Instance,  // component variable / concrete instance used as a value
    Var,       // <instance>.x
    Address,   // at(<instance>)
    NodeAttr,  // at(<instance>).x
    Unary,
    Binary,
    Distance,
    SetLit,
    VecLit,
    // Only produced by the parser before guards are split into formulas.
    PortLit,
    Idle,
};

enum class UnOp { Not, Neg, Size };
enum class BinOp {
    Add, Sub, Mul, Div, Mod,
    Eq, Ne, Lt, Le, Gt, Ge,
    And, Or, Implies,
    In, Union, Minus,
};

inline const char* op_text(UnOp op) {
    switch (op) {
        case UnOp::Not: return "!";
        case UnOp::Neg: return "-";
        case UnOp::Size: return "size";
    }
    return "?";
}

inline const char* op_text(BinOp op) {
    switch (op) {
        case BinOp::Add: return "+";
        case BinOp::Sub: return "-";
        case BinOp::Mul: return "*";
        case BinOp::Div: return "/";
        case BinOp::Mod: return "%";
        case BinOp::Eq: return "==";
        case BinOp::Ne: return "!=";
        case BinOp::Lt: return "<";
        case BinOp::Le: return "<=";
        case BinOp::Gt: return ">";
        case BinOp::Ge: return ">=";
        case BinOp::And: return "&&";
        case BinOp::Or: return "||";
        case BinOp::Implies: return "=>";
        case BinOp::In: return "in";
        case BinOp::Union: return "union";
        case BinOp::Minus: return "minus";
    }
    return "?";
}

inline int precedence(BinOp op) {
    switch (op) {
        case BinOp::Implies: return 0;
        case BinOp::Or: return 1;
        case BinOp::And: return 2;
        case BinOp::Eq: case BinOp::Ne: case BinOp::Lt: case BinOp::Le:
        case BinOp::Gt: case BinOp::Ge: case BinOp::In: return 3;
        case BinOp::Add: case BinOp::Sub: case BinOp::Union: case BinOp::Minus: return 4;
        case BinOp::Mul: case BinOp::Div: case BinOp::Mod: return 5;
    }
    return 0;
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression node. Children are shared; substitution rebuilds only
/// the paths that change.
struct Expr {
    ExprKind kind = ExprKind::Literal;
    Value literal;
    InstanceTerm inst;           // Instance
    std::string name;            // Var / NodeAttr attribute, PortLit port
    UnOp unop = UnOp::Not;
    BinOp binop = BinOp::Add;
    std::vector<ExprPtr> kids;   // operands; Var/Address/NodeAttr/PortLit/Idle: kids[0] is the instance
    SourcePos pos;
};

namespace expr {

inline ExprPtr make(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

inline ExprPtr lit(Value v) {
    Expr e;
    e.kind = ExprKind::Literal;
    e.literal = std::move(v);
    return make(std::move(e));
}
inline ExprPtr instance(InstanceTerm t) {
    Expr e;
    e.kind = ExprKind::Instance;
    e.pos = t.pos;
    e.inst = std::move(t);
    return make(std::move(e));
}
inline ExprPtr var_ref(const std::string& comp_var) { return instance(InstanceTerm::variable(comp_var)); }
inline ExprPtr id_ref(InstanceId id) { return instance(InstanceTerm::concrete(id)); }

inline ExprPtr var(ExprPtr owner, std::string name) {
    Expr e;
    e.kind = ExprKind::Var;
    e.name = std::move(name);
    e.kids = {std::move(owner)};
    return make(std::move(e));
}
inline ExprPtr var(const std::string& comp_var, std::string name) {
    return var(var_ref(comp_var), std::move(name));
}
inline ExprPtr address(ExprPtr owner) {
    Expr e;
    e.kind = ExprKind::Address;
    e.kids = {std::move(owner)};
    return make(std::move(e));
}
inline ExprPtr node_attr(ExprPtr owner, std::string name) {
    Expr e;
    e.kind = ExprKind::NodeAttr;
    e.name = std::move(name);
    e.kids = {std::move(owner)};
    return make(std::move(e));
}
inline ExprPtr unary(UnOp op, ExprPtr a) {
    Expr e;
    e.kind = ExprKind::Unary;
    e.unop = op;
    e.kids = {std::move(a)};
    return make(std::move(e));
}
inline ExprPtr binary(BinOp op, ExprPtr a, ExprPtr b) {
    Expr e;
    e.kind = ExprKind::Binary;
    e.binop = op;
    e.kids = {std::move(a), std::move(b)};
    return make(std::move(e));
}
inline ExprPtr distance(ExprPtr a, ExprPtr b) {
    Expr e;
    e.kind = ExprKind::Distance;
    e.kids = {std::move(a), std::move(b)};
    return make(std::move(e));
}
inline ExprPtr set_lit(std::vector<ExprPtr> items) {
    Expr e;
    e.kind = ExprKind::SetLit;
    e.kids = std::move(items);
    return make(std::move(e));
}
inline ExprPtr vec_lit(std::vector<ExprPtr> items) {
    Expr e;
    e.kind = ExprKind::VecLit;
    e.kids = std::move(items);
    return make(std::move(e));
}
inline ExprPtr port_lit(ExprPtr owner, std::string port) {
    Expr e;
    e.kind = ExprKind::PortLit;
    e.name = std::move(port);
    e.kids = {std::move(owner)};
    return make(std::move(e));
}
inline ExprPtr idle(ExprPtr owner) {
    Expr e;
    e.kind = ExprKind::Idle;
    e.kids = {std::move(owner)};
    return make(std::move(e));
}

inline ExprPtr eq(ExprPtr a, ExprPtr b) { return binary(BinOp::Eq, std::move(a), std::move(b)); }
inline ExprPtr ne(ExprPtr a, ExprPtr b) { return binary(BinOp::Ne, std::move(a), std::move(b)); }
inline ExprPtr lt(ExprPtr a, ExprPtr b) { return binary(BinOp::Lt, std::move(a), std::move(b)); }
inline ExprPtr add(ExprPtr a, ExprPtr b) { return binary(BinOp::Add, std::move(a), std::move(b)); }
inline ExprPtr land(ExprPtr a, ExprPtr b) { return binary(BinOp::And, std::move(a), std::move(b)); }
inline ExprPtr lor(ExprPtr a, ExprPtr b) { return binary(BinOp::Or, std::move(a), std::move(b)); }

}  // namespace expr

// ---------------------------------------------------------------------------
// Printing

inline std::string to_string(const ExprPtr& e, int parent_prec = -1);

namespace detail {

inline std::string print_owner(const ExprPtr& owner) {
    if (owner->kind == ExprKind::Instance) return owner->inst.str();
    return "(" + to_string(owner) + ")";
}

}  // namespace detail

inline std::string to_string(const ExprPtr& e, int parent_prec) {
    switch (e->kind) {
        case ExprKind::Literal: return to_string(e->literal);
        case ExprKind::Instance: return e->inst.str();
        case ExprKind::Var: return detail::print_owner(e->kids[0]) + "." + e->name;
        case ExprKind::Address: return "at(" + to_string(e->kids[0], -1) + ")";
        case ExprKind::NodeAttr: return "at(" + to_string(e->kids[0], -1) + ")." + e->name;
        case ExprKind::PortLit: return detail::print_owner(e->kids[0]) + "." + e->name;
        case ExprKind::Idle: return "idle(" + to_string(e->kids[0], -1) + ")";
        case ExprKind::Unary:
            if (e->unop == UnOp::Size) return "size(" + to_string(e->kids[0], -1) + ")";
            return std::string(op_text(e->unop)) + to_string(e->kids[0], 6);
        case ExprKind::Binary: {
            int p = precedence(e->binop);
            // Left-associative except implication.
            int lp = e->binop == BinOp::Implies ? p + 1 : p;
            int rp = e->binop == BinOp::Implies ? p : p + 1;
            std::string s = to_string(e->kids[0], lp) + " " + op_text(e->binop) + " " +
                            to_string(e->kids[1], rp);
            return p < parent_prec ? "(" + s + ")" : s;
        }
        case ExprKind::Distance:
            return "distance(" + to_string(e->kids[0], -1) + ", " + to_string(e->kids[1], -1) + ")";
        case ExprKind::SetLit:
        case ExprKind::VecLit: {
            std::string s = e->kind == ExprKind::SetLit ? "{" : "[";
            for (std::size_t i = 0; i < e->kids.size(); ++i) {
                if (i) s += ", ";
                s += to_string(e->kids[i], -1);
            }
            return s + (e->kind == ExprKind::SetLit ? "}" : "]");
        }
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Variables and substitution

inline void collect_vars(const ExprPtr& e, std::vector<InstanceTerm>& out) {
    if (e->kind == ExprKind::Instance && e->inst.is_var()) out.push_back(e->inst);
    for (const auto& k : e->kids) collect_vars(k, out);
}

inline bool mentions_ports(const ExprPtr& e) {
    if (e->kind == ExprKind::PortLit || e->kind == ExprKind::Idle) return true;
    for (const auto& k : e->kids)
        if (mentions_ports(k)) return true;
    return false;
}

/// Replaces component variable `var` with the concrete instance `id`.
inline ExprPtr substitute(const ExprPtr& e, const std::string& var, InstanceId id) {
    if (e->kind == ExprKind::Instance) {
        if (e->inst.is_var() && e->inst.var == var) return expr::id_ref(id);
        return e;
    }
    if (e->kids.empty()) return e;
    std::vector<ExprPtr> kids;
    kids.reserve(e->kids.size());
    bool changed = false;
    for (const auto& k : e->kids) {
        kids.push_back(substitute(k, var, id));
        changed = changed || kids.back() != k;
    }
    if (!changed) return e;
    Expr copy = *e;
    copy.kids = std::move(kids);
    return expr::make(std::move(copy));
}

}  // namespace dream
