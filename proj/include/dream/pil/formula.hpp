#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "dream/core/component.hpp"
#include "dream/core/eval.hpp"

namespace dream {

/// Port literal inside a formula: instance term (possibly a component
/// variable) plus port name.
struct PortRef {
    InstanceTerm inst;
    std::string port;

    [[nodiscard]] std::string str() const { return inst.str() + "." + port; }
    [[nodiscard]] Port concrete() const {
        if (inst.is_var()) throw EvalError("unbound component variable '" + inst.var + "' in port " + str());
        return {*inst.id, port};
    }
};

enum class FormulaKind {
    True,
    False,
    Port,
    Pred,     // state predicate
    Not,
    And,      // n-ary
    Or,       // n-ary, derived
    Implies,  // derived
    Idle,     // derived: no port of the instance participates
    AtMost,   // derived cardinality: at most `bound` of `ports` participate
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    FormulaKind kind = FormulaKind::True;
    PortRef port;                // Port; Idle uses port.inst only
    ExprPtr pred;                // Pred
    std::vector<FormulaPtr> kids;
    std::int64_t bound = 0;      // AtMost
    std::vector<PortRef> ports;  // AtMost
};

namespace pil {

inline FormulaPtr make(Formula f) { return std::make_shared<const Formula>(std::move(f)); }

inline FormulaPtr truth() {
    static const FormulaPtr t = make({FormulaKind::True, {}, {}, {}, 0, {}});
    return t;
}
inline FormulaPtr falsity() {
    static const FormulaPtr f = make({FormulaKind::False, {}, {}, {}, 0, {}});
    return f;
}
inline FormulaPtr constant(bool b) { return b ? truth() : falsity(); }

inline FormulaPtr port(PortRef p) {
    Formula f;
    f.kind = FormulaKind::Port;
    f.port = std::move(p);
    return make(std::move(f));
}
inline FormulaPtr port(InstanceId id, std::string name) {
    return port(PortRef{InstanceTerm::concrete(id), std::move(name)});
}
inline FormulaPtr port(const Port& p) { return port(p.instance, p.name); }
inline FormulaPtr port(const std::string& var, std::string name) {
    return port(PortRef{InstanceTerm::variable(var), std::move(name)});
}

inline FormulaPtr pred(ExprPtr e) {
    if (e->kind == ExprKind::Literal && e->literal.is(ValueKind::Bool)) return constant(e->literal.as_bool());
    Formula f;
    f.kind = FormulaKind::Pred;
    f.pred = std::move(e);
    return make(std::move(f));
}

inline FormulaPtr idle(InstanceTerm inst) {
    Formula f;
    f.kind = FormulaKind::Idle;
    f.port.inst = std::move(inst);
    return make(std::move(f));
}

inline FormulaPtr negate(FormulaPtr a) {
    Formula f;
    f.kind = FormulaKind::Not;
    f.kids = {std::move(a)};
    return make(std::move(f));
}

inline FormulaPtr nary(FormulaKind kind, std::vector<FormulaPtr> kids) {
    // Units are dropped and zeros short-circuit.
    const FormulaKind unit = kind == FormulaKind::And ? FormulaKind::True : FormulaKind::False;
    const FormulaKind zero = kind == FormulaKind::And ? FormulaKind::False : FormulaKind::True;
    std::vector<FormulaPtr> flat;
    for (auto& k : kids) {
        if (k->kind == zero) return k;
        if (k->kind == unit) continue;
        if (k->kind == kind) flat.insert(flat.end(), k->kids.begin(), k->kids.end());
        else flat.push_back(std::move(k));
    }
    if (flat.empty()) return kind == FormulaKind::And ? truth() : falsity();
    if (flat.size() == 1) return flat.front();
    Formula f;
    f.kind = kind;
    f.kids = std::move(flat);
    return make(std::move(f));
}
inline FormulaPtr conj(std::vector<FormulaPtr> kids) { return nary(FormulaKind::And, std::move(kids)); }
inline FormulaPtr disj(std::vector<FormulaPtr> kids) { return nary(FormulaKind::Or, std::move(kids)); }
inline FormulaPtr conj(FormulaPtr a, FormulaPtr b) { return conj(std::vector<FormulaPtr>{std::move(a), std::move(b)}); }
inline FormulaPtr disj(FormulaPtr a, FormulaPtr b) { return disj(std::vector<FormulaPtr>{std::move(a), std::move(b)}); }

inline FormulaPtr implies(FormulaPtr a, FormulaPtr b) {
    Formula f;
    f.kind = FormulaKind::Implies;
    f.kids = {std::move(a), std::move(b)};
    return make(std::move(f));
}

inline FormulaPtr at_most(std::int64_t n, std::vector<PortRef> ports) {
    Formula f;
    f.kind = FormulaKind::AtMost;
    f.bound = n;
    f.ports = std::move(ports);
    return make(std::move(f));
}

/// Monomial: positive ports required, negative ports inhibited.
inline FormulaPtr monomial(const std::vector<Port>& positive, const std::vector<Port>& negative) {
    std::vector<FormulaPtr> lits;
    for (const auto& p : positive) lits.push_back(port(p));
    for (const auto& p : negative) lits.push_back(negate(port(p)));
    return conj(std::move(lits));
}

}  // namespace pil

// ---------------------------------------------------------------------------
// Printing (DSL guard syntax)

inline int formula_precedence(FormulaKind k) {
    switch (k) {
        case FormulaKind::Implies: return 0;
        case FormulaKind::Or: return 1;
        case FormulaKind::And: return 2;
        default: return 6;
    }
}

inline std::string to_string(const FormulaPtr& f, int parent_prec = -1) {
    switch (f->kind) {
        case FormulaKind::True: return "true";
        case FormulaKind::False: return "false";
        case FormulaKind::Port: return f->port.str();
        case FormulaKind::Pred: return to_string(f->pred, parent_prec < 0 ? -1 : parent_prec);
        case FormulaKind::Idle: return "idle(" + f->port.inst.str() + ")";
        case FormulaKind::Not: return "!" + to_string(f->kids[0], 6);
        case FormulaKind::AtMost: {
            std::string s = "atmost(" + std::to_string(f->bound);
            for (const auto& p : f->ports) s += ", " + p.str();
            return s + ")";
        }
        case FormulaKind::And:
        case FormulaKind::Or:
        case FormulaKind::Implies: {
            int p = formula_precedence(f->kind);
            const char* sep = f->kind == FormulaKind::And ? " && " : f->kind == FormulaKind::Or ? " || " : " => ";
            std::string s;
            for (std::size_t i = 0; i < f->kids.size(); ++i) {
                if (i) s += sep;
                int kp = p + 1;
                if (f->kind == FormulaKind::Implies) kp = i == 0 ? p + 1 : p;
                s += to_string(f->kids[i], kp);
            }
            return p < parent_prec ? "(" + s + ")" : s;
        }
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Satisfaction

namespace detail {

inline InstanceId checked_id(const InstanceTerm& t, const EvalScope& scope) {
    auto id = scope.resolve(t);
    if (!id) throw EvalError("unbound component variable '" + t.var + "' in formula");
    if (!scope.cfg.has_instance(*id)) throw EvalError("dangling reference to instance #" + std::to_string(*id));
    return *id;
}

}  // namespace detail

/// a ⊨Γ Ψ. Port literals and idle literals must name existing instances.
inline bool pil_satisfies(const Interaction& a, const EvalScope& scope, const FormulaPtr& f) {
    switch (f->kind) {
        case FormulaKind::True: return true;
        case FormulaKind::False: return false;
        case FormulaKind::Port:
            return a.contains({detail::checked_id(f->port.inst, scope), f->port.port});
        case FormulaKind::Pred: return evaluate_bool(f->pred, scope);
        case FormulaKind::Not: return !pil_satisfies(a, scope, f->kids[0]);
        case FormulaKind::And:
            for (const auto& k : f->kids)
                if (!pil_satisfies(a, scope, k)) return false;
            return true;
        case FormulaKind::Or:
            for (const auto& k : f->kids)
                if (pil_satisfies(a, scope, k)) return true;
            return false;
        case FormulaKind::Implies:
            return !pil_satisfies(a, scope, f->kids[0]) || pil_satisfies(a, scope, f->kids[1]);
        case FormulaKind::Idle: return !a.participates(detail::checked_id(f->port.inst, scope));
        case FormulaKind::AtMost: {
            std::int64_t n = 0;
            for (const auto& p : f->ports)
                if (a.contains({detail::checked_id(p.inst, scope), p.port})) ++n;
            return n <= f->bound;
        }
    }
    return false;
}

inline bool pil_satisfies(const Interaction& a, const Configuration& cfg, const FormulaPtr& f) {
    return pil_satisfies(a, EvalScope{cfg}, f);
}

// ---------------------------------------------------------------------------
// Brute-force enumeration

inline constexpr std::size_t kDefaultPortBound = 24;

/// Every interaction over `universe` with at most one port per instance
/// (the empty interaction included), in lexicographic mixed-radix order.
template <typename Fn>
void for_each_interaction(const std::vector<Port>& universe, Fn&& fn, std::size_t bound = kDefaultPortBound) {
    std::set<Port> uniq(universe.begin(), universe.end());
    if (uniq.size() > bound)
        throw LimitError("port universe of " + std::to_string(uniq.size()) + " ports exceeds the bound of " +
                         std::to_string(bound));
    std::map<InstanceId, std::vector<Port>> by_instance;
    for (const auto& p : uniq) by_instance[p.instance].push_back(p);
    std::vector<const std::vector<Port>*> groups;
    for (const auto& [id, ports] : by_instance) groups.push_back(&ports);
    std::vector<std::size_t> digit(groups.size(), 0);  // 0 = idle, i = ports[i-1]
    while (true) {
        Interaction a;
        for (std::size_t g = 0; g < groups.size(); ++g)
            if (digit[g]) a.insert((*groups[g])[digit[g] - 1]);
        fn(a);
        std::size_t g = 0;
        for (; g < groups.size(); ++g) {
            if (++digit[g] <= groups[g]->size()) break;
            digit[g] = 0;
        }
        if (g == groups.size()) return;
    }
}

/// All models of Ψ among the interactions over P. State predicates are judged
/// against `scope`.
inline std::set<Interaction> models_of(const FormulaPtr& f, const std::vector<Port>& universe,
                                       const EvalScope& scope) {
    std::set<Interaction> out;
    for_each_interaction(universe, [&](const Interaction& a) {
        if (pil_satisfies(a, scope, f)) out.insert(a);
    });
    return out;
}

inline std::set<Interaction> models_of(const FormulaPtr& f, const std::vector<Port>& universe,
                                       const Configuration& cfg) {
    return models_of(f, universe, EvalScope{cfg});
}

/// Characteristic formula β of a set of interactions over P: the disjunction
/// of the full monomials. The empty interaction ({idle}) yields the all-negative
/// monomial; the empty set yields false.
inline FormulaPtr beta(const std::set<Interaction>& gamma, const std::vector<Port>& universe) {
    std::set<Port> uni(universe.begin(), universe.end());
    std::vector<FormulaPtr> terms;
    for (const auto& a : gamma) {
        for (const auto& p : a)
            if (!uni.count(p)) throw ModelError("beta: port " + to_string(p) + " is outside the universe");
        std::vector<Port> pos, neg;
        for (const auto& p : uni) (a.contains(p) ? pos : neg).push_back(p);
        terms.push_back(pil::monomial(pos, neg));
    }
    return pil::disj(std::move(terms));
}

inline FormulaPtr beta(const Interaction& a, const std::vector<Port>& universe) {
    return beta(std::set<Interaction>{a}, universe);
}

/// Ψ[p := value]. Knowing p also fixes the idle literal of p's instance and
/// the count of cardinality constraints mentioning p.
inline FormulaPtr substitute_port(const FormulaPtr& f, const Port& p, bool value) {
    auto is_p = [&](const PortRef& r) { return !r.inst.is_var() && *r.inst.id == p.instance && r.port == p.name; };
    switch (f->kind) {
        case FormulaKind::True:
        case FormulaKind::False:
        case FormulaKind::Pred: return f;
        case FormulaKind::Port: return is_p(f->port) ? pil::constant(value) : f;
        case FormulaKind::Idle:
            if (value && !f->port.inst.is_var() && *f->port.inst.id == p.instance) return pil::falsity();
            return f;
        case FormulaKind::AtMost: {
            std::vector<PortRef> rest;
            bool hit = false;
            for (const auto& r : f->ports) {
                if (is_p(r)) hit = true;
                else rest.push_back(r);
            }
            if (!hit) return f;
            std::int64_t n = f->bound - (value ? 1 : 0);
            if (n < 0) return pil::falsity();
            return pil::at_most(n, std::move(rest));
        }
        case FormulaKind::Not:
        case FormulaKind::And:
        case FormulaKind::Or:
        case FormulaKind::Implies: {
            Formula copy = *f;
            bool changed = false;
            for (auto& k : copy.kids) {
                auto nk = substitute_port(k, p, value);
                changed = changed || nk != k;
                k = std::move(nk);
            }
            return changed ? pil::make(std::move(copy)) : f;
        }
    }
    return f;
}

/// Conjunctive translation: p ↦ Ψ[p := true] for every p in P.
inline std::map<Port, FormulaPtr> to_conjunctive(const FormulaPtr& f, const std::vector<Port>& universe) {
    std::map<Port, FormulaPtr> out;
    for (const auto& p : universe) out[p] = substitute_port(f, p, true);
    return out;
}

/// The conjunction ⋀ (p ⇒ Ψ_p) of a conjunctive translation.
inline FormulaPtr conjunction_of(const std::map<Port, FormulaPtr>& rules) {
    std::vector<FormulaPtr> parts;
    for (const auto& [p, psi] : rules) parts.push_back(pil::implies(pil::port(p), psi));
    return pil::conj(std::move(parts));
}

/// Replaces component variable `var` by instance `id` everywhere.
inline FormulaPtr substitute(const FormulaPtr& f, const std::string& var, InstanceId id) {
    auto sub_ref = [&](const PortRef& r) {
        if (r.inst.is_var() && r.inst.var == var) return PortRef{InstanceTerm::concrete(id), r.port};
        return r;
    };
    switch (f->kind) {
        case FormulaKind::True:
        case FormulaKind::False: return f;
        case FormulaKind::Port:
        case FormulaKind::Idle: {
            if (!(f->port.inst.is_var() && f->port.inst.var == var)) return f;
            Formula copy = *f;
            copy.port = sub_ref(f->port);
            return pil::make(std::move(copy));
        }
        case FormulaKind::Pred: {
            auto e = substitute(f->pred, var, id);
            return e == f->pred ? f : pil::pred(e);
        }
        case FormulaKind::AtMost: {
            Formula copy = *f;
            for (auto& r : copy.ports) r = sub_ref(r);
            return pil::make(std::move(copy));
        }
        default: {
            Formula copy = *f;
            bool changed = false;
            for (auto& k : copy.kids) {
                auto nk = substitute(k, var, id);
                changed = changed || nk != k;
                k = std::move(nk);
            }
            return changed ? pil::make(std::move(copy)) : f;
        }
    }
}

inline void collect_vars(const FormulaPtr& f, std::vector<InstanceTerm>& out) {
    switch (f->kind) {
        case FormulaKind::Port:
        case FormulaKind::Idle:
            if (f->port.inst.is_var()) out.push_back(f->port.inst);
            break;
        case FormulaKind::Pred: collect_vars(f->pred, out); break;
        case FormulaKind::AtMost:
            for (const auto& r : f->ports)
                if (r.inst.is_var()) out.push_back(r.inst);
            break;
        default:
            for (const auto& k : f->kids) collect_vars(k, out);
    }
}

/// Rewrites derived connectives into the core {port, π, ¬, ∧}; cardinality
/// constraints become pigeonhole conjunctions. Mostly useful for testing.
inline FormulaPtr to_core(const FormulaPtr& f) {
    switch (f->kind) {
        case FormulaKind::True:
        case FormulaKind::False:
        case FormulaKind::Port:
        case FormulaKind::Pred: return f;
        case FormulaKind::Not: return pil::negate(to_core(f->kids[0]));
        case FormulaKind::And: {
            std::vector<FormulaPtr> ks;
            for (const auto& k : f->kids) ks.push_back(to_core(k));
            return pil::conj(std::move(ks));
        }
        case FormulaKind::Or: {
            std::vector<FormulaPtr> ks;
            for (const auto& k : f->kids) ks.push_back(pil::negate(to_core(k)));
            return pil::negate(pil::conj(std::move(ks)));
        }
        case FormulaKind::Implies:
            return pil::negate(pil::conj(to_core(f->kids[0]), pil::negate(to_core(f->kids[1]))));
        case FormulaKind::Idle:
            throw ModelError("idle(" + f->port.inst.str() + ") needs the instance's port set; use expand_idle");
        case FormulaKind::AtMost: {
            // No (bound + 1)-subset of the ports may be jointly present.
            std::vector<FormulaPtr> clauses;
            const std::size_t n = f->ports.size();
            const std::size_t k = static_cast<std::size_t>(f->bound) + 1;
            if (k > n) return pil::truth();
            std::vector<std::size_t> idx(k);
            for (std::size_t i = 0; i < k; ++i) idx[i] = i;
            while (true) {
                std::vector<FormulaPtr> lits;
                for (auto i : idx) lits.push_back(pil::port(f->ports[i]));
                clauses.push_back(pil::negate(pil::conj(std::move(lits))));
                std::size_t i = k;
                while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
                if (i == 0) break;
                ++idx[i - 1];
                for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
            }
            return pil::conj(std::move(clauses));
        }
    }
    return f;
}

/// Expands idle(c) literals as ⋀ ¬p over the given port names of c's type.
inline FormulaPtr expand_idle(const FormulaPtr& f, const Configuration& cfg) {
    if (f->kind == FormulaKind::Idle) {
        InstanceId id = detail::checked_id(f->port.inst, EvalScope{cfg});
        std::vector<FormulaPtr> lits;
        for (const auto& p : cfg.instance(id).type->ports) lits.push_back(pil::negate(pil::port(id, p)));
        return pil::conj(std::move(lits));
    }
    if (f->kids.empty()) return f;
    Formula copy = *f;
    for (auto& k : copy.kids) k = expand_idle(k, cfg);
    return pil::make(std::move(copy));
}

/// Splits a parsed guard expression into a formula: port-free boolean
/// subtrees become state predicates, connectives above ports become formula
/// connectives.
inline FormulaPtr formula_from_expr(const ExprPtr& e) {
    if (!mentions_ports(e)) return pil::pred(e);
    switch (e->kind) {
        case ExprKind::PortLit: {
            const ExprPtr& owner = e->kids[0];
            if (owner->kind != ExprKind::Instance)
                throw ModelError("port " + to_string(e) + " must be owned by a component variable");
            return pil::port(PortRef{owner->inst, e->name});
        }
        case ExprKind::Idle: {
            const ExprPtr& owner = e->kids[0];
            if (owner->kind != ExprKind::Instance)
                throw ModelError("idle() expects a component variable");
            return pil::idle(owner->inst);
        }
        case ExprKind::Unary:
            if (e->unop == UnOp::Not) return pil::negate(formula_from_expr(e->kids[0]));
            break;
        case ExprKind::Binary:
            switch (e->binop) {
                case BinOp::And: return pil::conj(formula_from_expr(e->kids[0]), formula_from_expr(e->kids[1]));
                case BinOp::Or: return pil::disj(formula_from_expr(e->kids[0]), formula_from_expr(e->kids[1]));
                case BinOp::Implies:
                    return pil::implies(formula_from_expr(e->kids[0]), formula_from_expr(e->kids[1]));
                default: break;
            }
            break;
        default: break;
    }
    throw ModelError("port literal used as a value in " + to_string(e) +
                     (e->pos.known() ? " at " + e->pos.str() : ""));
}

}  // namespace dream
