#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dream/core/configuration.hpp"
#include "dream/pilops/term.hpp"

namespace dream {

enum class Quantifier { Forall, Exists };

struct DeclItem {
    Quantifier quantifier = Quantifier::Forall;
    std::string var;
    std::string type;
    std::string motif;  // empty: the motif the term belongs to
    SourcePos pos;
};

using Declaration = std::vector<DeclItem>;

enum class MacroKind { Require, Accept, AtMost, AtLeast, Unique, Exactly };

inline const char* macro_name(MacroKind k) {
    switch (k) {
        case MacroKind::Require: return "Require";
        case MacroKind::Accept: return "Accept";
        case MacroKind::AtMost: return "AtMost";
        case MacroKind::AtLeast: return "AtLeast";
        case MacroKind::Unique: return "Unique";
        case MacroKind::Exactly: return "Exactly";
    }
    return "?";
}

inline bool macro_counts(MacroKind k) {
    return k == MacroKind::AtMost || k == MacroKind::AtLeast || k == MacroKind::Exactly;
}

/// One `q^j` item of a macro with its binding `B[j]`.
struct MacroItem {
    std::string port;
    std::string type;
    std::string index;
};

/// Appendix constraint attached to the local port `anchor_type.anchor_port`.
struct MacroConstraint {
    MacroKind kind = MacroKind::Require;
    std::int64_t k = 1;
    std::string anchor_type;
    std::string anchor_port;
    std::vector<MacroItem> items;
    ExprPtr psi;  // over the index variables and `self`; null means true
    SourcePos pos;
};

enum class CoordKind { Lifted, Quantified, And, Or, Restriction, Macro };

struct CoordTerm;
using CoordPtr = std::shared_ptr<const CoordTerm>;

/// First-order coordination term.
struct CoordTerm {
    CoordKind kind = CoordKind::Lifted;
    TermPtr body;                 // Lifted, Quantified
    Declaration decls;            // Quantified
    std::vector<CoordPtr> kids;   // And, Or
    std::int64_t bound = 0;       // Restriction
    std::string type;             // Restriction
    std::string port;             // Restriction; empty means every port of the type
    MacroConstraint macro;        // Macro
    SourcePos pos;
};

namespace coord {

inline CoordPtr make(CoordTerm t) { return std::make_shared<const CoordTerm>(std::move(t)); }

inline CoordPtr lifted(TermPtr body) {
    CoordTerm t;
    t.kind = CoordKind::Lifted;
    t.body = std::move(body);
    return make(std::move(t));
}
inline CoordPtr quantified(Declaration decls, TermPtr body) {
    CoordTerm t;
    t.kind = CoordKind::Quantified;
    t.decls = std::move(decls);
    t.body = std::move(body);
    return make(std::move(t));
}
inline CoordPtr nary(CoordKind kind, std::vector<CoordPtr> kids) {
    std::vector<CoordPtr> flat;
    for (auto& k : kids) {
        if (k->kind == kind) flat.insert(flat.end(), k->kids.begin(), k->kids.end());
        else flat.push_back(std::move(k));
    }
    if (flat.size() == 1) return flat.front();
    CoordTerm t;
    t.kind = kind;
    t.kids = std::move(flat);
    return make(std::move(t));
}
inline CoordPtr all(std::vector<CoordPtr> kids) { return nary(CoordKind::And, std::move(kids)); }
inline CoordPtr any(std::vector<CoordPtr> kids) { return nary(CoordKind::Or, std::move(kids)); }
inline CoordPtr restriction(std::int64_t n, std::string type, std::string port = {}) {
    CoordTerm t;
    t.kind = CoordKind::Restriction;
    t.bound = n;
    t.type = std::move(type);
    t.port = std::move(port);
    return make(std::move(t));
}
inline CoordPtr macro(MacroConstraint mc) {
    CoordTerm t;
    t.kind = CoordKind::Macro;
    t.pos = mc.pos;
    t.macro = std::move(mc);
    return make(std::move(t));
}

inline DeclItem forall(std::string var, std::string type, std::string motif = {}) {
    return {Quantifier::Forall, std::move(var), std::move(type), std::move(motif), {}};
}
inline DeclItem exists(std::string var, std::string type, std::string motif = {}) {
    return {Quantifier::Exists, std::move(var), std::move(type), std::move(motif), {}};
}

}  // namespace coord

// ---------------------------------------------------------------------------
// Well-formedness

namespace detail {

inline void unbound_in(const std::vector<InstanceTerm>& vars, const std::set<std::string>& bound,
                       const SourcePos& fallback, std::vector<Diagnostic>& out) {
    std::set<std::string> reported;
    for (const auto& v : vars) {
        if (bound.count(v.var) || !reported.insert(v.var).second) continue;
        out.push_back({v.pos.known() ? v.pos : fallback,
                       "component variable '" + v.var + "' is not bound by any declaration"});
    }
}

inline void check_into(const CoordPtr& t, std::vector<Diagnostic>& out) {
    switch (t->kind) {
        case CoordKind::Lifted:
        case CoordKind::Quantified: {
            std::set<std::string> bound;
            for (const auto& d : t->decls)
                if (!bound.insert(d.var).second)
                    out.push_back({d.pos, "component variable '" + d.var + "' declared twice"});
            std::vector<InstanceTerm> vars;
            collect_vars(t->body, vars);
            unbound_in(vars, bound, t->pos, out);
            break;
        }
        case CoordKind::And:
        case CoordKind::Or:
            for (const auto& k : t->kids) check_into(k, out);
            break;
        case CoordKind::Restriction:
            if (t->bound < 0) out.push_back({t->pos, "restriction bound must be non-negative"});
            break;
        case CoordKind::Macro: {
            const auto& mc = t->macro;
            if (macro_counts(mc.kind) && mc.k < 1)
                out.push_back({mc.pos, std::string(macro_name(mc.kind)) + " needs k >= 1"});
            if (mc.items.empty()) out.push_back({mc.pos, "macro without port items"});
            std::set<std::string> bound{"self"};
            for (const auto& it : mc.items)
                if (!bound.insert(it.index).second)
                    out.push_back({mc.pos, "index variable '" + it.index + "' used twice"});
            if (mc.psi) {
                if (mentions_ports(mc.psi)) out.push_back({mc.pos, "macro predicate must not mention ports"});
                std::vector<InstanceTerm> vars;
                collect_vars(mc.psi, vars);
                unbound_in(vars, bound, mc.pos, out);
            }
            break;
        }
    }
}

}  // namespace detail

/// Reports every component variable not bound by its enclosing declaration,
/// plus malformed restriction/macro parameters.
inline std::vector<Diagnostic> check_well_formed(const CoordPtr& t) {
    std::vector<Diagnostic> out;
    detail::check_into(t, out);
    return out;
}

// ---------------------------------------------------------------------------
// Expansion

/// Context for expanding a term against a configuration.
struct ExpandContext {
    const Configuration& cfg;
    std::string motif;                                  // default motif of declarations
    const std::map<std::string, TypePtr>* types = nullptr;  // for unknown-type checks
};

namespace detail {

inline void check_type(const ExpandContext& ctx, const std::string& type) {
    if (ctx.types && !ctx.types->count(type)) throw ModelError("unknown component type " + type);
}

inline const std::string& decl_motif(const ExpandContext& ctx, const std::string& m) {
    const std::string& name = m.empty() ? ctx.motif : m;
    if (!ctx.cfg.find_motif(name)) throw ModelError("unknown motif '" + name + "'");
    return name;
}

inline TermPtr expand_items(const ExpandContext& ctx, const Declaration& decls, std::size_t i, const TermPtr& body) {
    if (i == decls.size()) return body;
    const DeclItem& d = decls[i];
    check_type(ctx, d.type);
    std::vector<TermPtr> parts;
    for (InstanceId id : ctx.cfg.instances_of(decl_motif(ctx, d.motif), d.type))
        parts.push_back(expand_items(ctx, decls, i + 1, substitute(body, d.var, id)));
    return d.quantifier == Quantifier::Forall ? term::all(std::move(parts)) : term::any(std::move(parts));
}

inline const ComponentType& type_of(const ExpandContext& ctx, const std::string& name) {
    if (ctx.types) {
        auto it = ctx.types->find(name);
        if (it == ctx.types->end()) throw ModelError("unknown component type " + name);
        return *it->second;
    }
    for (const auto& m : ctx.cfg.motifs)
        for (const auto& [id, inst] : m.instances)
            if (inst.type->name == name) return *inst.type;
    throw ModelError("unknown component type " + name);
}

}  // namespace detail

/// Restriction AtMost(n)(b.p): at most n ports named p of b-instances (any
/// port of b when p is empty) take part. Carries no operations.
inline TermPtr expand_restriction(std::int64_t n, const std::string& type, const std::string& port,
                                  const ExpandContext& ctx) {
    if (n < 0) throw ModelError("restriction bound must be non-negative");
    const std::string& m = detail::decl_motif(ctx, {});
    auto ids = ctx.cfg.instances_of(m, type);
    if (ctx.types || !ids.empty()) {
        const ComponentType& t = detail::type_of(ctx, type);
        if (!port.empty() && !t.has_port(port)) throw ModelError("type " + type + " has no port " + port);
    }
    std::vector<PortRef> ports;
    for (InstanceId id : ids) {
        const ComponentInstance& inst = ctx.cfg.instance(id);
        if (!port.empty()) ports.push_back({InstanceTerm::concrete(id), port});
        else
            for (const auto& p : inst.type->ports) ports.push_back({InstanceTerm::concrete(id), p});
    }
    if (static_cast<std::int64_t>(ports.size()) <= n) return term::neutral();
    return term::rule(pil::at_most(n, std::move(ports)));
}

/// Quantifier-free formula of a macro for the given anchor instance.
inline FormulaPtr expand_macro(const MacroConstraint& mc, InstanceId anchor, const ExpandContext& ctx) {
    const std::string& m = detail::decl_motif(ctx, {});
    const std::size_t n = mc.items.size();
    if (n == 0) throw ModelError(std::string(macro_name(mc.kind)) + " without port items");
    std::vector<std::vector<InstanceId>> domain(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& it = mc.items[i];
        const ComponentType& t = detail::type_of(ctx, it.type);
        if (!t.has_port(it.port)) throw ModelError("type " + it.type + " has no port " + it.port);
        domain[i] = ctx.cfg.instances_of(m, it.type);
    }
    EvalScope scope{ctx.cfg, ctx.cfg.find_motif(m)};
    ExprPtr psi = mc.psi ? substitute(mc.psi, "self", anchor) : nullptr;

    // Enumerate every tuple (j_1..j_n) and judge Ψ on the current state.
    std::vector<std::pair<std::vector<InstanceId>, bool>> tuples;
    std::vector<std::size_t> digit(n, 0);
    bool empty_domain = false;
    for (const auto& d : domain) empty_domain = empty_domain || d.empty();
    while (!empty_domain) {
        std::vector<InstanceId> tup(n);
        ExprPtr e = psi;
        for (std::size_t i = 0; i < n; ++i) {
            tup[i] = domain[i][digit[i]];
            if (e) e = substitute(e, mc.items[i].index, tup[i]);
        }
        tuples.emplace_back(std::move(tup), e ? evaluate_bool(e, scope) : true);
        std::size_t i = 0;
        for (; i < n; ++i) {
            if (++digit[i] < domain[i].size()) break;
            digit[i] = 0;
        }
        if (i == n) break;
    }

    auto lit = [&](InstanceId id, const std::string& port) { return PortRef{InstanceTerm::concrete(id), port}; };
    auto is_anchor = [&](InstanceId id, const std::string& port) { return id == anchor && port == mc.anchor_port; };

    // Per item i: E_i, the instances completing some tuple that satisfies Ψ,
    // and every instance of B_i. Counting macros constrain the number of
    // q_i-participants once some member of E_i takes part through q_i.
    auto eligible_ports = [&](std::size_t i) {
        std::set<InstanceId> ids;
        for (const auto& [tup, ok] : tuples)
            if (ok) ids.insert(tup[i]);
        std::vector<PortRef> out;
        for (auto id : ids) out.push_back(lit(id, mc.items[i].port));
        return out;
    };
    auto trigger = [&](std::size_t i) {
        std::vector<FormulaPtr> any;
        for (const auto& p : eligible_ports(i)) any.push_back(pil::port(p));
        return pil::disj(std::move(any));
    };
    auto all_ports = [&](std::size_t i) {
        std::vector<PortRef> out;
        for (auto id : domain[i]) out.push_back(lit(id, mc.items[i].port));
        return out;
    };
    auto at_most = [&](std::int64_t k) {
        std::vector<FormulaPtr> parts;
        for (std::size_t i = 0; i < n; ++i) {
            auto ports = all_ports(i);
            if (static_cast<std::int64_t>(ports.size()) <= k || eligible_ports(i).empty()) continue;
            parts.push_back(pil::implies(trigger(i), pil::at_most(k, std::move(ports))));
        }
        return pil::conj(std::move(parts));
    };
    auto at_least = [&](std::int64_t k) {
        std::vector<FormulaPtr> parts;
        for (std::size_t i = 0; i < n; ++i) {
            if (k <= 1 || eligible_ports(i).empty()) continue;
            parts.push_back(pil::implies(trigger(i), pil::negate(pil::at_most(k - 1, all_ports(i)))));
        }
        return pil::conj(std::move(parts));
    };

    switch (mc.kind) {
        case MacroKind::Require: {
            std::vector<FormulaPtr> alts;
            for (const auto& [tup, ok] : tuples) {
                if (!ok) continue;
                std::vector<FormulaPtr> lits;
                for (std::size_t i = 0; i < n; ++i) lits.push_back(pil::port(lit(tup[i], mc.items[i].port)));
                alts.push_back(pil::conj(std::move(lits)));
            }
            return pil::disj(std::move(alts));
        }
        case MacroKind::Accept: {
            std::set<std::pair<std::string, std::string>> listed;
            for (const auto& it : mc.items) listed.insert({it.type, it.port});
            std::vector<FormulaPtr> parts;
            std::set<std::pair<InstanceId, std::string>> forbidden;
            for (const auto& [id, inst] : ctx.cfg.motif(m).instances)
                for (const auto& p : inst.type->ports)
                    if (!listed.count({inst.type->name, p}) && !is_anchor(id, p)) forbidden.insert({id, p});
            for (const auto& [tup, ok] : tuples) {
                if (ok) continue;
                for (std::size_t i = 0; i < n; ++i)
                    if (!is_anchor(tup[i], mc.items[i].port)) forbidden.insert({tup[i], mc.items[i].port});
            }
            for (const auto& [id, p] : forbidden) parts.push_back(pil::negate(pil::port(id, p)));
            return pil::conj(std::move(parts));
        }
        case MacroKind::AtMost: return at_most(mc.k);
        case MacroKind::AtLeast: return at_least(mc.k);
        case MacroKind::Unique: return at_most(1);
        case MacroKind::Exactly: return pil::conj(at_most(mc.k), at_least(mc.k));
    }
    return pil::truth();
}

/// Lowering of a macro: a conjunctive term on the anchor port for every
/// anchor-type instance, with no operations.
inline TermPtr lower_macro(const MacroConstraint& mc, const ExpandContext& ctx) {
    const std::string& m = detail::decl_motif(ctx, {});
    const ComponentType& t = detail::type_of(ctx, mc.anchor_type);
    if (!t.has_port(mc.anchor_port)) throw ModelError("type " + mc.anchor_type + " has no port " + mc.anchor_port);
    std::vector<TermPtr> parts;
    for (InstanceId id : ctx.cfg.instances_of(m, mc.anchor_type))
        parts.push_back(conjunctive_term(Port{id, mc.anchor_port}, expand_macro(mc, id, ctx), {}));
    return term::all(std::move(parts));
}

/// Declaration expansion against the current configuration: ∀ becomes `&`
/// and ∃ becomes `|` over the declared type's instances in the motif.
inline TermPtr expand_declarations(const CoordPtr& t, const ExpandContext& ctx) {
    switch (t->kind) {
        case CoordKind::Lifted: return t->body;
        case CoordKind::Quantified: return detail::expand_items(ctx, t->decls, 0, t->body);
        case CoordKind::And:
        case CoordKind::Or: {
            std::vector<TermPtr> parts;
            for (const auto& k : t->kids) parts.push_back(expand_declarations(k, ctx));
            return t->kind == CoordKind::And ? term::all(std::move(parts)) : term::any(std::move(parts));
        }
        case CoordKind::Restriction: return expand_restriction(t->bound, t->type, t->port, ctx);
        case CoordKind::Macro: return lower_macro(t->macro, ctx);
    }
    return term::neutral();
}

// ---------------------------------------------------------------------------
// Evaluation under bindings

/// Satisfaction and ops(·) of a coordination term for one interaction.
struct CoordOutcome {
    bool sat = false;
    OperationSet ops;
};

namespace detail {

inline OperationSet bind_ops(const OperationSet& ops, const Bindings& env) {
    if (ops.empty()) return ops;
    OperationSet out = ops;
    for (const auto& [var, id] : env) out = substitute(out, var, id);
    return out;
}

inline CoordOutcome eval_term(const Interaction& a, const EvalScope& scope, const TermPtr& t) {
    TermOutcome r = evaluate_term(a, scope, t);
    if (scope.env) r.ops = bind_ops(r.ops, *scope.env);
    return {r.sat, std::move(r.ops)};
}

inline CoordOutcome eval_items(const Interaction& a, const ExpandContext& ctx, const MotifState* motif,
                               const CoordTerm& t, std::size_t i, Bindings& env) {
    if (i == t.decls.size()) return eval_term(a, EvalScope{ctx.cfg, motif, &env}, t.body);
    const DeclItem& d = t.decls[i];
    check_type(ctx, d.type);
    const bool forall = d.quantifier == Quantifier::Forall;
    CoordOutcome acc{forall, {}};
    for (InstanceId id : ctx.cfg.instances_of(decl_motif(ctx, d.motif), d.type)) {
        env.emplace_back(d.var, id);
        CoordOutcome r = eval_items(a, ctx, motif, t, i + 1, env);
        env.pop_back();
        if (forall && !r.sat) return {};
        acc.sat = acc.sat || r.sat;
        acc.ops.merge(r.ops);
    }
    return acc;
}

}  // namespace detail

/// Same answer as pilops_satisfies/ops_of on expand_declarations(t, ctx), but
/// quantifiers are walked with bindings instead of building the expansion.
inline CoordOutcome coord_eval(const Interaction& a, const CoordPtr& t, const ExpandContext& ctx) {
    const MotifState* motif = ctx.cfg.find_motif(ctx.motif);
    switch (t->kind) {
        case CoordKind::Lifted: return detail::eval_term(a, EvalScope{ctx.cfg, motif}, t->body);
        case CoordKind::Quantified: {
            Bindings env;
            return detail::eval_items(a, ctx, motif, *t, 0, env);
        }
        case CoordKind::And:
        case CoordKind::Or: {
            const bool conj = t->kind == CoordKind::And;
            CoordOutcome acc{conj, {}};
            for (const auto& k : t->kids) {
                CoordOutcome r = coord_eval(a, k, ctx);
                if (conj && !r.sat) return {};
                acc.sat = acc.sat || r.sat;
                acc.ops.merge(r.ops);
            }
            return acc;
        }
        case CoordKind::Restriction:
            return detail::eval_term(a, EvalScope{ctx.cfg, motif},
                                     expand_restriction(t->bound, t->type, t->port, ctx));
        case CoordKind::Macro: return detail::eval_term(a, EvalScope{ctx.cfg, motif}, lower_macro(t->macro, ctx));
    }
    return {};
}

}  // namespace dream
