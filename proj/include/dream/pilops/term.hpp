#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dream/pil/formula.hpp"
#include "dream/pilops/operation.hpp"

namespace dream {

enum class TermKind { Rule, And, Or };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

/// PILOps term: guarded command Ψ → Δ, conjunction `&`, union `|`.
struct Term {
    TermKind kind = TermKind::Rule;
    FormulaPtr guard;            // Rule
    OperationSet ops;            // Rule
    std::vector<TermPtr> kids;   // And / Or, non-empty
};

namespace term {

inline TermPtr make(Term t) { return std::make_shared<const Term>(std::move(t)); }

inline TermPtr rule(FormulaPtr guard, OperationSet ops = {}) {
    Term t;
    t.kind = TermKind::Rule;
    t.guard = std::move(guard);
    t.ops = std::move(ops);
    return make(std::move(t));
}

/// (tt → ∅), the neutral element of `&`.
inline TermPtr neutral() { return rule(pil::truth()); }
/// (ff → ∅), the neutral element of `|`.
inline TermPtr absorbing() { return rule(pil::falsity()); }

inline TermPtr nary(TermKind kind, std::vector<TermPtr> kids) {
    std::vector<TermPtr> flat;
    for (auto& k : kids) {
        if (k->kind == kind) flat.insert(flat.end(), k->kids.begin(), k->kids.end());
        else flat.push_back(std::move(k));
    }
    if (flat.empty()) return kind == TermKind::And ? neutral() : absorbing();
    if (flat.size() == 1) return flat.front();
    Term t;
    t.kind = kind;
    t.kids = std::move(flat);
    return make(std::move(t));
}
inline TermPtr all(std::vector<TermPtr> kids) { return nary(TermKind::And, std::move(kids)); }
inline TermPtr any(std::vector<TermPtr> kids) { return nary(TermKind::Or, std::move(kids)); }
inline TermPtr both(TermPtr a, TermPtr b) { return all({std::move(a), std::move(b)}); }
inline TermPtr either(TermPtr a, TermPtr b) { return any({std::move(a), std::move(b)}); }

}  // namespace term

inline std::string to_string(const TermPtr& t, int parent_prec = -1) {
    switch (t->kind) {
        case TermKind::Rule: {
            std::string s = to_string(t->guard) + " -> " + to_string(t->ops);
            return parent_prec >= 0 ? "(" + s + ")" : s;
        }
        case TermKind::And:
        case TermKind::Or: {
            int p = t->kind == TermKind::And ? 1 : 0;
            std::string s;
            for (std::size_t i = 0; i < t->kids.size(); ++i) {
                if (i) s += t->kind == TermKind::And ? " & " : " | ";
                s += to_string(t->kids[i], p);
            }
            return p < parent_prec || (parent_prec >= 0 && p == parent_prec) ? "(" + s + ")" : s;
        }
    }
    return "?";
}

/// a ⊨Γ Φ.
inline bool pilops_satisfies(const Interaction& a, const EvalScope& scope, const TermPtr& t) {
    switch (t->kind) {
        case TermKind::Rule: return pil_satisfies(a, scope, t->guard);
        case TermKind::And:
            for (const auto& k : t->kids)
                if (!pilops_satisfies(a, scope, k)) return false;
            return true;
        case TermKind::Or:
            for (const auto& k : t->kids)
                if (pilops_satisfies(a, scope, k)) return true;
            return false;
    }
    return false;
}

inline bool pilops_satisfies(const Interaction& a, const Configuration& cfg, const TermPtr& t) {
    return pilops_satisfies(a, EvalScope{cfg}, t);
}

/// Satisfaction and ops(Φ) together, in one pass.
struct TermOutcome {
    bool sat = false;
    OperationSet ops;
};

inline TermOutcome evaluate_term(const Interaction& a, const EvalScope& scope, const TermPtr& t) {
    switch (t->kind) {
        case TermKind::Rule:
            if (pil_satisfies(a, scope, t->guard)) return {true, t->ops};
            return {};
        case TermKind::And: {
            TermOutcome out{true, {}};
            for (const auto& k : t->kids) {
                TermOutcome r = evaluate_term(a, scope, k);
                if (!r.sat) return {};
                out.ops.merge(r.ops);
            }
            return out;
        }
        case TermKind::Or: {
            TermOutcome out;
            for (const auto& k : t->kids) {
                TermOutcome r = evaluate_term(a, scope, k);
                out.sat = out.sat || r.sat;
                out.ops.merge(r.ops);
            }
            return out;
        }
    }
    return {};
}

/// ops(Φ) for interaction a in Γ: a rule contributes Δ when its guard holds,
/// `&` the union only when every conjunct holds, `|` the union of its parts.
inline OperationSet ops_of(const Interaction& a, const EvalScope& scope, const TermPtr& t) {
    return evaluate_term(a, scope, t).ops;
}

inline OperationSet ops_of(const Interaction& a, const Configuration& cfg, const TermPtr& t) {
    return ops_of(a, EvalScope{cfg}, t);
}

// ---------------------------------------------------------------------------
// Normal form

namespace detail {

/// Literals of a guard read as a conjunction, keyed by printed form; the bool
/// is the literal's polarity.
inline std::vector<std::pair<std::string, bool>> conj_literals(const FormulaPtr& g) {
    std::vector<std::pair<std::string, bool>> out;
    auto add = [&](const FormulaPtr& l) {
        if (l->kind == FormulaKind::Not) out.emplace_back(to_string(l->kids[0]), false);
        else out.emplace_back(to_string(l), true);
    };
    if (g->kind == FormulaKind::And)
        for (const auto& k : g->kids) add(k);
    else
        add(g);
    return out;
}

/// Syntactically unsatisfiable: contains false, or a literal and its negation.
inline bool trivially_false(const FormulaPtr& g) {
    if (g->kind == FormulaKind::False) return true;
    auto lits = conj_literals(g);
    for (const auto& [k, pol] : lits) {
        if (k == "false" && pol) return true;
        if (k == "true" && !pol) return true;
        for (const auto& [k2, pol2] : lits)
            if (k == k2 && pol != pol2) return true;
    }
    return false;
}

inline bool syntactically_disjoint(const FormulaPtr& a, const FormulaPtr& b) {
    auto la = conj_literals(a);
    auto lb = conj_literals(b);
    for (const auto& [k, pol] : la)
        for (const auto& [k2, pol2] : lb)
            if (k == k2 && pol != pol2) return true;
    return false;
}

struct FlatRule {
    FormulaPtr guard;
    OperationSet ops;
};

inline std::vector<FlatRule> distribute(const TermPtr& t) {
    switch (t->kind) {
        case TermKind::Rule: return {{t->guard, t->ops}};
        case TermKind::Or: {
            std::vector<FlatRule> out;
            for (const auto& k : t->kids) {
                auto part = distribute(k);
                out.insert(out.end(), part.begin(), part.end());
            }
            return out;
        }
        case TermKind::And: {
            std::vector<FlatRule> acc = {{pil::truth(), {}}};
            for (const auto& k : t->kids) {
                auto part = distribute(k);
                std::vector<FlatRule> next;
                for (const auto& x : acc)
                    for (const auto& y : part) {
                        // Rule fusion: (Ψ1→Δ1) & (Ψ2→Δ2) = (Ψ1∧Ψ2 → Δ1∪Δ2).
                        FlatRule r{pil::conj(x.guard, y.guard), x.ops.united(y.ops)};
                        if (!trivially_false(r.guard)) next.push_back(std::move(r));
                    }
                acc = std::move(next);
            }
            return acc;
        }
    }
    return {};
}

// Atom-level view of a term. Port, predicate and idle literals are treated
// as independent propositions, which is sound for building disjoint rules:
// whatever (a, Γ) is, the atoms take some valuation and exactly one minterm
// matches it.
struct Atoms {
    std::vector<FormulaPtr> list;
    std::map<std::string, std::size_t> index;

    void add(const FormulaPtr& f) {
        auto key = to_string(f);
        if (index.emplace(key, list.size()).second) list.push_back(f);
    }
    void collect(const FormulaPtr& f) {
        switch (f->kind) {
            case FormulaKind::Port:
            case FormulaKind::Pred:
            case FormulaKind::Idle: add(f); return;
            case FormulaKind::AtMost:
                for (const auto& p : f->ports) add(pil::port(p));
                return;
            default:
                for (const auto& k : f->kids) collect(k);
        }
    }
    void collect(const TermPtr& t) {
        if (t->kind == TermKind::Rule) collect(t->guard);
        for (const auto& k : t->kids) collect(k);
    }
    [[nodiscard]] bool value(const FormulaPtr& atom, std::uint32_t mask) const {
        return mask >> index.at(to_string(atom)) & 1;
    }
    [[nodiscard]] bool eval(const FormulaPtr& f, std::uint32_t mask) const {
        switch (f->kind) {
            case FormulaKind::True: return true;
            case FormulaKind::False: return false;
            case FormulaKind::Port:
            case FormulaKind::Pred:
            case FormulaKind::Idle: return value(f, mask);
            case FormulaKind::Not: return !eval(f->kids[0], mask);
            case FormulaKind::And:
                for (const auto& k : f->kids)
                    if (!eval(k, mask)) return false;
                return true;
            case FormulaKind::Or:
                for (const auto& k : f->kids)
                    if (eval(k, mask)) return true;
                return false;
            case FormulaKind::Implies: return !eval(f->kids[0], mask) || eval(f->kids[1], mask);
            case FormulaKind::AtMost: {
                std::int64_t n = 0;
                for (const auto& p : f->ports) n += value(pil::port(p), mask);
                return n <= f->bound;
            }
        }
        return false;
    }
    [[nodiscard]] TermOutcome eval(const TermPtr& t, std::uint32_t mask) const {
        switch (t->kind) {
            case TermKind::Rule:
                if (eval(t->guard, mask)) return {true, t->ops};
                return {};
            case TermKind::And: {
                TermOutcome out{true, {}};
                for (const auto& k : t->kids) {
                    auto r = eval(k, mask);
                    if (!r.sat) return {};
                    out.ops.merge(r.ops);
                }
                return out;
            }
            case TermKind::Or: {
                TermOutcome out;
                for (const auto& k : t->kids) {
                    auto r = eval(k, mask);
                    out.sat = out.sat || r.sat;
                    out.ops.merge(r.ops);
                }
                return out;
            }
        }
        return {};
    }
};

/// Prime implicants of a set of minterms (Quine–McCluskey without the cover
/// step; overlapping cubes are harmless inside one rule).
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> prime_cubes(const std::vector<std::uint32_t>& minterms,
                                                                        std::size_t n) {
    using Cube = std::pair<std::uint32_t, std::uint32_t>;  // (values, care)
    const std::uint32_t all = n == 32 ? ~0u : (1u << n) - 1;
    std::set<Cube> current;
    for (auto m : minterms) current.insert({m, all});
    std::set<Cube> primes;
    while (!current.empty()) {
        std::set<Cube> next;
        std::set<Cube> used;
        for (auto it = current.begin(); it != current.end(); ++it)
            for (auto jt = std::next(it); jt != current.end(); ++jt) {
                if (it->second != jt->second) continue;
                std::uint32_t diff = (it->first ^ jt->first) & it->second;
                if (diff == 0 || (diff & (diff - 1)) != 0) continue;
                next.insert({it->first & ~diff, it->second & ~diff});
                used.insert(*it);
                used.insert(*jt);
            }
        for (const auto& c : current)
            if (!used.count(c)) primes.insert(c);
        current = std::move(next);
    }
    return {primes.begin(), primes.end()};
}

inline constexpr std::size_t kMintermAtomBound = 12;

/// Minterm construction: one rule per distinct ops(Φ) among the satisfying
/// atom valuations, its guard the union of those valuations.
inline TermPtr dnf_by_minterms(const TermPtr& t, const Atoms& atoms) {
    const std::size_t n = atoms.list.size();
    std::vector<std::string> order;
    std::map<std::string, std::pair<OperationSet, std::vector<std::uint32_t>>> groups;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        auto r = atoms.eval(t, mask);
        if (!r.sat) continue;
        auto key = to_string(r.ops);
        auto [it, fresh] = groups.try_emplace(key, r.ops, std::vector<std::uint32_t>{});
        if (fresh) order.push_back(key);
        it->second.second.push_back(mask);
    }
    std::vector<TermPtr> rules;
    for (const auto& key : order) {
        const auto& [ops, minterms] = groups.at(key);
        std::vector<FormulaPtr> cubes;
        for (auto [values, care] : prime_cubes(minterms, n)) {
            std::vector<FormulaPtr> lits;
            for (std::size_t i = 0; i < n; ++i)
                if (care >> i & 1) lits.push_back(values >> i & 1 ? atoms.list[i] : pil::negate(atoms.list[i]));
            cubes.push_back(lits.empty() ? pil::truth() : pil::conj(std::move(lits)));
        }
        rules.push_back(term::rule(pil::disj(std::move(cubes)), ops));
    }
    if (rules.empty()) return term::absorbing();
    if (rules.size() == 1) return rules.front();
    Term out;
    out.kind = TermKind::Or;
    out.kids = std::move(rules);
    return term::make(std::move(out));
}

}  // namespace detail

/// Disjunctive normal form: a union of rules with pairwise disjoint guards.
/// With few distinct literals the rules are read off the atom truth table;
/// otherwise they come from distributivity, rule fusion and the DNF axiom,
/// dropping syntactically unsatisfiable rules.
inline TermPtr to_dnf(const TermPtr& t) {
    detail::Atoms atoms;
    atoms.collect(t);
    if (atoms.list.size() <= detail::kMintermAtomBound) return detail::dnf_by_minterms(t, atoms);

    using detail::FlatRule;
    std::vector<FlatRule> result;
    for (const auto& r : detail::distribute(t)) {
        if (detail::trivially_false(r.guard)) continue;
        std::vector<FlatRule> pending = {r};
        std::vector<FlatRule> next_result;
        for (const auto& e : result) {
            FlatRule rest = e;
            std::vector<FlatRule> next_pending;
            bool rest_dead = false;
            for (const auto& piece : pending) {
                if (rest_dead || detail::syntactically_disjoint(piece.guard, rest.guard)) {
                    next_pending.push_back(piece);
                    continue;
                }
                FlatRule both{pil::conj(piece.guard, rest.guard), piece.ops.united(rest.ops)};
                FlatRule only_piece{pil::conj(piece.guard, pil::negate(rest.guard)), piece.ops};
                FlatRule only_rest{pil::conj(rest.guard, pil::negate(piece.guard)), rest.ops};
                if (!detail::trivially_false(both.guard)) next_result.push_back(std::move(both));
                if (!detail::trivially_false(only_piece.guard)) next_pending.push_back(std::move(only_piece));
                rest = std::move(only_rest);
                rest_dead = detail::trivially_false(rest.guard);
            }
            if (!rest_dead) next_result.push_back(std::move(rest));
            pending = std::move(next_pending);
        }
        next_result.insert(next_result.end(), pending.begin(), pending.end());
        result = std::move(next_result);
    }
    std::vector<TermPtr> rules;
    for (auto& r : result) rules.push_back(term::rule(r.guard, r.ops));
    if (rules.empty()) return term::absorbing();
    if (rules.size() == 1) return rules.front();
    Term out;
    out.kind = TermKind::Or;
    out.kids = std::move(rules);
    return term::make(std::move(out));
}

/// Brute-force equivalence: same satisfaction and same ops(·) for every
/// interaction over P and every supplied configuration.
inline bool equivalent(const TermPtr& a, const TermPtr& b, const std::vector<Port>& universe,
                       const std::vector<const Configuration*>& configs, std::size_t bound = 20) {
    bool ok = true;
    for (const Configuration* cfg : configs) {
        EvalScope scope{*cfg};
        for_each_interaction(
            universe,
            [&](const Interaction& x) {
                if (!ok) return;
                if (pilops_satisfies(x, scope, a) != pilops_satisfies(x, scope, b) ||
                    !(ops_of(x, scope, a) == ops_of(x, scope, b)))
                    ok = false;
            },
            bound);
        if (!ok) return false;
    }
    return ok;
}

inline bool equivalent(const TermPtr& a, const TermPtr& b, const std::vector<Port>& universe,
                       const Configuration& cfg) {
    return equivalent(a, b, universe, std::vector<const Configuration*>{&cfg});
}

/// (¬p → ∅) | (p ∧ Ψp → Δp).
inline TermPtr conjunctive_term(const PortRef& p, const FormulaPtr& psi, const OperationSet& delta) {
    return term::either(term::rule(pil::negate(pil::port(p))), term::rule(pil::conj(pil::port(p), psi), delta));
}

inline TermPtr conjunctive_term(const Port& p, const FormulaPtr& psi, const OperationSet& delta) {
    return conjunctive_term(PortRef{InstanceTerm::concrete(p.instance), p.name}, psi, delta);
}

struct ConjunctiveEntry {
    FormulaPtr psi;
    OperationSet delta;
};

/// The union over all partitions I ∪ J = P of
/// ⋀_{i∈I}(p_i ∧ Ψ_i) ∧ ⋀_{j∈J} ¬p_j → ⋃_{i∈I} Δ_i. Always 2^|P| disjuncts.
inline TermPtr expand_conjunctive(const std::map<Port, ConjunctiveEntry>& terms, const std::vector<Port>& universe) {
    if (universe.size() > kDefaultPortBound)
        throw LimitError("expand_conjunctive over more than " + std::to_string(kDefaultPortBound) + " ports");
    for (const auto& p : universe)
        if (!terms.count(p)) throw ModelError("expand_conjunctive: no entry for port " + to_string(p));
    const std::size_t n = universe.size();
    Term out;
    out.kind = TermKind::Or;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        std::vector<FormulaPtr> lits;
        OperationSet ops;
        for (std::size_t i = 0; i < n; ++i) {
            const Port& p = universe[i];
            if (mask >> i & 1) {
                const auto& e = terms.at(p);
                lits.push_back(pil::port(p));
                lits.push_back(e.psi);
                ops.merge(e.delta);
            } else {
                lits.push_back(pil::negate(pil::port(p)));
            }
        }
        out.kids.push_back(term::rule(pil::conj(std::move(lits)), std::move(ops)));
    }
    if (out.kids.size() == 1) return out.kids.front();
    return term::make(std::move(out));
}

/// & of the conjunctive terms of `terms`.
inline TermPtr conjunction_of(const std::map<Port, ConjunctiveEntry>& terms) {
    std::vector<TermPtr> parts;
    for (const auto& [p, e] : terms) parts.push_back(conjunctive_term(p, e.psi, e.delta));
    return term::all(std::move(parts));
}

inline TermPtr substitute(const TermPtr& t, const std::string& var, InstanceId id) {
    if (t->kind == TermKind::Rule) return term::rule(substitute(t->guard, var, id), substitute(t->ops, var, id));
    Term copy = *t;
    for (auto& k : copy.kids) k = substitute(k, var, id);
    return term::make(std::move(copy));
}

inline void collect_vars(const TermPtr& t, std::vector<InstanceTerm>& out) {
    if (t->kind == TermKind::Rule) {
        collect_vars(t->guard, out);
        collect_vars(t->ops, out);
        return;
    }
    for (const auto& k : t->kids) collect_vars(k, out);
}

/// Number of rules (leaves) in a term.
inline std::size_t rule_count(const TermPtr& t) {
    if (t->kind == TermKind::Rule) return 1;
    std::size_t n = 0;
    for (const auto& k : t->kids) n += rule_count(k);
    return n;
}

}  // namespace dream
