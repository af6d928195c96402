#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dream/core/eval.hpp"
#include "dream/pilops/operation.hpp"

namespace dream {

/// An operation whose operands were evaluated against the snapshot.
struct ResolvedOp {
    enum class Kind { AssignVar, AssignNode, AddNode, AddEdge, Move, Migrate, Create, Delete, RemoveNode, RemoveEdge };

    Kind kind = Kind::AssignVar;
    std::string motif;  // map / motif affected (target motif for Migrate)
    InstanceId inst = 0;
    std::string name;   // variable, attribute or type name
    NodeId node;
    NodeId node2;
    Value value;

    /// Conflict key: two ops with the same non-empty key write the same target.
    [[nodiscard]] std::string target() const {
        switch (kind) {
            case Kind::AssignVar: return "var #" + std::to_string(inst) + "." + name;
            case Kind::AssignNode: return "node " + motif + to_string(node) + "." + name;
            case Kind::Move:
            case Kind::Migrate: return "pos #" + std::to_string(inst);
            default: return {};
        }
    }

    [[nodiscard]] std::string text() const {
        switch (kind) {
            case Kind::AssignVar: return "#" + std::to_string(inst) + "." + name + " := " + to_string(value);
            case Kind::AssignNode: return motif + to_string(node) + "." + name + " := " + to_string(value);
            case Kind::AddNode: return "addNode(" + motif + to_string(node) + ")";
            case Kind::AddEdge: return "addEdge(" + motif + to_string(node) + ", " + to_string(node2) + ")";
            case Kind::Move: return "move(#" + std::to_string(inst) + ", " + to_string(node) + ")";
            case Kind::Migrate:
                return "migrate(#" + std::to_string(inst) + ", " + motif + ", " + to_string(node) + ")";
            case Kind::Create: return "create(" + name + ", " + motif + to_string(node) + ")";
            case Kind::Delete: return "delete(#" + std::to_string(inst) + ")";
            case Kind::RemoveNode: return "removeNode(" + motif + to_string(node) + ")";
            case Kind::RemoveEdge: return "removeEdge(" + motif + to_string(node) + ", " + to_string(node2) + ")";
        }
        return "?";
    }

    /// Application category: assignments, additions, moves/migrations,
    /// creations, deletions/removals.
    [[nodiscard]] int category() const {
        switch (kind) {
            case Kind::AssignVar:
            case Kind::AssignNode: return 0;
            case Kind::AddNode:
            case Kind::AddEdge: return 1;
            case Kind::Move:
            case Kind::Migrate: return 2;
            case Kind::Create: return 3;
            default: return 4;
        }
    }
};

/// Application options.
struct ApplyOptions {
    /// Enumerate every application order instead of the fixed category order.
    bool all_orders = false;
    /// Guard against factorial blow-up in all_orders mode.
    std::size_t max_permuted_ops = 8;
};

namespace detail {

inline NodeId node_operand(const ExprPtr& e, const EvalScope& scope, const MotifState& m) {
    NodeId n = m.map.normalize(evaluate(e, scope).as_node());
    return n;
}

inline void resolve_into(const OperationPtr& o, const EvalScope& scope, const std::string& motif_name,
                         std::vector<ResolvedOp>& out) {
    using K = ResolvedOp::Kind;
    const Configuration& cfg = scope.cfg;
    auto here = [&]() -> const MotifState& { return cfg.motif(motif_name); };
    ResolvedOp r;
    switch (o->kind) {
        case OpKind::Conditional: {
            const OperationSet& branch = evaluate_bool(o->cond, scope) ? o->then_ops : o->else_ops;
            for (const auto& k : branch) resolve_into(k, scope, motif_name, out);
            return;
        }
        case OpKind::Assign: {
            const ExprPtr& t = o->target;
            InstanceId id = evaluate(t->kids[0], scope).as_instance();
            Value v = evaluate(o->args[0], scope);
            if (t->kind == ExprKind::Var) {
                const ComponentInstance& inst = cfg.instance(id);
                const VariableDecl* decl = inst.type->variable(t->name);
                if (!decl)
                    throw EvalError("instance #" + std::to_string(id) + " of type " + inst.type->name +
                                    " has no variable '" + t->name + "'");
                r.kind = K::AssignVar;
                r.inst = id;
                r.name = t->name;
                r.value = coerce(v, decl->kind);
            } else {
                const MotifState* m = cfg.owner(id);
                if (!m) throw EvalError("dangling reference to instance #" + std::to_string(id));
                auto at = m->address.find(id);
                if (at == m->address.end())
                    throw EvalError("instance #" + std::to_string(id) + " has no address");
                const AttributeDecl* decl = m->map.attribute_decl(t->name);
                if (!decl) throw EvalError("map of motif " + m->name + " has no node attribute '" + t->name + "'");
                r.kind = K::AssignNode;
                r.motif = m->name;
                r.node = at->second;
                r.name = t->name;
                r.value = coerce(v, decl->kind);
            }
            break;
        }
        case OpKind::Create:
            r.kind = K::Create;
            r.motif = motif_name;
            r.name = o->name;
            r.node = node_operand(o->args[0], scope, here());
            break;
        case OpKind::Delete:
            r.kind = K::Delete;
            r.inst = evaluate(o->args[0], scope).as_instance();
            if (!cfg.has_instance(r.inst)) throw EvalError("delete of unknown instance #" + std::to_string(r.inst));
            break;
        case OpKind::AddNode:
        case OpKind::RemoveNode:
            r.kind = o->kind == OpKind::AddNode ? K::AddNode : K::RemoveNode;
            r.motif = motif_name;
            r.node = node_operand(o->args[0], scope, here());
            break;
        case OpKind::AddEdge:
        case OpKind::RemoveEdge:
            r.kind = o->kind == OpKind::AddEdge ? K::AddEdge : K::RemoveEdge;
            r.motif = motif_name;
            r.node = node_operand(o->args[0], scope, here());
            r.node2 = node_operand(o->args[1], scope, here());
            break;
        case OpKind::Move: {
            r.kind = K::Move;
            r.inst = evaluate(o->args[0], scope).as_instance();
            const MotifState* m = cfg.owner(r.inst);
            if (!m) throw EvalError("move of unknown instance #" + std::to_string(r.inst));
            r.motif = m->name;
            r.node = node_operand(o->args[1], scope, *m);
            break;
        }
        case OpKind::Migrate: {
            r.kind = K::Migrate;
            r.inst = evaluate(o->args[0], scope).as_instance();
            if (!cfg.has_instance(r.inst)) throw EvalError("migrate of unknown instance #" + std::to_string(r.inst));
            r.motif = o->name;
            r.node = node_operand(o->args[1], scope, cfg.motif(o->name));
            break;
        }
    }
    out.push_back(std::move(r));
}

}  // namespace detail

/// Evaluates every operand of Δ against the snapshot `scope`. Conditionals
/// are flattened into the chosen branch; identical resolved ops collapse.
inline std::vector<ResolvedOp> resolve_ops(const OperationSet& delta, const EvalScope& scope,
                                           const std::string& motif_name) {
    std::vector<ResolvedOp> raw;
    for (const auto& o : delta) detail::resolve_into(o, scope, motif_name, raw);
    std::map<std::string, ResolvedOp> uniq;
    for (auto& r : raw) uniq.emplace(r.text(), std::move(r));
    std::vector<ResolvedOp> out;
    for (auto& [k, r] : uniq) out.push_back(std::move(r));
    return out;
}

/// Applies one resolved operation in place. Strict mode reports missing
/// referents; lenient mode (used when enumerating orders) skips ops whose
/// referent an earlier op removed.
inline void apply_resolved(Configuration& cfg, const ResolvedOp& r,
                           const std::map<std::string, TypePtr>* types = nullptr, bool lenient = false) {
    using K = ResolvedOp::Kind;
    auto gone = [&](const std::string& what) {
        if (lenient) return;
        throw EvalError(what);
    };
    switch (r.kind) {
        case K::AssignVar: {
            ComponentInstance* inst = cfg.find_instance(r.inst);
            if (!inst) return gone("assignment to removed instance #" + std::to_string(r.inst));
            inst->valuation[r.name] = r.value;
            return;
        }
        case K::AssignNode: {
            MotifState& m = cfg.motif(r.motif);
            if (!m.map.contains(r.node)) return gone("assignment to removed node " + to_string(r.node));
            m.map.set_attribute(r.node, r.name, r.value);
            return;
        }
        case K::AddNode: cfg.motif(r.motif).map.add_node(r.node); return;
        case K::AddEdge: {
            MotifState& m = cfg.motif(r.motif);
            if (lenient && (!m.map.contains(r.node) || !m.map.contains(r.node2))) return;
            m.map.add_edge(r.node, r.node2);
            return;
        }
        case K::Move: {
            MotifState* m = cfg.owner(r.inst);
            if (!m) return gone("move of removed instance #" + std::to_string(r.inst));
            if (!m->map.contains(r.node))
                throw EvalError("move of #" + std::to_string(r.inst) + " to missing node " + to_string(r.node));
            m->address[r.inst] = r.node;
            return;
        }
        case K::Migrate: {
            MotifState* from = cfg.owner(r.inst);
            if (!from) return gone("migration of removed instance #" + std::to_string(r.inst));
            MotifState& to = cfg.motif(r.motif);
            if (!to.map.contains(r.node))
                throw EvalError("migration of #" + std::to_string(r.inst) + " to missing node " + to_string(r.node) +
                                " of motif " + to.name);
            ComponentInstance inst = std::move(from->instances.at(r.inst));
            from->instances.erase(r.inst);
            from->address.erase(r.inst);
            to.instances.emplace(r.inst, std::move(inst));
            to.address[r.inst] = r.node;
            return;
        }
        case K::Create: {
            if (!types) throw EvalError("create(" + r.name + ", ...) needs the system's component types");
            auto it = types->find(r.name);
            if (it == types->end()) throw EvalError("create of unknown component type " + r.name);
            MotifState& m = cfg.motif(r.motif);
            if (!m.map.contains(r.node)) {
                if (lenient) return;
                throw EvalError("create(" + r.name + ") at missing node " + to_string(r.node));
            }
            InstanceId id = cfg.fresh_id();
            cfg.add_instance(r.motif, instantiate(it->second, id, &cfg), r.node);
            return;
        }
        case K::Delete: {
            MotifState* m = cfg.owner(r.inst);
            if (!m) return gone("delete of removed instance #" + std::to_string(r.inst));
            m->instances.erase(r.inst);
            m->address.erase(r.inst);
            return;
        }
        case K::RemoveNode: {
            MotifState& m = cfg.motif(r.motif);
            if (!m.map.contains(r.node)) return gone("removeNode of missing node " + to_string(r.node));
            // Instances mapped to the node go with it.
            for (auto it = m.address.begin(); it != m.address.end();) {
                if (it->second == r.node) {
                    m.instances.erase(it->first);
                    it = m.address.erase(it);
                } else {
                    ++it;
                }
            }
            m.map.remove_node(r.node);
            return;
        }
        case K::RemoveEdge: cfg.motif(r.motif).map.remove_edge(r.node, r.node2); return;
    }
}

/// Resolved ops grouped for application: conflict-free ops plus, per
/// conflicted target, the distinct alternatives.
struct OpPlan {
    std::vector<ResolvedOp> fixed;
    std::vector<std::vector<ResolvedOp>> choices;  // one group per conflicted target, key order

    [[nodiscard]] std::uint64_t outcome_count() const {
        std::uint64_t n = 1;
        for (const auto& c : choices) {
            if (n > (std::uint64_t{1} << 40) / c.size()) return std::uint64_t{1} << 40;
            n *= c.size();
        }
        return n;
    }
};

inline OpPlan plan_ops(const std::vector<ResolvedOp>& ops) {
    std::map<std::string, std::vector<ResolvedOp>> by_target;
    OpPlan plan;
    for (const auto& r : ops) {
        std::string t = r.target();
        if (t.empty()) plan.fixed.push_back(r);
        else by_target[t].push_back(r);
    }
    for (auto& [t, alts] : by_target) {
        if (alts.size() == 1) plan.fixed.push_back(std::move(alts.front()));
        else plan.choices.push_back(std::move(alts));
    }
    return plan;
}

/// Applies `fixed` plus one alternative per conflicted target, in category order.
inline void apply_choice(Configuration& cfg, const OpPlan& plan, const std::vector<std::size_t>& pick,
                         const std::map<std::string, TypePtr>* types) {
    std::vector<const ResolvedOp*> seq;
    for (const auto& r : plan.fixed) seq.push_back(&r);
    for (std::size_t i = 0; i < plan.choices.size(); ++i) seq.push_back(&plan.choices[i][pick[i]]);
    std::stable_sort(seq.begin(), seq.end(), [](const ResolvedOp* a, const ResolvedOp* b) {
        if (a->category() != b->category()) return a->category() < b->category();
        return a->text() < b->text();
    });
    for (const ResolvedOp* r : seq) apply_resolved(cfg, *r, types);
}

/// Every distinct outcome of applying resolved ops to `post`. In the default
/// mode only write-write conflicts branch; with all_orders every permutation
/// is tried.
inline std::vector<Configuration> apply_resolved_all(const Configuration& post, const std::vector<ResolvedOp>& ops,
                                                     const std::map<std::string, TypePtr>* types,
                                                     const ApplyOptions& opts = {}) {
    std::vector<Configuration> out;
    std::set<std::string> seen;
    auto keep = [&](Configuration&& c) {
        if (seen.insert(c.canonical()).second) out.push_back(std::move(c));
    };
    if (opts.all_orders) {
        if (ops.size() > opts.max_permuted_ops)
            throw LimitError("refusing to enumerate " + std::to_string(ops.size()) + "! application orders");
        std::vector<std::size_t> order(ops.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        do {
            Configuration c = post;
            for (auto i : order) apply_resolved(c, ops[i], types, /*lenient=*/true);
            keep(std::move(c));
        } while (std::next_permutation(order.begin(), order.end()));
        return out;
    }
    OpPlan plan = plan_ops(ops);
    if (plan.outcome_count() >= (std::uint64_t{1} << 20))
        throw LimitError("too many conflicting writes to enumerate outcomes");
    std::vector<std::size_t> pick(plan.choices.size(), 0);
    while (true) {
        Configuration c = post;
        apply_choice(c, plan, pick, types);
        keep(std::move(c));
        std::size_t i = 0;
        for (; i < pick.size(); ++i) {
            if (++pick[i] < plan.choices[i].size()) break;
            pick[i] = 0;
        }
        if (i == pick.size()) break;
    }
    return out;
}

/// apply_ops(Δ, Γ): operands read from Γ, writes land in copies of Γ.
inline std::vector<Configuration> apply_ops(const OperationSet& delta, const Configuration& cfg,
                                            const std::string& motif_name,
                                            const std::map<std::string, TypePtr>* types = nullptr,
                                            const ApplyOptions& opts = {}) {
    const MotifState* m = cfg.find_motif(motif_name);
    auto resolved = resolve_ops(delta, EvalScope{cfg, m}, motif_name);
    return apply_resolved_all(cfg, resolved, types, opts);
}

}  // namespace dream
