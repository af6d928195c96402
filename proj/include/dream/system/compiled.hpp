#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <vector>

#include "dream/foil/coord.hpp"

namespace dream {

/// Bit assignment for the ports enabled in one configuration. At most 64
/// ports can be indexed.
class PortIndex {
public:
    PortIndex() = default;
    explicit PortIndex(const std::vector<Port>& ports) {
        if (ports.size() > 64) throw LimitError("more than 64 enabled ports cannot be indexed");
        for (std::size_t i = 0; i < ports.size(); ++i) {
            bits_[ports[i]] = i;
            ports_.push_back(ports[i]);
            instance_mask_[ports[i].instance] |= std::uint64_t{1} << i;
        }
    }

    [[nodiscard]] std::size_t size() const { return ports_.size(); }
    [[nodiscard]] const std::vector<Port>& ports() const { return ports_; }

    /// Bit of `p`, or -1 when p is not enabled.
    [[nodiscard]] int bit(const Port& p) const {
        auto it = bits_.find(p);
        return it == bits_.end() ? -1 : static_cast<int>(it->second);
    }
    [[nodiscard]] std::uint64_t instance_mask(InstanceId id) const {
        auto it = instance_mask_.find(id);
        return it == instance_mask_.end() ? 0 : it->second;
    }

    [[nodiscard]] Interaction decode(std::uint64_t mask) const {
        Interaction a;
        for (std::size_t i = 0; i < ports_.size(); ++i)
            if (mask >> i & 1) a.insert(ports_[i]);
        return a;
    }
    [[nodiscard]] std::uint64_t encode(const Interaction& a) const {
        std::uint64_t m = 0;
        for (const auto& p : a) {
            int b = bit(p);
            if (b < 0) throw SemanticsError("port " + to_string(p) + " is not enabled");
            m |= std::uint64_t{1} << b;
        }
        return m;
    }

private:
    std::map<Port, std::size_t> bits_;
    std::vector<Port> ports_;
    std::map<InstanceId, std::uint64_t> instance_mask_;
};

/// A term's satisfaction relation specialised to one configuration: state
/// predicates are folded to constants and port literals become bit tests.
/// Only ports of `members` are visible (the motif-restricted interaction).
class CompiledTerm {
public:
    CompiledTerm() = default;

    CompiledTerm(const TermPtr& t, const EvalScope& scope, const PortIndex& index,
                 const std::set<InstanceId>& members)
        : scope_(&scope), index_(&index), members_(&members) {
        root_ = term(t);
        scope_ = nullptr;
        index_ = nullptr;
        members_ = nullptr;
    }

    /// Compiles a coordination term directly: quantifiers are unrolled with
    /// bindings, so the expanded term is never built.
    CompiledTerm(const CoordPtr& t, const ExpandContext& ctx, const PortIndex& index,
                 const std::set<InstanceId>& members)
        : index_(&index), members_(&members) {
        EvalScope scope{ctx.cfg, ctx.cfg.find_motif(ctx.motif), &env_};
        scope_ = &scope;
        root_ = coord(t, ctx);
        scope_ = nullptr;
        index_ = nullptr;
        members_ = nullptr;
    }

    [[nodiscard]] bool eval(std::uint64_t a) const { return eval_node(root_, a); }
    [[nodiscard]] std::size_t size() const { return nodes_.size(); }
    [[nodiscard]] bool constant() const { return nodes_[root_].op == Op::Const; }

private:
    enum class Op { Const, Any, None, CountLe, Not, And, Or };
    struct Node {
        Op op = Op::Const;
        bool value = false;
        std::uint64_t mask = 0;
        std::int64_t n = 0;
        std::vector<int> kids;
    };

    int add(Node n) {
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }
    int constant_node(bool v) {
        Node n;
        n.op = Op::Const;
        n.value = v;
        return add(std::move(n));
    }
    [[nodiscard]] bool is_const(int i, bool v) const { return nodes_[i].op == Op::Const && nodes_[i].value == v; }

    int negate(int k) {
        if (nodes_[k].op == Op::Const) return constant_node(!nodes_[k].value);
        if (nodes_[k].op == Op::Not) return nodes_[k].kids[0];
        Node n;
        n.op = Op::Not;
        n.kids = {k};
        return add(std::move(n));
    }

    int combine(Op op, const std::vector<int>& kids) {
        const bool zero = op == Op::Or;  // And: false absorbs; Or: true absorbs
        Node n;
        n.op = op;
        for (int k : kids) {
            if (is_const(k, zero)) return constant_node(zero);
            if (is_const(k, !zero)) continue;
            n.kids.push_back(k);
        }
        if (n.kids.empty()) return constant_node(!zero);
        if (n.kids.size() == 1) return n.kids.front();
        return add(std::move(n));
    }

    std::uint64_t port_mask(const PortRef& r) {
        InstanceId id = detail::checked_id(r.inst, *scope_);
        if (!members_->count(id)) return 0;
        int b = index_->bit({id, r.port});
        return b < 0 ? 0 : std::uint64_t{1} << b;
    }

    int formula(const FormulaPtr& f) {
        switch (f->kind) {
            case FormulaKind::True: return constant_node(true);
            case FormulaKind::False: return constant_node(false);
            case FormulaKind::Pred: return constant_node(evaluate_bool(f->pred, *scope_));
            case FormulaKind::Port: {
                std::uint64_t m = port_mask(f->port);
                if (!m) return constant_node(false);
                Node n;
                n.op = Op::Any;
                n.mask = m;
                return add(std::move(n));
            }
            case FormulaKind::Idle: {
                InstanceId id = detail::checked_id(f->port.inst, *scope_);
                std::uint64_t m = members_->count(id) ? index_->instance_mask(id) : 0;
                if (!m) return constant_node(true);
                Node n;
                n.op = Op::None;
                n.mask = m;
                return add(std::move(n));
            }
            case FormulaKind::AtMost: {
                std::uint64_t m = 0;
                for (const auto& r : f->ports) m |= port_mask(r);
                if (std::popcount(m) <= f->bound) return constant_node(true);
                if (f->bound < 0) return constant_node(false);
                Node n;
                n.op = Op::CountLe;
                n.mask = m;
                n.n = f->bound;
                return add(std::move(n));
            }
            case FormulaKind::Not: return negate(formula(f->kids[0]));
            case FormulaKind::And:
            case FormulaKind::Or: {
                const bool zero = f->kind == FormulaKind::Or;
                std::vector<int> kids;
                for (const auto& k : f->kids) {
                    int c = formula(k);
                    if (is_const(c, zero)) return constant_node(zero);
                    kids.push_back(c);
                }
                return combine(zero ? Op::Or : Op::And, kids);
            }
            case FormulaKind::Implies: {
                int l = formula(f->kids[0]);
                int r = formula(f->kids[1]);
                return combine(Op::Or, {negate(l), r});
            }
        }
        return constant_node(false);
    }

    int term(const TermPtr& t) {
        if (t->kind == TermKind::Rule) return formula(t->guard);
        std::vector<int> kids;
        const bool zero = t->kind == TermKind::Or;
        for (const auto& k : t->kids) {
            int c = term(k);
            if (is_const(c, zero)) return constant_node(zero);
            kids.push_back(c);
        }
        return combine(t->kind == TermKind::And ? Op::And : Op::Or, kids);
    }

    int coord(const CoordPtr& t, const ExpandContext& ctx) {
        switch (t->kind) {
            case CoordKind::Lifted: return term(t->body);
            case CoordKind::Quantified: return items(*t, 0, ctx);
            case CoordKind::And:
            case CoordKind::Or: {
                const bool zero = t->kind == CoordKind::Or;
                std::vector<int> kids;
                for (const auto& k : t->kids) {
                    int c = coord(k, ctx);
                    if (is_const(c, zero)) return constant_node(zero);
                    kids.push_back(c);
                }
                return combine(zero ? Op::Or : Op::And, kids);
            }
            case CoordKind::Restriction: return term(expand_restriction(t->bound, t->type, t->port, ctx));
            case CoordKind::Macro: return term(lower_macro(t->macro, ctx));
        }
        return constant_node(false);
    }

    int items(const CoordTerm& t, std::size_t i, const ExpandContext& ctx) {
        if (i == t.decls.size()) return term(t.body);
        const DeclItem& d = t.decls[i];
        detail::check_type(ctx, d.type);
        const bool zero = d.quantifier == Quantifier::Exists;
        std::vector<int> kids;
        for (InstanceId id : ctx.cfg.instances_of(detail::decl_motif(ctx, d.motif), d.type)) {
            env_.emplace_back(d.var, id);
            int c = items(t, i + 1, ctx);
            env_.pop_back();
            if (is_const(c, zero)) return constant_node(zero);
            kids.push_back(c);
        }
        return combine(zero ? Op::Or : Op::And, kids);
    }

    [[nodiscard]] bool eval_node(int i, std::uint64_t a) const {
        const Node& n = nodes_[i];
        switch (n.op) {
            case Op::Const: return n.value;
            case Op::Any: return (a & n.mask) != 0;
            case Op::None: return (a & n.mask) == 0;
            case Op::CountLe: return std::popcount(a & n.mask) <= n.n;
            case Op::Not: return !eval_node(n.kids[0], a);
            case Op::And:
                for (int k : n.kids)
                    if (!eval_node(k, a)) return false;
                return true;
            case Op::Or:
                for (int k : n.kids)
                    if (eval_node(k, a)) return true;
                return false;
        }
        return false;
    }

    const EvalScope* scope_ = nullptr;
    const PortIndex* index_ = nullptr;
    const std::set<InstanceId>* members_ = nullptr;
    Bindings env_;
    std::vector<Node> nodes_;
    int root_ = 0;
};

}  // namespace dream
