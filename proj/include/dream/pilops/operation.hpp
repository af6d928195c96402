#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "dream/core/expr.hpp"

namespace dream {

enum class OpKind {
    Assign,       // target := value   (target is a Var or NodeAttr expression)
    Create,       // create(Type, node)
    Delete,       // delete(instance)
    AddNode,      // addNode(node)
    RemoveNode,   // removeNode(node)
    AddEdge,      // addEdge(n1, n2)
    RemoveEdge,   // removeEdge(n1, n2)
    Move,         // move(instance, node)
    Migrate,      // migrate(instance, motif, node)
    Conditional,  // if cond { ... } else { ... }
};

struct Operation;
using OperationPtr = std::shared_ptr<const Operation>;

/// A set of operations with structural identity: two operations are the same
/// element iff their canonical text is identical.
class OperationSet {
public:
    OperationSet() = default;
    OperationSet(std::initializer_list<OperationPtr> ops) {
        for (const auto& op : ops) insert(op);
    }

    void insert(const OperationPtr& op);
    void merge(const OperationSet& other) {
        for (const auto& op : other.ops_) insert(op);
    }
    [[nodiscard]] OperationSet united(const OperationSet& other) const {
        OperationSet out = *this;
        out.merge(other);
        return out;
    }

    [[nodiscard]] bool empty() const { return ops_.empty(); }
    [[nodiscard]] std::size_t size() const { return ops_.size(); }
    [[nodiscard]] auto begin() const { return ops_.begin(); }
    [[nodiscard]] auto end() const { return ops_.end(); }
    [[nodiscard]] const std::vector<OperationPtr>& items() const { return ops_; }

    friend bool operator==(const OperationSet& a, const OperationSet& b);

private:
    std::vector<OperationPtr> ops_;  // sorted by key, duplicate-free
};

struct Operation {
    OpKind kind = OpKind::Assign;
    ExprPtr target;            // Assign
    std::vector<ExprPtr> args; // value / node / instance operands, in source order
    std::string name;          // Create: type name; Migrate: motif name
    ExprPtr cond;              // Conditional
    OperationSet then_ops;
    OperationSet else_ops;
    std::string key;           // canonical text, filled by finalize()
};

inline std::string to_string(const OperationSet& ops, const std::string& indent = "");

inline std::string to_string(const Operation& op, const std::string& indent = "") {
    auto arg = [&](std::size_t i) { return to_string(op.args.at(i)); };
    switch (op.kind) {
        case OpKind::Assign: return to_string(op.target) + " := " + arg(0) + ";";
        case OpKind::Create: return "create(" + op.name + ", " + arg(0) + ");";
        case OpKind::Delete: return "delete(" + arg(0) + ");";
        case OpKind::AddNode: return "addNode(" + arg(0) + ");";
        case OpKind::RemoveNode: return "removeNode(" + arg(0) + ");";
        case OpKind::AddEdge: return "addEdge(" + arg(0) + ", " + arg(1) + ");";
        case OpKind::RemoveEdge: return "removeEdge(" + arg(0) + ", " + arg(1) + ");";
        case OpKind::Move: return "move(" + arg(0) + ", " + arg(1) + ");";
        case OpKind::Migrate: return "migrate(" + arg(0) + ", " + op.name + ", " + arg(1) + ");";
        case OpKind::Conditional: {
            std::string s = "if " + to_string(op.cond) + " " + to_string(op.then_ops, indent);
            if (!op.else_ops.empty()) s += " else " + to_string(op.else_ops, indent);
            return s;
        }
    }
    return "?";
}

/// Block form `{ op; op; }`; single-line when `indent` is empty.
inline std::string to_string(const OperationSet& ops, const std::string& indent) {
    if (ops.empty()) return "{}";
    std::string s = "{";
    const std::string inner = indent.empty() ? "" : indent + "    ";
    for (const auto& op : ops) {
        s += indent.empty() ? " " : "\n" + inner;
        s += to_string(*op, inner);
    }
    s += indent.empty() ? " }" : "\n" + indent + "}";
    return s;
}

inline void OperationSet::insert(const OperationPtr& op) {
    auto it = std::lower_bound(ops_.begin(), ops_.end(), op,
                               [](const OperationPtr& a, const OperationPtr& b) { return a->key < b->key; });
    if (it != ops_.end() && (*it)->key == op->key) return;
    ops_.insert(it, op);
}

inline bool operator==(const OperationSet& a, const OperationSet& b) {
    return std::equal(a.ops_.begin(), a.ops_.end(), b.ops_.begin(), b.ops_.end(),
                      [](const OperationPtr& x, const OperationPtr& y) { return x->key == y->key; });
}

namespace op {

inline OperationPtr finalize(Operation o) {
    o.key = to_string(o);
    return std::make_shared<const Operation>(std::move(o));
}

inline OperationPtr assign(ExprPtr target, ExprPtr value) {
    if (target->kind != ExprKind::Var && target->kind != ExprKind::NodeAttr)
        throw ModelError("assignment target must be a variable or node attribute: " + to_string(target));
    Operation o;
    o.kind = OpKind::Assign;
    o.target = std::move(target);
    o.args = {std::move(value)};
    return finalize(std::move(o));
}
inline OperationPtr create(std::string type, ExprPtr node) {
    Operation o;
    o.kind = OpKind::Create;
    o.name = std::move(type);
    o.args = {std::move(node)};
    return finalize(std::move(o));
}
inline OperationPtr unary_op(OpKind kind, ExprPtr a) {
    Operation o;
    o.kind = kind;
    o.args = {std::move(a)};
    return finalize(std::move(o));
}
inline OperationPtr delete_instance(ExprPtr inst) { return unary_op(OpKind::Delete, std::move(inst)); }
inline OperationPtr add_node(ExprPtr n) { return unary_op(OpKind::AddNode, std::move(n)); }
inline OperationPtr remove_node(ExprPtr n) { return unary_op(OpKind::RemoveNode, std::move(n)); }
inline OperationPtr binary_op(OpKind kind, ExprPtr a, ExprPtr b) {
    Operation o;
    o.kind = kind;
    o.args = {std::move(a), std::move(b)};
    return finalize(std::move(o));
}
inline OperationPtr add_edge(ExprPtr a, ExprPtr b) { return binary_op(OpKind::AddEdge, std::move(a), std::move(b)); }
inline OperationPtr remove_edge(ExprPtr a, ExprPtr b) { return binary_op(OpKind::RemoveEdge, std::move(a), std::move(b)); }
inline OperationPtr move(ExprPtr inst, ExprPtr node) { return binary_op(OpKind::Move, std::move(inst), std::move(node)); }
inline OperationPtr migrate(ExprPtr inst, std::string motif, ExprPtr node) {
    Operation o;
    o.kind = OpKind::Migrate;
    o.name = std::move(motif);
    o.args = {std::move(inst), std::move(node)};
    return finalize(std::move(o));
}
inline OperationPtr conditional(ExprPtr cond, OperationSet then_ops, OperationSet else_ops = {}) {
    Operation o;
    o.kind = OpKind::Conditional;
    o.cond = std::move(cond);
    o.then_ops = std::move(then_ops);
    o.else_ops = std::move(else_ops);
    return finalize(std::move(o));
}

}  // namespace op

inline OperationSet substitute(const OperationSet& ops, const std::string& var, InstanceId id);

inline OperationPtr substitute(const OperationPtr& o, const std::string& var, InstanceId id) {
    Operation copy = *o;
    if (copy.target) copy.target = substitute(copy.target, var, id);
    for (auto& a : copy.args) a = substitute(a, var, id);
    if (copy.cond) copy.cond = substitute(copy.cond, var, id);
    copy.then_ops = substitute(copy.then_ops, var, id);
    copy.else_ops = substitute(copy.else_ops, var, id);
    return op::finalize(std::move(copy));
}

inline OperationSet substitute(const OperationSet& ops, const std::string& var, InstanceId id) {
    OperationSet out;
    for (const auto& o : ops) out.insert(substitute(o, var, id));
    return out;
}

inline void collect_vars(const OperationSet& ops, std::vector<InstanceTerm>& out) {
    for (const auto& o : ops) {
        if (o->target) collect_vars(o->target, out);
        for (const auto& a : o->args) collect_vars(a, out);
        if (o->cond) collect_vars(o->cond, out);
        collect_vars(o->then_ops, out);
        collect_vars(o->else_ops, out);
    }
}

}  // namespace dream
