#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dream/error.hpp"

namespace dream {

using InstanceId = std::int64_t;

/// Map node identifier: a coordinate vector ([i] for explicit integer-named nodes).
struct NodeId {
    std::vector<std::int64_t> coords;

    NodeId() = default;
    NodeId(std::initializer_list<std::int64_t> c) : coords(c) {}
    explicit NodeId(std::vector<std::int64_t> c) : coords(std::move(c)) {}

    friend auto operator<=>(const NodeId&, const NodeId&) = default;
    friend bool operator==(const NodeId&, const NodeId&) = default;
};

inline std::string to_string(const NodeId& n) {
    std::string out = "[";
    for (std::size_t i = 0; i < n.coords.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(n.coords[i]);
    }
    return out + "]";
}

enum class ValueKind { Int, Bool, Real, Vector, Set, Instance, Node };

inline const char* kind_name(ValueKind k) {
    switch (k) {
        case ValueKind::Int: return "int";
        case ValueKind::Bool: return "bool";
        case ValueKind::Real: return "real";
        case ValueKind::Vector: return "vec";
        case ValueKind::Set: return "set";
        case ValueKind::Instance: return "instance";
        case ValueKind::Node: return "node";
    }
    return "?";
}

struct IntVector {
    std::vector<std::int64_t> items;
    friend auto operator<=>(const IntVector&, const IntVector&) = default;
    friend bool operator==(const IntVector&, const IntVector&) = default;
};

struct IntSet {
    std::set<std::int64_t> items;
    friend auto operator<=>(const IntSet&, const IntSet&) = default;
    friend bool operator==(const IntSet&, const IntSet&) = default;
};

struct InstanceValue {
    InstanceId id = 0;
    friend auto operator<=>(const InstanceValue&, const InstanceValue&) = default;
    friend bool operator==(const InstanceValue&, const InstanceValue&) = default;
};

/// Runtime value. Instance identifiers behave as integers in comparisons and
/// set membership; node identifiers compare equal to vectors with the same
/// coordinates.
class Value {
public:
    using Storage =
        std::variant<std::int64_t, bool, double, IntVector, IntSet, InstanceValue, NodeId>;

    Value() : v_(std::int64_t{0}) {}
    Value(std::int64_t i) : v_(i) {}  // NOLINT(google-explicit-constructor)
    Value(int i) : v_(std::int64_t{i}) {}  // NOLINT(google-explicit-constructor)
    Value(bool b) : v_(b) {}  // NOLINT(google-explicit-constructor)
    Value(double d) : v_(d) {}  // NOLINT(google-explicit-constructor)
    Value(IntVector v) : v_(std::move(v)) {}  // NOLINT(google-explicit-constructor)
    Value(IntSet s) : v_(std::move(s)) {}  // NOLINT(google-explicit-constructor)
    Value(InstanceValue i) : v_(i) {}  // NOLINT(google-explicit-constructor)
    Value(NodeId n) : v_(std::move(n)) {}  // NOLINT(google-explicit-constructor)

    static Value vec(std::vector<std::int64_t> items) { return IntVector{std::move(items)}; }
    static Value set(std::set<std::int64_t> items) { return IntSet{std::move(items)}; }
    static Value instance(InstanceId id) { return InstanceValue{id}; }
    static Value node(NodeId n) { return Value(std::move(n)); }

    [[nodiscard]] ValueKind kind() const { return static_cast<ValueKind>(v_.index()); }
    [[nodiscard]] bool is(ValueKind k) const { return kind() == k; }

    [[nodiscard]] bool is_integral() const {
        return is(ValueKind::Int) || is(ValueKind::Instance);
    }
    [[nodiscard]] bool is_numeric() const { return is_integral() || is(ValueKind::Real); }
    [[nodiscard]] bool is_coords() const { return is(ValueKind::Vector) || is(ValueKind::Node); }

    [[nodiscard]] std::int64_t as_int() const {
        if (is(ValueKind::Int)) return std::get<std::int64_t>(v_);
        if (is(ValueKind::Instance)) return std::get<InstanceValue>(v_).id;
        throw EvalError("expected an integer, got " + std::string(kind_name(kind())));
    }
    [[nodiscard]] double as_real() const {
        if (is(ValueKind::Real)) return std::get<double>(v_);
        return static_cast<double>(as_int());
    }
    [[nodiscard]] bool as_bool() const {
        if (!is(ValueKind::Bool))
            throw EvalError("expected a boolean, got " + std::string(kind_name(kind())));
        return std::get<bool>(v_);
    }
    [[nodiscard]] const std::vector<std::int64_t>& as_coords() const {
        if (is(ValueKind::Vector)) return std::get<IntVector>(v_).items;
        if (is(ValueKind::Node)) return std::get<NodeId>(v_).coords;
        throw EvalError("expected a vector, got " + std::string(kind_name(kind())));
    }
    [[nodiscard]] const std::set<std::int64_t>& as_set() const {
        if (!is(ValueKind::Set))
            throw EvalError("expected a set, got " + std::string(kind_name(kind())));
        return std::get<IntSet>(v_).items;
    }
    [[nodiscard]] InstanceId as_instance() const {
        if (is(ValueKind::Instance)) return std::get<InstanceValue>(v_).id;
        if (is(ValueKind::Int)) return std::get<std::int64_t>(v_);
        throw EvalError("expected an instance identifier, got " +
                        std::string(kind_name(kind())));
    }
    [[nodiscard]] NodeId as_node() const {
        if (is(ValueKind::Node)) return std::get<NodeId>(v_);
        if (is(ValueKind::Vector)) return NodeId(std::get<IntVector>(v_).items);
        if (is(ValueKind::Int)) return NodeId{std::get<std::int64_t>(v_)};
        throw EvalError("expected a node, got " + std::string(kind_name(kind())));
    }

    [[nodiscard]] const Storage& storage() const { return v_; }

    /// Semantic equality with the integer/instance and vector/node coercions.
    friend bool operator==(const Value& a, const Value& b) {
        if (a.is_integral() && b.is_integral()) return a.as_int() == b.as_int();
        if (a.is_numeric() && b.is_numeric()) return a.as_real() == b.as_real();
        if (a.is_coords() && b.is_coords()) return a.as_coords() == b.as_coords();
        return a.v_ == b.v_;
    }

    /// Strict structural order (kind first); used for canonical containers.
    [[nodiscard]] std::strong_ordering structural_compare(const Value& o) const {
        if (v_.index() != o.v_.index()) return v_.index() <=> o.v_.index();
        if (is(ValueKind::Real)) {
            double x = std::get<double>(v_), y = std::get<double>(o.v_);
            if (x < y) return std::strong_ordering::less;
            if (x > y) return std::strong_ordering::greater;
            return std::strong_ordering::equal;
        }
        return std::visit(
            [&](const auto& lhs) -> std::strong_ordering {
                using T = std::decay_t<decltype(lhs)>;
                if constexpr (std::is_same_v<T, double>) {
                    return std::strong_ordering::equal;
                } else {
                    return lhs <=> std::get<T>(o.v_);
                }
            },
            v_);
    }

private:
    Storage v_;
};

/// Canonical text form; also the DSL literal syntax.
inline std::string to_string(const Value& v) {
    switch (v.kind()) {
        case ValueKind::Int: return std::to_string(v.as_int());
        case ValueKind::Bool: return v.as_bool() ? "true" : "false";
        case ValueKind::Real: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v.as_real());
            std::string s = buf;
            if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
            return s;
        }
        case ValueKind::Vector: {
            std::string out = "[";
            const auto& items = v.as_coords();
            for (std::size_t i = 0; i < items.size(); ++i) {
                if (i) out += ", ";
                out += std::to_string(items[i]);
            }
            return out + "]";
        }
        case ValueKind::Set: {
            std::string out = "{";
            bool first = true;
            for (auto x : v.as_set()) {
                if (!first) out += ", ";
                first = false;
                out += std::to_string(x);
            }
            return out + "}";
        }
        case ValueKind::Instance: return "#" + std::to_string(v.as_instance());
        case ValueKind::Node: return "node" + to_string(v.as_node());
    }
    return "?";
}

/// Default value for a declared kind (0 / false / empty set / zero vector).
inline Value default_value(ValueKind k, std::size_t vector_length = 2) {
    switch (k) {
        case ValueKind::Int: return Value(std::int64_t{0});
        case ValueKind::Bool: return Value(false);
        case ValueKind::Real: return Value(0.0);
        case ValueKind::Vector: return Value::vec(std::vector<std::int64_t>(vector_length, 0));
        case ValueKind::Set: return Value::set({});
        case ValueKind::Instance: return Value::instance(0);
        case ValueKind::Node: return Value::node(NodeId{0});
    }
    return {};
}

/// Converts a value to a declared kind, applying the permitted coercions.
inline Value coerce(const Value& v, ValueKind target) {
    if (v.kind() == target) return v;
    switch (target) {
        case ValueKind::Int:
            if (v.is(ValueKind::Instance)) return Value(v.as_int());
            break;
        case ValueKind::Instance:
            if (v.is(ValueKind::Int)) return Value::instance(v.as_int());
            break;
        case ValueKind::Real:
            if (v.is_integral()) return Value(v.as_real());
            break;
        case ValueKind::Vector:
            if (v.is(ValueKind::Node)) return Value::vec(v.as_coords());
            break;
        case ValueKind::Node:
            if (v.is(ValueKind::Vector) || v.is(ValueKind::Int)) return Value::node(v.as_node());
            break;
        default: break;
    }
    throw EvalError(std::string("type mismatch: cannot store ") + kind_name(v.kind()) +
                    " into " + kind_name(target));
}

}  // namespace dream
