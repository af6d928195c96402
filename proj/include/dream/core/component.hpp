#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "dream/core/expr.hpp"
#include "dream/pilops/operation.hpp"

namespace dream {

inline constexpr const char* kIdlePort = "idle";

struct VariableDecl {
    std::string name;
    ValueKind kind = ValueKind::Int;
    ExprPtr init;  // null: default value for the kind
};

struct Transition {
    std::string from;
    std::string port;
    std::string to;
};

/// A component type: control locations, local variables, ports, transitions
/// and optional per-port local operations (written against `self`).
struct ComponentType {
    std::string name;
    std::vector<std::string> locations;
    std::string initial;
    std::vector<VariableDecl> variables;
    std::vector<std::string> ports;
    std::vector<Transition> transitions;
    std::map<std::string, OperationSet> port_ops;

    [[nodiscard]] bool has_port(const std::string& p) const {
        return std::find(ports.begin(), ports.end(), p) != ports.end();
    }
    [[nodiscard]] bool has_location(const std::string& s) const {
        return std::find(locations.begin(), locations.end(), s) != locations.end();
    }
    [[nodiscard]] const VariableDecl* variable(const std::string& x) const {
        for (const auto& v : variables)
            if (v.name == x) return &v;
        return nullptr;
    }
    [[nodiscard]] const Transition* transition(const std::string& from, const std::string& port) const {
        for (const auto& t : transitions)
            if (t.from == from && t.port == port) return &t;
        return nullptr;
    }

    /// Throws ModelError unless the type is well formed.
    void validate() const {
        auto fail = [&](const std::string& why) { throw ModelError("component type " + name + ": " + why); };
        if (name.empty()) throw ModelError("component type without a name");
        if (!has_location(initial)) fail("initial location '" + initial + "' is not a location");
        std::set<std::string> seen;
        for (const auto& p : ports) {
            if (p == kIdlePort) fail("'idle' is reserved and cannot be declared as a port");
            if (!seen.insert(p).second) fail("duplicate port " + p);
        }
        std::set<std::string> vars;
        for (const auto& v : variables)
            if (!vars.insert(v.name).second) fail("duplicate variable " + v.name);
        std::set<std::pair<std::string, std::string>> labels;
        for (const auto& t : transitions) {
            if (!has_location(t.from) || !has_location(t.to))
                fail("transition " + t.from + " -" + t.port + "-> " + t.to + " uses an unknown location");
            if (!has_port(t.port)) fail("transition labelled by undeclared port " + t.port);
            if (!labels.insert({t.from, t.port}).second)
                fail("port " + t.port + " labels more than one transition out of " + t.from);
        }
        for (const auto& [p, ops] : port_ops)
            if (!has_port(p)) fail("local operation attached to undeclared port " + p);
    }
};

using TypePtr = std::shared_ptr<const ComponentType>;

inline TypePtr make_type(ComponentType t) {
    t.validate();
    return std::make_shared<const ComponentType>(std::move(t));
}

struct ComponentInstance {
    InstanceId id = 0;
    TypePtr type;
    std::string location;
    std::map<std::string, Value> valuation;
};

/// An instance-qualified port.
struct Port {
    InstanceId instance = 0;
    std::string name;

    friend auto operator<=>(const Port&, const Port&) = default;
    friend bool operator==(const Port&, const Port&) = default;
};

inline std::string to_string(const Port& p) { return "#" + std::to_string(p.instance) + "." + p.name; }

/// A finite set of ports, at most one per instance; absent instances idle.
class Interaction {
public:
    Interaction() = default;
    Interaction(std::initializer_list<Port> ports) {
        for (const auto& p : ports) insert(p);
    }
    explicit Interaction(const std::vector<Port>& ports) {
        for (const auto& p : ports) insert(p);
    }

    /// Throws SemanticsError on an idle port or a second port of one instance.
    void insert(const Port& p) {
        if (p.name == kIdlePort) throw SemanticsError("interactions never contain idle ports");
        auto it = std::lower_bound(ports_.begin(), ports_.end(), p);
        if (it != ports_.end() && *it == p) return;
        if (participates(p.instance))
            throw SemanticsError("two ports of instance #" + std::to_string(p.instance) + " in one interaction");
        ports_.insert(it, p);
    }

    [[nodiscard]] bool contains(const Port& p) const {
        return std::binary_search(ports_.begin(), ports_.end(), p);
    }
    [[nodiscard]] bool participates(InstanceId id) const {
        auto it = std::lower_bound(ports_.begin(), ports_.end(), Port{id, {}});
        return it != ports_.end() && it->instance == id;
    }
    [[nodiscard]] const Port* port_of(InstanceId id) const {
        auto it = std::lower_bound(ports_.begin(), ports_.end(), Port{id, {}});
        return it != ports_.end() && it->instance == id ? &*it : nullptr;
    }
    [[nodiscard]] bool empty() const { return ports_.empty(); }
    [[nodiscard]] std::size_t size() const { return ports_.size(); }
    [[nodiscard]] auto begin() const { return ports_.begin(); }
    [[nodiscard]] auto end() const { return ports_.end(); }
    [[nodiscard]] const std::vector<Port>& ports() const { return ports_; }

    [[nodiscard]] bool subset_of(const Interaction& o) const {
        return std::includes(o.ports_.begin(), o.ports_.end(), ports_.begin(), ports_.end());
    }

    friend auto operator<=>(const Interaction&, const Interaction&) = default;
    friend bool operator==(const Interaction&, const Interaction&) = default;

private:
    std::vector<Port> ports_;  // sorted
};

inline std::string to_string(const Interaction& a) {
    std::string s = "{";
    for (std::size_t i = 0; i < a.ports().size(); ++i) {
        if (i) s += ", ";
        s += to_string(a.ports()[i]);
    }
    return s + "}";
}

/// Ports labelling transitions out of the current location.
inline std::vector<Port> enabled_ports(const ComponentInstance& inst) {
    std::vector<Port> out;
    for (const auto& t : inst.type->transitions)
        if (t.from == inst.location) out.push_back({inst.id, t.port});
    std::sort(out.begin(), out.end());
    return out;
}

/// Moves each participant along its transition; valuations are untouched.
inline void fire(std::map<InstanceId, ComponentInstance>& instances, const Interaction& a) {
    for (const auto& p : a) {
        auto it = instances.find(p.instance);
        if (it == instances.end())
            throw SemanticsError("interaction names unknown instance #" + std::to_string(p.instance));
        const Transition* t = it->second.type->transition(it->second.location, p.name);
        if (!t)
            throw SemanticsError("port " + to_string(p) + " is not enabled at location " + it->second.location);
    }
    for (const auto& p : a) {
        auto& inst = instances.at(p.instance);
        inst.location = inst.type->transition(inst.location, p.name)->to;
    }
}

}  // namespace dream
