#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dream/core/value.hpp"

namespace dream {

enum class MapKind { Explicit, Torus, Grid };

struct AttributeDecl {
    std::string name;
    ValueKind kind = ValueKind::Int;
    Value init;
};

using Edge = std::pair<NodeId, NodeId>;

/// Graph of nodes and directed edges with a per-node attribute store.
///
/// Torus and grid maps are generator-backed: their s x s nodes and the
/// 4-neighbourhood edges exist implicitly; only edits and attribute writes are
/// stored. Torus coordinates wrap modulo s.
class Map {
public:
    static Map explicit_map(std::vector<NodeId> nodes = {}, std::vector<Edge> edges = {}) {
        Map m;
        m.kind_ = MapKind::Explicit;
        for (auto& n : nodes) m.nodes_.insert(std::move(n));
        for (auto& e : edges) m.add_edge(e.first, e.second);
        return m;
    }
    static Map single() { return explicit_map({NodeId{0}}); }
    static Map torus(std::int64_t s) { return generated(MapKind::Torus, s); }
    static Map grid(std::int64_t s) { return generated(MapKind::Grid, s); }

    [[nodiscard]] MapKind kind() const { return kind_; }
    [[nodiscard]] std::int64_t size() const { return size_; }
    [[nodiscard]] bool generated() const { return kind_ != MapKind::Explicit; }

    void declare_attribute(AttributeDecl decl) {
        decl.init = coerce(decl.init, decl.kind);
        for (auto& a : attrs_)
            if (a.name == decl.name) {
                a = std::move(decl);
                return;
            }
        attrs_.push_back(std::move(decl));
    }
    [[nodiscard]] const std::vector<AttributeDecl>& attributes() const { return attrs_; }
    [[nodiscard]] const AttributeDecl* attribute_decl(const std::string& name) const {
        for (const auto& a : attrs_)
            if (a.name == name) return &a;
        return nullptr;
    }

    /// Torus: wraps every coordinate into [0, s). Other maps: identity.
    [[nodiscard]] NodeId normalize(const NodeId& n) const {
        if (kind_ != MapKind::Torus) return n;
        NodeId out = n;
        for (auto& c : out.coords) c = ((c % size_) + size_) % size_;
        return out;
    }

    [[nodiscard]] bool contains(const NodeId& raw) const {
        NodeId n = normalize(raw);
        if (kind_ == MapKind::Explicit) return nodes_.count(n) > 0;
        if (removed_.count(n)) return false;
        return in_generator(n) || nodes_.count(n) > 0;
    }

    /// Adding an existing node is a no-op.
    void add_node(const NodeId& raw) {
        NodeId n = normalize(raw);
        if (contains(n)) return;
        removed_.erase(n);
        if (!in_generator(n)) nodes_.insert(n);
    }

    /// Removes the node, its incident edges and its attribute store. Instances
    /// addressed there are the caller's (motif's) responsibility.
    void remove_node(const NodeId& raw) {
        NodeId n = normalize(raw);
        if (!contains(n)) throw EvalError("removeNode: no node " + to_string(n));
        nodes_.erase(n);
        if (in_generator(n)) removed_.insert(n);
        for (auto it = edges_.begin(); it != edges_.end();)
            it = (it->first == n || it->second == n) ? edges_.erase(it) : std::next(it);
        for (auto it = removed_edges_.begin(); it != removed_edges_.end();)
            it = (it->first == n || it->second == n) ? removed_edges_.erase(it) : std::next(it);
        store_.erase(n);
    }

    void add_edge(const NodeId& a_raw, const NodeId& b_raw) {
        NodeId a = normalize(a_raw), b = normalize(b_raw);
        if (!contains(a) || !contains(b))
            throw EvalError("addEdge: endpoint missing (" + to_string(a) + ", " + to_string(b) + ")");
        removed_edges_.erase({a, b});
        if (!implicit_edge(a, b)) edges_.insert({a, b});
    }

    /// Removing an absent edge is a no-op.
    void remove_edge(const NodeId& a_raw, const NodeId& b_raw) {
        NodeId a = normalize(a_raw), b = normalize(b_raw);
        edges_.erase({a, b});
        if (implicit_edge(a, b) && contains(a) && contains(b)) removed_edges_.insert({a, b});
    }

    [[nodiscard]] bool has_edge(const NodeId& a_raw, const NodeId& b_raw) const {
        NodeId a = normalize(a_raw), b = normalize(b_raw);
        if (!contains(a) || !contains(b)) return false;
        if (edges_.count({a, b})) return true;
        return implicit_edge(a, b) && !removed_edges_.count({a, b});
    }

    /// Every node, in canonical order (materializes generated maps).
    [[nodiscard]] std::vector<NodeId> nodes() const {
        std::set<NodeId> out(nodes_.begin(), nodes_.end());
        if (generated())
            for (std::int64_t x = 0; x < size_; ++x)
                for (std::int64_t y = 0; y < size_; ++y) {
                    NodeId n{x, y};
                    if (!removed_.count(n)) out.insert(n);
                }
        return {out.begin(), out.end()};
    }

    [[nodiscard]] std::vector<Edge> edges() const {
        std::set<Edge> out(edges_.begin(), edges_.end());
        if (generated())
            for (const auto& n : nodes())
                for (const auto& m : neighbours4(n))
                    if (has_edge(n, m)) out.insert({n, m});
        return {out.begin(), out.end()};
    }

    /// Euclidean distance; on a torus each coordinate uses the shorter wrap.
    [[nodiscard]] double distance(const NodeId& a, const NodeId& b) const {
        if (a.coords.size() != b.coords.size())
            throw EvalError("distance between nodes of different dimension");
        double sum = 0;
        for (std::size_t i = 0; i < a.coords.size(); ++i) {
            std::int64_t d = std::llabs(a.coords[i] - b.coords[i]);
            if (kind_ == MapKind::Torus) {
                d %= size_;
                d = std::min(d, size_ - d);
            }
            sum += static_cast<double>(d) * static_cast<double>(d);
        }
        return std::sqrt(sum);
    }

    [[nodiscard]] Value attribute(const NodeId& raw, const std::string& name) const {
        NodeId n = normalize(raw);
        if (!contains(n)) throw EvalError("no node " + to_string(n) + " in map");
        auto it = store_.find(n);
        if (it != store_.end()) {
            auto jt = it->second.find(name);
            if (jt != it->second.end()) return jt->second;
        }
        const AttributeDecl* decl = attribute_decl(name);
        if (!decl) throw EvalError("map has no node attribute '" + name + "'");
        return decl->init;
    }

    void set_attribute(const NodeId& raw, const std::string& name, const Value& v) {
        NodeId n = normalize(raw);
        if (!contains(n)) throw EvalError("no node " + to_string(n) + " in map");
        const AttributeDecl* decl = attribute_decl(name);
        if (!decl) throw EvalError("map has no node attribute '" + name + "'");
        store_[n][name] = coerce(v, decl->kind);
    }

    /// Canonical text of the mutable state (used for configuration digests).
    [[nodiscard]] std::string canonical() const {
        std::string s;
        for (const auto& n : nodes_) s += "n" + to_string(n);
        for (const auto& n : removed_) s += "r" + to_string(n);
        for (const auto& e : edges_) s += "e" + to_string(e.first) + to_string(e.second);
        for (const auto& e : removed_edges_) s += "x" + to_string(e.first) + to_string(e.second);
        for (const auto& [n, attrs] : store_) {
            s += "s" + to_string(n);
            for (const auto& [k, v] : attrs) s += k + "=" + to_string(v) + ";";
        }
        return s;
    }

private:
    static Map generated(MapKind kind, std::int64_t s) {
        if (s < 1) throw ModelError("generated map size must be >= 1");
        Map m;
        m.kind_ = kind;
        m.size_ = s;
        return m;
    }

    [[nodiscard]] bool in_generator(const NodeId& n) const {
        if (!generated() || n.coords.size() != 2) return false;
        return n.coords[0] >= 0 && n.coords[0] < size_ && n.coords[1] >= 0 && n.coords[1] < size_;
    }

    [[nodiscard]] std::vector<NodeId> neighbours4(const NodeId& n) const {
        std::vector<NodeId> out;
        if (!in_generator(n)) return out;
        const std::int64_t dx[] = {1, -1, 0, 0};
        const std::int64_t dy[] = {0, 0, 1, -1};
        for (int i = 0; i < 4; ++i) {
            NodeId m = normalize(NodeId{n.coords[0] + dx[i], n.coords[1] + dy[i]});
            if (in_generator(m) && m != n) out.push_back(m);
        }
        return out;
    }

    [[nodiscard]] bool implicit_edge(const NodeId& a, const NodeId& b) const {
        if (!in_generator(a) || !in_generator(b)) return false;
        for (const auto& m : neighbours4(a))
            if (m == b) return true;
        return false;
    }

    MapKind kind_ = MapKind::Explicit;
    std::int64_t size_ = 0;
    std::set<NodeId> nodes_;  // explicit nodes, or extra nodes outside a generator
    std::set<NodeId> removed_;
    std::set<Edge> edges_;
    std::set<Edge> removed_edges_;
    std::map<NodeId, std::map<std::string, Value>> store_;
    std::vector<AttributeDecl> attrs_;
};

}  // namespace dream
