#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dream/core/component.hpp"
#include "dream/motif/map.hpp"

namespace dream {

/// Locations and valuations of one motif's instances, its map and its address
/// function.
struct MotifState {
    std::string name;
    std::map<InstanceId, ComponentInstance> instances;
    Map map = Map::single();
    std::map<InstanceId, NodeId> address;
};

/// Global configuration: the disjoint union of motif configurations plus the
/// system-owned counter handing out fresh instance identifiers.
class Configuration {
public:
    std::vector<MotifState> motifs;
    InstanceId next_id = 1;

    MotifState& add_motif(std::string name, Map map = Map::single()) {
        if (find_motif(name)) throw ModelError("duplicate motif " + name);
        motifs.push_back({std::move(name), {}, std::move(map), {}});
        return motifs.back();
    }

    [[nodiscard]] MotifState* find_motif(const std::string& name) {
        for (auto& m : motifs)
            if (m.name == name) return &m;
        return nullptr;
    }
    [[nodiscard]] const MotifState* find_motif(const std::string& name) const {
        for (const auto& m : motifs)
            if (m.name == name) return &m;
        return nullptr;
    }
    [[nodiscard]] MotifState& motif(const std::string& name) {
        if (auto* m = find_motif(name)) return *m;
        throw ModelError("unknown motif " + name);
    }
    [[nodiscard]] const MotifState& motif(const std::string& name) const {
        if (const auto* m = find_motif(name)) return *m;
        throw ModelError("unknown motif " + name);
    }

    /// Motif holding instance `id`, or nullptr.
    [[nodiscard]] const MotifState* owner(InstanceId id) const {
        for (const auto& m : motifs)
            if (m.instances.count(id)) return &m;
        return nullptr;
    }
    [[nodiscard]] MotifState* owner(InstanceId id) {
        for (auto& m : motifs)
            if (m.instances.count(id)) return &m;
        return nullptr;
    }

    [[nodiscard]] const ComponentInstance* find_instance(InstanceId id) const {
        if (const auto* m = owner(id)) return &m->instances.at(id);
        return nullptr;
    }
    [[nodiscard]] ComponentInstance* find_instance(InstanceId id) {
        if (auto* m = owner(id)) return &m->instances.at(id);
        return nullptr;
    }
    [[nodiscard]] const ComponentInstance& instance(InstanceId id) const {
        if (const auto* i = find_instance(id)) return *i;
        throw EvalError("dangling reference to instance #" + std::to_string(id));
    }

    [[nodiscard]] bool has_instance(InstanceId id) const { return owner(id) != nullptr; }

    InstanceId fresh_id() {
        while (has_instance(next_id)) ++next_id;
        return next_id++;
    }

    /// Adds an instance to a motif; identifiers are globally unique.
    void add_instance(const std::string& motif_name, ComponentInstance inst,
                      std::optional<NodeId> node = std::nullopt) {
        if (has_instance(inst.id))
            throw ModelError("duplicate instance identifier #" + std::to_string(inst.id));
        MotifState& m = motif(motif_name);
        if (node) {
            NodeId n = m.map.normalize(*node);
            if (!m.map.contains(n))
                throw EvalError("motif " + m.name + " has no node " + to_string(n));
            m.address[inst.id] = n;
        }
        if (inst.id >= next_id) next_id = inst.id + 1;
        m.instances.emplace(inst.id, std::move(inst));
    }

    /// Instances of `type` in motif `motif_name`, in identifier order.
    [[nodiscard]] std::vector<InstanceId> instances_of(const std::string& motif_name,
                                                      const std::string& type) const {
        std::vector<InstanceId> out;
        for (const auto& [id, inst] : motif(motif_name).instances)
            if (inst.type->name == type) out.push_back(id);
        return out;
    }

    [[nodiscard]] std::size_t instance_count() const {
        std::size_t n = 0;
        for (const auto& m : motifs) n += m.instances.size();
        return n;
    }

    /// Canonical text of the whole configuration.
    [[nodiscard]] std::string canonical() const {
        std::string s;
        for (const auto& m : motifs) {
            s += "motif " + m.name + "\n";
            for (const auto& [id, inst] : m.instances) {
                s += "  #" + std::to_string(id) + ":" + inst.type->name + "@" + inst.location;
                auto at = m.address.find(id);
                if (at != m.address.end()) s += " at" + to_string(at->second);
                for (const auto& [x, v] : inst.valuation) s += " " + x + "=" + to_string(v);
                s += "\n";
            }
            s += "  map " + m.map.canonical() + "\n";
        }
        return s;
    }

    /// 64-bit FNV-1a of canonical().
    [[nodiscard]] std::uint64_t digest() const {
        std::uint64_t h = 1469598103934665603ULL;
        for (unsigned char c : canonical()) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return h;
    }

    /// Structural invariants: disjoint motifs, consistent address functions,
    /// valuation domains and locations. Throws ModelError.
    void check_well_formed() const {
        std::map<InstanceId, std::string> seen;
        for (const auto& m : motifs) {
            for (const auto& [id, inst] : m.instances) {
                if (id != inst.id) throw ModelError("instance key mismatch in motif " + m.name);
                if (!seen.emplace(id, m.name).second)
                    throw ModelError("instance #" + std::to_string(id) + " belongs to two motifs");
                if (!inst.type->has_location(inst.location))
                    throw ModelError("instance #" + std::to_string(id) + " at unknown location");
                if (inst.valuation.size() != inst.type->variables.size())
                    throw ModelError("instance #" + std::to_string(id) + " valuation domain mismatch");
                for (const auto& v : inst.type->variables)
                    if (!inst.valuation.count(v.name))
                        throw ModelError("instance #" + std::to_string(id) + " lacks variable " + v.name);
            }
            for (const auto& [id, node] : m.address) {
                if (!m.instances.count(id))
                    throw ModelError("address entry for instance #" + std::to_string(id) + " outside motif " + m.name);
                if (!m.map.contains(node))
                    throw ModelError("instance #" + std::to_string(id) + " addressed to missing node " + to_string(node));
            }
        }
    }
};

}  // namespace dream
