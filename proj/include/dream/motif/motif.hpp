#pragma once

#include <map>
#include <string>
#include <vector>

#include "dream/foil/coord.hpp"
#include "dream/pilops/apply.hpp"

namespace dream {

using TypeTable = std::map<std::string, TypePtr>;

/// A motif's static part: its name and coordination term. The instance set,
/// map and address function live in the configuration (MotifState).
struct Motif {
    std::string name;
    CoordPtr term;
};

inline Map torus_map(std::int64_t s) {
    if (s < 1) throw ModelError("torus size must be >= 1");
    return Map::torus(s);
}

/// Port-local operations of the ports in `a`, with `self` bound.
inline OperationSet local_ops(const Interaction& a, const Configuration& cfg) {
    OperationSet out;
    for (const auto& p : a) {
        const ComponentInstance& inst = cfg.instance(p.instance);
        auto it = inst.type->port_ops.find(p.name);
        if (it != inst.type->port_ops.end()) out.merge(substitute(it->second, "self", p.instance));
    }
    return out;
}

/// Applies one reconfiguration (or any) operation against the snapshot
/// `cfg` within motif `motif`.
inline Configuration apply_reconfig(const OperationPtr& op, const Configuration& cfg, const std::string& motif,
                                    const TypeTable* types = nullptr) {
    auto outs = apply_ops(OperationSet{op}, cfg, motif, types);
    return std::move(outs.front());
}

/// Expanded coordination term of `motif` at configuration `cfg`.
inline TermPtr expand_motif(const Motif& motif, const Configuration& cfg, const TypeTable* types) {
    return expand_declarations(motif.term, ExpandContext{cfg, motif.name, types});
}

/// Resolved operations of a motif step: ops of the expanded term plus the
/// port-local ops, read from the pre-state.
inline std::vector<ResolvedOp> motif_step_ops(const Motif& motif, const TermPtr& expanded, const Configuration& cfg,
                                              const Interaction& a) {
    const MotifState& ms = cfg.motif(motif.name);
    EvalScope scope{cfg, &ms};
    OperationSet delta = ops_of(a, scope, expanded);
    delta.merge(local_ops(a, cfg));
    return resolve_ops(delta, scope, motif.name);
}

/// The same operations, computed by evaluating the term under bindings.
inline std::vector<ResolvedOp> motif_step_ops(const Motif& motif, const Configuration& cfg, const Interaction& a,
                                              const TypeTable* types) {
    const MotifState& ms = cfg.motif(motif.name);
    OperationSet delta = coord_eval(a, motif.term, ExpandContext{cfg, motif.name, types}).ops;
    delta.merge(local_ops(a, cfg));
    return resolve_ops(delta, EvalScope{cfg, &ms}, motif.name);
}

/// One motif transition labelled by `a`: fire, then apply the operations with
/// snapshot reads from the pre-state. Returns every outcome.
inline std::vector<Configuration> motif_step(const Configuration& cfg, const Motif& motif, const Interaction& a,
                                             const TypeTable* types = nullptr, const ApplyOptions& opts = {}) {
    const MotifState& ms = cfg.motif(motif.name);
    for (const auto& p : a)
        if (!ms.instances.count(p.instance))
            throw SemanticsError("port " + to_string(p) + " does not belong to motif " + motif.name);
    TermPtr expanded = expand_motif(motif, cfg, types);
    if (!pilops_satisfies(a, EvalScope{cfg, &ms}, expanded))
        throw SemanticsError("interaction " + to_string(a) + " does not satisfy the term of motif " + motif.name);
    auto resolved = motif_step_ops(motif, expanded, cfg, a);
    Configuration post = cfg;
    fire(post.motif(motif.name).instances, a);
    return apply_resolved_all(post, resolved, types, opts);
}

}  // namespace dream
