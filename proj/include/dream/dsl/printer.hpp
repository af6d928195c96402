#pragma once

#include <string>

#include "dream/dsl/parser.hpp"

namespace dream::dsl {

namespace detail {

inline std::string ops_text(const OperationSet& ops, const std::string& indent) {
    return ops.empty() ? "{}" : to_string(ops, indent);
}

/// Matches the shape built by conjunctive_term: (¬p → ∅) | (p ∧ Ψ → Δ).
inline bool as_conjunctive(const TermPtr& t, PortRef& p, FormulaPtr& psi, OperationSet& delta) {
    if (t->kind != TermKind::Or || t->kids.size() != 2) return false;
    const auto& off = t->kids[0];
    const auto& on = t->kids[1];
    if (off->kind != TermKind::Rule || on->kind != TermKind::Rule || !off->ops.empty()) return false;
    if (off->guard->kind != FormulaKind::Not || off->guard->kids[0]->kind != FormulaKind::Port) return false;
    p = off->guard->kids[0]->port;
    const auto same = [&](const FormulaPtr& f) {
        return f->kind == FormulaKind::Port && f->port.str() == p.str();
    };
    if (same(on->guard)) {
        psi = pil::truth();
    } else if (on->guard->kind == FormulaKind::And && same(on->guard->kids[0])) {
        psi = pil::conj(std::vector<FormulaPtr>(on->guard->kids.begin() + 1, on->guard->kids.end()));
    } else {
        return false;
    }
    delta = on->ops;
    return true;
}

inline std::string term_text(const TermPtr& t, const std::string& indent, int parent_prec);

/// A term in a position that needs a single syntactic unit.
inline std::string term_primary(const TermPtr& t, const std::string& indent) {
    PortRef p;
    FormulaPtr psi;
    OperationSet delta;
    if (t->kind == TermKind::Rule || as_conjunctive(t, p, psi, delta)) return term_text(t, indent, -1);
    return "(" + term_text(t, indent, -1) + ")";
}

inline std::string term_text(const TermPtr& t, const std::string& indent, int parent_prec) {
    PortRef p;
    FormulaPtr psi;
    OperationSet delta;
    if (as_conjunctive(t, p, psi, delta)) return p.str() + " => " + to_string(psi, 1) + " " + ops_text(delta, indent);
    switch (t->kind) {
        case TermKind::Rule: {
            std::string s = to_string(t->guard) + " -> " + ops_text(t->ops, indent);
            return parent_prec >= 0 ? "(" + s + ")" : s;
        }
        case TermKind::And:
        case TermKind::Or: {
            const int prec = t->kind == TermKind::And ? 1 : 0;
            std::string s;
            for (std::size_t i = 0; i < t->kids.size(); ++i) {
                if (i) s += t->kind == TermKind::And ? " & " : " | ";
                s += term_text(t->kids[i], indent, prec);
            }
            return parent_prec >= prec ? "(" + s + ")" : s;
        }
    }
    return "?";
}

inline std::string coord_text(const CoordPtr& c, const std::string& indent, int parent_prec);

inline std::string macro_text(const MacroConstraint& mc) {
    std::string s = macro_name(mc.kind);
    if (macro_counts(mc.kind)) s += "(" + std::to_string(mc.k) + ")";
    s += "(" + mc.anchor_type + "." + mc.anchor_port + " :";
    for (std::size_t i = 0; i < mc.items.size(); ++i)
        s += (i ? ", " : " ") + mc.items[i].type + "." + mc.items[i].port + " " + mc.items[i].index;
    if (mc.psi) s += " where " + to_string(mc.psi);
    return s + ")";
}

inline std::string coord_text(const CoordPtr& c, const std::string& indent, int parent_prec) {
    switch (c->kind) {
        case CoordKind::Lifted: return term_primary(c->body, indent);
        case CoordKind::Quantified: {
            std::string s;
            for (std::size_t i = 0; i < c->decls.size(); ++i) {
                const auto& d = c->decls[i];
                if (i) s += ", ";
                s += d.quantifier == Quantifier::Forall ? "forall " : "exists ";
                s += d.var + ": " + d.type;
                if (!d.motif.empty()) s += " in " + d.motif;
            }
            return s + " . " + term_primary(c->body, indent);
        }
        case CoordKind::Restriction:
            return "AtMost(" + std::to_string(c->bound) + ")(" + c->type + (c->port.empty() ? "" : "." + c->port) + ")";
        case CoordKind::Macro: return macro_text(c->macro);
        case CoordKind::And:
        case CoordKind::Or: {
            const int prec = c->kind == CoordKind::And ? 1 : 0;
            const std::string sep = c->kind == CoordKind::And ? "& " : "| ";
            std::string s;
            // Top-level conjunctions put one conjunct per line.
            const bool lines = parent_prec < 0;
            for (std::size_t i = 0; i < c->kids.size(); ++i) {
                if (i) s += lines ? "\n" + indent + sep : " " + sep;
                s += coord_text(c->kids[i], indent, prec);
            }
            return parent_prec >= prec ? "(" + s + ")" : s;
        }
    }
    return "?";
}

inline std::string map_text(const Map& m) {
    switch (m.kind()) {
        case MapKind::Torus: return "torus(" + std::to_string(m.size()) + ")";
        case MapKind::Grid: return "grid(" + std::to_string(m.size()) + ")";
        case MapKind::Explicit: {
            auto nodes = m.nodes();
            auto edges = m.edges();
            if (edges.empty() && nodes.size() == 1 && nodes[0] == NodeId{0}) return "single";
            std::string s = "explicit {";
            for (const auto& n : nodes) s += " node " + to_string(n) + ";";
            for (const auto& [a, b] : edges) s += " edge " + to_string(a) + " -> " + to_string(b) + ";";
            return s + " }";
        }
    }
    return "?";
}

}  // namespace detail

/// Coordination term in DSL syntax; `indent` prefixes continuation lines.
inline std::string print_term(const CoordPtr& c, const std::string& indent = "    ") {
    return detail::coord_text(c, indent, -1);
}

/// Scenario text that parses back to the same scenario.
inline std::string print(const Scenario& sc) {
    std::string out;
    if (!sc.name.empty()) out += "scenario \"" + sc.name + "\";\n\n";
    const System& sys = sc.system;
    for (const auto& [name, t] : sys.types) {
        out += "type " + name + " {\n";
        out += "    locations ";
        for (std::size_t i = 0; i < t->locations.size(); ++i) out += (i ? ", " : "") + t->locations[i];
        out += ";\n    initial " + t->initial + ";\n";
        for (const auto& v : t->variables) {
            out += "    var " + v.name + ": " + kind_name(v.kind);
            if (v.init) out += " = " + to_string(v.init);
            out += ";\n";
        }
        if (!t->ports.empty()) {
            out += "    ports ";
            for (std::size_t i = 0; i < t->ports.size(); ++i) out += (i ? ", " : "") + t->ports[i];
            out += ";\n";
        }
        for (const auto& tr : t->transitions) out += "    " + tr.from + " -" + tr.port + "-> " + tr.to + ";\n";
        for (const auto& [port, ops] : t->port_ops) out += "    on " + port + " " + detail::ops_text(ops, "    ") + "\n";
        out += "}\n\n";
    }
    for (const auto& m : sys.motifs) {
        const MotifState& ms = sys.initial.motif(m.name);
        out += "motif " + m.name + " {\n    map " + detail::map_text(ms.map) + ";\n";
        for (const auto& a : ms.map.attributes())
            out += "    attr " + a.name + ": " + kind_name(a.kind) + " = " + to_string(a.init) + ";\n";
        out += "    term " + print_term(m.term, "       ") + ";\n}\n\n";
    }
    out += "system {\n";
    if (sys.migration) out += "    migration " + print_term(sys.migration, "            ") + ";\n";
    std::map<InstanceId, std::pair<const MotifState*, const ComponentInstance*>> all;
    for (const auto& ms : sys.initial.motifs)
        for (const auto& [id, inst] : ms.instances) all[id] = {&ms, &inst};
    InstanceId expected = 1;
    for (const auto& [id, where] : all) {
        const auto& [ms, inst] = where;
        if (id != expected) throw ModelError("print: instance identifiers must be 1..n in placement order");
        ++expected;
        out += "    place " + inst->type->name + " in " + ms->name;
        auto at = ms->address.find(id);
        if (at != ms->address.end()) out += " at " + to_string(at->second);
        const ComponentInstance fresh = instantiate(inst->type, id);
        std::string with;
        for (const auto& v : inst->type->variables) {
            const Value& now = inst->valuation.at(v.name);
            const Value& init = fresh.valuation.at(v.name);
            if (now.kind() == init.kind() && now == init) continue;
            with += (with.empty() ? "" : ", ") + v.name + " = " + to_string(now);
        }
        if (!with.empty()) out += " with { " + with + " }";
        out += ";\n";
    }
    out += "}\n\nrun {\n    steps " + std::to_string(sc.run.steps) + ";\n    seed " + std::to_string(sc.run.seed) + ";\n";
    if (!sc.run.metrics.empty()) {
        out += "    metrics ";
        for (std::size_t i = 0; i < sc.run.metrics.size(); ++i) out += (i ? ", " : "") + sc.run.metrics[i];
        out += ";\n";
    }
    return out + "}\n";
}

}  // namespace dream::dsl
