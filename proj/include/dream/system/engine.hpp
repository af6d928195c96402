#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dream/motif/motif.hpp"
#include "dream/system/compiled.hpp"

namespace dream {

namespace detail {

inline bool migrate_only(const OperationSet& ops) {
    for (const auto& o : ops) {
        if (o->kind == OpKind::Conditional) {
            if (!migrate_only(o->then_ops) || !migrate_only(o->else_ops)) return false;
        } else if (o->kind != OpKind::Migrate) {
            return false;
        }
    }
    return true;
}

inline bool migrate_only(const TermPtr& t) {
    if (t->kind == TermKind::Rule) return migrate_only(t->ops);
    for (const auto& k : t->kids)
        if (!migrate_only(k)) return false;
    return true;
}

inline bool migrate_only(const CoordPtr& t) {
    switch (t->kind) {
        case CoordKind::Lifted:
        case CoordKind::Quantified: return migrate_only(t->body);
        case CoordKind::And:
        case CoordKind::Or:
            for (const auto& k : t->kids)
                if (!migrate_only(k)) return false;
            return true;
        default: return true;
    }
}

}  // namespace detail

/// ⟨B, M, μ, Γ0⟩ plus the seed used by the engine.
struct System {
    TypeTable types;
    std::vector<Motif> motifs;
    CoordPtr migration;  // null: no migration term
    Configuration initial;
    std::uint64_t seed = 0;

    [[nodiscard]] const Motif& motif(const std::string& name) const {
        for (const auto& m : motifs)
            if (m.name == name) return m;
        throw ModelError("unknown motif " + name);
    }

    /// Structural checks; throws ModelError listing every problem found.
    void validate() const {
        std::vector<std::string> problems;
        std::set<std::string> names;
        for (const auto& m : motifs) {
            if (!names.insert(m.name).second) problems.push_back("duplicate motif " + m.name);
            if (!initial.find_motif(m.name)) problems.push_back("motif " + m.name + " has no configuration");
            if (!m.term) problems.push_back("motif " + m.name + " has no coordination term");
            else
                for (const auto& d : check_well_formed(m.term)) problems.push_back(d.str());
        }
        for (const auto& ms : initial.motifs) {
            if (!names.count(ms.name)) problems.push_back("configuration for undeclared motif " + ms.name);
            for (const auto& [id, inst] : ms.instances) {
                auto it = types.find(inst.type->name);
                if (it == types.end() || it->second != inst.type)
                    problems.push_back("instance #" + std::to_string(id) + " has undeclared type " + inst.type->name);
            }
        }
        if (migration) {
            for (const auto& d : check_well_formed(migration)) problems.push_back(d.str());
            if (!detail::migrate_only(migration)) problems.push_back("migration term may only carry migrate operations");
        }
        try {
            initial.check_well_formed();
        } catch (const ModelError& e) {
            problems.emplace_back(e.what());
        }
        if (!problems.empty()) {
            std::string msg = "invalid system:";
            for (const auto& p : problems) msg += "\n  " + p;
            throw ModelError(msg);
        }
    }
};

/// Deterministic generator: std::mt19937_64 (its output sequence is fixed by
/// the standard) with rejection sampling for bounded picks.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

    /// Uniform index in [0, n).
    std::size_t pick_index(std::size_t n) {
        if (n == 0) throw SemanticsError("pick from an empty range");
        const std::uint64_t range = n;
        const std::uint64_t threshold = (0 - range) % range;  // 2^64 mod n
        std::uint64_t r;
        do r = gen_();
        while (r < threshold);
        return static_cast<std::size_t>(r % range);
    }

    std::uint64_t next() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

/// How one interaction is chosen among the candidates.
enum class Selection {
    MaximalRandom,  // keep maximal candidates, pick uniformly (default)
    AnyRandom,      // pick uniformly among all candidates
    FirstMaximal,   // smallest maximal candidate in canonical order
};

struct EngineOptions {
    std::size_t port_bound = kDefaultPortBound;
    bool debug_checks = false;
    Selection selection = Selection::MaximalRandom;
    ApplyOptions apply;
};

using Metrics = std::vector<std::pair<std::string, double>>;
using MetricsHook = std::function<Metrics(const Configuration&)>;

struct StepRecord {
    std::size_t step = 0;
    Interaction interaction;
    std::size_t op_count = 0;
    std::uint64_t digest = 0;
    Metrics metrics;
};

struct Trace {
    std::vector<StepRecord> steps;
    bool quiescent = false;  // stopped early: no candidate interaction
};

/// Execution engine: exhaustive candidate search over enabled ports, maximal
/// selection, motif steps, then the migration term.
class Engine {
public:
    explicit Engine(System sys, EngineOptions opts = {})
        : sys_(std::move(sys)), opts_(opts), cfg_(sys_.initial), rng_(sys_.seed) {
        sys_.validate();
    }

    [[nodiscard]] const Configuration& config() const { return cfg_; }
    [[nodiscard]] const System& system() const { return sys_; }
    [[nodiscard]] const EngineOptions& options() const { return opts_; }
    Rng& rng() { return rng_; }

    /// Enabled ports of every instance, canonical order.
    [[nodiscard]] std::vector<Port> enabled() const {
        std::vector<Port> out;
        for (const auto& ms : cfg_.motifs)
            for (const auto& [id, inst] : ms.instances) {
                auto ps = enabled_ports(inst);
                out.insert(out.end(), ps.begin(), ps.end());
            }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Non-empty interactions whose motif restrictions satisfy their motif
    /// terms (and, when present, the migration term at a post-motif state).
    [[nodiscard]] std::vector<Interaction> candidate_interactions() const {
        Search s = search();
        std::vector<Interaction> out;
        for (auto m : s.masks) out.push_back(s.index.decode(m));
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Candidates with no candidate strict superset, canonical order.
    [[nodiscard]] std::vector<Interaction> maximal_candidates() const {
        Search s = search();
        std::vector<Interaction> out;
        for (auto m : maximal(s.masks)) out.push_back(s.index.decode(m));
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Performs one step; nullopt signals quiescence.
    std::optional<StepRecord> step() {
        Search s = search();
        if (s.masks.empty()) return std::nullopt;
        std::vector<std::uint64_t> pool;
        switch (opts_.selection) {
            case Selection::AnyRandom: pool = s.masks; break;
            case Selection::MaximalRandom:
            case Selection::FirstMaximal: pool = maximal(s.masks); break;
        }
        std::vector<Interaction> sorted;
        for (auto m : pool) sorted.push_back(s.index.decode(m));
        std::sort(sorted.begin(), sorted.end());
        std::size_t pick = opts_.selection == Selection::FirstMaximal ? 0 : rng_.pick_index(sorted.size());
        const Interaction a = sorted[pick];

        if (opts_.debug_checks) check_choice(a, s);

        auto [next, op_count] = execute(a, s);
        cfg_ = std::move(next);
        if (opts_.debug_checks) cfg_.check_well_formed();

        StepRecord rec;
        rec.step = step_count_++;
        rec.interaction = a;
        rec.op_count = op_count;
        rec.digest = cfg_.digest();
        return rec;
    }

    /// Up to n steps; stops early on quiescence.
    Trace run(std::size_t n, const MetricsHook& hook = {}) {
        Trace t;
        for (std::size_t i = 0; i < n; ++i) {
            auto rec = step();
            if (!rec) {
                t.quiescent = true;
                break;
            }
            if (hook) rec->metrics = hook(cfg_);
            t.steps.push_back(std::move(*rec));
        }
        return t;
    }

private:
    struct Search {
        PortIndex index;
        std::vector<std::set<InstanceId>> members;  // per motif
        std::vector<std::uint64_t> masks;           // candidate interactions
    };

    Search search() const {
        Search s;
        auto ports = enabled();
        if (ports.size() > opts_.port_bound)
            throw LimitError(std::to_string(ports.size()) + " enabled ports exceed the enumeration bound of " +
                             std::to_string(opts_.port_bound));
        s.index = PortIndex(ports);
        std::vector<CompiledTerm> circuits;
        std::vector<std::uint64_t> motif_mask;
        for (const auto& m : sys_.motifs) {
            const MotifState& ms = cfg_.motif(m.name);
            std::set<InstanceId> mem;
            std::uint64_t mask = 0;
            for (const auto& [id, inst] : ms.instances) {
                mem.insert(id);
                mask |= s.index.instance_mask(id);
            }
            s.members.push_back(mem);
            motif_mask.push_back(mask);
        }
        for (std::size_t i = 0; i < sys_.motifs.size(); ++i)
            circuits.emplace_back(sys_.motifs[i].term, ExpandContext{cfg_, sys_.motifs[i].name, &sys_.types}, s.index,
                                  s.members[i]);

        // Mixed-radix walk: every instance idles or offers one enabled port.
        std::vector<std::vector<std::uint64_t>> choices;
        {
            std::map<InstanceId, std::vector<std::uint64_t>> per;
            for (std::size_t i = 0; i < ports.size(); ++i) per[ports[i].instance].push_back(std::uint64_t{1} << i);
            for (auto& [id, v] : per) choices.push_back(std::move(v));
        }
        std::vector<std::size_t> digit(choices.size(), 0);
        while (true) {
            std::uint64_t a = 0;
            for (std::size_t g = 0; g < choices.size(); ++g)
                if (digit[g]) a |= choices[g][digit[g] - 1];
            if (a != 0) {
                bool ok = true;
                for (std::size_t i = 0; ok && i < circuits.size(); ++i) ok = circuits[i].eval(a & motif_mask[i]);
                if (ok && sys_.migration) ok = !migration_outcomes(s.index.decode(a), s).empty();
                if (ok) s.masks.push_back(a);
            }
            std::size_t g = 0;
            for (; g < choices.size(); ++g) {
                if (++digit[g] <= choices[g].size()) break;
                digit[g] = 0;
            }
            if (g == choices.size()) break;
        }
        return s;
    }

    static std::vector<std::uint64_t> maximal(std::vector<std::uint64_t> masks) {
        std::stable_sort(masks.begin(), masks.end(), [](std::uint64_t x, std::uint64_t y) {
            return std::popcount(x) > std::popcount(y);
        });
        std::vector<std::uint64_t> out;
        for (auto m : masks) {
            bool dominated = false;
            for (auto o : out)
                if ((m & o) == m && m != o) {
                    dominated = true;
                    break;
                }
            if (!dominated) out.push_back(m);
        }
        return out;
    }

    Interaction restrict_to(const Interaction& a, const std::set<InstanceId>& members) const {
        Interaction out;
        for (const auto& p : a)
            if (members.count(p.instance)) out.insert(p);
        return out;
    }

    /// Resolved motif ops for `a` (snapshot = current configuration) and the
    /// fired post-state.
    std::pair<std::vector<ResolvedOp>, Configuration> motif_phase(const Interaction& a, const Search& s) const {
        std::vector<ResolvedOp> ops;
        Configuration post = cfg_;
        for (std::size_t i = 0; i < sys_.motifs.size(); ++i) {
            Interaction am = restrict_to(a, s.members[i]);
            auto part = motif_step_ops(sys_.motifs[i], cfg_, am, &sys_.types);
            ops.insert(ops.end(), part.begin(), part.end());
            fire(post.motif(sys_.motifs[i].name).instances, am);
        }
        return {std::move(ops), std::move(post)};
    }

    /// Post-motif outcomes at which `a` satisfies the migration term.
    std::vector<Configuration> migration_outcomes(const Interaction& a, const Search& s) const {
        auto [ops, post] = motif_phase(a, s);
        std::vector<Configuration> out;
        for (auto& c : apply_resolved_all(post, ops, &sys_.types, opts_.apply)) {
            TermPtr mu = expand_declarations(sys_.migration, ExpandContext{c, {}, &sys_.types});
            if (pilops_satisfies(a, EvalScope{c}, mu)) out.push_back(std::move(c));
        }
        return out;
    }

    /// Samples one outcome of `ops` on `post`: one alternative per conflicted
    /// target, uniformly.
    Configuration sample(const Configuration& post, const std::vector<ResolvedOp>& ops) {
        if (opts_.apply.all_orders) {
            auto outs = apply_resolved_all(post, ops, &sys_.types, opts_.apply);
            return std::move(outs[rng_.pick_index(outs.size())]);
        }
        OpPlan plan = plan_ops(ops);
        std::vector<std::size_t> pick;
        for (const auto& c : plan.choices) pick.push_back(rng_.pick_index(c.size()));
        Configuration c = post;
        apply_choice(c, plan, pick, &sys_.types);
        return c;
    }

    std::pair<Configuration, std::size_t> execute(const Interaction& a, const Search& s) {
        if (!sys_.migration) {
            auto [ops, post] = motif_phase(a, s);
            return {sample(post, ops), ops.size()};
        }
        auto [ops, post] = motif_phase(a, s);
        std::vector<Configuration> mids = migration_outcomes(a, s);
        Configuration mid = std::move(mids[rng_.pick_index(mids.size())]);
        TermPtr mu = expand_declarations(sys_.migration, ExpandContext{mid, {}, &sys_.types});
        OperationSet delta = ops_of(a, EvalScope{mid}, mu);
        auto mops = resolve_ops(delta, EvalScope{mid}, {});
        Configuration out = sample(mid, mops);
        return {std::move(out), ops.size() + mops.size()};
    }

    void check_choice(const Interaction& a, const Search& s) const {
        std::uint64_t am = s.index.encode(a);
        if (opts_.selection != Selection::AnyRandom)
            for (auto m : s.masks)
                if ((am & m) == am && am != m)
                    throw SemanticsError("selected interaction " + to_string(a) + " is not maximal");
        std::uint64_t seen = 0;
        for (const auto& mem : s.members) {
            std::uint64_t mm = 0;
            for (auto id : mem) mm |= s.index.instance_mask(id);
            if (mm & seen) throw SemanticsError("motif instance sets overlap");
            seen |= mm;
        }
        if ((am & ~seen) != 0) throw SemanticsError("interaction uses ports outside every motif");
    }

    System sys_;
    EngineOptions opts_;
    Configuration cfg_;
    Rng rng_;
    std::size_t step_count_ = 0;
};

}  // namespace dream
