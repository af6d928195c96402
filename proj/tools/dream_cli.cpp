// dream: run, benchmark and inspect coordination scenarios.
//
// Exit codes: 0 ok, 1 diagnostics (the scenario text is wrong), 2 runtime error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "dream/dsl/printer.hpp"
#include "dream/dsl/runner.hpp"

using namespace dream;
using namespace dream::dsl;

namespace {

struct Diagnosed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Overrides {
    std::optional<std::int64_t> steps, seed, size, range, masters, slaves;

    [[nodiscard]] Params params() const {
        Params p;
        if (steps) p["steps"] = *steps;
        if (seed) p["seed"] = *seed;
        if (size) p["size"] = *size;
        if (range) p["range"] = *range;
        if (masters) p["masters"] = *masters;
        if (slaves) p["slaves"] = *slaves;
        return p;
    }
    [[nodiscard]] bool model_params() const { return size || range || masters || slaves; }
};

void add_overrides(CLI::App* cmd, Overrides& o, bool with_steps_seed = true) {
    if (with_steps_seed) {
        cmd->add_option("--steps", o.steps, "number of steps")->check(CLI::NonNegativeNumber);
        cmd->add_option("--seed", o.seed, "random seed")->check(CLI::NonNegativeNumber);
    }
    cmd->add_option("--size", o.size, "torus size (flock, stigmergy)");
    cmd->add_option("--range", o.range, "sensing range (flock)");
    cmd->add_option("--masters", o.masters, "number of masters (master-slaves)");
    cmd->add_option("--slaves", o.slaves, "number of slaves (master-slaves)");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Scenario parse_file(const std::string& path) {
    ParseResult r = parse(read_file(path));
    if (!r.ok()) {
        for (const auto& d : r.diagnostics) std::cerr << path << ":" << d.str() << "\n";
        throw Diagnosed(path + ": " + std::to_string(r.diagnostics.size()) + " problem(s)");
    }
    return std::move(*r.scenario);
}

/// A built-in scenario name or a scenario file. With `lenient`, overrides a
/// built-in does not take are dropped instead of rejected.
Scenario load(const std::string& what, const Overrides& o, bool lenient = false) {
    if (const BuiltinScenario* b = find_builtin(what)) {
        Params p = o.params();
        if (lenient)
            for (auto it = p.begin(); it != p.end();) it = b->defaults.count(it->first) ? std::next(it) : p.erase(it);
        return builtin(what, p);
    }
    if (o.model_params()) throw Error("--size/--range/--masters/--slaves apply to built-in scenarios only");
    Scenario sc = parse_file(what);
    if (o.steps) sc.run.steps = static_cast<std::size_t>(*o.steps);
    if (o.seed) sc.run.seed = static_cast<std::uint64_t>(*o.seed);
    sc.system.seed = sc.run.seed;
    return sc;
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw Error("cannot write " + out);
    f << text;
}

/// "k=v1,v2,..." with optional "a..b" ranges.
std::pair<std::string, std::vector<std::int64_t>> parse_sweep(const std::string& s) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw Error("--sweep expects key=v1,v2,...");
    std::vector<std::int64_t> values;
    std::stringstream ss(s.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            const auto dots = item.find("..");
            if (dots == std::string::npos) {
                values.push_back(std::stoll(item));
            } else {
                const std::int64_t a = std::stoll(item.substr(0, dots)), b = std::stoll(item.substr(dots + 2));
                for (std::int64_t v = a; v <= b; ++v) values.push_back(v);
            }
        } catch (const std::logic_error&) {
            throw Error("bad sweep value '" + item + "'");
        }
    }
    if (values.empty()) throw Error("--sweep has no values");
    return {s.substr(0, eq), values};
}

int cmd_run(const std::string& what, const Overrides& o, const std::string& out) {
    Scenario sc = load(what, o);
    RunResult res = run_scenario(sc);
    emit(run_csv(res.rows), out);
    std::cerr << sc.name << ": " << res.steps.size() << " steps in " << format_number(std::round(res.elapsed_ms * 1000) / 1000)
              << " ms" << (res.quiescent ? " (quiescent)" : "") << "\n";
    return 0;
}

int cmd_bench(const std::string& what, const Overrides& o, const std::string& sweep, std::size_t reps,
              const std::string& out) {
    if (!find_builtin(what)) throw Error("bench runs built-in scenarios only: " + what);
    auto [key, values] = parse_sweep(sweep);
    Params base = o.params();
    base.erase(key);
    emit(bench_csv(bench(what, key, values, reps, base)), out);
    return 0;
}

int cmd_check(const std::string& path) {
    Scenario sc = parse_file(path);
    std::size_t n = sc.system.initial.instance_count();
    std::cout << path << ": ok (" << sc.system.types.size() << " types, " << sc.system.motifs.size() << " motifs, " << n
              << " instances)\n";
    return 0;
}

int cmd_models(const std::string& what, const std::string& term_name) {
    Scenario sc = load(what, {});
    const System& sys = sc.system;
    const Configuration& cfg = sys.initial;
    TermPtr expanded;
    std::vector<Port> universe;
    auto enabled_in = [&](const MotifState& ms) {
        for (const auto& [id, inst] : ms.instances) {
            auto ps = enabled_ports(inst);
            universe.insert(universe.end(), ps.begin(), ps.end());
        }
    };
    const MotifState* scope = nullptr;
    if (term_name == "migration") {
        if (!sys.migration) throw Error("the scenario has no migration term");
        expanded = expand_declarations(sys.migration, ExpandContext{cfg, {}, &sys.types});
        for (const auto& ms : cfg.motifs) enabled_in(ms);
    } else {
        const Motif& m = sys.motif(term_name);
        scope = &cfg.motif(term_name);
        expanded = expand_motif(m, cfg, &sys.types);
        enabled_in(*scope);
    }
    std::size_t count = 0;
    for_each_interaction(universe, [&](const Interaction& a) {
        if (!pilops_satisfies(a, EvalScope{cfg, scope}, expanded)) return;
        std::cout << to_string(a) << "\n";
        ++count;
    });
    std::cerr << count << " satisfying interaction(s) over " << universe.size() << " enabled port(s)\n";
    return 0;
}

int cmd_compare(const std::string& a, const std::string& b, const Overrides& o, const std::string& out) {
    std::vector<MetricRow> rows;
    for (const auto& name : {a, b}) {
        Scenario sc = load(name, o, true);
        RunResult res = run_scenario(sc);
        rows.insert(rows.end(), res.rows.begin(), res.rows.end());
        auto conv = first_step(res.rows, "flocks", 1);
        std::cerr << sc.name << ": "
                  << (conv ? "one flock at step " + std::to_string(*conv) : std::string("no single flock")) << "\n";
    }
    emit(run_csv(rows), out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Run, benchmark and inspect DReAM coordination scenarios"};
    app.require_subcommand(1);

    Overrides run_o, bench_o, cmp_o;
    std::string run_what, run_out, bench_what, bench_out, sweep, check_path, models_what, models_term, print_what;
    std::string cmp_a, cmp_b, cmp_out;
    std::size_t reps = 5;

    auto* run = app.add_subcommand("run", "run a scenario and write per-step metrics as CSV");
    run->add_option("scenario", run_what, "built-in name (master-slaves, flock, stigmergy) or file")->required();
    add_overrides(run, run_o);
    run->add_option("--out", run_out, "CSV output path (default: stdout)");

    auto* bench_cmd = app.add_subcommand("bench", "time runs of a built-in scenario over a parameter sweep");
    bench_cmd->add_option("scenario", bench_what, "built-in scenario")->required();
    bench_cmd->add_option("--sweep", sweep, "key=v1,v2,... (a..b expands to a range)")->required();
    bench_cmd->add_option("--reps", reps, "repetitions per point")->check(CLI::PositiveNumber);
    add_overrides(bench_cmd, bench_o);
    bench_cmd->add_option("--out", bench_out, "CSV output path (default: stdout)");

    auto* check = app.add_subcommand("check", "parse and validate a scenario file");
    check->add_option("file", check_path)->required();

    auto* models = app.add_subcommand("models", "list interactions satisfying a term in the initial state");
    models->add_option("scenario", models_what, "built-in name or file")->required();
    models->add_option("--term", models_term, "motif name, or 'migration'")->required();

    auto* cmp = app.add_subcommand("compare", "run two scenarios with shared overrides into one CSV");
    cmp->add_option("a", cmp_a)->required();
    cmp->add_option("b", cmp_b)->required();
    add_overrides(cmp, cmp_o);
    cmp->add_option("--out", cmp_out, "CSV output path (default: stdout)");

    auto* print_cmd = app.add_subcommand("print", "pretty-print a scenario");
    print_cmd->add_option("scenario", print_what, "built-in name or file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(run_what, run_o, run_out);
        if (*bench_cmd) return cmd_bench(bench_what, bench_o, sweep, reps, bench_out);
        if (*check) return cmd_check(check_path);
        if (*models) return cmd_models(models_what, models_term);
        if (*cmp) return cmd_compare(cmp_a, cmp_b, cmp_o, cmp_out);
        if (*print_cmd) {
            std::cout << print(load(print_what, {}));
            return 0;
        }
    } catch (const Diagnosed& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const DiagnosticsError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
