#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dream/dsl/lexer.hpp"
#include "dream/system/engine.hpp"

namespace dream::dsl {

struct RunSpec {
    std::size_t steps = 20;
    std::uint64_t seed = 1;
    std::vector<std::string> metrics;
};

/// A parsed scenario file: the system plus its run block.
struct Scenario {
    std::string name;
    System system;
    RunSpec run;
};

struct ParseResult {
    std::optional<Scenario> scenario;
    std::vector<Diagnostic> diagnostics;

    [[nodiscard]] bool ok() const { return scenario.has_value(); }
};

/// Several diagnostics at once (parse_or_throw).
class DiagnosticsError : public Error {
public:
    explicit DiagnosticsError(std::vector<Diagnostic> ds) : Error(join(ds)), diagnostics(std::move(ds)) {}
    std::vector<Diagnostic> diagnostics;

private:
    static std::string join(const std::vector<Diagnostic>& ds) {
        std::string s;
        for (const auto& d : ds) s += (s.empty() ? "" : "\n") + d.str();
        return s;
    }
};

inline bool is_metric_name(const std::string& m) {
    if (m == "flocks" || m == "instances" || m == "interaction_size" || m == "ops" || m == "runtime_ms") return true;
    return m.rfind("sum(", 0) == 0 && m.back() == ')';
}

namespace detail {

inline const std::map<std::string, ValueKind>& kind_words() {
    static const std::map<std::string, ValueKind> k = {
        {"int", ValueKind::Int},   {"bool", ValueKind::Bool},         {"real", ValueKind::Real},
        {"vec", ValueKind::Vector}, {"set", ValueKind::Set},          {"instance", ValueKind::Instance},
        {"node", ValueKind::Node}};
    return k;
}

inline const std::set<std::string>& macro_words() {
    static const std::set<std::string> w = {"Require", "Accept", "AtMost", "AtLeast", "Unique", "Exactly"};
    return w;
}

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(lex(src)) {}

    ParseResult run() {
        ParseResult out;
        try {
            while (peek().kind != Tok::End) item();
            finish();
        } catch (const ParseError& e) {
            diags_.push_back(e.diag);
        }
        std::stable_sort(diags_.begin(), diags_.end(), [](const Diagnostic& a, const Diagnostic& b) {
            return std::pair(a.pos.line, a.pos.column) < std::pair(b.pos.line, b.pos.column);
        });
        out.diagnostics = diags_;
        if (diags_.empty()) out.scenario = std::move(sc_);
        return out;
    }

private:
    std::vector<Token> toks_;
    std::size_t i_ = 0;
    Scenario sc_;
    std::vector<Diagnostic> diags_;
    std::vector<std::pair<std::string, std::string>> scope_;  // component variable -> type
    bool system_seen_ = false;

    // -- token helpers -------------------------------------------------------

    [[nodiscard]] const Token& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    const Token& next() {
        const Token& t = peek();
        if (i_ < toks_.size() - 1) ++i_;
        return t;
    }
    [[noreturn]] void fail(const SourcePos& pos, const std::string& msg) const { throw ParseError({pos, msg}); }
    [[noreturn]] void unexpected(const std::string& wanted) const {
        fail(peek().pos, "expected " + wanted + ", found " + describe(peek()));
    }
    bool accept(std::string_view p) {
        if (!peek().is(p)) return false;
        next();
        return true;
    }
    void expect(std::string_view p) {
        if (!accept(p)) unexpected("'" + std::string(p) + "'");
    }
    bool accept_word(std::string_view w) {
        if (!peek().is_word(w)) return false;
        next();
        return true;
    }
    void expect_word(std::string_view w) {
        if (!accept_word(w)) unexpected("'" + std::string(w) + "'");
    }
    std::string ident(const std::string& what) {
        if (peek().kind != Tok::Ident) unexpected(what);
        return next().text;
    }
    std::int64_t integer(const std::string& what) {
        bool neg = accept("-");
        if (peek().kind != Tok::Int) unexpected(what);
        const Token& t = next();
        try {
            std::int64_t v = std::stoll(t.text);
            return neg ? -v : v;
        } catch (const std::out_of_range&) {
            fail(t.pos, "integer literal out of range");
        }
    }
    void note(const SourcePos& pos, const std::string& msg) { diags_.push_back({pos, msg}); }

    // Runs `fn`; on a syntax error rewinds and returns the error.
    template <class Fn>
    std::optional<ParseError> attempt(Fn&& fn) {
        const std::size_t save = i_;
        const std::size_t nd = diags_.size();
        try {
            fn();
            return std::nullopt;
        } catch (const ParseError& e) {
            i_ = save;
            diags_.resize(nd);
            return e;
        }
    }

    static bool later(const ParseError& a, const ParseError& b) {
        const auto& p = a.diag.pos;
        const auto& q = b.diag.pos;
        return p.line != q.line ? p.line > q.line : p.column > q.column;
    }

    // -- top level ----------------------------------------------------------

    void item() {
        const Token& t = peek();
        if (accept_word("scenario")) {
            if (peek().kind != Tok::String) unexpected("a scenario name string");
            sc_.name = next().text;
            expect(";");
        } else if (t.is_word("type")) {
            type_block();
        } else if (t.is_word("motif")) {
            motif_block();
        } else if (t.is_word("system")) {
            system_block();
        } else if (t.is_word("run")) {
            run_block();
        } else {
            unexpected("'scenario', 'type', 'motif', 'system' or 'run'");
        }
    }

    void finish() {
        for (const auto& m : sc_.system.motifs)
            for (const auto& d : check_well_formed(m.term)) diags_.push_back(d);
        if (sc_.system.migration)
            for (const auto& d : check_well_formed(sc_.system.migration)) diags_.push_back(d);
        if (!diags_.empty()) return;
        try {
            sc_.system.validate();
        } catch (const ModelError& e) {
            note({}, e.what());
        }
    }

    // -- component types ----------------------------------------------------

    ValueKind kind_word() {
        const Token& t = peek();
        auto it = kind_words().find(t.text);
        if (t.kind != Tok::Ident || it == kind_words().end())
            unexpected("a value kind (int, bool, real, vec, set, instance, node)");
        next();
        return it->second;
    }

    std::vector<std::string> ident_list(const std::string& what) {
        std::vector<std::string> out{ident(what)};
        while (accept(",")) out.push_back(ident(what));
        return out;
    }

    void type_block() {
        const SourcePos pos = next().pos;
        ComponentType t;
        t.name = ident("a type name");
        expect("{");
        bool has_initial = false;
        while (!accept("}")) {
            if (accept_word("locations")) {
                for (auto& l : ident_list("a location")) t.locations.push_back(std::move(l));
            } else if (accept_word("initial")) {
                t.initial = ident("a location");
                has_initial = true;
            } else if (accept_word("var")) {
                VariableDecl v;
                v.name = ident("a variable name");
                expect(":");
                v.kind = kind_word();
                if (accept("=")) v.init = expression();
                t.variables.push_back(std::move(v));
            } else if (accept_word("ports")) {
                for (auto& p : ident_list("a port")) t.ports.push_back(std::move(p));
            } else if (peek().is_word("on")) {
                const SourcePos at = next().pos;
                std::string port = ident("a port");
                if (t.port_ops.count(port)) note(at, "second operation block for port " + port);
                t.port_ops[port] = op_block();
                accept(";");
                continue;
            } else if (peek().kind == Tok::Ident) {
                Transition tr;
                tr.from = next().text;
                expect("-");
                tr.port = ident("a port");
                expect("->");
                tr.to = ident("a location");
                t.transitions.push_back(std::move(tr));
            } else {
                unexpected("a type member (locations, initial, var, ports, on, or a transition)");
            }
            expect(";");
        }
        if (!has_initial) {
            note(pos, "component type " + t.name + " has no initial location");
            return;
        }
        if (sc_.system.types.count(t.name)) {
            note(pos, "duplicate component type " + t.name);
            return;
        }
        try {
            const std::string name = t.name;
            sc_.system.types[name] = make_type(std::move(t));
        } catch (const ModelError& e) {
            note(pos, e.what());
        }
    }

    // -- motifs -------------------------------------------------------------

    NodeId node_literal() {
        if (accept("[")) {
            std::vector<std::int64_t> c;
            if (!peek().is("]")) {
                c.push_back(integer("a coordinate"));
                while (accept(",")) c.push_back(integer("a coordinate"));
            }
            expect("]");
            return NodeId(std::move(c));
        }
        return NodeId{integer("a node")};
    }

    Map map_descriptor() {
        const Token& t = peek();
        if (accept_word("single")) return Map::single();
        if (t.is_word("torus") || t.is_word("grid")) {
            bool torus = next().text == "torus";
            expect("(");
            const SourcePos at = peek().pos;
            std::int64_t s = integer("a map size");
            expect(")");
            if (s < 1) fail(at, "map size must be >= 1");
            return torus ? Map::torus(s) : Map::grid(s);
        }
        if (accept_word("explicit")) {
            Map m = Map::explicit_map();
            expect("{");
            while (!accept("}")) {
                if (accept_word("node")) {
                    m.add_node(node_literal());
                } else if (accept_word("edge")) {
                    const SourcePos at = peek().pos;
                    NodeId a = node_literal();
                    expect("->");
                    NodeId b = node_literal();
                    try {
                        m.add_edge(a, b);
                    } catch (const Error& e) {
                        fail(at, e.what());
                    }
                } else {
                    unexpected("'node' or 'edge'");
                }
                expect(";");
            }
            return m;
        }
        unexpected("a map (single, torus(s), grid(s), explicit { ... })");
    }

    void motif_block() {
        const SourcePos pos = next().pos;
        std::string name = ident("a motif name");
        expect("{");
        Map map = Map::single();
        std::vector<AttributeDecl> attrs;
        CoordPtr term;
        while (!accept("}")) {
            if (accept_word("map")) {
                map = map_descriptor();
            } else if (accept_word("attr")) {
                AttributeDecl a;
                const SourcePos at = peek().pos;
                a.name = ident("an attribute name");
                expect(":");
                a.kind = kind_word();
                a.init = default_value(a.kind);
                if (accept("=")) a.init = constant(expression(), at);
                try {
                    a.init = coerce(a.init, a.kind);
                } catch (const EvalError& e) {
                    fail(at, e.what());
                }
                attrs.push_back(std::move(a));
            } else if (accept_word("term")) {
                if (term) note(peek().pos, "motif " + name + " has two terms");
                term = coord_term();
            } else {
                unexpected("a motif member (map, attr, term)");
            }
            expect(";");
        }
        for (auto& a : attrs) map.declare_attribute(std::move(a));
        if (sc_.system.initial.find_motif(name)) {
            note(pos, "duplicate motif " + name);
            return;
        }
        if (!term) {
            note(pos, "motif " + name + " has no term");
            return;
        }
        sc_.system.initial.add_motif(name, std::move(map));
        sc_.system.motifs.push_back({name, term});
    }

    // -- system and run blocks ---------------------------------------------

    Value constant(const ExprPtr& e, const SourcePos& pos, std::optional<InstanceId> self = std::nullopt) {
        static const Configuration empty;
        try {
            return evaluate(self ? substitute(e, "self", *self) : e, EvalScope{empty});
        } catch (const Error& err) {
            fail(pos, std::string("expected a constant: ") + err.what());
        }
    }

    void system_block() {
        const SourcePos pos = next().pos;
        if (system_seen_) note(pos, "second system block");
        system_seen_ = true;
        expect("{");
        while (!accept("}")) {
            if (accept_word("migration")) {
                if (sc_.system.migration) note(peek().pos, "second migration term");
                sc_.system.migration = coord_term();
            } else if (peek().is_word("place")) {
                placement();
            } else {
                unexpected("'migration' or 'place'");
            }
            expect(";");
        }
    }

    void placement() {
        const SourcePos pos = next().pos;
        std::int64_t count = 1;
        if (peek().kind == Tok::Int) count = integer("a count");
        const SourcePos type_pos = peek().pos;
        std::string type = ident("a component type");
        expect_word("in");
        std::string motif = ident("a motif");
        std::optional<NodeId> node;
        if (accept_word("at")) node = node_literal();
        std::vector<std::tuple<std::string, ExprPtr, SourcePos>> with;
        if (accept_word("with")) {
            expect("{");
            if (!peek().is("}")) {
                do {
                    const SourcePos at = peek().pos;
                    std::string var = ident("a variable");
                    expect("=");
                    with.emplace_back(var, expression(), at);
                } while (accept(","));
            }
            expect("}");
        }
        auto tit = sc_.system.types.find(type);
        const std::size_t before = diags_.size();
        if (tit == sc_.system.types.end()) note(type_pos, "unknown component type " + type);
        if (!sc_.system.initial.find_motif(motif)) note(pos, "unknown motif " + motif + " (declare motifs before the system block)");
        if (count < 1) note(pos, "placement count must be >= 1");
        if (diags_.size() != before) return;
        auto& cfg = sc_.system.initial;
        for (std::int64_t k = 0; k < count; ++k) {
            InstanceId id = cfg.next_id;
            ComponentInstance inst;
            try {
                inst = instantiate(tit->second, id, &cfg);
            } catch (const ModelError& e) {
                fail(pos, e.what());
            }
            for (const auto& [var, e, at] : with) {
                const VariableDecl* decl = tit->second->variable(var);
                if (!decl) fail(at, "type " + type + " has no variable " + var);
                try {
                    inst.valuation[var] = coerce(constant(e, at, id), decl->kind);
                } catch (const EvalError& err) {
                    fail(at, err.what());
                }
            }
            try {
                cfg.add_instance(motif, std::move(inst), node);
            } catch (const Error& e) {
                fail(pos, e.what());
            }
        }
    }

    void run_block() {
        next();
        expect("{");
        while (!accept("}")) {
            if (accept_word("steps")) {
                const SourcePos at = peek().pos;
                std::int64_t n = integer("a step count");
                if (n < 0) fail(at, "steps must be >= 0");
                sc_.run.steps = static_cast<std::size_t>(n);
            } else if (accept_word("seed")) {
                const SourcePos at = peek().pos;
                std::int64_t n = integer("a seed");
                if (n < 0) fail(at, "seed must be >= 0");
                sc_.run.seed = static_cast<std::uint64_t>(n);
            } else if (accept_word("metrics")) {
                do {
                    const SourcePos at = peek().pos;
                    std::string m = ident("a metric name");
                    if (m == "sum") {
                        expect("(");
                        std::string t = ident("a component type");
                        expect(".");
                        std::string v = ident("a variable");
                        expect(")");
                        m = "sum(" + t + "." + v + ")";
                    }
                    if (!is_metric_name(m)) fail(at, "unknown metric " + m);
                    sc_.run.metrics.push_back(m);
                } while (accept(","));
            } else {
                unexpected("'steps', 'seed' or 'metrics'");
            }
            expect(";");
        }
        sc_.system.seed = sc_.run.seed;
    }

    // -- expressions ----------------------------------------------------------

    ExprPtr expression() { return expr_implies(); }

    ExprPtr expr_implies() {
        ExprPtr a = expr_or();
        if (accept("=>")) return expr::binary(BinOp::Implies, a, expr_implies());
        return a;
    }
    ExprPtr expr_or() {
        ExprPtr a = expr_and();
        while (accept("||")) a = expr::binary(BinOp::Or, a, expr_and());
        return a;
    }
    ExprPtr expr_and() {
        ExprPtr a = expr_cmp();
        while (accept("&&")) a = expr::binary(BinOp::And, a, expr_cmp());
        return a;
    }
    std::optional<BinOp> cmp_op() const {
        static const std::map<std::string, BinOp> ops = {{"==", BinOp::Eq}, {"!=", BinOp::Ne}, {"<", BinOp::Lt},
                                                         {"<=", BinOp::Le}, {">", BinOp::Gt},   {">=", BinOp::Ge}};
        const Token& t = peek();
        if (t.kind == Tok::Punct) {
            auto it = ops.find(t.text);
            if (it != ops.end()) return it->second;
        }
        if (t.is_word("in")) return BinOp::In;
        return std::nullopt;
    }
    ExprPtr expr_cmp() {
        ExprPtr a = expr_add();
        if (auto op = cmp_op()) {
            next();
            return expr::binary(*op, a, expr_add());
        }
        return a;
    }
    ExprPtr expr_add() {
        ExprPtr a = expr_mul();
        for (;;) {
            if (accept("+")) a = expr::binary(BinOp::Add, a, expr_mul());
            else if (accept("-")) a = expr::binary(BinOp::Sub, a, expr_mul());
            else if (accept_word("union")) a = expr::binary(BinOp::Union, a, expr_mul());
            else if (accept_word("minus")) a = expr::binary(BinOp::Minus, a, expr_mul());
            else return a;
        }
    }
    ExprPtr expr_mul() {
        ExprPtr a = expr_unary();
        for (;;) {
            if (accept("*")) a = expr::binary(BinOp::Mul, a, expr_unary());
            else if (accept("/")) a = expr::binary(BinOp::Div, a, expr_unary());
            else if (accept("%")) a = expr::binary(BinOp::Mod, a, expr_unary());
            else return a;
        }
    }
    ExprPtr expr_unary() {
        if (accept("!")) return expr::unary(UnOp::Not, expr_unary());
        if (accept("-")) {
            ExprPtr a = expr_unary();
            if (a->kind == ExprKind::Literal && a->literal.is(ValueKind::Int)) return expr::lit(Value(-a->literal.as_int()));
            if (a->kind == ExprKind::Literal && a->literal.is(ValueKind::Real)) return expr::lit(Value(-a->literal.as_real()));
            return expr::unary(UnOp::Neg, a);
        }
        return expr_postfix();
    }
    ExprPtr expr_postfix() {
        ExprPtr a = expr_primary();
        while (peek().is(".") && peek(1).kind == Tok::Ident) {
            next();
            a = expr::var(a, next().text);
        }
        return a;
    }
    bool call_ahead(std::string_view w) const { return peek().is_word(w) && peek(1).is("("); }

    std::vector<ExprPtr> expr_list(std::string_view close) {
        std::vector<ExprPtr> out;
        if (!peek().is(close)) {
            out.push_back(expression());
            while (accept(",")) out.push_back(expression());
        }
        expect(close);
        return out;
    }

    ExprPtr expr_primary() {
        const Token& t = peek();
        if (t.kind == Tok::Int) return expr::lit(Value(integer("an integer")));
        if (t.kind == Tok::Real) return expr::lit(Value(std::stod(next().text)));
        if (accept_word("true")) return expr::lit(Value(true));
        if (accept_word("false")) return expr::lit(Value(false));
        if (t.is("#")) {
            const SourcePos pos = next().pos;
            if (peek().kind != Tok::Int) unexpected("an instance number after '#'");
            InstanceTerm it = InstanceTerm::concrete(std::stoll(next().text));
            it.pos = pos;
            return expr::instance(it);
        }
        if (call_ahead("at")) {
            next();
            next();
            ExprPtr owner = expression();
            expect(")");
            if (peek().is(".") && peek(1).kind == Tok::Ident) {
                next();
                return expr::node_attr(owner, next().text);
            }
            return expr::address(owner);
        }
        if (call_ahead("size")) {
            next();
            next();
            ExprPtr a = expression();
            expect(")");
            return expr::unary(UnOp::Size, a);
        }
        if (call_ahead("distance")) {
            next();
            next();
            ExprPtr a = expression();
            expect(",");
            ExprPtr b = expression();
            expect(")");
            return expr::distance(a, b);
        }
        if (t.is_word("node") && peek(1).is("[")) {
            next();
            return expr::lit(Value::node(node_literal()));
        }
        if (accept("(")) {
            ExprPtr a = expression();
            expect(")");
            return a;
        }
        if (accept("[")) return expr::vec_lit(expr_list("]"));
        if (accept("{")) return expr::set_lit(expr_list("}"));
        if (t.kind == Tok::Ident) {
            next();
            return expr::instance(InstanceTerm::variable(t.text, t.pos));
        }
        unexpected("an expression");
    }

    // -- guards ---------------------------------------------------------------

    [[nodiscard]] const std::string* scope_type(const std::string& var) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (it->first == var) return &it->second;
        return nullptr;
    }

    /// `owner.name` names a port when the owner's declared type has that port;
    /// for concrete or undeclared owners, when some type declares it.
    [[nodiscard]] bool names_port(const InstanceTerm& owner, const std::string& name) const {
        if (owner.is_var())
            if (const std::string* type = scope_type(owner.var)) {
                auto it = sc_.system.types.find(*type);
                return it != sc_.system.types.end() && it->second->has_port(name);
            }
        for (const auto& [n, t] : sc_.system.types)
            if (t->has_port(name)) return true;
        return false;
    }

    InstanceTerm instance_term() {
        ExprPtr e = expr_primary();
        if (e->kind != ExprKind::Instance) fail(e->pos, "expected a component variable or #id");
        return e->inst;
    }

    PortRef port_ref() {
        const SourcePos pos = peek().pos;
        ExprPtr e = expr_postfix();
        if (e->kind != ExprKind::Var || e->kids[0]->kind != ExprKind::Instance)
            fail(pos, "expected a port such as s.serve");
        if (!names_port(e->kids[0]->inst, e->name)) fail(pos, e->name + " is not a port of " + e->kids[0]->inst.str());
        return {e->kids[0]->inst, e->name};
    }

    FormulaPtr formula() {
        FormulaPtr a = formula_or();
        if (accept("=>")) return pil::implies(a, formula());
        return a;
    }
    FormulaPtr formula_or() {
        std::vector<FormulaPtr> kids{formula_and()};
        while (accept("||")) kids.push_back(formula_and());
        return kids.size() == 1 ? kids[0] : pil::disj(std::move(kids));
    }
    FormulaPtr formula_and() {
        std::vector<FormulaPtr> kids{formula_not()};
        while (accept("&&")) kids.push_back(formula_not());
        return kids.size() == 1 ? kids[0] : pil::conj(std::move(kids));
    }
    FormulaPtr formula_not() {
        if (accept("!")) return pil::negate(formula_not());
        return formula_atom();
    }
    [[nodiscard]] bool expression_continues() const {
        static const std::set<std::string> ops = {"+", "-", "*", "/", "%", "==", "!=", "<", "<=", ">", ">=", "."};
        const Token& t = peek();
        return (t.kind == Tok::Punct && ops.count(t.text)) || t.is_word("in") || t.is_word("union") ||
               t.is_word("minus");
    }
    FormulaPtr formula_atom() {
        if (call_ahead("atmost")) {
            next();
            next();
            std::int64_t k = integer("a bound");
            std::vector<PortRef> refs;
            while (accept(",")) refs.push_back(port_ref());
            expect(")");
            return pil::at_most(k, std::move(refs));
        }
        if (call_ahead("idle")) {
            next();
            next();
            InstanceTerm it = instance_term();
            expect(")");
            return pil::idle(it);
        }
        if (peek().is("(")) {
            FormulaPtr f;
            auto err = attempt([&] {
                next();
                f = formula();
                expect(")");
                if (expression_continues()) unexpected("a connective");
            });
            if (!err) return f;
        }
        ExprPtr e = expr_cmp();
        if (e->kind == ExprKind::Var && e->kids[0]->kind == ExprKind::Instance && names_port(e->kids[0]->inst, e->name))
            return pil::port(PortRef{e->kids[0]->inst, e->name});
        return pil::pred(e);
    }

    // -- operations -----------------------------------------------------------

    OperationSet op_block() {
        expect("{");
        OperationSet ops;
        while (!accept("}")) ops.insert(operation());
        return ops;
    }

    OperationPtr operation() {
        const Token& t = peek();
        const SourcePos pos = t.pos;
        if (accept_word("if")) {
            ExprPtr cond = expression();
            OperationSet then_ops = op_block();
            OperationSet else_ops;
            if (accept_word("else")) {
                if (peek().is_word("if")) else_ops.insert(operation());
                else else_ops = op_block();
            }
            return op::conditional(cond, std::move(then_ops), std::move(else_ops));
        }
        static const std::map<std::string, std::pair<OpKind, int>> calls = {
            {"delete", {OpKind::Delete, 1}},        {"addNode", {OpKind::AddNode, 1}},
            {"removeNode", {OpKind::RemoveNode, 1}}, {"addEdge", {OpKind::AddEdge, 2}},
            {"removeEdge", {OpKind::RemoveEdge, 2}}, {"move", {OpKind::Move, 2}}};
        OperationPtr out;
        if (call_ahead("create")) {
            next();
            next();
            std::string type = ident("a component type");
            if (!sc_.system.types.count(type)) note(pos, "unknown component type " + type);
            expect(",");
            ExprPtr node = expression();
            expect(")");
            out = op::create(type, node);
        } else if (call_ahead("migrate")) {
            next();
            next();
            ExprPtr inst = expression();
            expect(",");
            std::string motif = ident("a motif");
            expect(",");
            ExprPtr node = expression();
            expect(")");
            out = op::migrate(inst, motif, node);
        } else if (t.kind == Tok::Ident && calls.count(t.text) && peek(1).is("(")) {
            auto [kind, arity] = calls.at(next().text);
            next();
            ExprPtr a = expression();
            if (arity == 2) {
                expect(",");
                ExprPtr b = expression();
                expect(")");
                out = op::binary_op(kind, a, b);
            } else {
                expect(")");
                out = op::unary_op(kind, a);
            }
        } else {
            ExprPtr target = expr_postfix();
            expect(":=");
            ExprPtr value = expression();
            try {
                out = op::assign(target, value);
            } catch (const ModelError& e) {
                fail(pos, e.what());
            }
        }
        expect(";");
        return out;
    }

    // -- terms ------------------------------------------------------------------

    TermPtr rule() {
        const SourcePos pos = peek().pos;
        FormulaPtr g = formula();
        if (accept("->")) return term::rule(g, op_block());
        if (peek().is("{")) {
            if (g->kind != FormulaKind::Implies || g->kids[0]->kind != FormulaKind::Port)
                fail(pos, "a conjunctive rule has the form c.p => guard { ops }");
            return conjunctive_term(g->kids[0]->port, g->kids[1], op_block());
        }
        unexpected("'->' or an operation block after the guard");
    }

    TermPtr term_expr() {
        std::vector<TermPtr> kids{term_and()};
        while (accept("|")) kids.push_back(term_and());
        return kids.size() == 1 ? kids[0] : term::any(std::move(kids));
    }
    TermPtr term_and() {
        std::vector<TermPtr> kids{term_primary()};
        while (accept("&")) kids.push_back(term_primary());
        return kids.size() == 1 ? kids[0] : term::all(std::move(kids));
    }
    TermPtr term_primary() {
        if (peek().is("(")) {
            TermPtr t;
            auto nested = attempt([&] {
                next();
                t = term_expr();
                expect(")");
            });
            if (!nested) return t;
            auto plain = attempt([&] { t = rule(); });
            if (!plain) return t;
            throw later(*nested, *plain) ? *nested : *plain;
        }
        return rule();
    }

    // -- coordination terms -----------------------------------------------------

    static bool all_lifted(const std::vector<CoordPtr>& kids) {
        for (const auto& k : kids)
            if (k->kind != CoordKind::Lifted) return false;
        return true;
    }
    static std::vector<TermPtr> bodies(const std::vector<CoordPtr>& kids) {
        std::vector<TermPtr> out;
        for (const auto& k : kids) out.push_back(k->body);
        return out;
    }

    CoordPtr coord_term() {
        std::vector<CoordPtr> kids{coord_and()};
        while (accept("|")) kids.push_back(coord_and());
        if (kids.size() == 1) return kids[0];
        if (all_lifted(kids)) return coord::lifted(term::any(bodies(kids)));
        return coord::any(std::move(kids));
    }
    CoordPtr coord_and() {
        std::vector<CoordPtr> kids{coord_primary()};
        while (accept("&")) kids.push_back(coord_primary());
        if (kids.size() == 1) return kids[0];
        if (all_lifted(kids)) return coord::lifted(term::all(bodies(kids)));
        return coord::all(std::move(kids));
    }

    CoordPtr coord_primary() {
        const Token& t = peek();
        if (t.is_word("forall") || t.is_word("exists")) return quantified();
        if (t.kind == Tok::Ident && macro_words().count(t.text) && peek(1).is("(")) return macro_or_restriction();
        if (t.is("(")) {
            CoordPtr c;
            auto nested = attempt([&] {
                next();
                c = coord_term();
                expect(")");
            });
            if (!nested) return c;
            TermPtr r;
            auto plain = attempt([&] { r = rule(); });
            if (!plain) return coord::lifted(r);
            throw later(*nested, *plain) ? *nested : *plain;
        }
        return coord::lifted(rule());
    }

    CoordPtr quantified() {
        const SourcePos pos = peek().pos;
        Declaration decls;
        do {
            Quantifier q;
            if (accept_word("forall")) q = Quantifier::Forall;
            else if (accept_word("exists")) q = Quantifier::Exists;
            else unexpected("'forall' or 'exists'");
            std::vector<std::pair<std::string, SourcePos>> vars;
            do {
                const SourcePos at = peek().pos;
                vars.emplace_back(ident("a component variable"), at);
            } while (accept(","));
            expect(":");
            const SourcePos type_pos = peek().pos;
            std::string type = ident("a component type");
            if (!sc_.system.types.count(type)) note(type_pos, "unknown component type " + type);
            std::string motif;
            if (accept_word("in")) motif = ident("a motif");
            for (auto& [v, at] : vars) decls.push_back({q, v, type, motif, at});
        } while (accept(","));
        expect(".");
        const std::size_t depth = scope_.size();
        for (const auto& d : decls) scope_.emplace_back(d.var, d.type);
        TermPtr body = term_primary();
        scope_.resize(depth);
        CoordTerm ct;
        ct.kind = CoordKind::Quantified;
        ct.decls = std::move(decls);
        ct.body = std::move(body);
        ct.pos = pos;
        return coord::make(std::move(ct));
    }

    CoordPtr macro_or_restriction() {
        const Token& head = next();
        const std::string name = head.text;
        const bool counting = name == "AtMost" || name == "AtLeast" || name == "Exactly";
        std::int64_t k = 1;
        expect("(");
        if (counting) {
            k = integer("a bound");
            expect(")");
            expect("(");
        }
        const SourcePos type_pos = peek().pos;
        std::string type = ident("a component type");
        std::string port;
        if (accept(".")) port = ident("a port");
        auto tit = sc_.system.types.find(type);
        if (tit == sc_.system.types.end()) note(type_pos, "unknown component type " + type);
        else if (!port.empty() && !tit->second->has_port(port)) note(type_pos, type + " has no port " + port);
        if (accept(")")) {
            if (name != "AtMost") fail(head.pos, name + " needs a port list: " + name + "(T.p : U.q j, ...)");
            CoordTerm ct;
            ct.kind = CoordKind::Restriction;
            ct.bound = k;
            ct.type = type;
            ct.port = port;
            ct.pos = head.pos;
            return coord::make(std::move(ct));
        }
        expect(":");
        if (port.empty()) fail(type_pos, "a macro is anchored at a port: " + name + "(T.p : ...)");
        MacroConstraint mc;
        mc.kind = name == "Require"   ? MacroKind::Require
                  : name == "Accept"  ? MacroKind::Accept
                  : name == "AtMost"  ? MacroKind::AtMost
                  : name == "AtLeast" ? MacroKind::AtLeast
                  : name == "Unique"  ? MacroKind::Unique
                                      : MacroKind::Exactly;
        mc.k = k;
        mc.anchor_type = type;
        mc.anchor_port = port;
        mc.pos = head.pos;
        do {
            const SourcePos at = peek().pos;
            MacroItem item;
            item.type = ident("a component type");
            expect(".");
            item.port = ident("a port");
            item.index = ident("an index variable");
            auto it = sc_.system.types.find(item.type);
            if (it == sc_.system.types.end()) note(at, "unknown component type " + item.type);
            else if (!it->second->has_port(item.port)) note(at, item.type + " has no port " + item.port);
            mc.items.push_back(std::move(item));
        } while (accept(","));
        if (accept_word("where")) mc.psi = expression();
        expect(")");
        return coord::macro(std::move(mc));
    }
};

}  // namespace detail

/// Parses scenario text. On failure `scenario` is empty and `diagnostics`
/// holds positioned messages (the first syntax error, or every semantic one).
inline ParseResult parse(std::string_view src) {
    try {
        return detail::Parser(src).run();
    } catch (const ParseError& e) {
        return {std::nullopt, {e.diag}};
    }
}

inline Scenario parse_or_throw(std::string_view src) {
    ParseResult r = parse(src);
    if (!r.ok()) throw DiagnosticsError(std::move(r.diagnostics));
    return std::move(*r.scenario);
}

}  // namespace dream::dsl
