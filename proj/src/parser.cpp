#include "ppond/parser.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace ppond {

namespace {

// ---------------------------------------------------------------------------
// S-expression reader
// ---------------------------------------------------------------------------

struct Sexpr {
    bool is_list = false;
    std::string token;
    std::vector<Sexpr> items;
    int line = 0, column = 0;
};

class Lexer {
public:
    Lexer(const std::string& text, std::string file)
        : text_(text), file_(std::move(file)) {}

    SourceSpan span() const { return {file_, line_, column_}; }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(span(), msg); }
    [[noreturn]] static void fail_at(const std::string& file, const Sexpr& e,
                                     const std::string& msg) {
        throw ParseError({file, e.line, e.column}, msg);
    }

    std::vector<Sexpr> read_all() {
        std::vector<Sexpr> out;
        skip_ws();
        while (!eof()) {
            out.push_back(read());
            skip_ws();
        }
        return out;
    }

private:
    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_ws() {
        while (!eof()) {
            char c = peek();
            if (c == ';') {
                while (!eof() && peek() != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else {
                break;
            }
        }
    }

    Sexpr read() {
        skip_ws();
        if (eof()) fail("unexpected end of input");
        Sexpr e;
        e.line = line_;
        e.column = column_;
        if (peek() == '(') {
            advance();
            e.is_list = true;
            skip_ws();
            while (!eof() && peek() != ')') {
                e.items.push_back(read());
                skip_ws();
            }
            if (eof()) fail("missing ')'");
            advance();
            return e;
        }
        if (peek() == ')') fail("unexpected ')'");
        while (!eof()) {
            char c = peek();
            if (c == '(' || c == ')' || c == ';' || c == ' ' || c == '\t' || c == '\r' ||
                c == '\n')
                break;
            e.token += c;
            advance();
        }
        return e;
    }

    const std::string& text_;
    std::string file_;
    std::size_t pos_ = 0;
    int line_ = 1, column_ = 1;
};

bool is_keyword(const Sexpr& e, const char* kw) {
    return !e.is_list && e.token == kw;
}

std::string lowered(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

double parse_number(const std::string& file, const Sexpr& e) {
    if (e.is_list) Lexer::fail_at(file, e, "expected a number");
    char* end = nullptr;
    double v = std::strtod(e.token.c_str(), &end);
    if (end == nullptr || *end != '\0')
        Lexer::fail_at(file, e, "expected a number, got '" + e.token + "'");
    return v;
}

// ---------------------------------------------------------------------------
// Lifted representation (pre-grounding)
// ---------------------------------------------------------------------------

struct LiftedAtom {
    std::string predicate;
    std::vector<std::string> args;  // objects or ?variables
    int line = 0, column = 0;
};

struct LiftedLiteral {
    LiftedAtom atom;
    bool negated = false;
};

struct LiftedOutcome {
    double probability = 1.0;
    std::vector<LiftedLiteral> literals;
    int line = 0, column = 0;
};

struct LiftedEffect {
    std::vector<LiftedLiteral> condition;
    std::vector<LiftedOutcome> outcomes;
};

struct ActionSchema {
    std::string name;
    std::vector<std::pair<std::string, std::string>> params;  // (?var, type)
    std::vector<LiftedLiteral> preconditions;
    std::vector<LiftedEffect> effects;
    std::vector<LiftedAtom> observed;
    double cost = 1.0;
    int line = 0, column = 0;
};

struct LiftedFragment {
    double probability;
    std::vector<LiftedLiteral> literals;
    int line = 0, column = 0;
};

struct LiftedDomain {
    std::string name;
    std::vector<std::string> types;
    std::vector<PredicateSchema> predicates;
    std::vector<ActionSchema> actions;
};

struct LiftedProblem {
    std::string name;
    std::string domain_name;
    std::vector<std::pair<std::string, std::string>> objects;
    std::vector<LiftedLiteral> init;
    std::vector<std::vector<LiftedFragment>> belief_formulas;
    std::vector<LiftedLiteral> goal;
};

class DomainParser {
public:
    DomainParser(const std::string& file) : file_(file) {}

    [[noreturn]] void fail(const Sexpr& e, const std::string& msg) const {
        Lexer::fail_at(file_, e, msg);
    }

    LiftedAtom parse_atom(const Sexpr& e) const {
        if (!e.is_list || e.items.empty() || e.items[0].is_list)
            fail(e, "expected an atom '(predicate args...)'");
        LiftedAtom atom;
        atom.predicate = lowered(e.items[0].token);
        atom.line = e.line;
        atom.column = e.column;
        for (std::size_t i = 1; i < e.items.size(); ++i) {
            if (e.items[i].is_list) fail(e.items[i], "atom arguments must be symbols");
            atom.args.push_back(lowered(e.items[i].token));
        }
        return atom;
    }

    LiftedLiteral parse_literal(const Sexpr& e) const {
        if (e.is_list && !e.items.empty() && is_keyword(e.items[0], "not")) {
            if (e.items.size() != 2) fail(e, "'not' takes exactly one atom");
            return {parse_atom(e.items[1]), true};
        }
        return {parse_atom(e), false};
    }

    std::vector<LiftedLiteral> parse_literal_conjunction(const Sexpr& e) const {
        std::vector<LiftedLiteral> out;
        if (e.is_list && (e.items.empty() || is_keyword(e.items[0], "and"))) {
            for (std::size_t i = 1; i < e.items.size(); ++i)
                out.push_back(parse_literal(e.items[i]));
        } else {
            out.push_back(parse_literal(e));
        }
        return out;
    }

    // Normalizes an effect expression into single-condition effects. Collects
    // deterministic literals of each condition scope into one outcome.
    void parse_effect(const Sexpr& e, std::vector<LiftedLiteral> condition,
                      std::vector<LiftedEffect>& out,
                      std::vector<LiftedLiteral>& plain_accum) const {
        if (e.is_list && !e.items.empty() && is_keyword(e.items[0], "and")) {
            std::vector<LiftedLiteral> local;
            for (std::size_t i = 1; i < e.items.size(); ++i)
                parse_effect(e.items[i], condition, out, local);
            if (!local.empty()) {
                LiftedEffect eff;
                eff.condition = condition;
                eff.outcomes.push_back({1.0, std::move(local), e.line, e.column});
                out.push_back(std::move(eff));
            }
            return;
        }
        if (e.is_list && !e.items.empty() && is_keyword(e.items[0], "when")) {
            if (e.items.size() != 3) fail(e, "'when' takes a condition and an effect");
            std::vector<LiftedLiteral> cond = condition;
            for (LiftedLiteral& l : parse_literal_conjunction(e.items[1]))
                cond.push_back(std::move(l));
            std::vector<LiftedLiteral> local;
            parse_effect(e.items[2], cond, out, local);
            if (!local.empty()) {
                LiftedEffect eff;
                eff.condition = std::move(cond);
                eff.outcomes.push_back({1.0, std::move(local), e.line, e.column});
                out.push_back(std::move(eff));
            }
            return;
        }
        if (e.is_list && !e.items.empty() && is_keyword(e.items[0], "probabilistic")) {
            if (e.items.size() < 3 || (e.items.size() - 1) % 2 != 0)
                fail(e, "'probabilistic' takes <p> (<effects>) pairs");
            LiftedEffect eff;
            eff.condition = condition;
            double sum = 0.0;
            for (std::size_t i = 1; i < e.items.size(); i += 2) {
                LiftedOutcome outcome;
                outcome.probability = parse_number(file_, e.items[i]);
                outcome.line = e.items[i].line;
                outcome.column = e.items[i].column;
                if (!(outcome.probability > 0.0 && outcome.probability <= 1.0))
                    fail(e.items[i], "outcome probability must be in (0,1]");
                outcome.literals = parse_literal_conjunction(e.items[i + 1]);
                sum += outcome.probability;
                eff.outcomes.push_back(std::move(outcome));
            }
            if (std::abs(sum - 1.0) > 1e-6) {
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%g", sum);
                fail(e, std::string("outcomes sum to ") + buf);
            }
            out.push_back(std::move(eff));
            return;
        }
        plain_accum.push_back(parse_literal(e));
    }

    LiftedDomain parse(const Sexpr& root) const {
        if (!root.is_list || root.items.size() < 2 || !is_keyword(root.items[0], "define"))
            fail(root, "expected '(define (domain ...) ...)'");
        const Sexpr& head = root.items[1];
        if (!head.is_list || head.items.size() != 2 || !is_keyword(head.items[0], "domain"))
            fail(head, "expected '(domain <name>)'");
        LiftedDomain dom;
        dom.name = lowered(head.items[1].token);
        for (std::size_t i = 2; i < root.items.size(); ++i) {
            const Sexpr& sec = root.items[i];
            if (!sec.is_list || sec.items.empty() || sec.items[0].is_list)
                fail(sec, "expected a domain section");
            const std::string& kw = sec.items[0].token;
            if (kw == ":requirements") continue;
            if (kw == ":types") {
                for (std::size_t j = 1; j < sec.items.size(); ++j) {
                    const std::string& t = sec.items[j].token;
                    if (t == "-") {
                        ++j;  // parent types are accepted and ignored
                        continue;
                    }
                    dom.types.push_back(lowered(t));
                }
            } else if (kw == ":predicates") {
                for (std::size_t j = 1; j < sec.items.size(); ++j)
                    dom.predicates.push_back(parse_predicate(sec.items[j]));
            } else if (kw == ":action") {
                dom.actions.push_back(parse_action(sec));
            } else {
                fail(sec, "unknown domain section '" + kw + "'");
            }
        }
        return dom;
    }

private:
    PredicateSchema parse_predicate(const Sexpr& e) const {
        if (!e.is_list || e.items.empty() || e.items[0].is_list)
            fail(e, "expected '(predicate ?arg - type ...)'");
        PredicateSchema p;
        p.name = lowered(e.items[0].token);
        std::vector<std::string> pending;
        for (std::size_t i = 1; i < e.items.size(); ++i) {
            const std::string& t = e.items[i].token;
            if (t == "-") {
                if (i + 1 >= e.items.size()) fail(e, "missing type after '-'");
                std::string type = lowered(e.items[++i].token);
                for (std::size_t k = 0; k < pending.size(); ++k) p.param_types.push_back(type);
                pending.clear();
            } else {
                if (t.empty() || t[0] != '?') fail(e.items[i], "predicate parameters start with '?'");
                pending.push_back(t);
            }
        }
        if (!pending.empty()) fail(e, "predicate parameters must be typed with '- <type>'");
        return p;
    }

    // Typed parameter lists: (?x - t1 ?y ?z - t2)
    std::vector<std::pair<std::string, std::string>> parse_params(const Sexpr& e) const {
        if (!e.is_list) fail(e, "expected a parameter list");
        std::vector<std::pair<std::string, std::string>> out;
        std::vector<std::string> pending;
        for (std::size_t i = 0; i < e.items.size(); ++i) {
            const std::string& t = e.items[i].token;
            if (t == "-") {
                if (i + 1 >= e.items.size()) fail(e, "missing type after '-'");
                std::string type = lowered(e.items[++i].token);
                for (const std::string& v : pending) out.emplace_back(v, type);
                pending.clear();
            } else {
                if (t.empty() || t[0] != '?') fail(e.items[i], "variables start with '?'");
                pending.push_back(lowered(t));
            }
        }
        if (!pending.empty()) fail(e, "parameters must be typed with '- <type>'");
        return out;
    }

    ActionSchema parse_action(const Sexpr& e) const {
        if (e.items.size() < 2 || e.items[1].is_list) fail(e, "expected '(:action <name> ...)'");
        ActionSchema a;
        a.name = lowered(e.items[1].token);
        a.line = e.line;
        a.column = e.column;
        std::size_t i = 2;
        while (i < e.items.size()) {
            const Sexpr& key = e.items[i];
            if (key.is_list || key.token.empty() || key.token[0] != ':')
                fail(key, "expected an action keyword");
            const std::string kw = key.token;
            ++i;
            if (kw == ":parameters") {
                if (i >= e.items.size()) fail(key, "missing parameter list");
                a.params = parse_params(e.items[i++]);
            } else if (kw == ":precondition") {
                if (i >= e.items.size()) fail(key, "missing precondition");
                a.preconditions = parse_literal_conjunction(e.items[i++]);
            } else if (kw == ":effect") {
                if (i >= e.items.size()) fail(key, "missing effect");
                std::vector<LiftedLiteral> plain;
                parse_effect(e.items[i], {}, a.effects, plain);
                if (!plain.empty()) {
                    LiftedEffect eff;
                    eff.outcomes.push_back({1.0, std::move(plain), e.items[i].line, e.items[i].column});
                    a.effects.push_back(std::move(eff));
                }
                ++i;
            } else if (kw == ":observe") {
                while (i < e.items.size() && e.items[i].is_list)
                    a.observed.push_back(parse_atom(e.items[i++]));
                if (a.observed.empty()) fail(key, "':observe' lists at least one atom");
            } else if (kw == ":cost") {
                if (i >= e.items.size()) fail(key, "missing cost value");
                a.cost = parse_number(file_, e.items[i++]);
                if (!(a.cost > 0.0)) fail(e.items[i - 1], "action cost must be positive");
            } else {
                fail(key, "unknown action keyword '" + kw + "'");
            }
        }
        return a;
    }

    std::string file_;
};

class ProblemParser {
public:
    ProblemParser(const std::string& file) : file_(file), helper_(file) {}

    [[noreturn]] void fail(const Sexpr& e, const std::string& msg) const {
        Lexer::fail_at(file_, e, msg);
    }

    LiftedProblem parse(const Sexpr& root) const {
        if (!root.is_list || root.items.size() < 2 || !is_keyword(root.items[0], "define"))
            fail(root, "expected '(define (problem ...) ...)'");
        const Sexpr& head = root.items[1];
        if (!head.is_list || head.items.size() != 2 || !is_keyword(head.items[0], "problem"))
            fail(head, "expected '(problem <name>)'");
        LiftedProblem prob;
        prob.name = lowered(head.items[1].token);
        for (std::size_t i = 2; i < root.items.size(); ++i) {
            const Sexpr& sec = root.items[i];
            if (!sec.is_list || sec.items.empty() || sec.items[0].is_list)
                fail(sec, "expected a problem section");
            const std::string& kw = sec.items[0].token;
            if (kw == ":domain") {
                if (sec.items.size() != 2) fail(sec, "expected '(:domain <name>)'");
                prob.domain_name = lowered(sec.items[1].token);
            } else if (kw == ":objects") {
                std::vector<std::string> pending;
                for (std::size_t j = 1; j < sec.items.size(); ++j) {
                    const std::string& t = sec.items[j].token;
                    if (t == "-") {
                        if (j + 1 >= sec.items.size()) fail(sec, "missing type after '-'");
                        std::string type = lowered(sec.items[++j].token);
                        for (const std::string& o : pending) prob.objects.emplace_back(o, type);
                        pending.clear();
                    } else {
                        if (t.find('.') != std::string::npos)
                            fail(sec.items[j], "'.' is reserved in object names");
                        pending.push_back(lowered(t));
                    }
                }
                if (!pending.empty()) fail(sec, "objects must be typed with '- <type>'");
            } else if (kw == ":init") {
                for (std::size_t j = 1; j < sec.items.size(); ++j) {
                    LiftedLiteral lit = helper_.parse_literal(sec.items[j]);
                    if (lit.negated)
                        fail(sec.items[j], "':init' is closed-world; negative literals are implied");
                    prob.init.push_back(std::move(lit));
                }
            } else if (kw == ":init-belief") {
                if (sec.items.size() != 2) fail(sec, "expected one formula per ':init-belief'");
                prob.belief_formulas.push_back(parse_formula(sec.items[1]));
            } else if (kw == ":goal") {
                if (sec.items.size() != 2) fail(sec, "expected '(:goal <conjunction>)'");
                prob.goal = helper_.parse_literal_conjunction(sec.items[1]);
            } else {
                fail(sec, "unknown problem section '" + kw + "'");
            }
        }
        return prob;
    }

private:
    std::vector<LiftedFragment> parse_formula(const Sexpr& e) const {
        if (!e.is_list || e.items.empty() || !is_keyword(e.items[0], "oneof-weighted"))
            fail(e, "expected '(oneof-weighted <p> (<literals>) ...)'");
        if (e.items.size() < 3 || (e.items.size() - 1) % 2 != 0)
            fail(e, "'oneof-weighted' takes <p> (<literals>) pairs");
        std::vector<LiftedFragment> fragments;
        double sum = 0.0;
        for (std::size_t i = 1; i < e.items.size(); i += 2) {
            LiftedFragment frag;
            frag.probability = parse_number(file_, e.items[i]);
            frag.line = e.items[i].line;
            frag.column = e.items[i].column;
            if (!(frag.probability > 0.0 && frag.probability <= 1.0))
                fail(e.items[i], "fragment weight must be in (0,1]");
            const Sexpr& lits = e.items[i + 1];
            if (!lits.is_list) fail(lits, "expected a literal list");
            for (const Sexpr& l : lits.items) frag.literals.push_back(helper_.parse_literal(l));
            sum += frag.probability;
            fragments.push_back(std::move(frag));
        }
        if (std::abs(sum - 1.0) > 1e-6) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%g", sum);
            fail(e, std::string("fragment weights sum to ") + buf);
        }
        return fragments;
    }

    std::string file_;
    DomainParser helper_;
};

// ---------------------------------------------------------------------------
// Grounding
// ---------------------------------------------------------------------------

struct AtomTable {
    std::vector<std::string> names;                     // enumeration order
    std::unordered_map<std::string, int> index;
    std::vector<char> dynamic;
    std::vector<char> static_value;                     // truth of non-dynamic atoms
    std::vector<FactId> fact_of;                        // positive fact id, -1 if static

    int lookup(const std::string& name) const {
        auto it = index.find(name);
        return it == index.end() ? -1 : it->second;
    }
};

std::string atom_name(const std::string& predicate, const std::vector<std::string>& args) {
    std::string out = predicate;
    for (const std::string& a : args) {
        out += ' ';
        out += a;
    }
    return out;
}

class Grounder {
public:
    Grounder(const LiftedDomain& dom, const LiftedProblem& prob, const std::string& dfile,
             const std::string& pfile)
        : dom_(dom), prob_(prob), dfile_(dfile), pfile_(pfile) {}

    Problem ground() {
        validate_vocabulary();
        enumerate_atoms();
        instantiate_actions();
        classify_atoms();
        assign_fact_ids();
        build_problem();
        return std::move(result_);
    }

private:
    [[noreturn]] void dfail(int line, int col, const std::string& msg) const {
        throw ParseError({dfile_, line, col}, msg);
    }
    [[noreturn]] void pfail(int line, int col, const std::string& msg) const {
        throw ParseError({pfile_, line, col}, msg);
    }

    void validate_vocabulary() {
        if (prob_.domain_name != dom_.name)
            pfail(1, 1, "problem domain '" + prob_.domain_name + "' does not match '" +
                            dom_.name + "'");
        for (const std::string& t : dom_.types)
            if (!types_.insert(t).second) dfail(1, 1, "duplicate type '" + t + "'");
        for (const auto& [obj, type] : prob_.objects) {
            if (!types_.count(type)) pfail(1, 1, "object '" + obj + "' has unknown type '" + type + "'");
            if (!object_type_.emplace(obj, type).second)
                pfail(1, 1, "duplicate object '" + obj + "'");
            objects_by_type_[type].push_back(obj);
        }
        for (const PredicateSchema& p : dom_.predicates) {
            for (const std::string& t : p.param_types)
                if (!types_.count(t))
                    dfail(1, 1, "predicate '" + p.name + "' uses unknown type '" + t + "'");
            if (!predicate_.emplace(p.name, &p).second)
                dfail(1, 1, "duplicate predicate '" + p.name + "'");
        }
    }

    void enumerate_atoms() {
        for (const PredicateSchema& p : dom_.predicates) {
            std::vector<std::string> tuple(p.param_types.size());
            enumerate_tuples(p, 0, tuple);
        }
        atoms_.dynamic.assign(atoms_.names.size(), 0);
        atoms_.static_value.assign(atoms_.names.size(), 0);
        atoms_.fact_of.assign(atoms_.names.size(), -1);
    }

    void enumerate_tuples(const PredicateSchema& p, std::size_t k, std::vector<std::string>& tuple) {
        if (k == p.param_types.size()) {
            std::string name = atom_name(p.name, tuple);
            atoms_.index.emplace(name, static_cast<int>(atoms_.names.size()));
            atoms_.names.push_back(std::move(name));
            return;
        }
        auto it = objects_by_type_.find(p.param_types[k]);
        if (it == objects_by_type_.end()) return;
        for (const std::string& obj : it->second) {
            tuple[k] = obj;
            enumerate_tuples(p, k + 1, tuple);
        }
    }

    // Grounded literal prior to fact-id assignment.
    struct GLiteral {
        int atom;
        bool negated;
    };
    struct GOutcome {
        double probability;
        std::vector<GLiteral> literals;
    };
    struct GEffect {
        std::vector<GLiteral> condition;
        std::vector<GOutcome> outcomes;
    };
    struct GAction {
        std::string name;
        std::vector<GLiteral> preconditions;
        std::vector<GEffect> effects;
        std::vector<int> observed;  // atom indices
        double cost;
        bool pruned = false;
    };

    int ground_atom(const LiftedAtom& atom,
                    const std::map<std::string, std::string>& binding,
                    const std::string& file) const {
        auto pit = predicate_.find(atom.predicate);
        if (pit == predicate_.end())
            throw ParseError({file, atom.line, atom.column},
                             "unknown predicate '" + atom.predicate + "'");
        const PredicateSchema& schema = *pit->second;
        if (schema.param_types.size() != atom.args.size())
            throw ParseError({file, atom.line, atom.column},
                             "predicate '" + atom.predicate + "' expects " +
                                 std::to_string(schema.param_types.size()) + " arguments");
        std::vector<std::string> args;
        args.reserve(atom.args.size());
        for (std::size_t i = 0; i < atom.args.size(); ++i) {
            std::string a = atom.args[i];
            if (!a.empty() && a[0] == '?') {
                auto bit = binding.find(a);
                if (bit == binding.end())
                    throw ParseError({file, atom.line, atom.column},
                                     "unbound variable '" + a + "'");
                a = bit->second;
            }
            auto oit = object_type_.find(a);
            if (oit == object_type_.end())
                throw ParseError({file, atom.line, atom.column}, "unknown object '" + a + "'");
            if (oit->second != schema.param_types[i])
                throw ParseError({file, atom.line, atom.column},
                                 "object '" + a + "' has type '" + oit->second +
                                     "', expected '" + schema.param_types[i] + "'");
            args.push_back(std::move(a));
        }
        int idx = atoms_.lookup(atom_name(schema.name, args));
        if (idx < 0)
            throw ParseError({file, atom.line, atom.column}, "atom out of vocabulary");
        return idx;
    }

    void instantiate_actions() {
        for (const ActionSchema& schema : dom_.actions) {
            std::map<std::string, std::string> binding;
            instantiate_schema(schema, 0, binding);
        }
    }

    void instantiate_schema(const ActionSchema& schema, std::size_t k,
                            std::map<std::string, std::string>& binding) {
        if (k == schema.params.size()) {
            GAction ga;
            ga.name = schema.name;
            for (const auto& [var, type] : schema.params) {
                ga.name += '.';
                ga.name += binding.at(var);
            }
            ga.cost = schema.cost;
            for (const LiftedLiteral& l : schema.preconditions)
                ga.preconditions.push_back({ground_atom(l.atom, binding, dfile_), l.negated});
            for (const LiftedEffect& e : schema.effects) {
                GEffect ge;
                for (const LiftedLiteral& l : e.condition)
                    ge.condition.push_back({ground_atom(l.atom, binding, dfile_), l.negated});
                for (const LiftedOutcome& o : e.outcomes) {
                    GOutcome go;
                    go.probability = o.probability;
                    for (const LiftedLiteral& l : o.literals)
                        go.literals.push_back({ground_atom(l.atom, binding, dfile_), l.negated});
                    ge.outcomes.push_back(std::move(go));
                }
                ga.effects.push_back(std::move(ge));
            }
            for (const LiftedAtom& a : schema.observed) {
                // Observations are listed as facts; their negations carry the
                // same information under deterministic sensing.
                ga.observed.push_back(ground_atom(a, binding, dfile_));
            }
            grounded_.push_back(std::move(ga));
            return;
        }
        const auto& [var, type] = schema.params[k];
        auto it = objects_by_type_.find(type);
        if (it == objects_by_type_.end()) return;
        for (const std::string& obj : it->second) {
            binding[var] = obj;
            instantiate_schema(schema, k + 1, binding);
        }
        binding.erase(schema.params[k].first);
    }

    void classify_atoms() {
        // Dynamic atoms: written by some grounded effect, or uncertain in the
        // initial belief. Everything else keeps its closed-world :init value.
        for (const GAction& a : grounded_)
            for (const GEffect& e : a.effects)
                for (const GOutcome& o : e.outcomes)
                    for (const GLiteral& l : o.literals) atoms_.dynamic[l.atom] = 1;
        for (const auto& formula : prob_.belief_formulas)
            for (const LiftedFragment& frag : formula)
                for (const LiftedLiteral& l : frag.literals) {
                    std::map<std::string, std::string> empty;
                    atoms_.dynamic[ground_atom(l.atom, empty, pfile_)] = 1;
                }
        for (const LiftedLiteral& l : prob_.init) {
            std::map<std::string, std::string> empty;
            int idx = ground_atom(l.atom, empty, pfile_);
            if (!atoms_.dynamic[idx]) atoms_.static_value[idx] = 1;
        }
    }

    void assign_fact_ids() {
        for (std::size_t i = 0; i < atoms_.names.size(); ++i) {
            if (!atoms_.dynamic[i]) continue;
            FactId pos = static_cast<FactId>(result_.facts.size());
            atoms_.fact_of[i] = pos;
            Fact f;
            f.id = pos;
            f.name = atoms_.names[i];
            f.complement = pos + 1;
            result_.facts.push_back(f);
            Fact nf;
            nf.id = pos + 1;
            nf.name = "not " + atoms_.names[i];
            nf.complement = pos;
            result_.facts.push_back(std::move(nf));
        }
    }

    // Resolves a grounded literal against the fact table. Statically-true
    // literals resolve to "trivial", statically-false to "impossible".
    enum class Resolved { Fact, Trivial, Impossible };
    Resolved resolve(const GLiteral& l, FactId* out) const {
        if (atoms_.dynamic[l.atom]) {
            FactId pos = atoms_.fact_of[l.atom];
            *out = l.negated ? result_.facts[pos].complement : pos;
            return Resolved::Fact;
        }
        bool value = atoms_.static_value[l.atom];
        if (l.negated) value = !value;
        return value ? Resolved::Trivial : Resolved::Impossible;
    }

    static void sort_unique(std::vector<FactId>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }

    void check_no_complement_pair(const std::vector<FactId>& set, const std::string& what,
                                  const std::string& name) const {
        for (FactId f : set)
            if (std::binary_search(set.begin(), set.end(), result_.facts[f].complement))
                throw ParseError({dfile_, 1, 1}, what + " of '" + name +
                                                     "' contains a fact and its complement");
    }

    void build_problem() {
        result_.domain_name = dom_.name;
        result_.problem_name = prob_.name;
        result_.vocab.types = dom_.types;
        result_.vocab.objects = prob_.objects;
        result_.vocab.predicates = dom_.predicates;

        // Actions: drop statically-impossible preconditions/conditions.
        for (GAction& ga : grounded_) {
            Action a;
            a.name = ga.name;
            a.cost = ga.cost;
            bool pruned = false;
            for (const GLiteral& l : ga.preconditions) {
                FactId f;
                switch (resolve(l, &f)) {
                    case Resolved::Fact: a.preconditions.push_back(f); break;
                    case Resolved::Trivial: break;
                    case Resolved::Impossible: pruned = true; break;
                }
                if (pruned) break;
            }
            if (pruned) continue;
            sort_unique(a.preconditions);
            check_no_complement_pair(a.preconditions, "precondition", a.name);
            for (const GEffect& ge : ga.effects) {
                ConditionalEffect ce;
                bool dropped = false;
                for (const GLiteral& l : ge.condition) {
                    FactId f;
                    switch (resolve(l, &f)) {
                        case Resolved::Fact: ce.condition.push_back(f); break;
                        case Resolved::Trivial: break;
                        case Resolved::Impossible: dropped = true; break;
                    }
                    if (dropped) break;
                }
                if (dropped) continue;
                sort_unique(ce.condition);
                check_no_complement_pair(ce.condition, "effect condition", a.name);
                for (const GOutcome& go : ge.outcomes) {
                    ProbabilisticOutcome po;
                    po.probability = go.probability;
                    for (const GLiteral& l : go.literals) {
                        FactId f;
                        if (resolve(l, &f) != Resolved::Fact)
                            throw ParseError({dfile_, 1, 1},
                                             "action '" + a.name + "' writes a static atom");
                        po.added_facts.push_back(f);
                    }
                    sort_unique(po.added_facts);
                    ce.outcomes.push_back(std::move(po));
                }
                a.effects.push_back(std::move(ce));
            }
            for (int atom : ga.observed) {
                // Observing a fixed atom carries no information; drop it.
                if (atoms_.dynamic[atom]) a.observed_facts.push_back(atoms_.fact_of[atom]);
            }
            sort_unique(a.observed_facts);
            a.id = static_cast<ActionId>(result_.actions.size());
            result_.actions.push_back(std::move(a));
        }

        // Certain initial values and statically-true atoms.
        std::set<int> init_touched;
        for (const LiftedLiteral& l : prob_.init) {
            std::map<std::string, std::string> empty;
            int idx = ground_atom(l.atom, empty, pfile_);
            if (atoms_.dynamic[idx]) {
                result_.init_literals.push_back(atoms_.fact_of[idx]);
                init_touched.insert(idx);
            }
        }
        sort_unique(result_.init_literals);
        for (std::size_t i = 0; i < atoms_.names.size(); ++i)
            if (!atoms_.dynamic[i] && atoms_.static_value[i])
                result_.static_true.push_back(atoms_.names[i]);

        // Initial-belief formulas; formulas must touch disjoint facts.
        std::map<int, int> atom_formula;
        int formula_idx = 0;
        std::size_t expansion = 1;
        for (const auto& formula : prob_.belief_formulas) {
            InitFormula f;
            for (const LiftedFragment& frag : formula) {
                InitFragment out;
                out.probability = frag.probability;
                for (const LiftedLiteral& l : frag.literals) {
                    std::map<std::string, std::string> empty;
                    int idx = ground_atom(l.atom, empty, pfile_);
                    if (init_touched.count(idx))
                        pfail(frag.line, frag.column,
                              "':init' and ':init-belief' overlap on '" + atoms_.names[idx] + "'");
                    auto [it, fresh] = atom_formula.emplace(idx, formula_idx);
                    if (!fresh && it->second != formula_idx)
                        pfail(frag.line, frag.column,
                              "initial formulas overlap on '" + atoms_.names[idx] + "'");
                    FactId pos = atoms_.fact_of[idx];
                    out.literals.push_back(l.negated ? result_.facts[pos].complement : pos);
                }
                sort_unique(out.literals);
                f.fragments.push_back(std::move(out));
            }
            expansion *= f.fragments.size();
            if (expansion > (1u << 20))
                pfail(1, 1, "initial belief expands to more than 2^20 states");
            result_.initial_formulas.push_back(std::move(f));
            ++formula_idx;
        }

        // Goal.
        if (prob_.goal.empty()) pfail(1, 1, "missing or empty ':goal'");
        for (const LiftedLiteral& l : prob_.goal) {
            std::map<std::string, std::string> empty;
            GLiteral gl{ground_atom(l.atom, empty, pfile_), l.negated};
            FactId f;
            switch (resolve(gl, &f)) {
                case Resolved::Fact: result_.goal.push_back(f); break;
                case Resolved::Trivial: break;
                case Resolved::Impossible:
                    throw ParseError({pfile_, l.atom.line, l.atom.column},
                                     "goal atom '" + atoms_.names[gl.atom] + "' is statically false");
            }
        }
        sort_unique(result_.goal);
        if (result_.goal.empty()) pfail(1, 1, "goal is statically satisfied; nothing to solve");

        try {
            result_ = ground_split_conditionals(std::move(result_));
        } catch (const ModelError& e) {
            throw ParseError({dfile_, 1, 1}, e.what());
        }
        // Force the expansion now so invalid distributions fail at parse time.
        result_.initial_belief();
    }

    const LiftedDomain& dom_;
    const LiftedProblem& prob_;
    std::string dfile_, pfile_;

    std::set<std::string> types_;
    std::unordered_map<std::string, std::string> object_type_;
    std::map<std::string, std::vector<std::string>> objects_by_type_;
    std::unordered_map<std::string, const PredicateSchema*> predicate_;
    AtomTable atoms_;
    std::vector<GAction> grounded_;
    Problem result_;
};

}  // namespace

Problem parse_problem(const std::string& domain_text, const std::string& problem_text,
                      const std::string& domain_file, const std::string& problem_file) {
    Lexer dlex(domain_text, domain_file);
    std::vector<Sexpr> dtop = dlex.read_all();
    if (dtop.size() != 1) throw ParseError({domain_file, 1, 1}, "expected one '(define ...)' form");
    LiftedDomain dom = DomainParser(domain_file).parse(dtop[0]);

    Lexer plex(problem_text, problem_file);
    std::vector<Sexpr> ptop = plex.read_all();
    if (ptop.size() != 1)
        throw ParseError({problem_file, 1, 1}, "expected one '(define ...)' form");
    LiftedProblem prob = ProblemParser(problem_file).parse(ptop[0]);

    return Grounder(dom, prob, domain_file, problem_file).ground();
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// "at p0" -> "(at p0)", "not at p0" -> "(not (at p0))"
std::string atom_sexpr(const std::string& name) {
    if (name.rfind("not ", 0) == 0) return "(not (" + name.substr(4) + "))";
    return "(" + name + ")";
}

std::string literal_sexpr(const Problem& p, FactId f) { return atom_sexpr(p.fact_name(f)); }

std::string conjunction(const Problem& p, const std::vector<FactId>& facts) {
    if (facts.size() == 1) return literal_sexpr(p, facts[0]);
    std::string out = "(and";
    for (FactId f : facts) {
        out += ' ';
        out += literal_sexpr(p, f);
    }
    out += ')';
    return out;
}

std::string outcome_body(const Problem& p, const ProbabilisticOutcome& o) {
    std::string out = "(and";
    for (FactId f : o.added_facts) {
        out += ' ';
        out += literal_sexpr(p, f);
    }
    out += ')';
    return out;
}

}  // namespace

std::pair<std::string, std::string> serialize_problem(const Problem& p) {
    std::ostringstream d;
    d << "(define (domain " << p.domain_name << ")\n";
    d << "  (:types";
    for (const std::string& t : p.vocab.types) d << ' ' << t;
    d << ")\n";
    d << "  (:predicates\n";
    for (const PredicateSchema& pr : p.vocab.predicates) {
        d << "    (" << pr.name;
        for (std::size_t i = 0; i < pr.param_types.size(); ++i)
            d << " ?x" << i << " - " << pr.param_types[i];
        d << ")\n";
    }
    d << "  )\n";
    for (const Action& a : p.actions) {
        d << "  (:action " << a.name << "\n";
        d << "    :parameters ()\n";
        d << "    :precondition " << (a.preconditions.empty() ? "(and)" : conjunction(p, a.preconditions)) << "\n";
        if (!a.effects.empty()) {
            d << "    :effect (and";
            for (const ConditionalEffect& e : a.effects) {
                std::string body;
                if (e.outcomes.size() == 1 && e.outcomes[0].probability == 1.0) {
                    body = outcome_body(p, e.outcomes[0]);
                } else {
                    body = "(probabilistic";
                    for (const ProbabilisticOutcome& o : e.outcomes) {
                        body += ' ';
                        body += fmt_double(o.probability);
                        body += ' ';
                        body += outcome_body(p, o);
                    }
                    body += ')';
                }
                if (e.condition.empty())
                    d << ' ' << body;
                else
                    d << " (when " << conjunction(p, e.condition) << ' ' << body << ")";
            }
            d << ")\n";
        }
        if (!a.observed_facts.empty()) {
            d << "    :observe";
            for (FactId f : a.observed_facts) d << ' ' << literal_sexpr(p, f);
            d << "\n";
        }
        if (a.cost != 1.0) d << "    :cost " << fmt_double(a.cost) << "\n";
        d << "  )\n";
    }
    d << ")\n";

    std::ostringstream q;
    q << "(define (problem " << p.problem_name << ")\n";
    q << "  (:domain " << p.domain_name << ")\n";
    q << "  (:objects";
    for (const auto& [obj, type] : p.vocab.objects) q << ' ' << obj << " - " << type;
    q << ")\n";
    q << "  (:init\n";
    for (const std::string& atom : p.static_true) q << "    " << atom_sexpr(atom) << "\n";
    for (FactId f : p.init_literals) q << "    " << literal_sexpr(p, f) << "\n";
    q << "  )\n";
    for (const InitFormula& formula : p.initial_formulas) {
        q << "  (:init-belief (oneof-weighted";
        for (const InitFragment& frag : formula.fragments) {
            q << ' ' << fmt_double(frag.probability) << " (";
            for (std::size_t i = 0; i < frag.literals.size(); ++i) {
                if (i) q << ' ';
                q << literal_sexpr(p, frag.literals[i]);
            }
            q << ')';
        }
        q << "))\n";
    }
    q << "  (:goal " << conjunction(p, p.goal) << ")\n";
    q << ")\n";
    return {d.str(), q.str()};
}

namespace {

bool outcomes_equal(const std::vector<ProbabilisticOutcome>& a,
                    const std::vector<ProbabilisticOutcome>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].probability != b[i].probability) return false;
        if (a[i].added_facts != b[i].added_facts) return false;
    }
    return true;
}

}  // namespace

bool problems_structurally_equal(const Problem& a, const Problem& b, std::string* diff) {
    auto set_diff = [&](const std::string& msg) {
        if (diff) *diff = msg;
        return false;
    };
    if (a.facts.size() != b.facts.size()) return set_diff("fact count");
    for (std::size_t i = 0; i < a.facts.size(); ++i) {
        if (a.facts[i].name != b.facts[i].name) return set_diff("fact name at " + std::to_string(i));
        if (a.facts[i].complement != b.facts[i].complement)
            return set_diff("fact complement at " + std::to_string(i));
    }
    if (a.actions.size() != b.actions.size()) return set_diff("action count");
    for (std::size_t i = 0; i < a.actions.size(); ++i) {
        const Action &x = a.actions[i], &y = b.actions[i];
        if (x.name != y.name) return set_diff("action name at " + std::to_string(i));
        if (x.preconditions != y.preconditions)
            return set_diff("preconditions of '" + x.name + "'");
        if (x.observed_facts != y.observed_facts) return set_diff("observations of '" + x.name + "'");
        if (x.cost != y.cost) return set_diff("cost of '" + x.name + "'");
        if (x.effects.size() != y.effects.size()) return set_diff("effect count of '" + x.name + "'");
        for (std::size_t j = 0; j < x.effects.size(); ++j) {
            if (x.effects[j].condition != y.effects[j].condition)
                return set_diff("effect condition of '" + x.name + "'");
            if (!outcomes_equal(x.effects[j].outcomes, y.effects[j].outcomes))
                return set_diff("outcomes of '" + x.name + "'");
        }
    }
    if (a.goal != b.goal) return set_diff("goal");
    if (a.init_literals != b.init_literals) return set_diff("init literals");
    if (a.static_true != b.static_true) return set_diff("static atoms");
    if (a.initial_formulas.size() != b.initial_formulas.size())
        return set_diff("initial formula count");
    for (std::size_t i = 0; i < a.initial_formulas.size(); ++i) {
        const auto &x = a.initial_formulas[i].fragments, &y = b.initial_formulas[i].fragments;
        if (x.size() != y.size()) return set_diff("fragment count in formula " + std::to_string(i));
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (x[j].probability != y[j].probability)
                return set_diff("fragment weight in formula " + std::to_string(i));
            if (x[j].literals != y[j].literals)
                return set_diff("fragment literals in formula " + std::to_string(i));
        }
    }
    if (!(a.initial_belief() == b.initial_belief())) return set_diff("initial distribution");
    return true;
}

uint64_t problem_hash(const Problem& p) {
    auto [d, q] = serialize_problem(p);
    return fnv1a64(q, fnv1a64(d));
}

}  // namespace ppond
