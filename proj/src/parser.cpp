// SPDX-License-Identifier: Apache-2.0
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "liftex/program.hpp"

namespace liftex {

std::string PTerm::text() const {
    if (kind == Kind::Int) return std::to_string(value);
    return name;
}

const Switch* Program::find_switch(const std::string& name) const {
    for (const auto& s : switches) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

const Population* Program::find_population(const std::string& name) const {
    for (const auto& p : populations) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

const Element* Program::find_element(const std::string& constant) const {
    for (const auto& e : elements) {
        if (e.constant == constant) return &e;
    }
    return nullptr;
}

namespace {

enum class Tok { Ident, Var, Int, Float, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourceLoc loc;
};

class Lexer {
  public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.loc = {line_, col_};
            if (pos_ >= src_.size()) {
                t.kind = Tok::End;
                out.push_back(t);
                return out;
            }
            const char c = src_[pos_];
            if (std::islower(static_cast<unsigned char>(c))) {
                t.kind = Tok::Ident;
                t.text = take_word();
            } else if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
                t.kind = Tok::Var;
                t.text = take_word();
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                t.text = take_digits();
                t.kind = Tok::Int;
                if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
                    t.text += advance();
                    t.text += take_digits();
                    t.kind = Tok::Float;
                }
                if (peek() == 'e' || peek() == 'E') {
                    std::size_t save = pos_;
                    int sl = line_, sc = col_;
                    std::string exp(1, advance());
                    if (peek() == '+' || peek() == '-') exp += advance();
                    if (std::isdigit(static_cast<unsigned char>(peek()))) {
                        t.text += exp + take_digits();
                        t.kind = Tok::Float;
                    } else {
                        pos_ = save;
                        line_ = sl;
                        col_ = sc;
                    }
                }
            } else {
                t.kind = Tok::Punct;
                static const char* two[] = {":-", "\\="};
                bool matched = false;
                for (const char* p : two) {
                    if (src_.compare(pos_, 2, p) == 0) {
                        t.text = p;
                        advance();
                        advance();
                        matched = true;
                        break;
                    }
                }
                if (!matched) {
                    if (std::string("(),.{}<=[]:/").find(c) == std::string::npos) {
                        throw ParseError(t.loc, std::string("unexpected character '") + c + "'");
                    }
                    t.text = std::string(1, advance());
                }
            }
            out.push_back(t);
        }
    }

  private:
    char peek(std::size_t k = 0) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

    char advance() {
        const char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string take_word() {
        std::string s;
        while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') s += advance();
        return s;
    }

    std::string take_digits() {
        std::string s;
        while (std::isdigit(static_cast<unsigned char>(peek()))) s += advance();
        return s;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
  public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    Program program() {
        Program p;
        while (cur().kind != Tok::End) {
            if (is_punct(":-")) {
                directive(p);
            } else {
                p.clauses.push_back(clause());
            }
        }
        validate(p);
        return p;
    }

    PAtom query() {
        anon_ = 0;
        PAtom a = atom_with_args();
        if (is_punct(".")) next();
        if (cur().kind != Tok::End) fail("unexpected '" + cur().text + "' after query");
        return a;
    }

  private:
    const Token& cur() const { return toks_[pos_]; }
    Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool is_punct(const char* p) const { return cur().kind == Tok::Punct && cur().text == p; }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(cur().loc, msg); }

    std::string describe() const {
        return cur().kind == Tok::End ? std::string("end of input") : "'" + cur().text + "'";
    }

    void expect(const char* p) {
        if (!is_punct(p)) fail(std::string("expected '") + p + "' but found " + describe());
        next();
    }

    std::string ident(const char* what) {
        if (cur().kind != Tok::Ident) fail(std::string("expected ") + what + " but found " + describe());
        return next().text;
    }

    std::int64_t integer(const char* what) {
        if (cur().kind != Tok::Int) fail(std::string("expected ") + what + " but found " + describe());
        return std::stoll(next().text);
    }

    double number() {
        if (cur().kind != Tok::Int && cur().kind != Tok::Float) {
            fail("expected probability but found " + describe());
        }
        return std::stod(next().text);
    }

    PTerm term() {
        const Token& t = cur();
        switch (t.kind) {
            case Tok::Var: {
                std::string name = next().text;
                if (name == "_") name = "_" + std::to_string(++anon_);
                return PTerm::var(name);
            }
            case Tok::Ident:
                return PTerm::atom(next().text);
            case Tok::Int:
                return PTerm::integer(std::stoll(next().text));
            default:
                fail("expected a term but found " + describe());
        }
    }

    PAtom atom_with_args() {
        PAtom a;
        a.pred = ident("predicate name");
        if (is_punct("(")) {
            next();
            a.args.push_back(term());
            while (is_punct(",")) {
                next();
                a.args.push_back(term());
            }
            expect(")");
        }
        return a;
    }

    void directive(Program& p) {
        const SourceLoc loc = cur().loc;
        expect(":-");
        const std::string name = ident("directive name");
        expect("(");
        if (name == "population") {
            Population pop;
            pop.name = ident("population name");
            expect(",");
            pop.size = integer("population size");
            if (p.find_population(pop.name)) throw ParseError(loc, "duplicate population '" + pop.name + "'");
            p.populations.push_back(pop);
        } else if (name == "element") {
            Element e;
            e.constant = ident("element constant");
            expect(",");
            e.population = ident("population name");
            if (p.find_element(e.constant)) throw ParseError(loc, "duplicate element '" + e.constant + "'");
            p.elements.push_back(e);
            element_locs_.push_back(loc);
        } else if (name == "set_sw") {
            Switch sw;
            sw.name = ident("switch name");
            expect(",");
            const SourceLoc dloc = cur().loc;
            const std::string dist = ident("distribution");
            if (dist != "categorical") throw ParseError(dloc, "unsupported distribution '" + dist + "'");
            expect("(");
            expect("[");
            for (;;) {
                PTerm v = term();
                if (v.is_var()) throw ParseError(dloc, "switch outcome must be an atom or integer");
                expect(":");
                double prob = number();
                if (is_punct("/")) {
                    next();
                    const double den = number();
                    if (den == 0) throw ParseError(dloc, "division by zero in probability");
                    prob /= den;
                }
                for (const auto& o : sw.outcomes) {
                    if (o == v) throw ParseError(dloc, "duplicate outcome '" + v.text() + "'");
                }
                sw.outcomes.push_back(v);
                sw.probs.push_back(prob);
                if (!is_punct(",")) break;
                next();
            }
            expect("]");
            expect(")");
            if (p.find_switch(sw.name)) throw ParseError(loc, "duplicate switch '" + sw.name + "'");
            double sum = 0;
            for (double q : sw.probs) {
                if (q < 0 || q > 1) throw ParseError(dloc, "probability out of [0,1] in switch '" + sw.name + "'");
                sum += q;
            }
            if (std::fabs(sum - 1.0) > 1e-9) {
                throw ParseError(dloc, "probabilities of switch '" + sw.name + "' do not sum to 1");
            }
            p.switches.push_back(sw);
        } else {
            throw ParseError(loc, "unknown directive '" + name + "'");
        }
        expect(")");
        expect(".");
    }

    Clause clause() {
        anon_ = 0;
        Clause c;
        c.loc = cur().loc;
        c.head = atom_with_args();
        if (is_punct(":-")) {
            next();
            goal(c.body);
            while (is_punct(",")) {
                next();
                goal(c.body);
            }
        }
        expect(".");
        return c;
    }

    void goal(std::vector<Goal>& body) {
        const SourceLoc loc = cur().loc;
        if (is_punct("{")) {
            next();
            ConstraintGoal g;
            g.loc = loc;
            g.lhs = term();
            if (is_punct("<")) {
                g.op = CmpOp::LT;
            } else if (is_punct("=")) {
                g.op = CmpOp::EQ;
            } else if (is_punct("\\=")) {
                g.op = CmpOp::NE;
            } else {
                fail("expected '<', '=' or '\\=' but found " + describe());
            }
            next();
            g.rhs = term();
            expect("}");
            body.emplace_back(g);
            return;
        }
        if (cur().kind == Tok::Var) {
            InGoal g;
            g.loc = loc;
            g.var = next().text;
            if (cur().kind != Tok::Ident || cur().text != "in") fail("expected 'in' but found " + describe());
            next();
            g.population = ident("population name");
            body.emplace_back(g);
            return;
        }
        if (cur().kind == Tok::Ident && cur().text == "msw") {
            next();
            MswGoal g;
            g.loc = loc;
            expect("(");
            g.sw = ident("switch name");
            expect(",");
            g.instance = term();
            expect(",");
            g.value = term();
            expect(")");
            body.emplace_back(g);
            return;
        }
        if (cur().kind == Tok::Ident && cur().text == "true") {
            next();
            return;
        }
        UserGoal g;
        g.loc = loc;
        g.atom = atom_with_args();
        body.emplace_back(g);
    }

    void validate(const Program& p) const {
        std::map<std::string, std::int64_t> count;
        for (std::size_t i = 0; i < p.elements.size(); ++i) {
            const auto& e = p.elements[i];
            const Population* pop = p.find_population(e.population);
            const SourceLoc loc = element_locs_[i];
            if (!pop) throw ParseError(loc, "element '" + e.constant + "' of unknown population '" + e.population + "'");
            if (++count[e.population] > pop->size) {
                throw ParseError(loc, "population '" + e.population + "' has more elements than its cardinality");
            }
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    int anon_ = 0;
    std::vector<SourceLoc> element_locs_;
};

std::string render_term(const PTerm& t) { return t.text(); }

std::string render_prob(double p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", p);
    std::string s = buf;
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

}  // namespace

Program parse_program(const std::string& text) {
    Lexer lex(text);
    Parser parser(lex.run());
    return parser.program();
}

PAtom parse_query(const std::string& text) {
    Lexer lex(text);
    Parser parser(lex.run());
    return parser.query();
}

std::string render_atom(const PAtom& a) {
    std::string s = a.pred;
    if (!a.args.empty()) {
        s += "(";
        for (std::size_t i = 0; i < a.args.size(); ++i) s += (i ? ", " : "") + render_term(a.args[i]);
        s += ")";
    }
    return s;
}

std::string render_goal(const Goal& g) {
    struct V {
        std::string operator()(const UserGoal& u) const { return render_atom(u.atom); }
        std::string operator()(const MswGoal& m) const {
            return "msw(" + m.sw + ", " + render_term(m.instance) + ", " + render_term(m.value) + ")";
        }
        std::string operator()(const InGoal& i) const { return i.var + " in " + i.population; }
        std::string operator()(const ConstraintGoal& c) const {
            const char* op = c.op == CmpOp::LT ? " < " : c.op == CmpOp::EQ ? " = " : " \\= ";
            return "{" + render_term(c.lhs) + op + render_term(c.rhs) + "}";
        }
    };
    return std::visit(V{}, g);
}

std::string render(const Program& p) {
    std::ostringstream os;
    for (const auto& c : p.clauses) {
        os << render_atom(c.head);
        if (!c.body.empty()) {
            os << " :-";
            for (std::size_t i = 0; i < c.body.size(); ++i) {
                os << "\n    " << render_goal(c.body[i]) << (i + 1 < c.body.size() ? "," : "");
            }
        }
        os << ".\n\n";
    }
    for (const auto& pop : p.populations) os << ":- population(" << pop.name << ", " << pop.size << ").\n";
    for (const auto& e : p.elements) os << ":- element(" << e.constant << ", " << e.population << ").\n";
    for (const auto& sw : p.switches) {
        os << ":- set_sw(" << sw.name << ", categorical([";
        for (std::size_t i = 0; i < sw.outcomes.size(); ++i) {
            os << (i ? ", " : "") << render_term(sw.outcomes[i]) << ":" << render_prob(sw.probs[i]);
        }
        os << "])).\n";
    }
    return os.str();
}

}  // namespace liftex
