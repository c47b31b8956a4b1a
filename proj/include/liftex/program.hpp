// SPDX-License-Identifier: Apache-2.0
//
// Surface language: Prolog-like definite clauses with msw/3 random
// choices, `X in pop` instance draws and brace constraints, plus the
// population / element / set_sw directives.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "liftex/constraints.hpp"

namespace liftex {

/// Source position (1-based). Positions never take part in equality.
struct SourceLoc {
    int line = 0;
    int col = 0;

    friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

class ParseError : public std::runtime_error {
  public:
    ParseError(SourceLoc loc, const std::string& msg)
        : std::runtime_error(msg), loc_(loc) {}
    [[nodiscard]] SourceLoc loc() const { return loc_; }

  private:
    SourceLoc loc_;
};

class TypeError : public std::runtime_error {
  public:
    TypeError(SourceLoc loc, const std::string& msg)
        : std::runtime_error(msg), loc_(loc) {}
    [[nodiscard]] SourceLoc loc() const { return loc_; }

  private:
    SourceLoc loc_;
};

struct PTerm {
    enum class Kind { Var, Atom, Int };
    Kind kind = Kind::Atom;
    std::string name;  // variable or atom name
    std::int64_t value = 0;

    static PTerm var(std::string n) { return {Kind::Var, std::move(n), 0}; }
    static PTerm atom(std::string n) { return {Kind::Atom, std::move(n), 0}; }
    static PTerm integer(std::int64_t v) { return {Kind::Int, {}, v}; }
    [[nodiscard]] bool is_var() const { return kind == Kind::Var; }
    [[nodiscard]] std::string text() const;
    friend bool operator==(const PTerm&, const PTerm&) = default;
    friend auto operator<=>(const PTerm&, const PTerm&) = default;
};

struct PAtom {
    std::string pred;
    std::vector<PTerm> args;

    [[nodiscard]] std::string key() const { return pred + "/" + std::to_string(args.size()); }
    friend bool operator==(const PAtom&, const PAtom&) = default;
};

struct UserGoal {
    PAtom atom;
    SourceLoc loc;
    friend bool operator==(const UserGoal&, const UserGoal&) = default;
};

struct MswGoal {
    std::string sw;
    PTerm instance;
    PTerm value;
    SourceLoc loc;
    friend bool operator==(const MswGoal&, const MswGoal&) = default;
};

struct InGoal {
    std::string var;
    std::string population;
    SourceLoc loc;
    friend bool operator==(const InGoal&, const InGoal&) = default;
};

enum class CmpOp { LT, EQ, NE };

struct ConstraintGoal {
    CmpOp op = CmpOp::LT;
    PTerm lhs;
    PTerm rhs;
    SourceLoc loc;
    friend bool operator==(const ConstraintGoal&, const ConstraintGoal&) = default;
};

using Goal = std::variant<UserGoal, MswGoal, InGoal, ConstraintGoal>;

struct Clause {
    PAtom head;
    std::vector<Goal> body;
    SourceLoc loc;
    friend bool operator==(const Clause&, const Clause&) = default;
};

struct Population {
    std::string name;
    std::int64_t size = 0;
    friend bool operator==(const Population&, const Population&) = default;
};

struct Element {
    std::string constant;
    std::string population;
    friend bool operator==(const Element&, const Element&) = default;
};

struct Switch {
    std::string name;
    std::vector<PTerm> outcomes;
    std::vector<double> probs;
    friend bool operator==(const Switch&, const Switch&) = default;
};

struct Program {
    std::vector<Clause> clauses;
    std::vector<Population> populations;
    std::vector<Element> elements;
    std::vector<Switch> switches;

    [[nodiscard]] const Switch* find_switch(const std::string& name) const;
    [[nodiscard]] const Population* find_population(const std::string& name) const;
    [[nodiscard]] const Element* find_element(const std::string& constant) const;
    friend bool operator==(const Program&, const Program&) = default;
};

Program parse_program(const std::string& text);
/// Parses a query atom such as `twoheads` or `p(fred)`.
PAtom parse_query(const std::string& text);
std::string render(const Program& p);
std::string render_goal(const Goal& g);
std::string render_atom(const PAtom& a);

struct TypeAssignment {
    /// Per clause (by index): variable -> population.
    std::vector<std::map<std::string, std::string>> var_types;
    std::map<std::string, std::string> switch_types;
    std::map<std::string, std::string> constant_types;
    /// Predicate key (name/arity) -> per-argument population (empty if untyped).
    std::map<std::string, std::vector<std::string>> param_types;
};

struct TypedProgram {
    Program program;  // with inferred `in` goals inserted
    TypeAssignment types;
};

/// Infers population types, inserting `X in p` before the first use of
/// every typed variable that lacks one. Rejects recursion.
TypedProgram check_well_typed(const Program& p);

/// Splits every `{A \= B}` into two clauses with `{A < B}` and `{B < A}`.
Program eliminate_disequality(const Program& p);

struct PopulationMap {
    std::map<std::string, Interval> ranges;
    std::map<std::string, std::int64_t> constants;
    std::int64_t m = 0;

    [[nodiscard]] Interval range(const std::string& population) const;
};

/// Lays populations out contiguously on [1, m] in declaration order.
PopulationMap map_populations(const Program& p,
                              const std::map<std::string, std::int64_t>& overrides = {});

}  // namespace liftex
