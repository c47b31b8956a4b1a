// SPDX-License-Identifier: Apache-2.0
//
// Instance constraints over bounded integer variables.
//
// A ConstraintFormula is a conjunction of difference constraints
// `x - y <= b` plus per-variable domain bounds, kept canonically as a
// closed difference bound matrix (DBM). Row/column 0 is the zero variable,
// so entry (x, 0) is the upper bound of x and entry (0, x) is the negated
// lower bound. Strict integer inequalities are stored as `x - y <= -1`.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace liftex {

struct VarId {
    std::int32_t id = -1;

    friend constexpr auto operator<=>(VarId, VarId) = default;
};

struct Interval {
    std::int64_t lo = 0;
    std::int64_t hi = -1;

    [[nodiscard]] bool empty() const { return lo > hi; }
    [[nodiscard]] std::int64_t size() const { return empty() ? 0 : hi - lo + 1; }
    friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

class ConstraintError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Either `var + offset` or the constant `offset`.
struct Term {
    std::optional<VarId> var;
    std::int64_t offset = 0;

    static Term of(VarId v, std::int64_t k = 0) { return Term{v, k}; }
    static Term constant(std::int64_t k) { return Term{std::nullopt, k}; }
    friend bool operator==(const Term&, const Term&) = default;
};

enum class Rel { LT, EQ };

/// `lhs < rhs` or `lhs = rhs`.
struct AtomicConstraint {
    Rel rel = Rel::LT;
    Term lhs;
    Term rhs;

    friend bool operator==(const AtomicConstraint&, const AtomicConstraint&) = default;
};

/// Checks the offset bound `0 <= |k| <= m + 1` on both sides of an atom.
[[nodiscard]] bool offsets_within_bound(const AtomicConstraint& c, std::int64_t m);

using VarNamer = std::function<std::string(VarId)>;

/// Solution: values for `vars()` in the same order.
using Solution = std::vector<std::int64_t>;

class ConstraintFormula {
  public:
    /// The empty conjunction (true) over no variables.
    ConstraintFormula() = default;

    /// The distinguished unsatisfiable formula.
    static ConstraintFormula False();

    /// Unconstrained box over the given variables.
    static ConstraintFormula box(const std::vector<std::pair<VarId, Interval>>& vars);

    [[nodiscard]] bool is_false() const { return false_; }
    [[nodiscard]] bool is_satisfiable() const { return !false_; }
    [[nodiscard]] const std::vector<VarId>& vars() const { return vars_; }
    [[nodiscard]] bool has_var(VarId v) const { return index_of(v).has_value(); }
    [[nodiscard]] Interval domain(VarId v) const;

    /// Adds a variable with its declared domain. Re-adding with the same
    /// domain is a no-op; a different domain is a typing error.
    [[nodiscard]] ConstraintFormula with_var(VarId v, Interval dom) const;

    /// Conjoins an atom. Every variable it mentions must already be present.
    [[nodiscard]] ConstraintFormula add(const AtomicConstraint& c) const;

    [[nodiscard]] ConstraintFormula conjoin(const ConstraintFormula& other) const;
    [[nodiscard]] bool entails(const AtomicConstraint& c) const;
    [[nodiscard]] bool entails(const ConstraintFormula& other) const;
    [[nodiscard]] ConstraintFormula project_out(VarId x) const;
    [[nodiscard]] ConstraintFormula project_out(const std::vector<VarId>& xs) const;
    /// Keeps only the listed variables (others are projected out).
    [[nodiscard]] ConstraintFormula project_onto(const std::vector<VarId>& keep) const;

    /// Mutually exclusive pieces covering the domain box minus this formula.
    [[nodiscard]] std::vector<ConstraintFormula> negate() const;
    /// Mutually exclusive pieces whose union is the union of both formulas.
    [[nodiscard]] std::vector<ConstraintFormula> disjoin(const ConstraintFormula& other) const;

    [[nodiscard]] Interval range(VarId x) const;
    [[nodiscard]] ConstraintFormula substitute_value(VarId x, std::int64_t k) const;
    /// Replaces variable `from` by `to`. If `to` is already present the two
    /// are identified (conjoin equality, then drop `from`).
    [[nodiscard]] ConstraintFormula rename(VarId from, VarId to) const;

    /// Bound on `x - y` (either may be nullopt for the zero variable).
    [[nodiscard]] std::int64_t bound(std::optional<VarId> x, std::optional<VarId> y) const;
    /// Bound on `x - y` implied by the domains alone.
    [[nodiscard]] std::int64_t box_bound(std::optional<VarId> x, std::optional<VarId> y) const;

    [[nodiscard]] bool satisfied_by(const Solution& s) const;
    [[nodiscard]] std::vector<Solution> enumerate_solutions() const;
    void for_each_solution(const std::function<void(const Solution&)>& fn) const;

    /// Faces tighter than the domain box, with implied ones removed.
    [[nodiscard]] std::vector<AtomicConstraint> faces() const;

    [[nodiscard]] std::string to_string(const VarNamer& namer = {}, bool with_domains = true) const;
    [[nodiscard]] std::size_t hash() const;

    friend bool operator==(const ConstraintFormula& a, const ConstraintFormula& b);

  private:
    [[nodiscard]] std::optional<std::size_t> index_of(VarId v) const;
    [[nodiscard]] std::size_t dim() const { return vars_.size() + 1; }
    [[nodiscard]] std::int64_t& at(std::size_t i, std::size_t j) { return dbm_[i * dim() + j]; }
    [[nodiscard]] std::int64_t at(std::size_t i, std::size_t j) const { return dbm_[i * dim() + j]; }
    [[nodiscard]] std::size_t slot(std::optional<VarId> v) const;
    void tighten(std::size_t i, std::size_t j, std::int64_t b);
    void close();
    [[nodiscard]] ConstraintFormula with_vars_of(const ConstraintFormula& other) const;

    bool false_ = false;
    std::vector<VarId> vars_;
    std::vector<Interval> domains_;
    std::vector<std::int64_t> dbm_{0};
};

struct ConstraintFormulaHash {
    std::size_t operator()(const ConstraintFormula& f) const { return f.hash(); }
};

}  // namespace liftex
