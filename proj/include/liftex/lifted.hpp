// SPDX-License-Identifier: Apache-2.0
//
// Lifted explanation graphs (Ω:η, ψ). ψ is a hash-consed DAG whose
// internal nodes carry (switch, instance term) labels where the term is a
// variable or an integer constant; η is an instance-constraint formula over
// the free and quantified variables; Ω lists the quantified ones.
//
// A graph denotes, for each assignment of its free variables, the ground
// graph obtained by substituting every solution of η and disjoining.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "liftex/constraints.hpp"
#include "liftex/ground.hpp"

namespace liftex {

struct LTerm {
    std::optional<VarId> var;
    std::int64_t value = 0;

    static LTerm of(VarId v) { return LTerm{v, 0}; }
    static LTerm constant(std::int64_t k) { return LTerm{std::nullopt, k}; }
    [[nodiscard]] bool is_var() const { return var.has_value(); }
    [[nodiscard]] Term as_term() const { return var ? Term::of(*var) : Term::constant(value); }
    friend bool operator==(const LTerm&, const LTerm&) = default;
};

using LId = std::uint32_t;
inline constexpr LId kL0 = 0;
inline constexpr LId kL1 = 1;

struct LNode {
    int sw = -1;
    LTerm term;
    std::vector<LId> kids;
};

struct VarInfo {
    std::string name;
    Interval domain;
    std::string population;
};

class LiftError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Variable registry plus node table. Single-threaded; graphs built in one
/// context are only meaningful within it.
class LiftedContext {
  public:
    explicit LiftedContext(const SwitchTable& switches);
    ~LiftedContext();
    LiftedContext(const LiftedContext&) = delete;
    LiftedContext& operator=(const LiftedContext&) = delete;

    [[nodiscard]] const SwitchTable& switches() const { return *switches_; }

    /// Registers a variable; the name gets primes appended until unique.
    VarId new_var(const std::string& base, Interval domain, const std::string& population = "");
    /// Fresh variable with the same domain and a primed name.
    VarId fresh_like(VarId v);
    [[nodiscard]] const VarInfo& var(VarId v) const { return vars_.at(static_cast<std::size_t>(v.id)); }
    [[nodiscard]] const std::string& name(VarId v) const { return var(v).name; }
    [[nodiscard]] VarNamer namer() const;
    [[nodiscard]] std::optional<VarId> find_var(const std::string& name) const;

    [[nodiscard]] static bool is_leaf(LId n) { return n <= kL1; }
    [[nodiscard]] const LNode& node(LId n) const { return nodes_[n]; }
    /// Reduced, hash-consed node.
    LId mk(int sw, LTerm term, std::vector<LId> kids);
    /// Replaces every occurrence of variable `from` in node labels by `to`.
    LId relabel(LId root, VarId from, LTerm to);
    /// Sorted variables occurring in labels of the subtree.
    const std::vector<VarId>& vars_in(LId n);
    [[nodiscard]] std::size_t reachable(LId root) const;

    [[nodiscard]] std::string term_text(const LTerm& t) const;
    [[nodiscard]] std::string label_text(const LNode& n) const;

  private:
    struct Impl;
    const SwitchTable* switches_;
    std::vector<VarInfo> vars_;
    std::vector<LNode> nodes_;
    std::unique_ptr<Impl> impl_;
};

struct LiftedGraph {
    std::vector<VarId> omega;  // sorted
    ConstraintFormula eta;
    LId psi = kL0;

    static LiftedGraph False() { return LiftedGraph{{}, ConstraintFormula::False(), kL0}; }
    [[nodiscard]] bool is_false() const { return eta.is_false(); }
    [[nodiscard]] bool is_bound(VarId v) const;
    [[nodiscard]] std::vector<VarId> free_vars() const;
    [[nodiscard]] bool is_closed() const { return free_vars().empty(); }
    /// Q(Ω, η): the constraint on free variables.
    [[nodiscard]] ConstraintFormula free_projection() const { return eta.project_out(omega); }
};

/// Graphs whose free-variable projections are pairwise disjoint; under an
/// assignment the value is that of the unique member it satisfies, else 0.
using AnswerSet = std::vector<LiftedGraph>;

/// Domain box of the given variables, from the registry.
ConstraintFormula domain_box(const LiftedContext& ctx, const std::vector<VarId>& vars);

LiftedGraph lifted_rv(LiftedContext& ctx, int sw, LTerm t, int outcome, const ConstraintFormula& eta);
LiftedGraph lifted_rv(LiftedContext& ctx, int sw, LTerm t, int outcome);
LiftedGraph constraint_graph(LiftedContext& ctx, const AtomicConstraint& c);
/// (∅: box, 1) over the given variables.
LiftedGraph true_graph(LiftedContext& ctx, const std::vector<VarId>& vars = {});

LiftedGraph substitute(LiftedContext& ctx, const LiftedGraph& g, std::int64_t k, VarId x);
/// Renames a variable everywhere; identifies it with `to` if that is present.
LiftedGraph rename_var(LiftedContext& ctx, const LiftedGraph& g, VarId from, VarId to);

enum class NodeOrder { LT, GT, EQ, INCOMPARABLE };
NodeOrder compare_nodes(const ConstraintFormula& eta, int sw1, const LTerm& t1, int sw2, const LTerm& t2);

std::pair<LiftedGraph, LiftedGraph> standardize_apart(LiftedContext& ctx, const LiftedGraph& a,
                                                      const LiftedGraph& b);

AnswerSet l_and(LiftedContext& ctx, const LiftedGraph& a, const LiftedGraph& b);
AnswerSet l_or(LiftedContext& ctx, const LiftedGraph& a, const LiftedGraph& b);
AnswerSet set_and(LiftedContext& ctx, const AnswerSet& a, const AnswerSet& b);
AnswerSet set_or(LiftedContext& ctx, const AnswerSet& a, const AnswerSet& b);

LiftedGraph quantify(const LiftedGraph& g, VarId x);
AnswerSet quantify(LiftedContext& ctx, const AnswerSet& s, VarId x);

/// Unique member satisfied by a total assignment of the free variables.
const LiftedGraph* select_member(const AnswerSet& s, const std::map<VarId, std::int64_t>& sigma);
/// Substitutes values for the listed variables.
LiftedGraph substitute_all(LiftedContext& ctx, const LiftedGraph& g, const std::map<VarId, std::int64_t>& sigma);

bool check_well_structured(LiftedContext& ctx, const LiftedGraph& g);
/// Structural invariant check; returns a description of the first violation.
std::optional<std::string> validate(LiftedContext& ctx, const LiftedGraph& g);

struct Literal {
    int sw = -1;
    Term term;
    int outcome = 0;
    friend bool operator==(const Literal&, const Literal&) = default;
};
using LiftedExplanation = std::vector<Literal>;

/// Root-to-1 paths. Throws LiftError when more than `cap` exist.
std::vector<LiftedExplanation> lifted_explanations(const LiftedContext& ctx, LId psi, std::size_t cap = 100000);
std::string explanation_text(const LiftedContext& ctx, const LiftedExplanation& e);

/// Reachable node count (leaves included).
std::size_t node_count(const LiftedContext& ctx, const LiftedGraph& g);
/// "∃X.∃Y. X<Y" style header.
std::string header_text(const LiftedContext& ctx, const LiftedGraph& g);
std::string to_dot(const LiftedContext& ctx, const LiftedGraph& g, const std::string& name = "lifted");

// Evaluation plan shared by grounding and the probability recurrences:
// one family per (node, assigned variables relevant to the subtree).
struct Family {
    LId node = kL0;
    std::vector<VarId> params;  // assigned on entry and relevant, sorted
    bool scan = false;          // label variable unassigned: range scan
    VarId var;                  // scanned variable
    std::int64_t lo = 0, hi = -1;
    std::vector<std::pair<VarId, std::int64_t>> lower;  // var >= p + k
    std::vector<std::pair<VarId, std::int64_t>> upper;  // var <= p + k
    std::vector<int> kids;      // family index, or kLeaf0 / kLeaf1
    std::vector<VarId> h_params;  // what a scan step depends on besides the scanned value

    static constexpr int kLeaf0 = -1;
    static constexpr int kLeaf1 = -2;
};

struct EvalPlan {
    std::vector<Family> families;
    int root = Family::kLeaf0;

    /// Bounds of the scan for a family, given values of its params.
    [[nodiscard]] Interval scan_range(const Family& f, const std::map<VarId, std::int64_t>& sigma) const;
};

/// Requires a closed graph. FALSE graphs plan to the 0 leaf.
EvalPlan build_plan(LiftedContext& ctx, const LiftedGraph& g);

/// Grounding of a closed graph into `engine`.
NodeId ground(LiftedContext& ctx, const LiftedGraph& g, GroundEngine& engine);
/// Reference grounding: disjunction over every solution of η.
NodeId ground_by_enumeration(LiftedContext& ctx, const LiftedGraph& g, GroundEngine& engine);

/// Lifted construction for a ground query atom.
LiftedGraph lifted_query(LiftedContext& ctx, const TypedProgram& tp, const PopulationMap& pops, const PAtom& query);

}  // namespace liftex
