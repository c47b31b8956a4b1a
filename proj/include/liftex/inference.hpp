// SPDX-License-Identifier: Apache-2.0
//
// Probability of closed lifted graphs through per-node recurrences:
// f dispatches on the node, g is the weighted child sum at a fixed
// instance, h scans the range of an unassigned instance variable.
#pragma once

#include <map>
#include <string>
#include <unordered_map>

#include "liftex/lifted.hpp"

namespace liftex {

class NotLiftable : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Maximal non-zero subtrees of `root` with no node labeled by `x`.
std::vector<LId> frontier(LiftedContext& ctx, LId root, VarId x);
/// Frontier of the whole graph; `x` must be quantified.
std::vector<LId> frontier(LiftedContext& ctx, const LiftedGraph& g, VarId x);

/// ψ̂: `root` with every frontier subtree for `x` replaced by 1.
LId hat_tree(LiftedContext& ctx, LId root, VarId x);
/// Sum over root-to-1 paths of edge probability products.
double hat_prob(const LiftedContext& ctx, LId hat, const SwitchTable& dist);

struct SubsumptionReport {
    std::map<VarId, bool> verdict;
    std::map<VarId, std::string> reason;  // for failing variables

    [[nodiscard]] bool all() const;
};

/// Checked at every node labeled by each quantified variable, over the
/// subtree rooted there. Explanation enumeration beyond `cap` is a failure.
SubsumptionReport check_frontier_subsumption(LiftedContext& ctx, const LiftedGraph& g, std::size_t cap = 20000);

/// Memoized evaluation of the recurrences of a closed graph.
class LiftedEvaluator {
  public:
    /// Throws NotLiftable when the graph is not well-structured or fails
    /// frontier subsumption.
    LiftedEvaluator(LiftedContext& ctx, const LiftedGraph& g, const SwitchTable& dist);

    double probability();
    /// Distinct f and h cells computed so far.
    [[nodiscard]] std::size_t cells() const { return fmemo_.size() + hmemo_.size(); }
    [[nodiscard]] const EvalPlan& plan() const { return plan_; }
    [[nodiscard]] const SubsumptionReport& subsumption() const { return report_; }

    double f(int family, const std::map<VarId, std::int64_t>& sigma);
    /// h of a scanning family at value `c`; `sigma` supplies its h parameters.
    double h(int family, const std::map<VarId, std::int64_t>& sigma, std::int64_t c);
    double fhat(int family);
    /// First family planned for a node, or -1.
    [[nodiscard]] int family_of(LId node) const;

  private:
    double g(const Family& F, const std::map<VarId, std::int64_t>& sigma);

    LiftedContext& ctx_;
    LiftedGraph graph_;
    const SwitchTable& dist_;
    EvalPlan plan_;
    SubsumptionReport report_;
    std::unordered_map<int, double> fhat_;
    std::map<std::vector<std::int64_t>, double> fmemo_, hmemo_;
};

struct LiftedResult {
    double prob = 0;
    std::size_t cells = 0;
};

/// Throws NotLiftable on graphs outside the supported class.
LiftedResult lifted_prob(LiftedContext& ctx, const LiftedGraph& g, const SwitchTable& dist);

/// Human-readable f/g/h system, parameterized by the variables each family uses.
std::string emit_recurrences(LiftedContext& ctx, const LiftedGraph& g, const SwitchTable& dist);

}  // namespace liftex
