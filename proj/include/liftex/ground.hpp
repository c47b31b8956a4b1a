// SPDX-License-Identifier: Apache-2.0
//
// Ground explanation graphs: ordered, reduced multi-valued decision
// diagrams over (switch, instance) variables, ordered by instance first
// and switch name second. Leaves are the node ids 0 and 1.
#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "liftex/program.hpp"

namespace liftex {

/// Switch declarations indexed in name order, so that index order is
/// the switch tie-break of the node order.
class SwitchTable {
  public:
    SwitchTable() = default;
    explicit SwitchTable(const Program& p);

    [[nodiscard]] std::size_t size() const { return names_.size(); }
    [[nodiscard]] int index(const std::string& name) const;
    [[nodiscard]] const std::string& name(int sw) const { return names_[sw]; }
    [[nodiscard]] const std::vector<PTerm>& outcomes(int sw) const { return outcomes_[sw]; }
    [[nodiscard]] const std::vector<double>& probs(int sw) const { return probs_[sw]; }
    [[nodiscard]] int outcome_index(int sw, const PTerm& v) const;
    /// Replaces the distribution of a switch (same outcome count).
    void set_probs(int sw, std::vector<double> probs);

  private:
    std::vector<std::string> names_;
    std::vector<std::vector<PTerm>> outcomes_;
    std::vector<std::vector<double>> probs_;
};

using NodeId = std::uint32_t;
inline constexpr NodeId kZero = 0;
inline constexpr NodeId kOne = 1;

struct GroundNode {
    int sw = -1;
    std::int64_t inst = 0;
    std::vector<NodeId> kids;
};

class GroundError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class GroundEngine {
  public:
    explicit GroundEngine(const SwitchTable& switches);

    [[nodiscard]] const SwitchTable& switches() const { return *switches_; }
    [[nodiscard]] static bool is_leaf(NodeId n) { return n <= kOne; }
    [[nodiscard]] const GroundNode& node(NodeId n) const { return nodes_[n]; }

    /// Reduced, hash-consed node. Children must be ordered below (sw, inst).
    NodeId mk(int sw, std::int64_t inst, std::vector<NodeId> kids);
    /// Node (sw, inst) whose `outcome` edge leads to 1 and others to 0.
    NodeId rv(int sw, std::int64_t inst, int outcome);

    NodeId g_and(NodeId a, NodeId b);
    NodeId g_or(NodeId a, NodeId b);

    /// Sum over root-to-1 paths of edge probability products.
    [[nodiscard]] double prob(NodeId root) const;
    [[nodiscard]] double prob(NodeId root, const SwitchTable& dist) const;

    /// Reachable node count, leaves included.
    [[nodiscard]] std::size_t size(NodeId root) const;
    [[nodiscard]] std::size_t table_size() const { return nodes_.size(); }

    /// Truth value under a total assignment of outcomes.
    [[nodiscard]] bool eval(NodeId root, const std::function<int(int, std::int64_t)>& outcome) const;

    [[nodiscard]] std::string to_dot(NodeId root, const std::string& name = "ground") const;

    /// Strict node order: instance first, then switch index.
    [[nodiscard]] static bool precedes(int sw1, std::int64_t i1, int sw2, std::int64_t i2) {
        return i1 < i2 || (i1 == i2 && sw1 < sw2);
    }

  private:
    enum class Op : std::uint8_t { And, Or };
    NodeId apply(Op op, NodeId a, NodeId b);

    struct KeyHash {
        std::size_t operator()(const GroundNode& n) const;
    };
    struct KeyEq {
        bool operator()(const GroundNode& a, const GroundNode& b) const {
            return a.sw == b.sw && a.inst == b.inst && a.kids == b.kids;
        }
    };

    const SwitchTable* switches_;
    std::vector<GroundNode> nodes_;
    std::unordered_map<GroundNode, NodeId, KeyHash, KeyEq> unique_;
    std::unordered_map<std::uint64_t, NodeId> and_cache_;
    std::unordered_map<std::uint64_t, NodeId> or_cache_;
};

/// Evaluates a ground query atom by SLD resolution over the typed program,
/// enumerating population instances at `in` goals. Returns the disjunction
/// over derivations of the conjunction of their random choices.
NodeId ground_query(const TypedProgram& tp, const PopulationMap& pops, GroundEngine& engine,
                    const PAtom& query);

}  // namespace liftex
