// SPDX-License-Identifier: Apache-2.0
#include "liftex/ground.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <unordered_set>

namespace liftex {

SwitchTable::SwitchTable(const Program& p) {
    std::vector<const Switch*> sorted;
    for (const auto& s : p.switches) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(), [](const Switch* a, const Switch* b) { return a->name < b->name; });
    for (const Switch* s : sorted) {
        names_.push_back(s->name);
        outcomes_.push_back(s->outcomes);
        probs_.push_back(s->probs);
    }
}

int SwitchTable::index(const std::string& name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) throw GroundError("unknown switch '" + name + "'");
    return static_cast<int>(it - names_.begin());
}

int SwitchTable::outcome_index(int sw, const PTerm& v) const {
    const auto& o = outcomes_[sw];
    auto it = std::find(o.begin(), o.end(), v);
    if (it == o.end()) throw GroundError("'" + v.text() + "' is not an outcome of switch '" + names_[sw] + "'");
    return static_cast<int>(it - o.begin());
}

void SwitchTable::set_probs(int sw, std::vector<double> probs) {
    if (probs.size() != outcomes_[sw].size()) throw GroundError("distribution size mismatch");
    probs_[sw] = std::move(probs);
}

std::size_t GroundEngine::KeyHash::operator()(const GroundNode& n) const {
    std::size_t h = std::hash<std::int64_t>()(n.inst) * 31 + static_cast<std::size_t>(n.sw);
    for (NodeId k : n.kids) h = h * 1000003u ^ k;
    return h;
}

GroundEngine::GroundEngine(const SwitchTable& switches) : switches_(&switches) {
    nodes_.push_back(GroundNode{});  // 0
    nodes_.push_back(GroundNode{});  // 1
}

NodeId GroundEngine::mk(int sw, std::int64_t inst, std::vector<NodeId> kids) {
    if (std::all_of(kids.begin(), kids.end(), [&](NodeId k) { return k == kids.front(); })) {
        return kids.front();
    }
    GroundNode n{sw, inst, std::move(kids)};
    auto it = unique_.find(n);
    if (it != unique_.end()) return it->second;
    const auto id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(n);
    unique_.emplace(std::move(n), id);
    return id;
}

NodeId GroundEngine::rv(int sw, std::int64_t inst, int outcome) {
    std::vector<NodeId> kids(switches_->outcomes(sw).size(), kZero);
    kids.at(static_cast<std::size_t>(outcome)) = kOne;
    return mk(sw, inst, std::move(kids));
}

NodeId GroundEngine::g_and(NodeId a, NodeId b) { return apply(Op::And, a, b); }
NodeId GroundEngine::g_or(NodeId a, NodeId b) { return apply(Op::Or, a, b); }

NodeId GroundEngine::apply(Op op, NodeId a, NodeId b) {
    if (op == Op::And) {
        if (a == kZero || b == kZero) return kZero;
        if (a == kOne) return b;
        if (b == kOne) return a;
    } else {
        if (a == kOne || b == kOne) return kOne;
        if (a == kZero) return b;
        if (b == kZero) return a;
    }
    if (a == b) return a;
    if (a > b) std::swap(a, b);
    auto& cache = op == Op::And ? and_cache_ : or_cache_;
    const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | b;
    if (auto it = cache.find(key); it != cache.end()) return it->second;

    const GroundNode na = nodes_[a];
    const GroundNode nb = nodes_[b];
    std::vector<NodeId> kids;
    int sw;
    std::int64_t inst;
    if (na.sw == nb.sw && na.inst == nb.inst) {
        sw = na.sw;
        inst = na.inst;
        for (std::size_t i = 0; i < na.kids.size(); ++i) kids.push_back(apply(op, na.kids[i], nb.kids[i]));
    } else if (precedes(na.sw, na.inst, nb.sw, nb.inst)) {
        sw = na.sw;
        inst = na.inst;
        for (NodeId k : na.kids) kids.push_back(apply(op, k, b));
    } else {
        sw = nb.sw;
        inst = nb.inst;
        for (NodeId k : nb.kids) kids.push_back(apply(op, a, k));
    }
    const NodeId r = mk(sw, inst, std::move(kids));
    cache.emplace(key, r);
    return r;
}

double GroundEngine::prob(NodeId root) const { return prob(root, *switches_); }

double GroundEngine::prob(NodeId root, const SwitchTable& dist) const {
    std::unordered_map<NodeId, double> memo;
    std::function<double(NodeId)> rec = [&](NodeId n) -> double {
        if (n == kZero) return 0.0;
        if (n == kOne) return 1.0;
        if (auto it = memo.find(n); it != memo.end()) return it->second;
        const GroundNode& g = nodes_[n];
        const auto& pr = dist.probs(g.sw);
        double s = 0.0;
        for (std::size_t i = 0; i < g.kids.size(); ++i) {
            if (g.kids[i] != kZero) s += pr[i] * rec(g.kids[i]);
        }
        memo.emplace(n, s);
        return s;
    };
    return rec(root);
}

std::size_t GroundEngine::size(NodeId root) const {
    std::unordered_set<NodeId> seen;
    std::vector<NodeId> stack{root};
    while (!stack.empty()) {
        NodeId n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second || is_leaf(n)) continue;
        for (NodeId k : nodes_[n].kids) stack.push_back(k);
    }
    return seen.size();
}

bool GroundEngine::eval(NodeId root, const std::function<int(int, std::int64_t)>& outcome) const {
    NodeId n = root;
    while (!is_leaf(n)) {
        const GroundNode& g = nodes_[n];
        n = g.kids.at(static_cast<std::size_t>(outcome(g.sw, g.inst)));
    }
    return n == kOne;
}

std::string GroundEngine::to_dot(NodeId root, const std::string& name) const {
    std::ostringstream os;
    os << "digraph " << name << " {\n";
    std::unordered_set<NodeId> seen;
    std::vector<NodeId> order;
    std::vector<NodeId> stack{root};
    while (!stack.empty()) {
        NodeId n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second) continue;
        order.push_back(n);
        if (!is_leaf(n)) {
            for (auto it = nodes_[n].kids.rbegin(); it != nodes_[n].kids.rend(); ++it) stack.push_back(*it);
        }
    }
    for (NodeId n : order) {
        if (is_leaf(n)) {
            os << "  n" << n << " [shape=circle,label=\"" << n << "\"];\n";
            continue;
        }
        const GroundNode& g = nodes_[n];
        os << "  n" << n << " [shape=box,label=\"(" << switches_->name(g.sw) << "," << g.inst << ")\"];\n";
        for (std::size_t i = 0; i < g.kids.size(); ++i) {
            os << "  n" << n << " -> n" << g.kids[i] << " [label=\"" << switches_->outcomes(g.sw)[i].text()
               << "\"];\n";
        }
    }
    os << "}\n";
    return os.str();
}

namespace {

// Runtime value: a population instance or a plain constant.
struct Value {
    bool inst = false;
    std::int64_t i = 0;
    PTerm c;
    friend bool operator==(const Value&, const Value&) = default;
};

using Env = std::map<std::string, Value>;

class Evaluator {
  public:
    Evaluator(const TypedProgram& tp, const PopulationMap& pops, GroundEngine& e)
        : tp_(tp), pops_(pops), e_(e) {
        for (std::size_t i = 0; i < tp.program.clauses.size(); ++i) {
            by_key_[tp.program.clauses[i].head.key()].push_back(i);
        }
    }

    NodeId run(const PAtom& q) {
        auto it = by_key_.find(q.key());
        if (it == by_key_.end()) throw GroundError("unknown query predicate '" + q.key() + "'");
        std::vector<std::optional<Value>> args;
        for (const auto& a : q.args) {
            if (a.is_var()) throw GroundError("query arguments must be ground");
            args.push_back(constant(a));
        }
        NodeId result = kZero;
        call(q.key(), args, kOne, [&](const std::vector<std::optional<Value>>&, NodeId acc) {
            result = e_.g_or(result, acc);
        });
        return result;
    }

  private:
    using Ret = std::function<void(const std::vector<std::optional<Value>>&, NodeId)>;

    Value constant(const PTerm& t) const {
        if (t.kind == PTerm::Kind::Atom) {
            auto it = pops_.constants.find(t.name);
            if (it != pops_.constants.end()) return Value{true, it->second, {}};
        }
        return Value{false, 0, t};
    }

    std::optional<Value> lookup(const Env& env, const PTerm& t) const {
        if (!t.is_var()) return constant(t);
        auto it = env.find(t.name);
        if (it == env.end()) return std::nullopt;
        return it->second;
    }

    void call(const std::string& key, const std::vector<std::optional<Value>>& args, NodeId acc, const Ret& ret) {
        if (++depth_ > 10000) throw GroundError("evaluation too deep");
        for (std::size_t ci : by_key_.at(key)) {
            const Clause& c = tp_.program.clauses[ci];
            Env env;
            bool ok = true;
            for (std::size_t j = 0; j < args.size() && ok; ++j) {
                if (!args[j]) continue;
                const PTerm& h = c.head.args[j];
                if (h.is_var()) {
                    auto [it, inserted] = env.emplace(h.name, *args[j]);
                    ok = inserted || it->second == *args[j];
                } else {
                    ok = constant(h) == *args[j];
                }
            }
            if (!ok) continue;
            body(c, 0, env, acc, [&](Env& done, NodeId a) {
                std::vector<std::optional<Value>> out;
                for (const auto& h : c.head.args) out.push_back(lookup(done, h));
                ret(out, a);
            });
        }
        --depth_;
    }

    void body(const Clause& c, std::size_t i, Env& env, NodeId acc, const std::function<void(Env&, NodeId)>& k) {
        if (acc == kZero) return;
        if (i == c.body.size()) {
            k(env, acc);
            return;
        }
        const Goal& g = c.body[i];
        if (const auto* in = std::get_if<InGoal>(&g)) {
            const Interval r = pops_.range(in->population);
            auto it = env.find(in->var);
            if (it != env.end()) {
                if (it->second.inst && it->second.i >= r.lo && it->second.i <= r.hi) body(c, i + 1, env, acc, k);
                return;
            }
            for (std::int64_t z = r.lo; z <= r.hi; ++z) {
                env[in->var] = Value{true, z, {}};
                body(c, i + 1, env, acc, k);
            }
            env.erase(in->var);
        } else if (const auto* m = std::get_if<MswGoal>(&g)) {
            auto inst = lookup(env, m->instance);
            if (!inst || !inst->inst) {
                throw GroundError("instance of msw(" + m->sw + ", ...) is not a bound population instance");
            }
            const int sw = e_.switches().index(m->sw);
            auto val = lookup(env, m->value);
            if (val) {
                if (val->inst) return;
                const int o = e_.switches().outcome_index(sw, val->c);
                body(c, i + 1, env, e_.g_and(acc, e_.rv(sw, inst->i, o)), k);
                return;
            }
            const auto& outs = e_.switches().outcomes(sw);
            for (std::size_t o = 0; o < outs.size(); ++o) {
                env[m->value.name] = Value{false, 0, outs[o]};
                body(c, i + 1, env, e_.g_and(acc, e_.rv(sw, inst->i, static_cast<int>(o))), k);
            }
            env.erase(m->value.name);
        } else if (const auto* q = std::get_if<ConstraintGoal>(&g)) {
            auto l = lookup(env, q->lhs);
            auto r = lookup(env, q->rhs);
            if (!l || !r || !l->inst || !r->inst) {
                throw GroundError("constraint " + render_goal(g) + " has an unbound or non-instance side");
            }
            const bool holds = q->op == CmpOp::LT ? l->i < r->i : q->op == CmpOp::EQ ? l->i == r->i : l->i != r->i;
            if (holds) body(c, i + 1, env, acc, k);
        } else {
            const auto& u = std::get<UserGoal>(g);
            std::vector<std::optional<Value>> args;
            for (const auto& a : u.atom.args) args.push_back(lookup(env, a));
            call(u.atom.key(), args, acc, [&](const std::vector<std::optional<Value>>& out, NodeId a) {
                // bind caller variables the callee produced
                std::vector<std::string> bound;
                bool ok = true;
                for (std::size_t j = 0; j < u.atom.args.size() && ok; ++j) {
                    const PTerm& t = u.atom.args[j];
                    if (!t.is_var() || !out[j]) continue;
                    auto it = env.find(t.name);
                    if (it == env.end()) {
                        env.emplace(t.name, *out[j]);
                        bound.push_back(t.name);
                    } else {
                        ok = it->second == *out[j];
                    }
                }
                if (ok) body(c, i + 1, env, a, k);
                for (const auto& n : bound) env.erase(n);
            });
        }
    }

    const TypedProgram& tp_;
    const PopulationMap& pops_;
    GroundEngine& e_;
    std::map<std::string, std::vector<std::size_t>> by_key_;
    int depth_ = 0;
};

}  // namespace

NodeId ground_query(const TypedProgram& tp, const PopulationMap& pops, GroundEngine& engine, const PAtom& query) {
    Evaluator ev(tp, pops, engine);
    return ev.run(query);
}

}  // namespace liftex
