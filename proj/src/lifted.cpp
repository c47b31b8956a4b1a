// SPDX-License-Identifier: Apache-2.0
#include "liftex/lifted.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_set>

namespace liftex {

namespace {

std::size_t mix(std::size_t h, std::uint64_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

struct VecHash {
    std::size_t operator()(const std::vector<std::int64_t>& v) const {
        std::size_t h = v.size();
        for (auto x : v) h = mix(h, static_cast<std::uint64_t>(x));
        return h;
    }
};

bool contains(const std::vector<VarId>& sorted, VarId v) {
    return std::binary_search(sorted.begin(), sorted.end(), v);
}

std::vector<VarId> set_union(const std::vector<VarId>& a, const std::vector<VarId>& b) {
    std::vector<VarId> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<VarId> set_minus(const std::vector<VarId>& a, const std::vector<VarId>& b) {
    std::vector<VarId> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<VarId> without(std::vector<VarId> a, VarId v) {
    a.erase(std::remove(a.begin(), a.end(), v), a.end());
    return a;
}

std::vector<VarId> with(std::vector<VarId> a, VarId v) {
    auto it = std::lower_bound(a.begin(), a.end(), v);
    if (it == a.end() || *it != v) a.insert(it, v);
    return a;
}

}  // namespace

// ---------------------------------------------------------------------------
// Context

struct LiftedContext::Impl {
    struct Key {
        int sw;
        std::int32_t var;
        std::int64_t value;
        std::vector<LId> kids;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::size_t h = mix(static_cast<std::size_t>(k.sw), static_cast<std::uint64_t>(k.var));
            h = mix(h, static_cast<std::uint64_t>(k.value));
            for (auto c : k.kids) h = mix(h, c);
            return h;
        }
    };
    std::unordered_map<Key, LId, KeyHash> unique;
    std::unordered_map<LId, std::vector<VarId>> vars_in;
    std::map<std::string, VarId> by_name;
};

LiftedContext::LiftedContext(const SwitchTable& switches)
    : switches_(&switches), impl_(std::make_unique<Impl>()) {
    nodes_.push_back(LNode{});
    nodes_.push_back(LNode{});
}

LiftedContext::~LiftedContext() = default;

VarId LiftedContext::new_var(const std::string& base, Interval domain, const std::string& population) {
    std::string name = base;
    while (impl_->by_name.count(name)) name += "'";
    VarId v{static_cast<std::int32_t>(vars_.size())};
    vars_.push_back(VarInfo{name, domain, population});
    impl_->by_name.emplace(name, v);
    return v;
}

VarId LiftedContext::fresh_like(VarId v) {
    const VarInfo info = var(v);
    return new_var(info.name, info.domain, info.population);
}

VarNamer LiftedContext::namer() const {
    return [this](VarId v) { return name(v); };
}

std::optional<VarId> LiftedContext::find_var(const std::string& n) const {
    auto it = impl_->by_name.find(n);
    if (it == impl_->by_name.end()) return std::nullopt;
    return it->second;
}

LId LiftedContext::mk(int sw, LTerm term, std::vector<LId> kids) {
    if (kids.size() != switches_->outcomes(sw).size()) {
        throw std::logic_error("child count does not match outcomes of " + switches_->name(sw));
    }
    if (std::all_of(kids.begin(), kids.end(), [&](LId k) { return k == kids.front(); })) return kids.front();
    Impl::Key key{sw, term.var ? term.var->id : -1, term.var ? 0 : term.value, kids};
    auto it = impl_->unique.find(key);
    if (it != impl_->unique.end()) return it->second;
    const LId id = static_cast<LId>(nodes_.size());
    nodes_.push_back(LNode{sw, term, std::move(kids)});
    impl_->unique.emplace(std::move(key), id);
    return id;
}

LId LiftedContext::relabel(LId root, VarId from, LTerm to) {
    std::unordered_map<LId, LId> memo;
    std::function<LId(LId)> go = [&](LId n) -> LId {
        if (is_leaf(n)) return n;
        if (auto it = memo.find(n); it != memo.end()) return it->second;
        const LNode node = nodes_[n];
        std::vector<LId> kids;
        kids.reserve(node.kids.size());
        for (LId k : node.kids) kids.push_back(go(k));
        LTerm t = node.term.var == from ? to : node.term;
        const LId out = mk(node.sw, t, std::move(kids));
        memo.emplace(n, out);
        return out;
    };
    return go(root);
}

const std::vector<VarId>& LiftedContext::vars_in(LId n) {
    static const std::vector<VarId> kNone;
    if (is_leaf(n)) return kNone;
    if (auto it = impl_->vars_in.find(n); it != impl_->vars_in.end()) return it->second;
    std::vector<VarId> acc;
    const LNode node = nodes_[n];
    if (node.term.var) acc.push_back(*node.term.var);
    for (LId k : node.kids) acc = set_union(acc, vars_in(k));
    return impl_->vars_in.emplace(n, std::move(acc)).first->second;
}

std::size_t LiftedContext::reachable(LId root) const {
    std::unordered_set<LId> seen;
    std::vector<LId> stack{root};
    while (!stack.empty()) {
        LId n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second) continue;
        if (!is_leaf(n)) {
            for (LId k : nodes_[n].kids) stack.push_back(k);
        }
    }
    return seen.size();
}

std::string LiftedContext::term_text(const LTerm& t) const {
    return t.var ? name(*t.var) : std::to_string(t.value);
}

std::string LiftedContext::label_text(const LNode& n) const {
    return "(" + switches_->name(n.sw) + "," + term_text(n.term) + ")";
}

// ---------------------------------------------------------------------------
// Graph basics

bool LiftedGraph::is_bound(VarId v) const { return contains(omega, v); }

std::vector<VarId> LiftedGraph::free_vars() const {
    if (is_false()) return {};
    return set_minus(eta.vars(), omega);
}

ConstraintFormula domain_box(const LiftedContext& ctx, const std::vector<VarId>& vars) {
    std::vector<std::pair<VarId, Interval>> b;
    for (VarId v : vars) b.emplace_back(v, ctx.var(v).domain);
    return ConstraintFormula::box(b);
}

LiftedGraph lifted_rv(LiftedContext& ctx, int sw, LTerm t, int outcome, const ConstraintFormula& eta) {
    const auto n = static_cast<int>(ctx.switches().outcomes(sw).size());
    if (outcome < 0 || outcome >= n) throw std::invalid_argument("outcome out of range");
    if (eta.is_false()) return LiftedGraph::False();
    ConstraintFormula e = eta;
    if (t.var && !e.has_var(*t.var)) e = e.with_var(*t.var, ctx.var(*t.var).domain);
    if (e.is_false()) return LiftedGraph::False();
    std::vector<LId> kids(static_cast<std::size_t>(n), kL0);
    kids[static_cast<std::size_t>(outcome)] = kL1;
    return LiftedGraph{{}, e, ctx.mk(sw, t, std::move(kids))};
}

LiftedGraph lifted_rv(LiftedContext& ctx, int sw, LTerm t, int outcome) {
    return lifted_rv(ctx, sw, t, outcome, ConstraintFormula());
}

LiftedGraph constraint_graph(LiftedContext& ctx, const AtomicConstraint& c) {
    std::vector<VarId> vs;
    if (c.lhs.var) vs = with(vs, *c.lhs.var);
    if (c.rhs.var) vs = with(vs, *c.rhs.var);
    ConstraintFormula e = domain_box(ctx, vs);
    if (!e.is_false()) e = e.add(c);
    if (e.is_false()) return LiftedGraph::False();
    return LiftedGraph{{}, e, kL1};
}

LiftedGraph true_graph(LiftedContext& ctx, const std::vector<VarId>& vars) {
    std::vector<VarId> vs = vars;
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    ConstraintFormula e = domain_box(ctx, vs);
    if (e.is_false()) return LiftedGraph::False();
    return LiftedGraph{{}, e, kL1};
}

LiftedGraph substitute(LiftedContext& ctx, const LiftedGraph& g, std::int64_t k, VarId x) {
    if (g.is_false()) return g;
    if (!g.eta.has_var(x)) throw std::invalid_argument("substitute: variable " + ctx.name(x) + " not in constraint");
    ConstraintFormula e = g.eta.substitute_value(x, k);
    if (e.is_false()) return LiftedGraph::False();
    return LiftedGraph{without(g.omega, x), e, ctx.relabel(g.psi, x, LTerm::constant(k))};
}

LiftedGraph rename_var(LiftedContext& ctx, const LiftedGraph& g, VarId from, VarId to) {
    if (g.is_false() || from == to || !g.eta.has_var(from)) return g;
    ConstraintFormula e = g.eta.rename(from, to);
    if (e.is_false()) return LiftedGraph::False();
    std::vector<VarId> om = g.omega;
    if (contains(om, from)) om = with(without(om, from), to);
    return LiftedGraph{om, e, ctx.relabel(g.psi, from, LTerm::of(to))};
}

NodeOrder compare_nodes(const ConstraintFormula& eta, int sw1, const LTerm& t1, int sw2, const LTerm& t2) {
    auto by_switch = [&] {
        if (sw1 < sw2) return NodeOrder::LT;
        if (sw1 > sw2) return NodeOrder::GT;
        return NodeOrder::EQ;
    };
    if (!t1.var && !t2.var) {
        if (t1.value < t2.value) return NodeOrder::LT;
        if (t1.value > t2.value) return NodeOrder::GT;
        return by_switch();
    }
    if (t1 == t2) return by_switch();
    if (eta.is_false()) return NodeOrder::INCOMPARABLE;
    if ((t1.var && !eta.has_var(*t1.var)) || (t2.var && !eta.has_var(*t2.var))) return NodeOrder::INCOMPARABLE;
    const Term a = t1.as_term(), b = t2.as_term();
    if (eta.entails(AtomicConstraint{Rel::EQ, a, b})) return by_switch();
    if (eta.entails(AtomicConstraint{Rel::LT, a, b})) return NodeOrder::LT;
    if (eta.entails(AtomicConstraint{Rel::LT, b, a})) return NodeOrder::GT;
    return NodeOrder::INCOMPARABLE;
}

namespace {

LiftedGraph rename_bound_away(LiftedContext& ctx, LiftedGraph g, const std::vector<VarId>& avoid) {
    for (VarId v : std::vector<VarId>(g.omega)) {
        if (contains(avoid, v)) g = rename_var(ctx, g, v, ctx.fresh_like(v));
    }
    return g;
}

}  // namespace

std::pair<LiftedGraph, LiftedGraph> standardize_apart(LiftedContext& ctx, const LiftedGraph& a,
                                                      const LiftedGraph& b) {
    LiftedGraph y = rename_bound_away(ctx, b, a.is_false() ? std::vector<VarId>{} : a.eta.vars());
    LiftedGraph x = rename_bound_away(ctx, a, y.is_false() ? std::vector<VarId>{} : y.eta.vars());
    return {x, y};
}

// ---------------------------------------------------------------------------
// Combination of DAGs under a shared constraint

namespace {

enum class Op { And, Or };

// Raised when two incomparable roots involve a quantified variable and no
// sound single-graph rule applies; callers fall back to expansion.
struct NeedsExpansion {};

struct Alt {
    ConstraintFormula eta;
    LId psi;
};

// Pointwise combination: returns alternatives (eta_i, psi_i) partitioning
// eta by constraints on unquantified terms, with psi_i = x op y on eta_i.
class Combiner {
  public:
    Combiner(LiftedContext& ctx, std::vector<VarId> omega) : ctx_(ctx), omega_(std::move(omega)) {}

    std::vector<Alt> run(Op op, const ConstraintFormula& eta, LId x, LId y) {
        if (op == Op::And) {
            if (x == kL0 || y == kL0) return {{eta, kL0}};
            if (x == kL1) return {{eta, y}};
            if (y == kL1) return {{eta, x}};
        } else {
            if (x == kL1 || y == kL1) return {{eta, kL1}};
            if (x == kL0) return {{eta, y}};
            if (y == kL0) return {{eta, x}};
        }
        if (x == y) return {{eta, x}};
        if (x > y) std::swap(x, y);
        Key key{op, x, y, eta};
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;

        const LNode nx = ctx_.node(x), ny = ctx_.node(y);
        std::vector<Alt> out;
        std::vector<std::pair<LId, LId>> pairs;
        switch (compare_nodes(eta, nx.sw, nx.term, ny.sw, ny.term)) {
            case NodeOrder::LT:
                for (LId k : nx.kids) pairs.emplace_back(k, y);
                out = thread(op, eta, nx.sw, nx.term, pairs);
                break;
            case NodeOrder::GT:
                for (LId k : ny.kids) pairs.emplace_back(x, k);
                out = thread(op, eta, ny.sw, ny.term, pairs);
                break;
            case NodeOrder::EQ:
                for (std::size_t i = 0; i < nx.kids.size(); ++i) pairs.emplace_back(nx.kids[i], ny.kids[i]);
                out = thread(op, eta, nx.sw, nx.term, pairs);
                break;
            case NodeOrder::INCOMPARABLE: {
                if (bound(nx.term) || bound(ny.term)) throw NeedsExpansion{};
                const Term a = nx.term.as_term(), b = ny.term.as_term();
                for (const auto& c : {AtomicConstraint{Rel::LT, a, b}, AtomicConstraint{Rel::EQ, a, b},
                                      AtomicConstraint{Rel::LT, b, a}}) {
                    ConstraintFormula piece = eta.add(c);
                    if (piece.is_false()) continue;
                    auto r = run(op, piece, x, y);
                    out.insert(out.end(), r.begin(), r.end());
                }
                break;
            }
        }
        memo_.emplace(std::move(key), out);
        return out;
    }

    std::vector<Alt> thread(Op op, const ConstraintFormula& eta, int sw, const LTerm& t,
                            const std::vector<std::pair<LId, LId>>& pairs) {
        std::vector<std::pair<ConstraintFormula, std::vector<LId>>> partial{{eta, {}}};
        for (const auto& [a, b] : pairs) {
            std::vector<std::pair<ConstraintFormula, std::vector<LId>>> next;
            for (const auto& [e, ks] : partial) {
                for (const auto& alt : run(op, e, a, b)) {
                    auto k2 = ks;
                    k2.push_back(alt.psi);
                    next.emplace_back(alt.eta, std::move(k2));
                }
            }
            partial = std::move(next);
        }
        std::vector<Alt> out;
        for (auto& [e, ks] : partial) out.push_back(Alt{e, ctx_.mk(sw, t, std::move(ks))});
        return out;
    }

  private:
    struct Key {
        Op op;
        LId x, y;
        ConstraintFormula eta;
        bool operator==(const Key& o) const { return op == o.op && x == o.x && y == o.y && eta == o.eta; }
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::size_t h = mix(static_cast<std::size_t>(k.op), k.x);
            h = mix(h, k.y);
            return mix(h, k.eta.hash());
        }
    };

    bool bound(const LTerm& t) const { return t.var && contains(omega_, *t.var); }

    LiftedContext& ctx_;
    std::vector<VarId> omega_;
    std::unordered_map<Key, std::vector<Alt>, KeyHash> memo_;
};

AnswerSet finish(const std::vector<VarId>& omega, const std::vector<Alt>& alts) {
    AnswerSet out;
    for (const auto& a : alts) {
        if (a.psi == kL0 || a.eta.is_false()) continue;
        out.push_back(LiftedGraph{omega, a.eta, a.psi});
    }
    return out;
}

AnswerSet nonfalse(const AnswerSet& s) {
    AnswerSet out;
    for (const auto& g : s) {
        if (!g.is_false() && g.psi != kL0) out.push_back(g);
    }
    return out;
}

// Disjunction of all substitution instances, one quantified variable at a time.
AnswerSet expand(LiftedContext& ctx, const LiftedGraph& g) {
    if (g.is_false()) return {};
    if (g.omega.empty()) return {g};
    const VarId x = g.omega.front();
    const Interval r = g.eta.range(x);
    AnswerSet acc;
    for (std::int64_t c = r.lo; c <= r.hi; ++c) {
        LiftedGraph s = substitute(ctx, g, c, x);
        if (!s.is_false()) acc = set_or(ctx, acc, expand(ctx, s));
    }
    return acc;
}

AnswerSet pair_and(LiftedContext& ctx, const LiftedGraph& m, const LiftedGraph& n) {
    if (m.is_false() || n.is_false()) return {};
    auto [x, y] = standardize_apart(ctx, m, n);
    if (!x.free_projection().conjoin(y.free_projection()).is_satisfiable()) return {};
    const ConstraintFormula eta = x.eta.conjoin(y.eta);
    const std::vector<VarId> omega = set_union(x.omega, y.omega);
    try {
        Combiner c(ctx, omega);
        return finish(omega, c.run(Op::And, eta, x.psi, y.psi));
    } catch (const NeedsExpansion&) {
        return set_and(ctx, expand(ctx, x), expand(ctx, y));
    }
}

// Merges two incomparable quantified roots on the same switch into one
// fresh variable when both sides admit exactly the same values for it under
// every assignment of the free variables.
std::optional<AnswerSet> try_merge(LiftedContext& ctx, const LiftedGraph& x, const LiftedGraph& y,
                                   const ConstraintFormula& qx, const ConstraintFormula& qy) {
    if (LiftedContext::is_leaf(x.psi) || LiftedContext::is_leaf(y.psi)) return std::nullopt;
    const LNode nx = ctx.node(x.psi), ny = ctx.node(y.psi);
    if (!nx.term.var || !ny.term.var || nx.sw != ny.sw) return std::nullopt;
    const VarId tx = *nx.term.var, ty = *ny.term.var;
    if (!x.is_bound(tx) || !y.is_bound(ty)) return std::nullopt;
    if (ctx.var(tx).domain != ctx.var(ty).domain) return std::nullopt;
    const ConstraintFormula eta = x.eta.conjoin(y.eta);
    if (compare_nodes(eta, nx.sw, nx.term, ny.sw, ny.term) != NodeOrder::INCOMPARABLE) return std::nullopt;
    if (contains(ctx.vars_in(y.psi), tx) || contains(ctx.vars_in(x.psi), ty)) return std::nullopt;

    const ConstraintFormula pa = x.eta.project_out(without(x.omega, tx));
    const ConstraintFormula pb = y.eta.project_out(without(y.omega, ty)).rename(ty, tx);
    if (!(pa.conjoin(qy) == pb.conjoin(qx))) return std::nullopt;

    const VarId t2 = ctx.fresh_like(tx);
    const ConstraintFormula eta2 = x.eta.rename(tx, t2).conjoin(y.eta.rename(ty, t2));
    const std::vector<VarId> omega2 = with(set_union(without(x.omega, tx), without(y.omega, ty)), t2);
    const LId px = ctx.relabel(x.psi, tx, LTerm::of(t2));
    const LId py = ctx.relabel(y.psi, ty, LTerm::of(t2));
    std::vector<std::pair<LId, LId>> pairs;
    for (std::size_t i = 0; i < ctx.node(px).kids.size(); ++i) {
        pairs.emplace_back(ctx.node(px).kids[i], ctx.node(py).kids[i]);
    }
    Combiner c(ctx, omega2);
    return finish(omega2, c.thread(Op::Or, eta2, nx.sw, LTerm::of(t2), pairs));
}

// m OR n restricted to the region where both free projections hold.
AnswerSet pair_or_overlap(LiftedContext& ctx, const LiftedGraph& m, const LiftedGraph& n) {
    auto [x, y] = standardize_apart(ctx, m, n);
    const ConstraintFormula qx = x.free_projection(), qy = y.free_projection();
    try {
        if (auto merged = try_merge(ctx, x, y, qx, qy)) return *merged;
        const ConstraintFormula eta = x.eta.conjoin(y.eta);
        const std::vector<VarId> omega = set_union(x.omega, y.omega);
        Combiner c(ctx, omega);
        return finish(omega, c.run(Op::Or, eta, x.psi, y.psi));
    } catch (const NeedsExpansion&) {
        const ConstraintFormula ov = qx.conjoin(qy);
        AnswerSet out;
        for (const auto& g : set_or(ctx, expand(ctx, x), expand(ctx, y))) {
            ConstraintFormula e = g.eta.conjoin(ov);
            if (e.is_satisfiable()) out.push_back(LiftedGraph{g.omega, e, g.psi});
        }
        return out;
    }
}

std::vector<VarId> free_union(const AnswerSet& s) {
    std::vector<VarId> out;
    for (const auto& g : s) out = set_union(out, g.free_vars());
    return out;
}

// Pieces of g outside every region in `others`.
void push_remainder(const LiftedGraph& g, const ConstraintFormula& qg, const std::vector<ConstraintFormula>& others,
                    AnswerSet& out) {
    std::vector<ConstraintFormula> pieces{qg};
    bool cut = false;
    for (const auto& qo : others) {
        std::vector<ConstraintFormula> next;
        for (const auto& p : pieces) {
            if (!p.conjoin(qo).is_satisfiable()) {
                next.push_back(p);
                continue;
            }
            cut = true;
            for (const auto& nu : qo.negate()) {
                ConstraintFormula q = p.conjoin(nu);
                if (q.is_satisfiable()) next.push_back(q);
            }
        }
        pieces = std::move(next);
    }
    if (!cut) {
        out.push_back(g);
        return;
    }
    for (const auto& p : pieces) {
        ConstraintFormula e = g.eta.conjoin(p);
        if (e.is_satisfiable()) out.push_back(LiftedGraph{g.omega, e, g.psi});
    }
}

}  // namespace

AnswerSet set_and(LiftedContext& ctx, const AnswerSet& a, const AnswerSet& b) {
    AnswerSet out;
    for (const auto& m : nonfalse(a)) {
        for (const auto& n : nonfalse(b)) {
            auto r = pair_and(ctx, m, n);
            out.insert(out.end(), r.begin(), r.end());
        }
    }
    return out;
}

AnswerSet set_or(LiftedContext& ctx, const AnswerSet& a, const AnswerSet& b) {
    AnswerSet s = nonfalse(a), t = nonfalse(b);
    if (s.empty()) return t;
    if (t.empty()) return s;
    const auto fs = free_union(s), ft = free_union(t);
    for (auto& m : s) m = rename_bound_away(ctx, m, ft);
    for (auto& n : t) n = rename_bound_away(ctx, n, fs);
    std::vector<ConstraintFormula> qs, qt;
    for (const auto& m : s) qs.push_back(m.free_projection());
    for (const auto& n : t) qt.push_back(n.free_projection());

    AnswerSet out;
    for (std::size_t i = 0; i < s.size(); ++i) push_remainder(s[i], qs[i], qt, out);
    for (std::size_t j = 0; j < t.size(); ++j) push_remainder(t[j], qt[j], qs, out);
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = 0; j < t.size(); ++j) {
            if (!qs[i].conjoin(qt[j]).is_satisfiable()) continue;
            auto r = pair_or_overlap(ctx, s[i], t[j]);
            out.insert(out.end(), r.begin(), r.end());
        }
    }
    return out;
}

AnswerSet l_and(LiftedContext& ctx, const LiftedGraph& a, const LiftedGraph& b) {
    AnswerSet r = set_and(ctx, AnswerSet{a}, AnswerSet{b});
    if (r.empty()) return {LiftedGraph::False()};
    return r;
}

AnswerSet l_or(LiftedContext& ctx, const LiftedGraph& a, const LiftedGraph& b) {
    AnswerSet r = set_or(ctx, AnswerSet{a}, AnswerSet{b});
    if (r.empty()) return {LiftedGraph::False()};
    return r;
}

LiftedGraph quantify(const LiftedGraph& g, VarId x) {
    if (g.is_false()) return g;
    if (!g.eta.has_var(x)) throw std::invalid_argument("quantify: variable not in constraint");
    if (g.is_bound(x)) throw std::invalid_argument("quantify: variable already quantified");
    return LiftedGraph{with(g.omega, x), g.eta, g.psi};
}

AnswerSet quantify(LiftedContext& ctx, const AnswerSet& s, VarId x) {
    AnswerSet acc;
    for (const auto& m : nonfalse(s)) {
        LiftedGraph g = m;
        if (!g.eta.has_var(x)) {
            g.eta = g.eta.with_var(x, ctx.var(x).domain);
            if (g.eta.is_false()) continue;
        }
        acc = set_or(ctx, acc, AnswerSet{quantify(g, x)});
    }
    return acc;
}

const LiftedGraph* select_member(const AnswerSet& s, const std::map<VarId, std::int64_t>& sigma) {
    const LiftedGraph* hit = nullptr;
    for (const auto& g : s) {
        if (g.is_false()) continue;
        const ConstraintFormula q = g.free_projection();
        Solution sol;
        for (VarId v : q.vars()) {
            auto it = sigma.find(v);
            if (it == sigma.end()) throw std::invalid_argument("select_member: partial assignment");
            sol.push_back(it->second);
        }
        if (!q.satisfied_by(sol)) continue;
        if (hit) throw std::logic_error("answer set members overlap");
        hit = &g;
    }
    return hit;
}

LiftedGraph substitute_all(LiftedContext& ctx, const LiftedGraph& g, const std::map<VarId, std::int64_t>& sigma) {
    LiftedGraph out = g;
    for (const auto& [v, k] : sigma) {
        if (out.is_false()) break;
        if (out.eta.has_var(v)) {
            const Interval d = out.eta.domain(v);
            if (k < d.lo || k > d.hi) return LiftedGraph::False();
            out = substitute(ctx, out, k, v);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Structure checks and views

namespace {

// Reachable internal nodes, parents before children.
std::vector<LId> topo_order(const LiftedContext& ctx, LId root) {
    std::vector<LId> post;
    std::unordered_set<LId> seen;
    std::function<void(LId)> go = [&](LId n) {
        if (LiftedContext::is_leaf(n) || !seen.insert(n).second) return;
        for (LId k : ctx.node(n).kids) go(k);
        post.push_back(n);
    };
    go(root);
    std::reverse(post.begin(), post.end());
    return post;
}

}  // namespace

bool check_well_structured(LiftedContext& ctx, const LiftedGraph& g) {
    if (g.is_false()) return true;
    const auto order = topo_order(ctx, g.psi);
    for (VarId x : g.omega) {
        std::vector<LId> xs;
        for (LId n : order) {
            if (ctx.node(n).term.var == x) xs.push_back(n);
        }
        if (xs.size() < 2) continue;
        // anc[n]: X-labeled nodes that are ancestors of n (n included)
        std::unordered_map<LId, std::vector<bool>> anc;
        for (LId n : order) anc[n].assign(xs.size(), false);
        for (LId n : order) {
            auto& a = anc[n];
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (xs[i] == n) a[i] = true;
            }
            for (LId k : ctx.node(n).kids) {
                if (LiftedContext::is_leaf(k)) continue;
                auto& b = anc[k];
                for (std::size_t i = 0; i < xs.size(); ++i) b[i] = b[i] || a[i];
            }
        }
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (std::size_t j = i + 1; j < xs.size(); ++j) {
                const auto& a = anc[xs[i]];
                const auto& b = anc[xs[j]];
                bool common = false;
                for (std::size_t k = 0; k < xs.size() && !common; ++k) common = a[k] && b[k];
                if (!common) return false;
            }
        }
    }
    return true;
}

std::optional<std::string> validate(LiftedContext& ctx, const LiftedGraph& g) {
    if (g.is_false()) {
        if (!g.omega.empty() || g.psi != kL0) return "FALSE graph with quantified variables or non-zero DAG";
        return std::nullopt;
    }
    if (!std::is_sorted(g.omega.begin(), g.omega.end())) return "quantified variables not sorted";
    for (VarId v : g.omega) {
        if (!g.eta.has_var(v)) return "quantified variable " + ctx.name(v) + " missing from constraint";
    }
    for (LId n : topo_order(ctx, g.psi)) {
        const LNode& node = ctx.node(n);
        if (node.sw < 0 || static_cast<std::size_t>(node.sw) >= ctx.switches().size()) return "unknown switch";
        if (node.kids.size() != ctx.switches().outcomes(node.sw).size()) {
            return "node " + ctx.label_text(node) + " has wrong child count";
        }
        if (node.term.var && !g.eta.has_var(*node.term.var)) {
            return "variable " + ctx.name(*node.term.var) + " of " + ctx.label_text(node) + " missing from constraint";
        }
        if (std::all_of(node.kids.begin(), node.kids.end(), [&](LId k) { return k == node.kids.front(); })) {
            return "node " + ctx.label_text(node) + " is redundant";
        }
        for (LId k : node.kids) {
            if (LiftedContext::is_leaf(k)) continue;
            const LNode& kid = ctx.node(k);
            if (compare_nodes(g.eta, node.sw, node.term, kid.sw, kid.term) != NodeOrder::LT) {
                return "edge " + ctx.label_text(node) + " -> " + ctx.label_text(kid) + " violates the node order";
            }
        }
    }
    return std::nullopt;
}

std::vector<LiftedExplanation> lifted_explanations(const LiftedContext& ctx, LId psi, std::size_t cap) {
    std::vector<LiftedExplanation> out;
    LiftedExplanation path;
    std::function<void(LId)> go = [&](LId n) {
        if (n == kL0) return;
        if (n == kL1) {
            if (out.size() >= cap) throw LiftError("explanation count exceeds cap");
            out.push_back(path);
            return;
        }
        const LNode& node = ctx.node(n);
        for (std::size_t i = 0; i < node.kids.size(); ++i) {
            path.push_back(Literal{node.sw, node.term.as_term(), static_cast<int>(i)});
            go(node.kids[i]);
            path.pop_back();
        }
    };
    go(psi);
    return out;
}

std::string explanation_text(const LiftedContext& ctx, const LiftedExplanation& e) {
    std::ostringstream os;
    os << "{";
    for (std::size_t i = 0; i < e.size(); ++i) {
        const auto& l = e[i];
        std::string t = l.term.var ? ctx.name(*l.term.var) : std::to_string(l.term.offset);
        if (l.term.var && l.term.offset > 0) t += "+" + std::to_string(l.term.offset);
        if (l.term.var && l.term.offset < 0) t += std::to_string(l.term.offset);
        os << (i ? ", " : "") << ctx.switches().name(l.sw) << "[" << t
           << "]=" << ctx.switches().outcomes(l.sw)[static_cast<std::size_t>(l.outcome)].text();
    }
    os << "}";
    return os.str();
}

std::size_t node_count(const LiftedContext& ctx, const LiftedGraph& g) { return ctx.reachable(g.psi); }

std::string header_text(const LiftedContext& ctx, const LiftedGraph& g) {
    if (g.is_false()) return "false";
    std::string s;
    for (VarId v : g.omega) s += "∃" + ctx.name(v) + ".";
    if (!s.empty()) s += " ";
    return s + g.eta.to_string(ctx.namer(), false);
}

std::string to_dot(const LiftedContext& ctx, const LiftedGraph& g, const std::string& name) {
    auto esc = [](const std::string& s) {
        std::string o;
        for (char c : s) {
            if (c == '"' || c == '\\') o += '\\';
            o += c;
        }
        return o;
    };
    std::ostringstream os;
    os << "digraph " << name << " {\n";
    os << "  header [shape=box,label=\"" << esc(header_text(ctx, g)) << "\"];\n";
    const auto order = topo_order(ctx, g.psi);
    os << "  n0 [shape=circle,label=\"0\"];\n";
    if (g.psi != kL0) os << "  n1 [shape=circle,label=\"1\"];\n";
    for (LId n : order) {
        os << "  n" << n << " [shape=box,style=rounded,label=\"" << esc(ctx.label_text(ctx.node(n))) << "\"];\n";
    }
    os << "  header -> n" << g.psi << " [style=invis];\n";
    for (LId n : order) {
        const LNode& node = ctx.node(n);
        for (std::size_t i = 0; i < node.kids.size(); ++i) {
            os << "  n" << n << " -> n" << node.kids[i] << " [label=\""
               << esc(ctx.switches().outcomes(node.sw)[i].text()) << "\"];\n";
        }
    }
    os << "}\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Evaluation plan and grounding

Interval EvalPlan::scan_range(const Family& f, const std::map<VarId, std::int64_t>& sigma) const {
    Interval r{f.lo, f.hi};
    for (const auto& [p, k] : f.lower) r.lo = std::max(r.lo, sigma.at(p) + k);
    for (const auto& [p, k] : f.upper) r.hi = std::min(r.hi, sigma.at(p) + k);
    return r;
}

EvalPlan build_plan(LiftedContext& ctx, const LiftedGraph& g) {
    EvalPlan plan;
    if (g.is_false() || g.psi == kL0) return plan;
    if (!g.is_closed()) throw std::invalid_argument("evaluation requires a closed graph");
    if (g.psi == kL1) {
        plan.root = Family::kLeaf1;
        return plan;
    }
    const ConstraintFormula& eta = g.eta;
    auto related = [&](VarId p, VarId v) {
        return eta.bound(p, v) < eta.box_bound(p, v) || eta.bound(v, p) < eta.box_bound(v, p);
    };
    std::unordered_map<LId, std::vector<VarId>> relevant;
    auto relevant_of = [&](LId n) -> const std::vector<VarId>& {
        if (auto it = relevant.find(n); it != relevant.end()) return it->second;
        const auto& sub = ctx.vars_in(n);
        std::vector<VarId> r = sub;
        for (VarId p : eta.vars()) {
            if (contains(sub, p)) continue;
            if (std::any_of(sub.begin(), sub.end(), [&](VarId v) { return related(p, v); })) r = with(r, p);
        }
        return relevant.emplace(n, std::move(r)).first->second;
    };

    std::map<std::pair<LId, std::vector<VarId>>, int> index;
    std::function<int(LId, const std::vector<VarId>&)> get = [&](LId n, const std::vector<VarId>& assigned) -> int {
        if (n == kL0) return Family::kLeaf0;
        if (n == kL1) return Family::kLeaf1;
        std::vector<VarId> params;
        const auto& rel = relevant_of(n);
        std::set_intersection(assigned.begin(), assigned.end(), rel.begin(), rel.end(), std::back_inserter(params));
        auto key = std::make_pair(n, params);
        if (auto it = index.find(key); it != index.end()) return it->second;

        Family f;
        f.node = n;
        f.params = params;
        const LNode node = ctx.node(n);
        std::vector<VarId> child_assigned = params;
        if (node.term.var && !contains(params, *node.term.var)) {
            const VarId t = *node.term.var;
            f.scan = true;
            f.var = t;
            f.lo = -eta.bound(std::nullopt, t);
            f.hi = eta.bound(t, std::nullopt);
            for (VarId p : params) {
                const auto el = eta.bound(p, t);  // t >= p - el
                if (el < eta.box_bound(p, t)) f.lower.emplace_back(p, -el);
                const auto eu = eta.bound(t, p);  // t <= p + eu
                if (eu < eta.box_bound(t, p)) f.upper.emplace_back(p, eu);
            }
            child_assigned = with(params, t);
        }
        std::vector<VarId> hp;
        for (const auto& [p, k] : f.upper) hp = with(hp, p);
        for (LId k : node.kids) {
            const int kf = get(k, child_assigned);
            f.kids.push_back(kf);
        }
        // read kid params only after all recursive insertions are done
        for (int kf : f.kids) {
            if (kf >= 0) hp = set_union(hp, plan.families[static_cast<std::size_t>(kf)].params);
        }
        if (f.scan) hp = without(hp, f.var);
        f.h_params = hp;
        const int id = static_cast<int>(plan.families.size());
        plan.families.push_back(std::move(f));
        index.emplace(std::move(key), id);
        return id;
    };
    plan.root = get(g.psi, {});
    return plan;
}

namespace {

class Grounder {
  public:
    Grounder(LiftedContext& ctx, const EvalPlan& plan, GroundEngine& engine)
        : ctx_(ctx), plan_(plan), engine_(engine) {}

    NodeId f(int fam, const std::map<VarId, std::int64_t>& sigma) {
        if (fam == Family::kLeaf0) return kZero;
        if (fam == Family::kLeaf1) return kOne;
        const Family& F = plan_.families[static_cast<std::size_t>(fam)];
        std::vector<std::int64_t> key{fam};
        for (VarId p : F.params) key.push_back(sigma.at(p));
        if (auto it = fmemo_.find(key); it != fmemo_.end()) return it->second;
        NodeId out;
        if (!F.scan) {
            const LNode& node = ctx_.node(F.node);
            const std::int64_t inst = node.term.var ? sigma.at(*node.term.var) : node.term.value;
            out = step(F, sigma, inst);
        } else {
            const Interval r = plan_.scan_range(F, sigma);
            out = r.empty() ? kZero : scan(fam, F, sigma, r.lo, r.hi);
        }
        fmemo_.emplace(std::move(key), out);
        return out;
    }

  private:
    // (s, inst)[children grounded under sigma]
    NodeId step(const Family& F, const std::map<VarId, std::int64_t>& sigma, std::int64_t inst) {
        const LNode& node = ctx_.node(F.node);
        std::vector<NodeId> kids;
        kids.reserve(F.kids.size());
        for (int k : F.kids) kids.push_back(f(k, sigma));
        return engine_.mk(node.sw, inst, std::move(kids));
    }

    // D(c) = step(c) OR D(c+1), D(u) = step(u); evaluated upward then folded back.
    NodeId scan(int fam, const Family& F, std::map<VarId, std::int64_t> sigma, std::int64_t l, std::int64_t u) {
        std::vector<std::int64_t> base{fam, u};
        for (VarId p : F.h_params) base.push_back(sigma.at(p));
        auto key_at = [&](std::int64_t c) {
            auto k = base;
            k.push_back(c);
            return k;
        };
        std::vector<std::int64_t> pending;
        NodeId acc = kZero;
        std::int64_t c = l;
        for (;; ++c) {
            if (auto it = dmemo_.find(key_at(c)); it != dmemo_.end()) {
                acc = it->second;
                break;
            }
            pending.push_back(c);
            if (c == u) break;
        }
        for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
            sigma[F.var] = *it;
            acc = engine_.g_or(step(F, sigma, *it), acc);
            dmemo_.emplace(key_at(*it), acc);
        }
        return acc;
    }

    LiftedContext& ctx_;
    const EvalPlan& plan_;
    GroundEngine& engine_;
    std::unordered_map<std::vector<std::int64_t>, NodeId, VecHash> fmemo_, dmemo_;
};

// Ground node from a DAG whose labels are all constants, built with apply
// so that no ordering assumption is made.
NodeId constant_dag(const LiftedContext& ctx, LId n, GroundEngine& e, std::unordered_map<LId, NodeId>& memo) {
    if (n == kL0) return kZero;
    if (n == kL1) return kOne;
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    const LNode& node = ctx.node(n);
    if (node.term.var) throw std::logic_error("unsubstituted variable in grounding");
    NodeId acc = kZero;
    for (std::size_t i = 0; i < node.kids.size(); ++i) {
        const NodeId k = constant_dag(ctx, node.kids[i], e, memo);
        if (k == kZero) continue;
        acc = e.g_or(acc, e.g_and(e.rv(node.sw, node.term.value, static_cast<int>(i)), k));
    }
    memo.emplace(n, acc);
    return acc;
}

}  // namespace

NodeId ground(LiftedContext& ctx, const LiftedGraph& g, GroundEngine& engine) {
    if (!g.is_false() && !g.is_closed()) throw std::invalid_argument("ground: graph has free variables");
    const EvalPlan plan = build_plan(ctx, g);
    Grounder gr(ctx, plan, engine);
    return gr.f(plan.root, {});
}

NodeId ground_by_enumeration(LiftedContext& ctx, const LiftedGraph& g, GroundEngine& engine) {
    if (g.is_false()) return kZero;
    if (!g.is_closed()) throw std::invalid_argument("ground: graph has free variables");
    NodeId acc = kZero;
    const auto vars = g.eta.vars();
    g.eta.for_each_solution([&](const Solution& s) {
        LId psi = g.psi;
        for (std::size_t i = 0; i < vars.size(); ++i) psi = ctx.relabel(psi, vars[i], LTerm::constant(s[i]));
        std::unordered_map<LId, NodeId> memo;
        acc = engine.g_or(acc, constant_dag(ctx, psi, engine, memo));
    });
    return acc;
}

}  // namespace liftex
