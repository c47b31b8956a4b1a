// SPDX-License-Identifier: Apache-2.0
#include "liftex/inference.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_set>

namespace liftex {

namespace {

bool mentions(LiftedContext& ctx, LId n, VarId x) {
    const auto& vs = ctx.vars_in(n);
    return std::binary_search(vs.begin(), vs.end(), x);
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

std::vector<LId> frontier(LiftedContext& ctx, LId root, VarId x) {
    std::vector<LId> out;
    std::unordered_set<LId> seen;
    std::function<void(LId)> go = [&](LId n) {
        if (n == kL0 || !seen.insert(n).second) return;
        if (!mentions(ctx, n, x)) {
            out.push_back(n);
            return;
        }
        for (LId k : ctx.node(n).kids) go(k);
    };
    go(root);
    return out;
}

std::vector<LId> frontier(LiftedContext& ctx, const LiftedGraph& g, VarId x) {
    if (!g.is_bound(x)) throw std::invalid_argument("frontier: variable is not quantified");
    return frontier(ctx, g.psi, x);
}

LId hat_tree(LiftedContext& ctx, LId root, VarId x) {
    std::unordered_map<LId, LId> memo;
    std::function<LId(LId)> go = [&](LId n) -> LId {
        if (n == kL0) return kL0;
        if (!mentions(ctx, n, x)) return kL1;
        if (auto it = memo.find(n); it != memo.end()) return it->second;
        const LNode node = ctx.node(n);
        std::vector<LId> kids;
        for (LId k : node.kids) kids.push_back(go(k));
        const LId out = ctx.mk(node.sw, node.term, std::move(kids));
        memo.emplace(n, out);
        return out;
    };
    return go(root);
}

double hat_prob(const LiftedContext& ctx, LId hat, const SwitchTable& dist) {
    std::unordered_map<LId, double> memo;
    std::function<double(LId)> go = [&](LId n) -> double {
        if (n == kL0) return 0.0;
        if (n == kL1) return 1.0;
        if (auto it = memo.find(n); it != memo.end()) return it->second;
        const LNode& node = ctx.node(n);
        const auto& p = dist.probs(node.sw);
        if (p.size() != node.kids.size()) throw std::invalid_argument("distribution does not match switch");
        double s = 0;
        for (std::size_t i = 0; i < node.kids.size(); ++i) s += p[i] * go(node.kids[i]);
        memo.emplace(n, s);
        return s;
    };
    return go(hat);
}

bool SubsumptionReport::all() const {
    return std::all_of(verdict.begin(), verdict.end(), [](const auto& kv) { return kv.second; });
}

namespace {

// Applies a variable -> (variable + offset) mapping to the literal terms.
LiftedExplanation map_terms(const LiftedExplanation& e, const std::map<VarId, Term>& m) {
    LiftedExplanation out;
    for (Literal l : e) {
        if (l.term.var) {
            if (auto it = m.find(*l.term.var); it != m.end()) {
                l.term = Term::of(*it->second.var, it->second.offset + l.term.offset);
            }
        }
        out.push_back(l);
    }
    return out;
}

bool subset(const LiftedExplanation& a, const LiftedExplanation& b) {
    return std::all_of(a.begin(), a.end(), [&](const Literal& l) { return std::find(b.begin(), b.end(), l) != b.end(); });
}

// Failure reason for one X-labeled node, or empty when it passes.
std::string check_node(LiftedContext& ctx, const LiftedGraph& g, LId n, VarId x, std::size_t cap) {
    std::map<VarId, Term> s1, s2;
    for (VarId y : g.eta.vars()) {
        if (y == x) continue;
        const auto e = g.eta.bound(x, y);  // y >= x - e
        if (e < g.eta.box_bound(x, y)) s1[y] = Term::of(x, -e);
    }
    s2[x] = Term::of(x, 1);
    std::vector<LiftedExplanation> e2s;
    try {
        e2s = lifted_explanations(ctx, n, cap);
    } catch (const LiftError&) {
        return "too many explanations to check";
    }
    for (auto& e : e2s) e = map_terms(e, s2);
    for (LId phi : frontier(ctx, n, x)) {
        std::vector<LiftedExplanation> e1s;
        try {
            e1s = lifted_explanations(ctx, phi, cap);
        } catch (const LiftError&) {
            return "too many explanations to check";
        }
        for (auto& e : e1s) e = map_terms(e, s1);
        for (const auto& e2 : e2s) {
            const bool ok = std::any_of(e1s.begin(), e1s.end(), [&](const auto& e1) { return subset(e1, e2); });
            if (!ok) {
                return "no explanation of frontier subtree " + ctx.label_text(ctx.node(phi)) +
                       " is subsumed by " + explanation_text(ctx, e2);
            }
        }
    }
    return {};
}

}  // namespace

SubsumptionReport check_frontier_subsumption(LiftedContext& ctx, const LiftedGraph& g, std::size_t cap) {
    SubsumptionReport r;
    if (g.is_false()) return r;
    std::vector<LId> nodes;
    std::unordered_set<LId> seen;
    std::function<void(LId)> go = [&](LId n) {
        if (LiftedContext::is_leaf(n) || !seen.insert(n).second) return;
        nodes.push_back(n);
        for (LId k : ctx.node(n).kids) go(k);
    };
    go(g.psi);
    for (VarId x : g.omega) {
        r.verdict[x] = true;
        for (LId n : nodes) {
            if (ctx.node(n).term.var != x) continue;
            const std::string why = check_node(ctx, g, n, x, cap);
            if (!why.empty()) {
                r.verdict[x] = false;
                r.reason[x] = why;
                break;
            }
        }
    }
    return r;
}

// ---------------------------------------------------------------------------

LiftedEvaluator::LiftedEvaluator(LiftedContext& ctx, const LiftedGraph& g, const SwitchTable& dist)
    : ctx_(ctx), graph_(g), dist_(dist) {
    if (!g.is_false() && !g.is_closed()) throw NotLiftable("graph has free variables");
    if (!check_well_structured(ctx, g)) throw NotLiftable("graph is not well-structured");
    report_ = check_frontier_subsumption(ctx, g);
    for (const auto& [x, ok] : report_.verdict) {
        if (!ok) throw NotLiftable("frontier subsumption fails for " + ctx.name(x) + ": " + report_.reason.at(x));
    }
    plan_ = build_plan(ctx, g);
}

double LiftedEvaluator::probability() { return f(plan_.root, {}); }

int LiftedEvaluator::family_of(LId node) const {
    for (std::size_t i = 0; i < plan_.families.size(); ++i) {
        if (plan_.families[i].node == node) return static_cast<int>(i);
    }
    return -1;
}

double LiftedEvaluator::fhat(int family) {
    if (auto it = fhat_.find(family); it != fhat_.end()) return it->second;
    const Family& F = plan_.families.at(static_cast<std::size_t>(family));
    const double v = F.scan ? hat_prob(ctx_, hat_tree(ctx_, F.node, F.var), dist_) : 0.0;
    fhat_.emplace(family, v);
    return v;
}

double LiftedEvaluator::g(const Family& F, const std::map<VarId, std::int64_t>& sigma) {
    const auto& p = dist_.probs(ctx_.node(F.node).sw);
    double s = 0;
    for (std::size_t i = 0; i < F.kids.size(); ++i) {
        if (F.kids[i] == Family::kLeaf0) continue;
        s += p[i] * f(F.kids[i], sigma);
    }
    return s;
}

double LiftedEvaluator::f(int family, const std::map<VarId, std::int64_t>& sigma) {
    if (family == Family::kLeaf0) return 0.0;
    if (family == Family::kLeaf1) return 1.0;
    const Family& F = plan_.families.at(static_cast<std::size_t>(family));
    std::vector<std::int64_t> key{family};
    for (VarId p : F.params) key.push_back(sigma.at(p));
    if (auto it = fmemo_.find(key); it != fmemo_.end()) return it->second;
    double v;
    if (!F.scan) {
        v = g(F, sigma);
    } else {
        const Interval r = plan_.scan_range(F, sigma);
        v = r.empty() ? 0.0 : h(family, sigma, r.lo);
    }
    fmemo_.emplace(std::move(key), v);
    return v;
}

double LiftedEvaluator::h(int family, const std::map<VarId, std::int64_t>& sigma_in, std::int64_t c0) {
    const Family& F = plan_.families.at(static_cast<std::size_t>(family));
    if (!F.scan) throw std::invalid_argument("h: family does not scan a variable");
    std::map<VarId, std::int64_t> sigma;
    for (VarId p : F.h_params) sigma[p] = sigma_in.at(p);
    std::int64_t u = F.hi;
    for (const auto& [p, k] : F.upper) u = std::min(u, sigma.at(p) + k);
    if (c0 > u) throw std::invalid_argument("h: value above the scan range");
    std::vector<std::int64_t> base{family};
    for (VarId p : F.h_params) base.push_back(sigma.at(p));
    auto key_at = [&](std::int64_t c) {
        auto k = base;
        k.push_back(c);
        return k;
    };
    const double q = 1.0 - fhat(family);
    std::vector<std::int64_t> pending;
    double acc = 0;
    bool have = false;
    for (std::int64_t c = c0;; ++c) {
        if (auto it = hmemo_.find(key_at(c)); it != hmemo_.end()) {
            acc = it->second;
            have = true;
            break;
        }
        pending.push_back(c);
        if (c == u) break;
    }
    for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
        sigma[F.var] = *it;
        const double gv = g(F, sigma);
        acc = have ? gv + q * acc : gv;
        have = true;
        hmemo_.emplace(key_at(*it), acc);
    }
    return acc;
}

LiftedResult lifted_prob(LiftedContext& ctx, const LiftedGraph& g, const SwitchTable& dist) {
    LiftedEvaluator ev(ctx, g, dist);
    const double p = ev.probability();
    return LiftedResult{p, ev.cells()};
}

// ---------------------------------------------------------------------------

std::string emit_recurrences(LiftedContext& ctx, const LiftedGraph& g, const SwitchTable& dist) {
    if (!g.is_false() && !g.is_closed()) throw std::invalid_argument("recurrences require a closed graph");
    const EvalPlan plan = build_plan(ctx, g);
    if (plan.root == Family::kLeaf0) return "f = 0\n";
    if (plan.root == Family::kLeaf1) return "f = 1\n";

    // number families in preorder from the root
    std::map<int, int> number;
    std::vector<int> order;
    std::function<void(int)> visit = [&](int fam) {
        if (fam < 0 || number.count(fam)) return;
        number[fam] = static_cast<int>(order.size()) + 1;
        order.push_back(fam);
        for (int k : plan.families[static_cast<std::size_t>(fam)].kids) visit(k);
    };
    visit(plan.root);

    auto args = [&](const std::vector<VarId>& vs) {
        if (vs.empty()) return std::string{};
        std::string s = "(";
        for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? ", " : "") + ctx.name(vs[i]);
        return s + ")";
    };
    auto call = [&](int fam) -> std::string {
        if (fam == Family::kLeaf0) return "0";
        if (fam == Family::kLeaf1) return "1";
        return "f" + std::to_string(number.at(fam)) + args(plan.families[static_cast<std::size_t>(fam)].params);
    };
    auto gsum = [&](const Family& F) {
        const auto& p = dist.probs(ctx.node(F.node).sw);
        std::string s;
        for (std::size_t i = 0; i < F.kids.size(); ++i) {
            if (F.kids[i] == Family::kLeaf0) continue;
            s += (s.empty() ? "" : " + ") + num(p[i]) + " * " + call(F.kids[i]);
        }
        return s.empty() ? std::string("0") : s;
    };
    auto offset = [&](VarId p, std::int64_t k) {
        std::string s = ctx.name(p);
        if (k > 0) s += "+" + std::to_string(k);
        if (k < 0) s += std::to_string(k);
        return s;
    };

    std::ostringstream os;
    os << "% " << header_text(ctx, g) << "\n";
    const auto rep = check_frontier_subsumption(ctx, g);
    for (const auto& [x, ok] : rep.verdict) {
        if (!ok) os << "% frontier subsumption fails for " << ctx.name(x) << "; the h equations below do not hold\n";
    }
    for (int fam : order) {
        const Family& F = plan.families[static_cast<std::size_t>(fam)];
        const std::string k = std::to_string(number.at(fam));
        os << "% node " << k << ": " << ctx.label_text(ctx.node(F.node)) << "\n";
        if (!F.scan) {
            os << "f" << k << args(F.params) << " = " << gsum(F) << "\n";
            continue;
        }
        std::vector<std::string> lo{std::to_string(F.lo)}, hi{std::to_string(F.hi)};
        for (const auto& [p, c] : F.lower) lo.push_back(offset(p, c));
        for (const auto& [p, c] : F.upper) hi.push_back(offset(p, c));
        auto bound_text = [](const char* fn, const std::vector<std::string>& xs) {
            if (xs.size() == 1) return xs.front();
            std::string s = std::string(fn) + "(";
            for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + xs[i];
            return s + ")";
        };
        std::vector<VarId> kid_params;
        for (int kf : F.kids) {
            if (kf < 0) continue;
            for (VarId p : plan.families[static_cast<std::size_t>(kf)].params) {
                if (std::find(kid_params.begin(), kid_params.end(), p) == kid_params.end()) kid_params.push_back(p);
            }
        }
        std::sort(kid_params.begin(), kid_params.end());
        std::vector<VarId> hargs = F.h_params;
        hargs.push_back(F.var);
        const std::string t = ctx.name(F.var);
        std::string hnext = "h" + k + "(";
        for (VarId p : F.h_params) hnext += ctx.name(p) + ", ";
        hnext += t + "+1)";
        os << "f" << k << args(F.params) << " = h" << k << "(l" << k << ") if l" << k << " <= u" << k
           << ", else 0\n";
        os << "  l" << k << " = " << bound_text("max", lo) << ", u" << k << " = " << bound_text("min", hi) << "\n";
        os << "h" << k << args(hargs) << " = g" << k << args(kid_params) << " + (1 - fhat" << k << ") * " << hnext
           << "   if " << t << " < u" << k << "\n";
        os << "h" << k << args(hargs) << " = g" << k << args(kid_params) << "   if " << t << " = u" << k << "\n";
        os << "g" << k << args(kid_params) << " = " << gsum(F) << "\n";
        os << "fhat" << k << " = " << num(hat_prob(ctx, hat_tree(ctx, F.node, F.var), dist)) << "\n";
    }
    return os.str();
}

}  // namespace liftex
