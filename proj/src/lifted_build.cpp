// SPDX-License-Identifier: Apache-2.0
//
// Lifted construction following clause structure: conjunction over the
// body, quantification of clause-local variables, disjunction over clauses.
#include <algorithm>
#include <set>

#include "liftex/lifted.hpp"

namespace liftex {

namespace {

class Builder {
  public:
    Builder(LiftedContext& ctx, const TypedProgram& tp, const PopulationMap& pops)
        : ctx_(ctx), tp_(tp), pops_(pops) {}

    const std::vector<VarId>& params(const std::string& key) {
        predicate(key);
        return params_.at(key);
    }

    const AnswerSet& predicate(const std::string& key) {
        if (auto it = answers_.find(key); it != answers_.end()) return it->second;
        auto pt = tp_.types.param_types.find(key);
        if (pt == tp_.types.param_types.end()) throw LiftError("unknown predicate " + key);
        std::vector<VarId> ps;
        for (std::size_t j = 0; j < pt->second.size(); ++j) {
            const std::string& pop = pt->second[j];
            if (pop.empty()) throw LiftError("argument " + std::to_string(j + 1) + " of " + key + " is not an instance");
            ps.push_back(ctx_.new_var(param_name(key, j), pops_.range(pop), pop));
        }
        params_[key] = ps;
        AnswerSet acc;
        for (std::size_t ci = 0; ci < tp_.program.clauses.size(); ++ci) {
            const Clause& c = tp_.program.clauses[ci];
            if (c.head.key() != key) continue;
            acc = set_or(ctx_, acc, clause(c, ci, ps));
        }
        return answers_.emplace(key, std::move(acc)).first->second;
    }

  private:
    using Env = std::map<std::string, VarId>;
    using Outcomes = std::map<std::string, PTerm>;

    std::string param_name(const std::string& key, std::size_t j) const {
        for (const auto& c : tp_.program.clauses) {
            if (c.head.key() == key && c.head.args[j].is_var()) return c.head.args[j].name;
        }
        return "A" + std::to_string(j + 1);
    }

    std::int64_t element_value(const PTerm& t) const {
        if (t.kind == PTerm::Kind::Atom) {
            auto it = pops_.constants.find(t.name);
            if (it != pops_.constants.end()) return it->second;
        }
        throw LiftError("term " + t.text() + " is not an instance");
    }

    AnswerSet clause(const Clause& c, std::size_t ci, const std::vector<VarId>& ps) {
        Env env;
        AnswerSet s{true_graph(ctx_, ps)};
        for (std::size_t j = 0; j < c.head.args.size(); ++j) {
            const PTerm& a = c.head.args[j];
            if (a.is_var()) {
                auto it = env.find(a.name);
                if (it == env.end()) {
                    env.emplace(a.name, ps[j]);
                } else {
                    s = set_and(ctx_, s, {constraint_graph(ctx_, {Rel::EQ, Term::of(ps[j]), Term::of(it->second)})});
                }
            } else {
                s = set_and(ctx_, s, {constraint_graph(ctx_, {Rel::EQ, Term::of(ps[j]), Term::constant(element_value(a))})});
            }
        }
        std::vector<VarId> locals;
        for (const auto& [name, pop] : tp_.types.var_types.at(ci)) {
            if (env.count(name)) continue;
            const VarId v = ctx_.new_var(name, pops_.range(pop), pop);
            env.emplace(name, v);
            locals.push_back(v);
        }
        AnswerSet r = body(c, 0, s, env, {});
        for (VarId v : locals) r = quantify(ctx_, r, v);
        return r;
    }

    Term instance_term(const PTerm& t, const Env& env) const {
        if (t.is_var()) {
            auto it = env.find(t.name);
            if (it == env.end()) throw LiftError("variable " + t.name + " is not an instance");
            return Term::of(it->second);
        }
        return Term::constant(element_value(t));
    }

    AnswerSet body(const Clause& c, std::size_t i, AnswerSet s, const Env& env, Outcomes outs) {
        for (; i < c.body.size(); ++i) {
            if (s.empty()) return s;
            const Goal& goal = c.body[i];
            if (const auto* in = std::get_if<InGoal>(&goal)) {
                s = set_and(ctx_, s, {true_graph(ctx_, {env.at(in->var)})});
            } else if (const auto* m = std::get_if<MswGoal>(&goal)) {
                const int sw = ctx_.switches().index(m->sw);
                const Term it = instance_term(m->instance, env);
                const LTerm t = it.var ? LTerm::of(*it.var) : LTerm::constant(it.offset);
                if (m->value.is_var() && !outs.count(m->value.name)) {
                    // unbound outcome: branch the rest of the body per outcome
                    AnswerSet acc;
                    const auto n = static_cast<int>(ctx_.switches().outcomes(sw).size());
                    for (int o = 0; o < n; ++o) {
                        Outcomes o2 = outs;
                        o2[m->value.name] = ctx_.switches().outcomes(sw)[static_cast<std::size_t>(o)];
                        AnswerSet branch = set_and(ctx_, s, {lifted_rv(ctx_, sw, t, o)});
                        acc = set_or(ctx_, acc, body(c, i + 1, branch, env, o2));
                    }
                    return acc;
                }
                const PTerm v = m->value.is_var() ? outs.at(m->value.name) : m->value;
                const auto& os = ctx_.switches().outcomes(sw);
                const auto pos = std::find(os.begin(), os.end(), v);
                if (pos == os.end()) return {};  // value outside the switch's outcomes: the goal fails
                s = set_and(ctx_, s, {lifted_rv(ctx_, sw, t, static_cast<int>(pos - os.begin()))});
            } else if (const auto* k = std::get_if<ConstraintGoal>(&goal)) {
                if (k->op == CmpOp::NE) throw LiftError("disequality must be eliminated before lifting");
                const Rel rel = k->op == CmpOp::LT ? Rel::LT : Rel::EQ;
                s = set_and(ctx_, s,
                            {constraint_graph(ctx_, {rel, instance_term(k->lhs, env), instance_term(k->rhs, env)})});
            } else {
                const auto& u = std::get<UserGoal>(goal);
                const std::string key = u.atom.key();
                const AnswerSet callee = predicate(key);
                const std::vector<VarId> ps = params_.at(key);
                AnswerSet bound;
                for (const auto& m0 : callee) {
                    LiftedGraph g = m0;
                    std::map<VarId, std::int64_t> consts;
                    for (std::size_t j = 0; j < ps.size(); ++j) {
                        const Term a = instance_term(u.atom.args[j], env);
                        if (a.var) {
                            g = rename_var(ctx_, g, ps[j], *a.var);
                        } else {
                            consts[ps[j]] = a.offset;
                        }
                    }
                    g = substitute_all(ctx_, g, consts);
                    if (!g.is_false()) bound.push_back(g);
                }
                s = set_and(ctx_, s, bound);
            }
        }
        return s;
    }

    LiftedContext& ctx_;
    const TypedProgram& tp_;
    const PopulationMap& pops_;
    std::map<std::string, AnswerSet> answers_;
    std::map<std::string, std::vector<VarId>> params_;
};

}  // namespace

LiftedGraph lifted_query(LiftedContext& ctx, const TypedProgram& tp, const PopulationMap& pops, const PAtom& query) {
    Builder b(ctx, tp, pops);
    const std::string key = query.key();
    AnswerSet s = b.predicate(key);
    const std::vector<VarId> ps = b.params(key);
    std::map<VarId, std::int64_t> sigma;
    for (std::size_t j = 0; j < ps.size(); ++j) {
        const PTerm& a = query.args[j];
        if (a.is_var()) throw LiftError("query argument " + a.text() + " is not ground");
        auto it = pops.constants.find(a.kind == PTerm::Kind::Atom ? a.name : std::string{});
        if (it == pops.constants.end()) throw LiftError("query argument " + a.text() + " is not an instance");
        sigma[ps[j]] = it->second;
    }
    AnswerSet closed;
    for (const auto& m : s) {
        LiftedGraph g = substitute_all(ctx, m, sigma);
        if (!g.is_false() && g.psi != kL0) closed.push_back(g);
    }
    if (closed.empty()) return LiftedGraph::False();
    if (closed.size() > 1) throw LiftError("query answer set did not reduce to a single graph");
    if (!closed.front().is_closed()) throw LiftError("query graph has free variables");
    return closed.front();
}

}  // namespace liftex
