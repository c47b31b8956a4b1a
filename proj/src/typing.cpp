// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <functional>
#include <set>

#include "liftex/program.hpp"

namespace liftex {

namespace {

const std::string kUntyped = "#untyped";

// Union-find over type slots; a class may carry one population label.
class TypeSolver {
  public:
    int slot(const std::string& key) {
        auto [it, inserted] = ids_.try_emplace(key, static_cast<int>(parent_.size()));
        if (inserted) {
            parent_.push_back(it->second);
            label_.emplace_back();
        }
        return it->second;
    }

    int fresh(std::optional<std::string> label) {
        parent_.push_back(static_cast<int>(parent_.size()));
        label_.push_back(std::move(label));
        return parent_.back();
    }

    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    // returns the conflicting pair on failure
    std::optional<std::pair<std::string, std::string>> unify(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return std::nullopt;
        if (label_[a] && label_[b] && *label_[a] != *label_[b]) {
            return std::make_pair(*label_[a], *label_[b]);
        }
        if (!label_[b]) label_[b] = label_[a];
        parent_[a] = b;
        return std::nullopt;
    }

    std::optional<std::pair<std::string, std::string>> assign(int a, const std::string& pop) {
        return unify(a, fresh(pop));
    }

    std::optional<std::string> label(int x) { return label_[find(x)]; }

    std::optional<std::string> label_of(const std::string& key) {
        auto it = ids_.find(key);
        if (it == ids_.end()) return std::nullopt;
        return label(it->second);
    }

  private:
    std::map<std::string, int> ids_;
    std::vector<int> parent_;
    std::vector<std::optional<std::string>> label_;
};

std::string show(const std::string& label) { return label == kUntyped ? "a non-instance term" : label; }

bool mentions(const Goal& g, const std::string& var) {
    auto is = [&](const PTerm& t) { return t.is_var() && t.name == var; };
    if (const auto* u = std::get_if<UserGoal>(&g)) {
        return std::any_of(u->atom.args.begin(), u->atom.args.end(), is);
    }
    if (const auto* m = std::get_if<MswGoal>(&g)) return is(m->instance) || is(m->value);
    if (const auto* i = std::get_if<InGoal>(&g)) return i->var == var;
    const auto& c = std::get<ConstraintGoal>(g);
    return is(c.lhs) || is(c.rhs);
}

SourceLoc goal_loc(const Goal& g) {
    return std::visit([](const auto& x) { return x.loc; }, g);
}

void collect_vars(const PTerm& t, std::vector<std::string>& out) {
    if (t.is_var() && std::find(out.begin(), out.end(), t.name) == out.end()) out.push_back(t.name);
}

std::vector<std::string> clause_vars(const Clause& c) {
    std::vector<std::string> out;
    for (const auto& a : c.head.args) collect_vars(a, out);
    for (const auto& g : c.body) {
        if (const auto* u = std::get_if<UserGoal>(&g)) {
            for (const auto& a : u->atom.args) collect_vars(a, out);
        } else if (const auto* m = std::get_if<MswGoal>(&g)) {
            collect_vars(m->instance, out);
            collect_vars(m->value, out);
        } else if (const auto* i = std::get_if<InGoal>(&g)) {
            collect_vars(PTerm::var(i->var), out);
        } else {
            const auto& k = std::get<ConstraintGoal>(g);
            collect_vars(k.lhs, out);
            collect_vars(k.rhs, out);
        }
    }
    return out;
}

void check_recursion(const Program& p) {
    std::map<std::string, std::set<std::string>> calls;
    std::map<std::string, SourceLoc> where;
    for (const auto& c : p.clauses) {
        where.try_emplace(c.head.key(), c.loc);
        auto& out = calls[c.head.key()];
        for (const auto& g : c.body) {
            if (const auto* u = std::get_if<UserGoal>(&g)) out.insert(u->atom.key());
        }
    }
    std::map<std::string, int> state;  // 1 = on stack, 2 = done
    std::function<void(const std::string&)> dfs = [&](const std::string& k) {
        state[k] = 1;
        for (const auto& callee : calls[k]) {
            if (state[callee] == 1) {
                throw TypeError(where[callee], "recursive predicate '" + callee + "' is not supported");
            }
            if (state[callee] == 0) dfs(callee);
        }
        state[k] = 2;
    };
    for (const auto& [k, _] : calls) {
        if (state[k] == 0) dfs(k);
    }
}

}  // namespace

TypedProgram check_well_typed(const Program& p) {
    TypeSolver ts;
    std::set<std::string> defined;
    for (const auto& c : p.clauses) defined.insert(c.head.key());

    auto param_key = [](const std::string& pred, std::size_t i) { return "p:" + pred + ":" + std::to_string(i); };

    for (std::size_t ci = 0; ci < p.clauses.size(); ++ci) {
        const Clause& c = p.clauses[ci];
        const std::string prefix = "c" + std::to_string(ci) + ":";
        auto term_slot = [&](const PTerm& t) -> int {
            if (t.is_var()) return ts.slot(prefix + t.name);
            if (t.kind == PTerm::Kind::Atom) {
                if (const Element* e = p.find_element(t.name)) return ts.fresh(e->population);
            }
            return ts.fresh(kUntyped);
        };
        auto unify = [&](int a, int b, SourceLoc loc, const std::string& what) {
            if (auto clash = ts.unify(a, b)) {
                throw TypeError(loc, what + ": " + show(clash->first) + " vs " + show(clash->second));
            }
        };

        // `in` goals first so that conflicts are reported at the offending use
        for (const auto& g : c.body) {
            if (const auto* i = std::get_if<InGoal>(&g)) {
                if (!p.find_population(i->population)) {
                    throw TypeError(i->loc, "unknown population '" + i->population + "'");
                }
                if (auto clash = ts.assign(ts.slot(prefix + i->var), i->population)) {
                    throw TypeError(i->loc, "variable " + i->var + " drawn from both " + clash->first +
                                                " and " + clash->second);
                }
            }
        }
        for (std::size_t j = 0; j < c.head.args.size(); ++j) {
            unify(term_slot(c.head.args[j]), ts.slot(param_key(c.head.key(), j)), c.loc,
                  "argument " + std::to_string(j + 1) + " of " + c.head.key() + " has conflicting types");
        }
        for (const auto& g : c.body) {
            if (const auto* m = std::get_if<MswGoal>(&g)) {
                const Switch* sw = p.find_switch(m->sw);
                if (!sw) throw TypeError(m->loc, "undeclared switch '" + m->sw + "'");
                if (!m->value.is_var() &&
                    std::find(sw->outcomes.begin(), sw->outcomes.end(), m->value) == sw->outcomes.end()) {
                    throw TypeError(m->loc, "'" + m->value.text() + "' is not an outcome of switch '" + m->sw + "'");
                }
                unify(term_slot(m->instance), ts.slot("s:" + m->sw), m->loc,
                      "switch '" + m->sw + "' used at two types");
            } else if (const auto* k = std::get_if<ConstraintGoal>(&g)) {
                unify(term_slot(k->lhs), term_slot(k->rhs), k->loc,
                      "constraint compares different types");
            } else if (const auto* u = std::get_if<UserGoal>(&g)) {
                if (!defined.count(u->atom.key())) {
                    throw TypeError(u->loc, "undefined predicate '" + u->atom.key() + "'");
                }
                for (std::size_t j = 0; j < u->atom.args.size(); ++j) {
                    unify(term_slot(u->atom.args[j]), ts.slot(param_key(u->atom.key(), j)), u->loc,
                          "argument " + std::to_string(j + 1) + " of " + u->atom.key() + " has conflicting types");
                }
            }
        }
    }

    check_recursion(p);

    TypedProgram out;
    out.program = p;
    auto& types = out.types;
    for (const auto& e : p.elements) types.constant_types[e.constant] = e.population;

    for (std::size_t ci = 0; ci < p.clauses.size(); ++ci) {
        const Clause& c = p.clauses[ci];
        const std::string prefix = "c" + std::to_string(ci) + ":";
        for (const auto& g : c.body) {
            if (const auto* m = std::get_if<MswGoal>(&g)) {
                auto l = ts.label_of("s:" + m->sw);
                if (!l || *l == kUntyped) {
                    throw TypeError(m->loc, "switch '" + m->sw + "' has no population type");
                }
                types.switch_types[m->sw] = *l;
            } else if (const auto* k = std::get_if<ConstraintGoal>(&g)) {
                auto typed = [&](const PTerm& t) -> bool {
                    if (t.is_var()) {
                        auto l = ts.label_of(prefix + t.name);
                        return l && *l != kUntyped;
                    }
                    return t.kind == PTerm::Kind::Atom && p.find_element(t.name);
                };
                if (!typed(k->lhs) || !typed(k->rhs)) {
                    throw TypeError(k->loc, "constraint on terms that are not population instances");
                }
            }
        }
        if (!types.param_types.count(c.head.key())) {
            std::vector<std::string> params;
            for (std::size_t j = 0; j < c.head.args.size(); ++j) {
                auto l = ts.label_of(param_key(c.head.key(), j));
                params.push_back(l && *l != kUntyped ? *l : "");
            }
            types.param_types[c.head.key()] = params;
        }

        std::map<std::string, std::string> vt;
        for (const auto& v : clause_vars(c)) {
            auto l = ts.label_of(prefix + v);
            if (l && *l != kUntyped) vt[v] = *l;
        }

        // insert `X in p` ahead of the first body use lacking one
        Clause& oc = out.program.clauses[ci];
        std::vector<Goal> body;
        std::set<std::string> drawn;
        for (const auto& g : c.body) {
            if (const auto* i = std::get_if<InGoal>(&g)) {
                drawn.insert(i->var);
            } else {
                for (const auto& [v, pop] : vt) {
                    if (!drawn.count(v) && mentions(g, v)) {
                        body.emplace_back(InGoal{v, pop, goal_loc(g)});
                        drawn.insert(v);
                    }
                }
            }
            body.push_back(g);
        }
        oc.body = std::move(body);
        types.var_types.push_back(std::move(vt));
    }
    return out;
}

Program eliminate_disequality(const Program& p) {
    Program out = p;
    out.clauses.clear();
    std::function<void(const Clause&)> split = [&](const Clause& c) {
        for (std::size_t i = 0; i < c.body.size(); ++i) {
            const auto* k = std::get_if<ConstraintGoal>(&c.body[i]);
            if (!k || k->op != CmpOp::NE) continue;
            Clause lt = c;
            Clause gt = c;
            lt.body[i] = ConstraintGoal{CmpOp::LT, k->lhs, k->rhs, k->loc};
            gt.body[i] = ConstraintGoal{CmpOp::LT, k->rhs, k->lhs, k->loc};
            split(lt);
            split(gt);
            return;
        }
        out.clauses.push_back(c);
    };
    for (const auto& c : p.clauses) split(c);
    return out;
}

Interval PopulationMap::range(const std::string& population) const {
    auto it = ranges.find(population);
    if (it == ranges.end()) throw std::out_of_range("unknown population '" + population + "'");
    return it->second;
}

PopulationMap map_populations(const Program& p, const std::map<std::string, std::int64_t>& overrides) {
    for (const auto& [name, n] : overrides) {
        if (!p.find_population(name)) throw std::invalid_argument("unknown population '" + name + "'");
        if (n < 0) throw std::invalid_argument("negative size for population '" + name + "'");
    }
    PopulationMap map;
    std::int64_t next = 1;
    for (const auto& pop : p.populations) {
        auto it = overrides.find(pop.name);
        const std::int64_t size = it == overrides.end() ? pop.size : it->second;
        map.ranges[pop.name] = Interval{next, next + size - 1};
        std::int64_t slot = next;
        for (const auto& e : p.elements) {
            if (e.population != pop.name) continue;
            if (slot > next + size - 1) {
                throw std::invalid_argument("population '" + pop.name + "' is smaller than its element list");
            }
            map.constants[e.constant] = slot++;
        }
        next += size;
    }
    map.m = next - 1;
    return map;
}

}  // namespace liftex
