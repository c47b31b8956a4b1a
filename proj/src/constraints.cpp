// SPDX-License-Identifier: Apache-2.0
#include "liftex/constraints.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace liftex {

namespace {

std::string default_name(VarId v) { return "V" + std::to_string(v.id); }

std::string render_term(const Term& t, const VarNamer& namer) {
    if (!t.var) return std::to_string(t.offset);
    std::string s = namer(*t.var);
    if (t.offset > 0) s += "+" + std::to_string(t.offset);
    if (t.offset < 0) s += std::to_string(t.offset);
    return s;
}

}  // namespace

bool offsets_within_bound(const AtomicConstraint& c, std::int64_t m) {
    auto ok = [m](const Term& t) { return !t.var || std::llabs(t.offset) <= m + 1; };
    return ok(c.lhs) && ok(c.rhs);
}

ConstraintFormula ConstraintFormula::False() {
    ConstraintFormula f;
    f.false_ = true;
    f.dbm_.clear();
    return f;
}

ConstraintFormula ConstraintFormula::box(const std::vector<std::pair<VarId, Interval>>& vars) {
    ConstraintFormula f;
    for (const auto& [v, dom] : vars) f = f.with_var(v, dom);
    return f;
}

std::optional<std::size_t> ConstraintFormula::index_of(VarId v) const {
    auto it = std::lower_bound(vars_.begin(), vars_.end(), v);
    if (it == vars_.end() || *it != v) return std::nullopt;
    return static_cast<std::size_t>(it - vars_.begin());
}

std::size_t ConstraintFormula::slot(std::optional<VarId> v) const {
    if (!v) return 0;
    auto idx = index_of(*v);
    if (!idx) throw ConstraintError("unknown variable " + default_name(*v));
    return *idx + 1;
}

Interval ConstraintFormula::domain(VarId v) const {
    auto idx = index_of(v);
    if (!idx) throw ConstraintError("unknown variable " + default_name(v));
    return domains_[*idx];
}

ConstraintFormula ConstraintFormula::with_var(VarId v, Interval dom) const {
    if (false_) return *this;
    if (auto idx = index_of(v)) {
        if (domains_[*idx] != dom) {
            throw ConstraintError("domain mismatch for variable " + default_name(v));
        }
        return *this;
    }
    if (dom.empty()) return False();
    ConstraintFormula out;
    out.vars_ = vars_;
    auto pos = static_cast<std::size_t>(std::lower_bound(out.vars_.begin(), out.vars_.end(), v) -
                                        out.vars_.begin());
    out.vars_.insert(out.vars_.begin() + static_cast<std::ptrdiff_t>(pos), v);
    out.domains_ = domains_;
    out.domains_.insert(out.domains_.begin() + static_cast<std::ptrdiff_t>(pos), dom);
    const std::size_t n = out.dim();
    out.dbm_.assign(n * n, 0);
    auto old_slot = [pos](std::size_t s) -> std::optional<std::size_t> {
        if (s == 0) return 0;
        if (s == pos + 1) return std::nullopt;
        return s < pos + 1 ? s : s - 1;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            auto oi = old_slot(i);
            auto oj = old_slot(j);
            if (oi && oj) {
                out.at(i, j) = at(*oi, *oj);
            } else if (i == j) {
                out.at(i, j) = 0;
            } else {
                // new variable: bounds relative to tightened neighbour bounds
                std::int64_t hi_i = i == 0 ? 0 : (oi ? at(*oi, 0) : dom.hi);
                std::int64_t neg_lo_j = j == 0 ? 0 : (oj ? at(0, *oj) : -dom.lo);
                out.at(i, j) = hi_i + neg_lo_j;
            }
        }
    }
    out.close();
    return out;
}

void ConstraintFormula::tighten(std::size_t i, std::size_t j, std::int64_t b) {
    if (b < at(i, j)) at(i, j) = b;
}

void ConstraintFormula::close() {
    if (false_) return;
    const std::size_t n = dim();
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::int64_t ik = at(i, k);
            for (std::size_t j = 0; j < n; ++j) {
                const std::int64_t via = ik + at(k, j);
                if (via < at(i, j)) at(i, j) = via;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (at(i, i) < 0) {
            *this = False();
            return;
        }
    }
}

ConstraintFormula ConstraintFormula::add(const AtomicConstraint& c) const {
    if (false_) return *this;
    ConstraintFormula out = *this;
    const std::size_t x = slot(c.lhs.var);
    const std::size_t y = slot(c.rhs.var);
    const std::int64_t diff = c.rhs.offset - c.lhs.offset;
    if (c.rel == Rel::LT) {
        out.tighten(x, y, diff - 1);
    } else {
        out.tighten(x, y, diff);
        out.tighten(y, x, -diff);
    }
    out.close();
    return out;
}

ConstraintFormula ConstraintFormula::with_vars_of(const ConstraintFormula& other) const {
    ConstraintFormula out = *this;
    for (std::size_t i = 0; i < other.vars_.size(); ++i) {
        out = out.with_var(other.vars_[i], other.domains_[i]);
    }
    return out;
}

ConstraintFormula ConstraintFormula::conjoin(const ConstraintFormula& other) const {
    if (false_ || other.false_) return False();
    ConstraintFormula out = with_vars_of(other);
    if (out.false_) return out;
    const std::size_t m = other.dim();
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t oi = i == 0 ? 0 : out.slot(other.vars_[i - 1]);
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t oj = j == 0 ? 0 : out.slot(other.vars_[j - 1]);
            out.tighten(oi, oj, other.at(i, j));
        }
    }
    out.close();
    return out;
}

std::int64_t ConstraintFormula::bound(std::optional<VarId> x, std::optional<VarId> y) const {
    if (false_) throw ConstraintError("bound queried on false");
    return at(slot(x), slot(y));
}

std::int64_t ConstraintFormula::box_bound(std::optional<VarId> x, std::optional<VarId> y) const {
    const std::int64_t hi = x ? domain(*x).hi : 0;
    const std::int64_t lo = y ? domain(*y).lo : 0;
    return hi - lo;
}

bool ConstraintFormula::entails(const AtomicConstraint& c) const {
    const std::size_t x = slot(c.lhs.var);
    const std::size_t y = slot(c.rhs.var);
    if (false_) return true;
    const std::int64_t diff = c.rhs.offset - c.lhs.offset;
    if (c.rel == Rel::LT) return at(x, y) <= diff - 1;
    return at(x, y) <= diff && at(y, x) <= -diff;
}

bool ConstraintFormula::entails(const ConstraintFormula& other) const {
    if (false_) return true;
    if (other.false_) return false;
    const std::size_t m = other.dim();
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t oi = i == 0 ? 0 : slot(other.vars_[i - 1]);
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t oj = j == 0 ? 0 : slot(other.vars_[j - 1]);
            if (at(oi, oj) > other.at(i, j)) return false;
        }
    }
    return true;
}

ConstraintFormula ConstraintFormula::project_out(VarId x) const {
    if (false_) return *this;
    const std::size_t s = slot(x);
    ConstraintFormula out;
    out.vars_ = vars_;
    out.domains_ = domains_;
    out.vars_.erase(out.vars_.begin() + static_cast<std::ptrdiff_t>(s - 1));
    out.domains_.erase(out.domains_.begin() + static_cast<std::ptrdiff_t>(s - 1));
    const std::size_t n = out.dim();
    out.dbm_.assign(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out.at(i, j) = at(i < s ? i : i + 1, j < s ? j : j + 1);
        }
    }
    return out;
}

ConstraintFormula ConstraintFormula::project_out(const std::vector<VarId>& xs) const {
    ConstraintFormula out = *this;
    for (VarId x : xs) {
        if (out.has_var(x)) out = out.project_out(x);
    }
    return out;
}

ConstraintFormula ConstraintFormula::project_onto(const std::vector<VarId>& keep) const {
    std::vector<VarId> drop;
    for (VarId v : vars_) {
        if (std::find(keep.begin(), keep.end(), v) == keep.end()) drop.push_back(v);
    }
    return project_out(drop);
}

std::vector<AtomicConstraint> ConstraintFormula::faces() const {
    std::vector<AtomicConstraint> out;
    if (false_) return out;
    struct Face {
        std::size_t i, j;
        std::int64_t b;
    };
    std::vector<Face> cand;
    const std::size_t n = dim();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            std::optional<VarId> xi = i == 0 ? std::nullopt : std::optional<VarId>(vars_[i - 1]);
            std::optional<VarId> xj = j == 0 ? std::nullopt : std::optional<VarId>(vars_[j - 1]);
            if (at(i, j) < box_bound(xi, xj)) cand.push_back({i, j, at(i, j)});
        }
    }
    ConstraintFormula base;
    for (std::size_t k = 0; k < vars_.size(); ++k) base = base.with_var(vars_[k], domains_[k]);
    auto rebuild = [&](std::size_t skip) {
        ConstraintFormula f = base;
        for (std::size_t k = 0; k < cand.size(); ++k) {
            if (k != skip) f.tighten(cand[k].i, cand[k].j, cand[k].b);
        }
        f.close();
        return f;
    };
    for (std::size_t k = 0; k < cand.size();) {
        if (rebuild(k) == *this) {
            cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(k));
        } else {
            ++k;
        }
    }
    for (const Face& f : cand) {
        // x_i - x_j <= b  <=>  x_i < x_j + b + 1
        AtomicConstraint c;
        c.rel = Rel::LT;
        if (f.i == 0) {
            c.lhs = Term::constant(-f.b - 1);
            c.rhs = Term::of(vars_[f.j - 1]);
        } else if (f.j == 0) {
            c.lhs = Term::of(vars_[f.i - 1]);
            c.rhs = Term::constant(f.b + 1);
        } else {
            c.lhs = Term::of(vars_[f.i - 1]);
            c.rhs = Term::of(vars_[f.j - 1], f.b + 1);
        }
        out.push_back(c);
    }
    return out;
}

std::vector<ConstraintFormula> ConstraintFormula::negate() const {
    ConstraintFormula base;
    for (std::size_t k = 0; k < vars_.size(); ++k) base = base.with_var(vars_[k], domains_[k]);
    if (false_) return {base};
    std::vector<ConstraintFormula> out;
    ConstraintFormula kept = base;
    for (const AtomicConstraint& face : faces()) {
        // complement of lhs < rhs is rhs < lhs + 1
        AtomicConstraint flipped{Rel::LT, face.rhs, Term{face.lhs.var, face.lhs.offset + 1}};
        ConstraintFormula piece = kept.add(flipped);
        if (piece.is_satisfiable()) out.push_back(piece);
        kept = kept.add(face);
    }
    return out;
}

std::vector<ConstraintFormula> ConstraintFormula::disjoin(const ConstraintFormula& other) const {
    std::vector<ConstraintFormula> out;
    if (false_ && other.false_) return out;
    if (false_) return {other};
    if (other.false_) return {*this};
    ConstraintFormula a = with_vars_of(other);
    ConstraintFormula b = other.with_vars_of(*this);
    for (const auto& piece : b.negate()) {
        auto p = a.conjoin(piece);
        if (p.is_satisfiable()) out.push_back(p);
    }
    for (const auto& piece : a.negate()) {
        auto p = b.conjoin(piece);
        if (p.is_satisfiable()) out.push_back(p);
    }
    auto both = a.conjoin(b);
    if (both.is_satisfiable()) out.push_back(both);
    return out;
}

Interval ConstraintFormula::range(VarId x) const {
    if (false_) throw ConstraintError("range of unsatisfiable formula");
    const std::size_t s = slot(x);
    return Interval{-at(0, s), at(s, 0)};
}

ConstraintFormula ConstraintFormula::substitute_value(VarId x, std::int64_t k) const {
    const Interval dom = domain(x);
    if (k < dom.lo || k > dom.hi) {
        throw ConstraintError("value " + std::to_string(k) + " outside domain of " +
                              default_name(x));
    }
    if (false_) return *this;
    ConstraintFormula out = *this;
    const std::size_t s = slot(x);
    out.tighten(s, 0, k);
    out.tighten(0, s, -k);
    out.close();
    if (out.false_) return out;
    return out.project_out(x);
}

ConstraintFormula ConstraintFormula::rename(VarId from, VarId to) const {
    if (from == to || false_ || !has_var(from)) return *this;
    if (has_var(to)) {
        if (domain(to) != domain(from)) throw ConstraintError("domain mismatch in rename");
        return add(AtomicConstraint{Rel::EQ, Term::of(from), Term::of(to)}).project_out(from);
    }
    ConstraintFormula moved = with_var(to, domain(from));
    return moved.add(AtomicConstraint{Rel::EQ, Term::of(from), Term::of(to)}).project_out(from);
}

bool ConstraintFormula::satisfied_by(const Solution& s) const {
    if (false_) return false;
    if (s.size() != vars_.size()) return false;
    const std::size_t n = dim();
    auto val = [&](std::size_t i) -> std::int64_t { return i == 0 ? 0 : s[i - 1]; };
    for (std::size_t k = 0; k < vars_.size(); ++k) {
        if (s[k] < domains_[k].lo || s[k] > domains_[k].hi) return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (val(i) - val(j) > at(i, j)) return false;
        }
    }
    return true;
}

void ConstraintFormula::for_each_solution(const std::function<void(const Solution&)>& fn) const {
    if (false_) return;
    Solution partial;
    partial.reserve(vars_.size());
    std::function<void(const ConstraintFormula&)> rec = [&](const ConstraintFormula& f) {
        if (f.vars_.empty()) {
            fn(partial);
            return;
        }
        const VarId x = f.vars_.front();
        const Interval r = f.range(x);
        for (std::int64_t v = r.lo; v <= r.hi; ++v) {
            ConstraintFormula sub = f.substitute_value(x, v);
            if (sub.is_false()) continue;
            partial.push_back(v);
            rec(sub);
            partial.pop_back();
        }
    };
    rec(*this);
}

std::vector<Solution> ConstraintFormula::enumerate_solutions() const {
    std::vector<Solution> out;
    for_each_solution([&](const Solution& s) { out.push_back(s); });
    return out;
}

std::string ConstraintFormula::to_string(const VarNamer& namer_in, bool with_domains) const {
    if (false_) return "false";
    const VarNamer namer = namer_in ? namer_in : VarNamer(default_name);
    std::vector<std::string> parts;
    auto fs = faces();
    std::vector<bool> used(fs.size(), false);
    for (std::size_t a = 0; a < fs.size(); ++a) {
        if (used[a]) continue;
        const auto& f = fs[a];
        // look for the reverse face closing an equality
        for (std::size_t b = a + 1; b < fs.size(); ++b) {
            const auto& g = fs[b];
            if (f.lhs.var && f.rhs.var && g.lhs.var == f.rhs.var && g.rhs.var == f.lhs.var &&
                g.rhs.offset == -(f.rhs.offset - 2)) {
                // f: x < y + (d+1), g: y < x + (1-d)  =>  x = y + d
                used[a] = used[b] = true;
                parts.push_back(namer(*f.lhs.var) + "=" +
                                render_term(Term::of(*f.rhs.var, f.rhs.offset - 1), namer));
                break;
            }
        }
        if (used[a]) continue;
        used[a] = true;
        parts.push_back(render_term(f.lhs, namer) + "<" + render_term(f.rhs, namer));
    }
    for (std::size_t k = 0; with_domains && k < vars_.size(); ++k) {
        parts.push_back(std::to_string(domains_[k].lo) + "<=" + namer(vars_[k]) +
                        "<=" + std::to_string(domains_[k].hi));
    }
    if (parts.empty()) return "true";
    std::ostringstream os;
    for (std::size_t k = 0; k < parts.size(); ++k) os << (k ? ", " : "") << parts[k];
    return os.str();
}

std::size_t ConstraintFormula::hash() const {
    std::size_t h = false_ ? 0x9e3779b97f4a7c15ULL : 0x12345ULL;
    auto mix = [&h](std::uint64_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    for (std::size_t k = 0; k < vars_.size(); ++k) {
        mix(static_cast<std::uint64_t>(vars_[k].id));
        mix(static_cast<std::uint64_t>(domains_[k].lo));
        mix(static_cast<std::uint64_t>(domains_[k].hi));
    }
    for (auto v : dbm_) mix(static_cast<std::uint64_t>(v));
    return h;
}

bool operator==(const ConstraintFormula& a, const ConstraintFormula& b) {
    if (a.false_ || b.false_) return a.false_ == b.false_;
    return a.vars_ == b.vars_ && a.domains_ == b.domains_ && a.dbm_ == b.dbm_;
}

}  // namespace liftex
