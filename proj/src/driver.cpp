// SPDX-License-Identifier: Apache-2.0
#include "liftex/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "liftex/inference.hpp"

namespace liftex {

std::string to_string(Mode m) {
    switch (m) {
        case Mode::Lifted: return "lifted";
        case Mode::Ground: return "ground";
        case Mode::Auto: return "auto";
        case Mode::Compare: return "compare";
    }
    return "?";
}

Mode parse_mode(const std::string& name) {
    for (Mode m : {Mode::Lifted, Mode::Ground, Mode::Auto, Mode::Compare}) {
        if (to_string(m) == name) return m;
    }
    throw std::invalid_argument("unknown mode '" + name + "'");
}

std::string format_prob(double p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", p);
    return buf;
}

bool RunReport::mismatch() const { return p_lifted && p_ground && std::abs(*p_lifted - *p_ground) > 1e-9; }

bool BenchTable::nodes_constant() const {
    return std::all_of(rows.begin(), rows.end(), [&](const BenchRow& r) { return r.lifted_nodes == rows.front().lifted_nodes; });
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Loaded {
    TypedProgram tp;
    SwitchTable sw;
    PopulationMap pops;
    PAtom query;
};

std::string where(const std::string& file, SourceLoc loc) {
    return file + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.col) + ": ";
}

Loaded load(const RunConfig& c, const std::map<std::string, std::int64_t>& sizes) {
    std::string text;
    const std::string label = c.program_path.empty() ? "<program>" : c.program_path;
    if (c.program_text) {
        text = *c.program_text;
    } else {
        std::ifstream in(c.program_path);
        if (!in) throw RunError(kExitUsage, "cannot read " + label);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    Program prog;
    try {
        prog = parse_program(text);
    } catch (const ParseError& e) {
        throw RunError(kExitParse, where(label, e.loc()) + e.what());
    }
    Loaded l;
    try {
        l.tp = check_well_typed(eliminate_disequality(prog));
    } catch (const TypeError& e) {
        throw RunError(kExitType, where(label, e.loc()) + e.what());
    }
    for (const auto& [name, n] : sizes) {
        if (!l.tp.program.find_population(name)) throw RunError(kExitUsage, "unknown population '" + name + "'");
    }
    try {
        l.pops = map_populations(l.tp.program, sizes);
    } catch (const std::invalid_argument& e) {
        throw RunError(kExitUsage, e.what());
    }
    l.sw = SwitchTable(l.tp.program);
    try {
        l.query = parse_query(c.query);
    } catch (const ParseError& e) {
        throw RunError(kExitParse, where("<query>", e.loc()) + e.what());
    }
    const std::string key = l.query.key();
    const bool defined = std::any_of(l.tp.program.clauses.begin(), l.tp.program.clauses.end(),
                                     [&](const Clause& cl) { return cl.head.key() == key; });
    if (!defined) throw RunError(kExitUnsupported, "unknown query predicate '" + key + "'");
    const auto& types = l.tp.types.param_types.at(key);
    for (std::size_t j = 0; j < l.query.args.size(); ++j) {
        const PTerm& a = l.query.args[j];
        if (a.is_var()) throw RunError(kExitUnsupported, "query argument " + a.text() + " is not ground");
        if (types[j].empty()) continue;
        const Element* e = a.kind == PTerm::Kind::Atom ? l.tp.program.find_element(a.name) : nullptr;
        if (!e || e->population != types[j]) {
            throw RunError(kExitUnsupported, "query argument " + a.text() + " is not an element of " + types[j]);
        }
    }
    return l;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw RunError(kExitUsage, "cannot write " + path);
    out << text;
}

}  // namespace

RunReport run(const RunConfig& config) {
    const auto t0 = Clock::now();
    const Loaded l = load(config, config.populations);
    RunReport r;
    r.mode_used = config.mode;

    LiftedContext ctx(l.sw);
    std::optional<LiftedGraph> g;
    try {
        g = lifted_query(ctx, l.tp, l.pops, l.query);
    } catch (const LiftError& e) {
        r.note = std::string("lifted construction failed: ") + e.what();
    }
    if (g) {
        r.lifted_nodes = node_count(ctx, *g);
        const auto rep = check_frontier_subsumption(ctx, *g);
        for (const auto& [x, ok] : rep.verdict) r.subsumption[ctx.name(x)] = ok;
        if (config.recurrences) r.recurrences = emit_recurrences(ctx, *g, l.sw);
    }

    auto lifted_eval = [&]() -> std::optional<LiftedResult> {
        if (!g) return std::nullopt;
        try {
            return lifted_prob(ctx, *g, l.sw);
        } catch (const NotLiftable& e) {
            r.note = e.what();
            return std::nullopt;
        }
    };
    GroundEngine engine(l.sw);
    NodeId groot = kZero;
    auto ground_eval = [&]() {
        try {
            groot = ground_query(l.tp, l.pops, engine, l.query);
        } catch (const GroundError& e) {
            throw RunError(kExitUnsupported, e.what());
        }
        r.ground_nodes = engine.size(groot);
        return engine.prob(groot);
    };
    auto use_lifted = [&](const LiftedResult& res) {
        r.probability = res.prob;
        r.cells = res.cells;
        r.mode_used = Mode::Lifted;
    };

    switch (config.mode) {
        case Mode::Lifted: {
            if (!g) throw RunError(kExitUnsupported, r.note);
            const auto res = lifted_eval();
            if (!res) throw RunError(kExitUnsupported, "not liftable: " + r.note);
            use_lifted(*res);
            break;
        }
        case Mode::Ground:
            r.probability = ground_eval();
            break;
        case Mode::Auto:
            if (const auto res = lifted_eval()) {
                use_lifted(*res);
            } else {
                r.probability = ground_eval();
                r.mode_used = Mode::Ground;
            }
            break;
        case Mode::Compare: {
            if (!g) throw RunError(kExitUnsupported, r.note);
            if (const auto res = lifted_eval()) {
                r.p_lifted = res->prob;
                r.cells = res->cells;
                r.lifted_source = "recurrences";
            } else {
                GroundEngine e2(l.sw);
                r.p_lifted = e2.prob(ground(ctx, *g, e2));
                r.lifted_source = "grounded lifted graph";
            }
            r.p_ground = ground_eval();
            r.probability = *r.p_lifted;
            break;
        }
    }

    if (config.dot_path) {
        r.dot = r.mode_used == Mode::Ground ? engine.to_dot(groot) : to_dot(ctx, *g);
        write_file(*config.dot_path, r.dot);
    }
    r.seconds = since(t0);
    return r;
}

BenchTable bench(const RunConfig& config) {
    if (!config.bench) throw RunError(kExitUsage, "no bench sweep given");
    if (config.mode != Mode::Auto && config.mode != Mode::Lifted) {
        throw RunError(kExitUsage, "bench requires mode auto or lifted");
    }
    BenchTable t;
    t.population = config.bench->population;
    for (std::int64_t n : config.bench->sizes) {
        auto sizes = config.populations;
        sizes[t.population] = n;
        const Loaded l = load(config, sizes);
        const auto t0 = Clock::now();
        LiftedContext ctx(l.sw);
        BenchRow row;
        row.n = n;
        try {
            const LiftedGraph g = lifted_query(ctx, l.tp, l.pops, l.query);
            row.lifted_nodes = node_count(ctx, g);
            const LiftedResult res = lifted_prob(ctx, g, l.sw);
            row.probability = res.prob;
            row.cells = res.cells;
        } catch (const LiftError& e) {
            throw RunError(kExitUnsupported, std::string("lifted construction failed: ") + e.what());
        } catch (const NotLiftable& e) {
            throw RunError(kExitUnsupported, std::string("not liftable: ") + e.what());
        }
        row.seconds = since(t0);
        t.rows.push_back(row);
    }
    return t;
}

std::string report_text(const RunReport& r) {
    std::ostringstream os;
    auto size = [](const std::optional<std::size_t>& s) { return s ? std::to_string(*s) : std::string("skipped"); };
    os << "probability: " << format_prob(r.probability) << "\n";
    os << "mode: " << to_string(r.mode_used) << "\n";
    os << "subsumption:";
    if (r.subsumption.empty()) os << " none";
    for (const auto& [x, ok] : r.subsumption) os << " " << x << "=" << (ok ? "holds" : "fails");
    os << "\n";
    os << "lifted nodes: " << size(r.lifted_nodes) << "\n";
    os << "ground nodes: " << size(r.ground_nodes) << "\n";
    os << "cells: " << r.cells << "\n";
    if (r.p_lifted && r.p_ground) {
        os << "p_lifted: " << format_prob(*r.p_lifted) << " (" << r.lifted_source << ")\n";
        os << "p_ground: " << format_prob(*r.p_ground) << "\n";
        os << "difference: " << format_prob(std::abs(*r.p_lifted - *r.p_ground)) << "\n";
    }
    if (!r.note.empty()) os << "note: " << r.note << "\n";
    os << "time: " << std::setprecision(6) << r.seconds << " s\n";
    if (!r.recurrences.empty()) os << "\n" << r.recurrences;
    return os.str();
}

nlohmann::json report_json(const RunReport& r) {
    using nlohmann::json;
    auto size = [](const std::optional<std::size_t>& s) { return s ? json(*s) : json("skipped"); };
    json j;
    j["probability"] = r.probability;
    j["mode"] = to_string(r.mode_used);
    j["subsumption"] = json::object();
    for (const auto& [x, ok] : r.subsumption) j["subsumption"][x] = ok;
    j["lifted_nodes"] = size(r.lifted_nodes);
    j["ground_nodes"] = size(r.ground_nodes);
    j["time_s"] = r.seconds;
    j["cells"] = r.cells;
    if (!r.note.empty()) j["note"] = r.note;
    if (r.p_lifted && r.p_ground) {
        j["p_lifted"] = *r.p_lifted;
        j["p_ground"] = *r.p_ground;
        j["difference"] = std::abs(*r.p_lifted - *r.p_ground);
        j["lifted_source"] = r.lifted_source;
    }
    if (!r.recurrences.empty()) j["recurrences"] = r.recurrences;
    return j;
}

std::string bench_text(const BenchTable& t) {
    std::ostringstream os;
    os << "population: " << t.population << "\n";
    os << std::setw(10) << "N" << std::setw(14) << "lifted nodes" << std::setw(12) << "cells" << std::setw(20)
       << "probability" << std::setw(12) << "time (s)" << "\n";
    for (const auto& row : t.rows) {
        os << std::setw(10) << row.n << std::setw(14) << row.lifted_nodes << std::setw(12) << row.cells
           << std::setw(20) << format_prob(row.probability) << std::setw(12) << std::setprecision(4) << row.seconds
           << "\n";
    }
    os << "lifted node count constant: " << (t.nodes_constant() ? "yes" : "no") << "\n";
    return os.str();
}

nlohmann::json bench_json(const BenchTable& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : t.rows) {
        rows.push_back({{"n", row.n},
                        {"lifted_nodes", row.lifted_nodes},
                        {"cells", row.cells},
                        {"probability", row.probability},
                        {"time_s", row.seconds}});
    }
    return {{"population", t.population}, {"rows", rows}, {"lifted_nodes_constant", t.nodes_constant()}};
}

}  // namespace liftex
