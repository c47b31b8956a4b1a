// SPDX-License-Identifier: Apache-2.0
//
// liftex: evaluate a ground query of a probabilistic logic program.
#include <iostream>

#include "CLI11.hpp"
#include "liftex/driver.hpp"

namespace {

std::pair<std::string, std::string> split_eq(const std::string& s, const std::string& flag) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
        throw liftex::RunError(liftex::kExitUsage, flag + " expects name=value, got '" + s + "'");
    }
    return {s.substr(0, eq), s.substr(eq + 1)};
}

std::int64_t parse_size(const std::string& s, const std::string& flag) {
    std::size_t used = 0;
    std::int64_t n = -1;
    try {
        n = std::stoll(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || n < 0) throw liftex::RunError(liftex::kExitUsage, flag + ": bad population size '" + s + "'");
    return n;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lifted and ground inference for probabilistic logic programs"};
    liftex::RunConfig cfg;
    std::string mode = "auto", dot, bench;
    std::vector<std::string> pops;
    app.add_option("--program", cfg.program_path, "Program file")->required();
    app.add_option("--query", cfg.query, "Ground query atom")->required();
    app.add_option("--mode", mode, "lifted, ground, auto or compare")
        ->check(CLI::IsMember({"lifted", "ground", "auto", "compare"}));
    app.add_option("--population", pops, "Population size override name=N (repeatable)");
    app.add_option("--dot", dot, "Write the evaluated graph in DOT format");
    app.add_flag("--recurrences", cfg.recurrences, "Print the f/g/h recurrences of the lifted graph");
    app.add_flag("--json", cfg.json, "Machine-readable output");
    app.add_option("--bench", bench, "Population sweep name=N1,N2,...");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : liftex::kExitUsage;
    }

    try {
        cfg.mode = liftex::parse_mode(mode);
        for (const auto& p : pops) {
            const auto [name, n] = split_eq(p, "--population");
            cfg.populations[name] = parse_size(n, "--population");
        }
        if (!dot.empty()) cfg.dot_path = dot;
        if (!bench.empty()) {
            const auto [name, list] = split_eq(bench, "--bench");
            liftex::BenchSpec spec{name, {}};
            std::stringstream ss(list);
            for (std::string item; std::getline(ss, item, ',');) spec.sizes.push_back(parse_size(item, "--bench"));
            cfg.bench = spec;
        }

        if (cfg.bench) {
            const auto t = liftex::bench(cfg);
            if (cfg.json) {
                std::cout << liftex::bench_json(t).dump(2) << "\n";
            } else {
                std::cout << liftex::bench_text(t);
            }
            return t.nodes_constant() ? liftex::kExitOk : liftex::kExitMismatch;
        }
        const auto r = liftex::run(cfg);
        if (cfg.json) {
            std::cout << liftex::report_json(r).dump(2) << "\n";
        } else {
            std::cout << liftex::report_text(r);
        }
        if (r.mismatch()) {
            std::cerr << "error: lifted and ground probabilities differ\n";
            return liftex::kExitMismatch;
        }
        return liftex::kExitOk;
    } catch (const liftex::RunError& e) {
        std::cerr << e.what() << "\n";
        return e.code();
    }
}
