// SPDX-License-Identifier: Apache-2.0
//
// Batch pipeline behind the command-line tool: load a program, build the
// lifted graph for a ground query, and evaluate it in the requested mode.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace liftex {

enum class Mode { Lifted, Ground, Auto, Compare };

std::string to_string(Mode m);
/// Throws std::invalid_argument on an unknown name.
Mode parse_mode(const std::string& name);

struct BenchSpec {
    std::string population;
    std::vector<std::int64_t> sizes;
};

struct RunConfig {
    std::string program_path;
    std::optional<std::string> program_text;  // used instead of reading the path
    std::string query;
    Mode mode = Mode::Auto;
    std::map<std::string, std::int64_t> populations;
    bool json = false;
    std::optional<std::string> dot_path;
    bool recurrences = false;
    std::optional<BenchSpec> bench;
};

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitParse = 2,
    kExitType = 3,
    kExitUnsupported = 4,
    kExitMismatch = 5,
};

class RunError : public std::runtime_error {
  public:
    RunError(int code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    [[nodiscard]] int code() const { return code_; }

  private:
    int code_;
};

struct RunReport {
    double probability = 0;
    Mode mode_used = Mode::Auto;
    std::map<std::string, bool> subsumption;        // per quantified variable
    std::optional<std::size_t> lifted_nodes;         // nullopt: skipped
    std::optional<std::size_t> ground_nodes;         // nullopt: skipped
    double seconds = 0;
    std::size_t cells = 0;
    std::string note;                                // why lifted evaluation was not used
    std::optional<double> p_lifted, p_ground;        // compare mode
    std::string lifted_source;                       // compare mode: "recurrences" or "grounded lifted graph"
    std::string recurrences;
    std::string dot;

    [[nodiscard]] bool mismatch() const;
};

/// Throws RunError carrying the exit code. A compare-mode mismatch is
/// reported, not thrown; see RunReport::mismatch.
RunReport run(const RunConfig& config);

struct BenchRow {
    std::int64_t n = 0;
    std::size_t lifted_nodes = 0;
    std::size_t cells = 0;
    double probability = 0;
    double seconds = 0;
};

struct BenchTable {
    std::string population;
    std::vector<BenchRow> rows;

    [[nodiscard]] bool nodes_constant() const;
};

/// Population sweep with lifted evaluation; requires mode auto or lifted.
BenchTable bench(const RunConfig& config);

std::string format_prob(double p);
std::string report_text(const RunReport& r);
nlohmann::json report_json(const RunReport& r);
std::string bench_text(const BenchTable& t);
nlohmann::json bench_json(const BenchTable& t);

}  // namespace liftex
