// SPDX-License-Identifier: Apache-2.0
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "liftex/driver.hpp"

namespace py = pybind11;

namespace {

liftex::RunConfig make_config(const std::string& program, bool is_text, const std::string& query,
                              const std::string& mode, const std::map<std::string, std::int64_t>& populations,
                              bool recurrences) {
    liftex::RunConfig c;
    if (is_text) {
        c.program_text = program;
    } else {
        c.program_path = program;
    }
    c.query = query;
    c.mode = liftex::parse_mode(mode);
    c.populations = populations;
    c.recurrences = recurrences;
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Lifted and ground inference for probabilistic logic programs";
    static py::exception<liftex::RunError> run_error(m, "RunError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const liftex::RunError& e) {
            PyErr_SetObject(run_error.ptr(), py::make_tuple(e.code(), e.what()).ptr());
        }
    });

    m.def(
        "run_json",
        [](const std::string& program, bool is_text, const std::string& query, const std::string& mode,
           const std::map<std::string, std::int64_t>& populations, bool recurrences) {
            return liftex::report_json(liftex::run(make_config(program, is_text, query, mode, populations, recurrences)))
                .dump();
        },
        py::arg("program"), py::arg("is_text"), py::arg("query"), py::arg("mode") = "auto",
        py::arg("populations") = std::map<std::string, std::int64_t>{}, py::arg("recurrences") = false,
        "Run one query; returns the report as a JSON string.");
    m.def(
        "bench_json",
        [](const std::string& program, bool is_text, const std::string& query, const std::string& population,
           const std::vector<std::int64_t>& sizes, const std::string& mode) {
            liftex::RunConfig c = make_config(program, is_text, query, mode, {}, false);
            c.bench = liftex::BenchSpec{population, sizes};
            return liftex::bench_json(liftex::bench(c)).dump();
        },
        py::arg("program"), py::arg("is_text"), py::arg("query"), py::arg("population"), py::arg("sizes"),
        py::arg("mode") = "auto", "Population sweep; returns the table as a JSON string.");
}
