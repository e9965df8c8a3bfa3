#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nbharness/corpus.hpp"
#include "nbharness/curation.hpp"
#include "nbharness/error.hpp"
#include "nbharness/evalharness.hpp"
#include "nbharness/infill.hpp"
#include "nbharness/notebook.hpp"

namespace py = pybind11;
using namespace nbharness;

namespace {

// JSON crosses the boundary as text; the Python side decodes it.
std::string problem_text(const Problem& p) { return problem_to_json(p).dump(); }

InfillConfig infill_config(std::size_t c, bool lookahead) {
    InfillConfig cfg;
    cfg.context_cells = c;
    cfg.lookahead = lookahead;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Native core of nbharness";

    static py::exception<Error> error_type(m, "NbharnessError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error& e) {
            py::set_error(error_type, e.what());
        }
    });

    py::enum_<CellKind>(m, "CellKind")
        .value("code", CellKind::code)
        .value("markdown", CellKind::markdown)
        .value("raw", CellKind::raw);

    py::class_<Cell>(m, "Cell")
        .def_readonly("index", &Cell::index)
        .def_readonly("kind", &Cell::kind)
        .def_readonly("source", &Cell::source)
        .def_property_readonly("is_solution", [](const Cell& c) { return c.nbgrader && c.nbgrader->is_solution; })
        .def_property_readonly("is_grade", [](const Cell& c) { return c.nbgrader && c.nbgrader->is_grade; });

    py::class_<Notebook>(m, "Notebook")
        .def_readonly("cells", &Notebook::cells)
        .def_readonly("kernel_language", &Notebook::kernel_language)
        .def_readonly("repo_id", &Notebook::repo_id)
        .def_property_readonly("source_path", [](const Notebook& nb) { return nb.source_path.string(); })
        .def_property_readonly("format_version",
                               [](const Notebook& nb) { return py::make_tuple(nb.format_version.major, nb.format_version.minor); });

    m.def("parse_notebook", [](const std::string& text) { return parse_notebook(text); }, py::arg("text"));
    m.def("load_notebook", [](const std::string& path) { return load_notebook(path); }, py::arg("path"));
    m.def("serialize_notebook", &serialize_notebook, py::arg("nb"));
    m.def(
        "cell_counts",
        [](const Notebook& nb) {
            const auto c = cell_counts(nb);
            return py::dict(py::arg("code") = c.code, py::arg("markdown") = c.markdown, py::arg("raw") = c.raw);
        },
        py::arg("nb"));
    m.def("dedup_key", [](const Notebook& nb) { return to_hex(dedup_key(nb)); }, py::arg("nb"));
    m.def("markdown_focus_filter", &markdown_focus_filter, py::arg("nb"));

    m.def("extract_defined_names", &extract_defined_names, py::arg("code"));
    m.def(
        "find_assertion_lines",
        [](std::string_view code) {
            std::vector<std::pair<int, std::string>> out;
            for (auto& a : find_assertion_lines(code)) {
                out.emplace_back(a.line_no, std::move(a.text));
            }
            return out;
        },
        py::arg("code"));
    m.def("find_assert_references", &find_assert_references, py::arg("grading"), py::arg("names"));
    m.def("detect_data_dependencies", py::overload_cast<std::string_view>(&detect_data_dependencies), py::arg("code"));
    m.def(
        "_curate_problems",
        [](const Notebook& nb, bool ground_truth_available) {
            std::vector<std::string> out;
            for (const auto& p : curate_problems(nb, ground_truth_available)) {
                out.push_back(problem_text(p));
            }
            return out;
        },
        py::arg("nb"), py::arg("ground_truth_available") = true);

    m.def(
        "serialize_context",
        [](const Notebook& nb, std::size_t target, std::size_t c, bool lookahead) {
            return serialize_context(nb, target, infill_config(c, lookahead));
        },
        py::arg("nb"), py::arg("target_index"), py::arg("c") = 1, py::arg("lookahead") = false);
    m.def(
        "_emit_infill_examples",
        [](const Notebook& nb, std::size_t c, bool lookahead) {
            std::vector<std::string> out;
            for (const auto& ex : emit_infill_examples(nb, infill_config(c, lookahead))) {
                out.push_back(infill_to_json(ex).dump());
            }
            return out;
        },
        py::arg("nb"), py::arg("c") = 1, py::arg("lookahead") = false);

    m.def("pass_at_k", &pass_at_k, py::arg("n"), py::arg("c"), py::arg("k"));
    m.def("bleu_proxy", &bleu_proxy, py::arg("candidate"), py::arg("reference"));
    m.def("bleu_tokens", &bleu_tokens, py::arg("text"));
    m.def("spearman", &spearman, py::arg("xs"), py::arg("ys"));
    m.def("strip_trailing_asserts", &strip_trailing_asserts, py::arg("candidate"));
    m.def(
        "rank_by_logprob",
        [](const std::vector<std::optional<double>>& logprobs) {
            CandidateSet cs;
            for (const auto& lp : logprobs) {
                cs.candidates.push_back({"", lp});
            }
            return rank_by_logprob(cs);
        },
        py::arg("logprobs"));
}
