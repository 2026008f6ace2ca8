#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "agenum/enumerator.hpp"
#include "agenum/error.hpp"
#include "agenum/grammar.hpp"
#include "agenum/oracle.hpp"
#include "agenum/pdann.hpp"
#include "agenum/spanner.hpp"
#include "agenum/utf8.hpp"

namespace py = pybind11;
using namespace agenum;

namespace {

using PyOutput = std::vector<std::pair<uint32_t, std::string>>;

PyOutput to_py(const AnnotatedGrammar& g, const Output& o) {
  PyOutput out;
  for (const OutputLetter& l : o) out.emplace_back(l.position, g.annotations.at(l.annotation));
  return out;
}

py::dict mapping_to_py(const Mapping& m) {
  py::dict d;
  for (const auto& [var, span] : m) d[py::str(var)] = py::make_tuple(span.begin, span.end);
  return d;
}

}  // namespace

PYBIND11_MODULE(_agenum, m) {
  m.doc() = "Enumeration of annotated grammar outputs";

  static py::exception<Error> error(m, "AgenumError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(error_name(e.code())) + ": " + e.what()).c_str());
    }
  });

  py::class_<AnnotatedGrammar>(m, "Grammar")
      .def_static("parse", [](const std::string& text) { return parse_grammar(text); })
      .def_property_readonly("annotations", [](const AnnotatedGrammar& g) { return g.annotations; })
      .def_property_readonly("nonterminals", [](const AnnotatedGrammar& g) { return g.nonterminals; })
      .def_property_readonly("size", &AnnotatedGrammar::size)
      .def("render", [](const AnnotatedGrammar& g) { return render_grammar(g); })
      .def("normalize", [](const AnnotatedGrammar& g) { return to_2nf(g).base; })
      .def(
          "evaluate",
          [](const AnnotatedGrammar& g, const std::string& w, std::optional<size_t> limit) {
            std::vector<PyOutput> out;
            for (const Output& o : evaluate(g, decode_utf8(w), limit)) out.push_back(to_py(g, o));
            return out;
          },
          py::arg("w"), py::arg("limit") = py::none())
      .def("brute_outputs",
           [](const AnnotatedGrammar& g, const std::string& w) {
             std::vector<PyOutput> out;
             for (const Output& o : brute_outputs(g, decode_utf8(w))) out.push_back(to_py(g, o));
             return out;
           })
      .def("is_unambiguous_upto",
           [](const AnnotatedGrammar& g, size_t n) { return check_unambiguous_upto(g, n).unambiguous; })
      .def("is_rigid_upto",
           [](const AnnotatedGrammar& g, size_t n) { return check_rigid_upto(g, n).rigid; })
      .def("counters", [](const AnnotatedGrammar& g, const std::string& w) {
        Evaluation ev(g, decode_utf8(w));
        return counters_report(ev.counters());
      });

  m.def("disambiguate_rigid", &disambiguate_rigid);

  m.def(
      "enumerate_mappings",
      [](const std::string& text, const std::string& doc, std::optional<size_t> limit) {
        py::list out;
        for (const Mapping& mp :
             enumerate_mappings(parse_extraction_grammar(text), decode_utf8(doc), limit))
          out.append(mapping_to_py(mp));
        return out;
      },
      py::arg("grammar"), py::arg("document"), py::arg("limit") = py::none());

  m.def("translate", [](const std::string& text) {
    return translate(parse_extraction_grammar(text));
  });

  m.def("compute_profile", [](const std::string& pda, const std::string& w) {
    return compute_profile(parse_pdann(pda), decode_utf8(w)).profile;
  });

  m.def("pdann_to_grammar", [](const std::string& pda) { return pdann_to_grammar(parse_pdann(pda)); });
}
