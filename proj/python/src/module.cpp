// Python bindings.  Reports cross the boundary as JSON text; the package
// wrapper turns them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "finmet/parse.hpp"
#include "finmet/report.hpp"
#include "finmet/spray.hpp"
#include "finmet/vector_field.hpp"

namespace py = pybind11;
using namespace finmet;

namespace {

Point point(const std::vector<double>& x, const std::vector<double>& y) { return Point(x, y); }

SpraySpec spec_from(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError(std::string("spec: malformed document: ") + e.what());
  }
  return parse_spec(doc);
}

}  // namespace

PYBIND11_MODULE(_finmet, m) {
  m.doc() = "Spray metrizability checks";
  m.attr("__version__") = kVersion;
  m.attr("SCHEMA_VERSION") = kSchemaVersion;

  static py::exception<SamplingExhausted> sampling_exhausted(m, "SamplingExhausted", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const SpecError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const ParseError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const SingularEvaluation& e) {
      PyErr_SetString(PyExc_ArithmeticError, e.what());
    } catch (const SamplingExhausted& e) {
      sampling_exhausted(e.what());
    }
  });

  py::class_<Expression>(m, "Expression")
      .def_static(
          "parse",
          [](const std::string& src, int dim, const std::vector<std::string>& params) { return parse(src, dim, params); },
          py::arg("source"), py::arg("dim"), py::arg("params") = std::vector<std::string>{})
      .def(
          "evaluate",
          [](const Expression& e, const std::vector<double>& x, const std::vector<double>& y, const ParamMap& params) {
            return evaluate(e, point(x, y), params);
          },
          py::arg("x"), py::arg("y"), py::arg("params") = ParamMap{})
      .def(
          "diff",
          [](const Expression& e, const std::string& coord, int dim) {
            return differentiate(e, parse(coord, dim).coord());
          },
          py::arg("coordinate"), py::arg("dim"))
      .def("__str__", &Expression::to_string)
      .def("__repr__", [](const Expression& e) { return "Expression(" + e.to_string() + ")"; })
      .def("__eq__", [](const Expression& a, const Expression& b) { return a == b; })
      .def("__hash__", &Expression::hash);

  py::class_<VectorField>(m, "VectorField")
      .def(py::init([](const std::vector<std::string>& comps, int dim) {
             std::vector<Expression> e;
             for (const auto& c : comps) e.push_back(parse(c, dim));
             if (static_cast<int>(e.size()) != 2 * dim) throw SpecError("a vector field needs 2 * dim components");
             return VectorField(std::move(e));
           }),
           py::arg("components"), py::arg("dim"))
      .def_property_readonly("dim", &VectorField::dim)
      .def_property_readonly("components", &VectorField::components)
      .def(
          "evaluate",
          [](const VectorField& X, const std::vector<double>& x, const std::vector<double>& y, const ParamMap& params) {
            const auto v = X.evaluate(point(x, y), params);
            return std::vector<double>(v.data(), v.data() + v.size());
          },
          py::arg("x"), py::arg("y"), py::arg("params") = ParamMap{})
      .def("apply", &VectorField::apply)
      .def("is_vertical", &VectorField::is_vertical)
      .def("__str__", &VectorField::to_string);
  m.def("lie_bracket", &lie_bracket, py::arg("X"), py::arg("Y"));

  py::class_<Spray>(m, "Spray")
      .def(py::init(&Spray::parse), py::arg("dim"), py::arg("coefficients"), py::arg("params") = ParamMap{})
      .def_property_readonly("dim", &Spray::dim)
      .def_property_readonly("coefficients", &Spray::coefficients)
      .def_property_readonly("params", &Spray::params)
      .def("horizontal_frame", [](const Spray& s) { return horizontal_frame(s); })
      .def("berwald_components", [](const Spray& s) { return berwald_curvature(s, {}).components; });
  m.def("liouville_field", &liouville_field, py::arg("dim"));

  m.def("_normalize_spec", [](const std::string& text) { return spec_to_json(spec_from(text)).dump(); });
  m.def("_config_hash", [](const std::string& text) { return config_hash(spec_from(text)); });
  m.def("_analyze", [](const std::string& text) {
    const auto spec = spec_from(text);
    py::gil_scoped_release release;
    return analyze_report(spec).dump();
  });
  m.def("_check_energy", [](const std::string& text) {
    const auto spec = spec_from(text);
    py::gil_scoped_release release;
    return energy_report(spec).dump();
  });
  m.def("_distribution", [](const std::string& text, const std::string& which) {
    if (which != "holonomy" && which != "landsberg") throw SpecError("which must be holonomy or landsberg");
    const auto spec = spec_from(text);
    py::gil_scoped_release release;
    return distribution_report(spec, which == "holonomy" ? Question::finsler : Question::landsberg).dump();
  });
  m.def("_jet", [](const std::string& text, const std::vector<double>& x, const std::vector<double>& y) {
    const auto spec = spec_from(text);
    if (static_cast<int>(x.size()) != spec.dim || static_cast<int>(y.size()) != spec.dim) {
      throw SpecError("point dimension does not match the spray");
    }
    const Point p = point(x, y);
    py::gil_scoped_release release;
    return jet_report(spec, p).dump();
  });
}
