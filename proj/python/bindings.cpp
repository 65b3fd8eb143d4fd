#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lorenzlab/config.hpp"
#include "lorenzlab/serialize.hpp"

namespace py = pybind11;
using namespace lorenzlab;

namespace {

py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Class2 as_class(std::pair<long, long> h) { return {h.first, h.second}; }

AtlasOptions atlas_options(int workers) {
  AtlasOptions o;
  o.rotation.workers = workers;
  o.census.workers = workers;
  return o;
}

CausalSign as_sign(const std::string& s) {
  if (s == "nonspacelike") return CausalSign::nonspacelike;
  if (s == "nontimelike") return CausalSign::nontimelike;
  throw py::value_error("sign must be 'nonspacelike' or 'nontimelike'");
}

py::array_t<double> samples_array(const std::vector<TangentState>& s) {
  py::array_t<double> out({py::ssize_t(s.size()), py::ssize_t(5)});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < s.size(); ++i) {
    a(i, 0) = s[i].t;
    a(i, 1) = s[i].x;
    a(i, 2) = s[i].y;
    a(i, 3) = s[i].vx;
    a(i, 4) = s[i].vy;
  }
  return out;
}

py::dict record_dict(const ClosedGeodesicRecord& r) {
  py::dict d = to_python(to_json(r));
  d["trace"] = samples_array(r.trace);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Closed geodesics and lightlike foliations of Lorentzian tori";

  // Later registrations are tried first: bases before derived types.
  auto model_error = py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<ModelRejected>(m, "ModelRejected", model_error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SearchError>(m, "SearchError", PyExc_RuntimeError);
  py::register_exception<FoliationError>(m, "FoliationError", PyExc_RuntimeError);
  py::register_exception<FlowError>(m, "FlowError", PyExc_RuntimeError);

  py::class_<SurfaceModel>(m, "Model")
      .def_static("flat", &SurfaceModel::flat, py::arg("E"), py::arg("F"), py::arg("G"))
      .def_static("strip", &SurfaceModel::strip, py::arg("k"))
      .def_static("galloway", &SurfaceModel::galloway, py::arg("eps"))
      .def_static("klein_galloway", &SurfaceModel::klein_galloway)
      .def_static(
          "custom",
          [](std::string E, std::string F, std::string G, bool klein) {
            return SurfaceModel(ModelSpec::custom(std::move(E), std::move(F), std::move(G),
                                                  klein ? Topology::klein : Topology::torus));
          },
          py::arg("E"), py::arg("F"), py::arg("G"), py::arg("klein") = false)
      .def_static("from_config", [](const std::string& text) { return SurfaceModel(parse_config(text).model); })
      .def("negated", &SurfaceModel::negated)
      .def_property_readonly("name", &SurfaceModel::name)
      .def_property_readonly("is_klein", &SurfaceModel::is_klein)
      .def("metric",
           [](const SurfaceModel& s, double x, double y) {
             const MetricValue g = s.metric({x, y});
             return py::make_tuple(g.E, g.F, g.G);
           })
      .def("causal_type",
           [](const SurfaceModel& s, double x, double y, double vx, double vy) {
             return to_string(causal_type(s, {x, y}, {vx, vy}));
           })
      .def("__repr__", [](const SurfaceModel& s) { return "<Model " + s.name() + ">"; });

  m.def(
      "geodesic",
      [](const SurfaceModel& s, std::array<double, 4> state, double t_end, double tol) {
        const GeodesicPath p =
            integrate_geodesic(s, TangentState{0.0, state[0], state[1], state[2], state[3]}, t_end, tol);
        py::dict d;
        d["samples"] = samples_array(p.samples);
        d["energy"] = p.energy;
        d["exit"] = to_string(p.exit);
        d["reached_t"] = p.reached_t;
        return d;
      },
      py::arg("model"), py::arg("state"), py::arg("t_end"), py::arg("tol") = 1e-10,
      "Geodesic from (x, y, vx, vy); samples are rows (t, x, y, vx, vy).");

  m.def("rotation_number", [](const SurfaceModel& s, std::pair<long, long> h) { return rotation_number(s, as_class(h)); },
        py::arg("model"), py::arg("sigma"));
  m.def("compute_kg", &compute_kg, py::arg("model"));
  m.def(
      "predicted_counts",
      [](long kg) {
        const PredictedCounts p = predicted_counts(kg);
        return py::make_tuple(p.leaves, p.timelike, p.spacelike);
      },
      py::arg("kg"));

  m.def(
      "atlas",
      [](const SurfaceModel& s, int workers) {
        FoliationAtlas a;
        {
          py::gil_scoped_release nogil;
          a = build_atlas(s, atlas_options(workers));
        }
        py::dict d = to_python(to_json(a));
        py::list traces;
        for (const Leaf& l : a.leaves) {
          py::list pts;
          for (const Vec2 p : l.trace) pts.append(py::make_tuple(p.x, p.y));
          traces.append(pts);
        }
        d["traces"] = traces;
        return d;
      },
      py::arg("model"), py::arg("workers") = 1);

  m.def(
      "shoot",
      [](const SurfaceModel& s, std::pair<long, long> h, std::array<double, 4> seed) -> py::object {
        const ShootResult r = shoot(s, as_class(h), TangentState{0.0, seed[0], seed[1], seed[2], seed[3]});
        if (!r) return py::none();
        return record_dict(*r.record);
      },
      py::arg("model"), py::arg("h"), py::arg("seed"),
      "Closed geodesic in class h near the seed (x, y, vx, vy), or None.");

  m.def(
      "survey",
      [](const SurfaceModel& s, int workers, std::optional<std::vector<std::pair<long, long>>> classes) {
        SurveyResult r;
        {
          py::gil_scoped_release nogil;
          const FoliationAtlas a = build_atlas(s, atlas_options(workers));
          SurveyOptions o;
          o.workers = workers;
          if (classes)
            for (auto h : *classes) o.classes.push_back(as_class(h));
          r = survey(s, a, o);
        }
        py::dict d = to_python(to_json(r));
        py::list recs;
        for (const auto& rec : r.records) recs.append(record_dict(rec));
        d["records"] = recs;
        return d;
      },
      py::arg("model"), py::arg("workers") = 1, py::arg("classes") = py::none());

  m.def(
      "maximize",
      [](const SurfaceModel& s, std::pair<long, long> h, const std::string& sign, int vertices) {
        MaximizeOptions o;
        o.vertices = vertices;
        return to_python(to_json(maximize_length(s, as_class(h), as_sign(sign), o)));
      },
      py::arg("model"), py::arg("h"), py::arg("sign") = "nonspacelike", py::arg("vertices") = 64);

  m.def(
      "report",
      [](const SurfaceModel& s, int workers) {
        SurfaceReport rep;
        {
          py::gil_scoped_release nogil;
          const FoliationAtlas a = build_atlas(s, atlas_options(workers));
          SurveyOptions o;
          o.workers = workers;
          rep = build_report(s, a, survey(s, a, o));
        }
        return to_python(to_json(rep));
      },
      py::arg("model"), py::arg("workers") = 1);

  m.def(
      "self_intersections",
      [](const std::vector<std::pair<double, double>>& pts) {
        std::vector<Vec2> trace;
        for (auto [x, y] : pts) trace.push_back({x, y});
        std::vector<std::pair<double, double>> out;
        for (const Vec2 p : self_intersections(trace)) out.emplace_back(p.x, p.y);
        return out;
      },
      py::arg("trace"));
}
