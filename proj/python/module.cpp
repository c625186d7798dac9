#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "vortexshape/config.hpp"
#include "vortexshape/io.hpp"
#include "vortexshape/validate.hpp"

namespace py = pybind11;
using namespace vortexshape;

namespace {

std::vector<std::pair<double, double>> polyline_to_pairs(const Polyline& p) {
  std::vector<std::pair<double, double>> out;
  out.reserve(p.size());
  for (const Vec2& v : p) out.emplace_back(v.x, v.y);
  return out;
}

Polyline pairs_to_polyline(const std::vector<std::pair<double, double>>& pts) {
  Polyline out;
  out.reserve(pts.size());
  for (const auto& [x, y] : pts) out.push_back({x, y});
  return out;
}

}  // namespace

PYBIND11_MODULE(_vortexshape, m) {
  m.doc() = "obstacle shape optimization for channel-flow vorticity";

  py::class_<Vec2>(m, "Vec2")
      .def(py::init<double, double>())
      .def_readwrite("x", &Vec2::x)
      .def_readwrite("y", &Vec2::y)
      .def("__repr__", [](const Vec2& v) {
        std::ostringstream os;
        os << "Vec2(" << v.x << ", " << v.y << ")";
        return os.str();
      });

  py::class_<ChannelGeometry>(m, "ChannelGeometry")
      .def(py::init<>())
      .def_readwrite("obstacle_center", &ChannelGeometry::obstacle_center)
      .def_readwrite("obstacle_radius", &ChannelGeometry::obstacle_radius)
      .def_readwrite("obstacle_segments", &ChannelGeometry::obstacle_segments)
      .def("validate", &ChannelGeometry::validate)
      .def("clearance", &ChannelGeometry::clearance);

  py::class_<QualityReport>(m, "QualityReport")
      .def_readonly("min_angle_deg", &QualityReport::min_angle_deg)
      .def_readonly("min_area", &QualityReport::min_area)
      .def_readonly("worst_aspect_ratio", &QualityReport::worst_aspect_ratio)
      .def_readonly("degenerate", &QualityReport::degenerate);

  py::class_<Mesh, std::shared_ptr<Mesh>>(m, "Mesh")
      .def_property_readonly("num_vertices", &Mesh::num_vertices)
      .def_property_readonly("num_triangles", &Mesh::num_triangles)
      .def_property_readonly("vertices",
                             [](const Mesh& mesh) {
                               std::vector<std::pair<double, double>> out;
                               for (const Vec2& v : mesh.vertices) out.emplace_back(v.x, v.y);
                               return out;
                             })
      .def_property_readonly("triangles",
                             [](const Mesh& mesh) {
                               std::vector<std::array<int, 3>> out(mesh.triangles.begin(),
                                                                   mesh.triangles.end());
                               return out;
                             })
      .def("total_area", &Mesh::total_area)
      .def("free_perimeter", &Mesh::free_perimeter)
      .def("free_polyline", [](const Mesh& mesh) { return polyline_to_pairs(mesh.free_polyline()); })
      .def("validate", &Mesh::validate);

  m.def(
      "build_channel_mesh",
      [](const ChannelGeometry& g, double h_min, double h_max, std::uint64_t seed) {
        return std::make_shared<Mesh>(build_channel_mesh(g, h_min, h_max, seed));
      },
      py::arg("geometry"), py::arg("h_min"), py::arg("h_max"), py::arg("seed") = 1);
  m.def("mesh_quality", &mesh_quality, py::arg("mesh"), py::arg("angle_thresh_deg") = 5.0,
        py::arg("area_thresh") = 1e-10);
  m.def("write_mesh_file", &write_mesh_file);
  m.def("read_mesh_file",
        [](const std::string& path) { return std::make_shared<Mesh>(read_mesh_file(path)); });
  m.def("hausdorff_distance",
        [](const std::vector<std::pair<double, double>>& a,
           const std::vector<std::pair<double, double>>& b) {
          return hausdorff_distance(pairs_to_polyline(a), pairs_to_polyline(b));
        });

  m.def("h_eval", &h_eval);
  m.def("h_prime", &h_prime);
  m.def("h_second", &h_second);

  py::class_<FunctionalParams>(m, "FunctionalParams")
      .def(py::init<>())
      .def_readwrite("gamma1", &FunctionalParams::gamma1)
      .def_readwrite("gamma2", &FunctionalParams::gamma2)
      .def_readwrite("alpha", &FunctionalParams::alpha)
      .def_readwrite("ell", &FunctionalParams::ell)
      .def_readwrite("b", &FunctionalParams::b)
      .def_readwrite("m", &FunctionalParams::m);

  py::class_<ObjectiveBreakdown>(m, "ObjectiveBreakdown")
      .def_readonly("j1", &ObjectiveBreakdown::j1)
      .def_readonly("j2", &ObjectiveBreakdown::j2)
      .def_readonly("perimeter", &ObjectiveBreakdown::perimeter)
      .def_readonly("volume", &ObjectiveBreakdown::volume)
      .def_readonly("objective", &ObjectiveBreakdown::objective)
      .def_readonly("lagrangian", &ObjectiveBreakdown::lagrangian);

  m.def("mixed_split", &mixed_split, py::arg("breakdown"), py::arg("k"));

  // state solve + functional evaluation on a mesh, as one pipeline call
  m.def(
      "evaluate_channel",
      [](std::shared_ptr<Mesh> mesh, double nu, const FunctionalParams& params) {
        StokesSolver solver(mesh, nu);
        StateSolution st = solver.solve_state(poiseuille_inflow);
        return eval_breakdown(*mesh, st, params);
      },
      py::arg("mesh"), py::arg("nu"), py::arg("params"),
      "Solve the Stokes state with the default inflow and evaluate the objective");

  py::enum_<Algorithm>(m, "Algorithm")
      .value("aL", Algorithm::aL)
      .value("dF", Algorithm::dF);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("algorithm", &RunConfig::algorithm)
      .def_readwrite("gamma1", &RunConfig::gamma1)
      .def_readwrite("gamma2", &RunConfig::gamma2)
      .def_readwrite("alpha", &RunConfig::alpha)
      .def_readwrite("nu", &RunConfig::nu)
      .def_readwrite("beta", &RunConfig::beta)
      .def_readwrite("gamma_smooth", &RunConfig::gamma_smooth)
      .def_readwrite("epsilon", &RunConfig::epsilon)
      .def_readwrite("ell0", &RunConfig::ell0)
      .def_readwrite("b0", &RunConfig::b0)
      .def_readwrite("tau_mult", &RunConfig::tau_mult)
      .def_readwrite("b_bar", &RunConfig::b_bar)
      .def_readwrite("tol", &RunConfig::tol)
      .def_readwrite("max_iter", &RunConfig::max_iter)
      .def_readwrite("geometry", &RunConfig::geometry)
      .def_readwrite("h_min", &RunConfig::h_min)
      .def_readwrite("h_max", &RunConfig::h_max)
      .def_readwrite("adapt_initial", &RunConfig::adapt_initial)
      .def_readwrite("adapt_every", &RunConfig::adapt_every)
      .def_readwrite("seed", &RunConfig::seed)
      .def("validate", &RunConfig::validate);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("iteration", &IterationRecord::iteration)
      .def_readonly("breakdown", &IterationRecord::breakdown)
      .def_readonly("step", &IterationRecord::step)
      .def_readonly("retries", &IterationRecord::retries)
      .def_readonly("ell", &IterationRecord::ell)
      .def_readonly("b", &IterationRecord::b)
      .def_readonly("accepted", &IterationRecord::accepted);

  py::enum_<RunStatus>(m, "RunStatus")
      .value("ConvergedTol", RunStatus::ConvergedTol)
      .value("ConvergedZeroGradient", RunStatus::ConvergedZeroGradient)
      .value("MaxIterations", RunStatus::MaxIterations)
      .value("NoDescentStep", RunStatus::NoDescentStep)
      .value("SolverError", RunStatus::SolverError);

  py::class_<OptimizeResult>(m, "OptimizeResult")
      .def_readonly("status", &OptimizeResult::status)
      .def_readonly("records", &OptimizeResult::records)
      .def_readonly("error_message", &OptimizeResult::error_message)
      .def_property_readonly("final_mesh",
                             [](const OptimizeResult& r) {
                               return std::make_shared<Mesh>(r.final_mesh);
                             })
      .def_property_readonly("boundary_history", [](const OptimizeResult& r) {
        std::vector<std::vector<std::pair<double, double>>> out;
        for (const Polyline& p : r.boundary_history) out.push_back(polyline_to_pairs(p));
        return out;
      });

  m.def("optimize", [](const RunConfig& c) { return optimize(c); }, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  m.def("run_validation", []() {
    std::ostringstream log;
    ValidationReport rep = run_validation(log);
    return py::make_tuple(rep.all_passed(), log.str());
  });
}
