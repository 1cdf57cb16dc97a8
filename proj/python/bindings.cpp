#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nncis/io.hpp"
#include "nncis/lane_keeping.hpp"
#include "nncis/mpc.hpp"
#include "nncis/synth.hpp"

namespace py = pybind11;
using namespace nncis;

namespace {

py::dict trajectory_dict(const Trajectory& t) {
  py::dict d;
  d["states"] = t.states;
  d["controls"] = t.controls;
  std::vector<bool> feasible, fallback;
  std::vector<double> objective, solve_ms;
  std::vector<std::int64_t> nodes;
  for (const auto& s : t.steps) {
    feasible.push_back(s.feasible);
    fallback.push_back(s.fallback);
    objective.push_back(s.objective);
    solve_ms.push_back(s.solve_ms);
    nodes.push_back(s.nodes);
  }
  d["feasible"] = feasible;
  d["fallback"] = fallback;
  d["objective"] = objective;
  d["solve_ms"] = solve_ms;
  d["nodes"] = nodes;
  d["in_cis"] = t.in_cis;
  return d;
}

}  // namespace

PYBIND11_MODULE(_nncis, m) {
  m.doc() = "Control invariant set synthesis and safe MPC for ReLU network dynamics";
  py::register_exception<Error>(m, "NncisError", PyExc_RuntimeError);

  py::class_<RealBox>(m, "RealBox")
      .def(py::init<Eigen::VectorXd, Eigen::VectorXd>(), py::arg("lo"), py::arg("hi"))
      .def_readonly("lo", &RealBox::lo)
      .def_readonly("hi", &RealBox::hi)
      .def("contains", py::overload_cast<const Eigen::VectorXd&, double>(&RealBox::contains, py::const_),
           py::arg("x"), py::arg("tol") = 0.0);

  py::class_<GridSpec>(m, "GridSpec")
      .def_property_readonly("lower", &GridSpec::lower)
      .def_property_readonly("upper", &GridSpec::upper)
      .def_property_readonly("d_min", &GridSpec::d_min)
      .def_property_readonly("cells", &GridSpec::cells)
      .def("basis_count", &GridSpec::basis_count)
      .def("domain", &GridSpec::domain);
  m.def("make_grid", &make_grid, py::arg("lower"), py::arg("upper"), py::arg("d_min"));

  py::class_<GridBox>(m, "GridBox")
      .def(py::init([](std::vector<std::int64_t> lo, std::vector<std::int64_t> hi) {
             return GridBox{std::move(lo), std::move(hi)};
           }),
           py::arg("lo"), py::arg("hi"))
      .def_readonly("lo", &GridBox::lo)
      .def_readonly("hi", &GridBox::hi)
      .def("cell_count", &GridBox::cell_count)
      .def("to_real", &GridBox::to_real);

  py::class_<BoxSet>(m, "BoxSet")
      .def(py::init<GridSpec, std::vector<GridBox>>(), py::arg("grid"), py::arg("boxes"))
      .def_property_readonly("grid", &BoxSet::grid)
      .def_property_readonly("boxes", &BoxSet::boxes)
      .def("cell_count", &BoxSet::cell_count)
      .def("indices", &BoxSet::indices)
      .def("empty", &BoxSet::empty)
      .def("contains_point", &BoxSet::contains_point, py::arg("x"), py::arg("tol") = 0.0)
      .def("unite", &BoxSet::unite)
      .def("intersect", &BoxSet::intersect)
      .def("subtract", &BoxSet::subtract)
      .def("same_cells", &BoxSet::same_cells);
  m.def("quantize_box", [](const GridSpec& g, const RealBox& b) {
    std::vector<RealBox> boxes{b};
    return quantize_safe_set(g, boxes);
  });

  py::class_<Mlp>(m, "Mlp")
      .def_property_readonly("n_x", &Mlp::n_x)
      .def_property_readonly("n_u", &Mlp::n_u)
      .def_property_readonly("depth", &Mlp::depth)
      .def("width", &Mlp::width)
      .def("to_json", &mlp_to_json_text)
      .def_static("from_json", &mlp_from_json_text);
  m.def("forward", &forward, py::arg("model"), py::arg("x"), py::arg("u"));
  m.def("linear_to_mlp", &linear_to_mlp, py::arg("A"), py::arg("Bu"), py::arg("c"));
  m.def("load_mlp", py::overload_cast<const std::filesystem::path&>(&load_mlp));
  m.def("save_mlp", &save_mlp);
  m.def("reach_box", [](const Mlp& net, const RealBox& x, const RealBox& u) { return reach_boxes(net, x, u).output; },
        py::arg("model"), py::arg("x"), py::arg("u"));

  py::class_<LaneKeepingParams>(m, "LaneKeepingParams")
      .def(py::init<>())
      .def_readwrite("l1", &LaneKeepingParams::l1)
      .def_readwrite("l2", &LaneKeepingParams::l2)
      .def_readwrite("w", &LaneKeepingParams::w)
      .def_readwrite("v", &LaneKeepingParams::v)
      .def_readwrite("dt", &LaneKeepingParams::dt)
      .def_readwrite("u_max_deg", &LaneKeepingParams::u_max_deg)
      .def_readwrite("divisor", &LaneKeepingParams::divisor);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("state_lower", &Scenario::state_lower)
      .def_readonly("state_upper", &Scenario::state_upper)
      .def_readonly("control", &Scenario::control)
      .def_readonly("d_min", &Scenario::d_min)
      .def("grid", &Scenario::grid)
      .def("safe_set", &Scenario::safe_set)
      .def("to_json", &scenario_to_json_text)
      .def_static("from_json", &scenario_from_json_text);
  m.def("load_scenario", &load_scenario);
  m.def("lane_keeping_scenario", &lane_keeping_scenario, py::arg("params") = LaneKeepingParams{});
  m.def("lane_keeping_model", &lane_keeping_model, py::arg("params") = LaneKeepingParams{});

  py::class_<ControlAtlas>(m, "ControlAtlas")
      .def_property_readonly("cis", &ControlAtlas::cis)
      .def_property_readonly("grid", &ControlAtlas::grid)
      .def_readonly("iterations", &ControlAtlas::iterations)
      .def_readonly("history", &ControlAtlas::history)
      .def("empty", &ControlAtlas::empty)
      .def("boxes", [](const ControlAtlas& a) {
        std::vector<GridBox> out;
        for (const auto& e : a.entries()) out.push_back(e.box);
        return out;
      })
      .def("controls", [](const ControlAtlas& a) {
        std::vector<Eigen::VectorXd> out;
        for (const auto& e : a.entries()) out.push_back(e.u);
        return out;
      })
      .def("control", [](const ControlAtlas& a, const Eigen::VectorXd& x) { return atlas_control(a, x); })
      .def("to_json", &atlas_to_json_text)
      .def_static("from_json", &atlas_from_json_text);
  m.def("load_atlas", &load_atlas);
  m.def("save_atlas", &save_atlas);

  m.def(
      "synthesize_cis",
      [](const Mlp& net, const BoxSet& safe, const RealBox& u, int jobs, bool keep_history,
         const std::function<void(int, std::int64_t)>& progress) {
        SynthOptions opts;
        opts.jobs = jobs;
        opts.keep_history = keep_history;
        if (progress) {
          opts.progress = [&progress](const SynthProgress& p) {
            py::gil_scoped_acquire gil;
            progress(p.iteration, p.cells);
          };
        }
        py::gil_scoped_release release;
        return synthesize_cis(net, safe, u, opts);
      },
      py::arg("model"), py::arg("safe"), py::arg("u"), py::arg("jobs") = 1, py::arg("keep_history") = false,
      py::arg("progress") = nullptr);
  m.def("termination_bound", &termination_bound);
  m.def("certify_atlas", [](const Mlp& net, const ControlAtlas& a) {
    const auto r = certify_atlas(net, a);
    return py::make_tuple(r.checked, r.failed);
  });
  m.def("closed_loop_rollouts", [](const Mlp& net, const ControlAtlas& a, int steps) {
    const auto r = closed_loop_rollouts(net, a, steps);
    return py::make_tuple(r.starts, r.exits);
  });
  m.def("cell_centers", &cell_centers);

  m.def(
      "simulate",
      [](const Mlp& net, const ControlAtlas& a, const Eigen::VectorXd& x0, int steps, int horizon,
         const std::string& variant, const Eigen::VectorXd& q, const Eigen::VectorXd& r,
         const std::vector<Eigen::VectorXd>& reference, bool warm) {
        MpcConfig cfg;
        cfg.N = horizon;
        cfg.variant = variant == "full" ? MpcVariant::Full : MpcVariant::FirstStep;
        cfg.Q = q;
        cfg.QN = q;
        cfg.R = r;
        cfg.reference = reference;
        cfg.use_warm_start = warm;
        Trajectory t;
        {
          py::gil_scoped_release release;
          t = simulate(net, a, cfg, x0, steps);
        }
        return trajectory_dict(t);
      },
      py::arg("model"), py::arg("atlas"), py::arg("x0"), py::arg("steps"), py::arg("horizon") = 5,
      py::arg("variant") = "first-step", py::arg("q"), py::arg("r"),
      py::arg("reference") = std::vector<Eigen::VectorXd>{}, py::arg("warm_start") = true);
}
