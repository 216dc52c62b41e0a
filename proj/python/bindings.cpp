#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "surfwave/analysis.hpp"
#include "surfwave/config.hpp"
#include "surfwave/layout.hpp"
#include "surfwave/layout_dsl.hpp"
#include "surfwave/physics.hpp"
#include "surfwave/raytrace.hpp"
#include "surfwave/scenarios.hpp"
#include "surfwave/solver.hpp"
#include "surfwave/validation.hpp"

namespace py = pybind11;
using namespace surfwave;

namespace {

TransmissionCurve curve_from(const std::vector<double>& f, const std::vector<double>& s21) {
  TransmissionCurve c;
  c.frequencies = f;
  c.s21_db = s21;
  c.valid.assign(f.size(), true);
  c.check();
  return c;
}

// Straight-pathway run reduced to plain Python values.
py::dict straight_run(const std::string& profile, double width, int layers, double length,
                      const std::vector<double>& freqs, int workers) {
  ProjectConfig cfg;
  cfg.apply_profile(Profile::named(profile));
  if (!freqs.empty()) cfg.solver.dft_frequencies = freqs;
  cfg.solver.workers = workers;
  cfg.validate();
  RunCache cache;
  RunResult r;
  {
    py::gil_scoped_release release;
    r = straight_study(cfg, cache, width, layers, length);
  }
  py::dict curves;
  for (const auto& p : r.probes) {
    const TransmissionCurve c = transmission(r, p.spec.id);
    curves[py::str(p.spec.id)] = py::make_tuple(p.spec.path_distance, c.s21_db);
  }
  py::dict out;
  out["layout"] = r.layout_id;
  out["frequencies"] = r.frequencies;
  out["curves"] = curves;
  out["steps"] = r.steps;
  out["n_eff"] = r.n_eff;
  out["sigma_eq"] = r.sigma_eq;
  out["converged"] = r.converged;
  return out;
}

}  // namespace

PYBIND11_MODULE(_surfwave, m) {
  m.doc() = "Reconfigurable surface-wave pathway model";

  py::class_<DielectricSpec>(m, "DielectricSpec")
      .def(py::init<>())
      .def(py::init([](double eps_r, double tan_delta, double ref_freq, double h) {
             return DielectricSpec{eps_r, tan_delta, ref_freq, h};
           }),
           py::arg("eps_r"), py::arg("tan_delta"), py::arg("ref_freq"), py::arg("thickness"))
      .def_readwrite("eps_r", &DielectricSpec::eps_r)
      .def_readwrite("tan_delta", &DielectricSpec::tan_delta)
      .def_readwrite("thickness", &DielectricSpec::thickness_h);

  py::class_<MetalSpec>(m, "MetalSpec")
      .def(py::init([](double sigma) { return MetalSpec{sigma}; }), py::arg("sigma"))
      .def_static("pec", &MetalSpec::pec)
      .def_readwrite("sigma", &MetalSpec::sigma)
      .def("is_pec", &MetalSpec::is_pec);

  py::class_<PorosityGeometry>(m, "PorosityGeometry")
      .def(py::init([](double r, double ws) { return PorosityGeometry{r, ws}; }),
           py::arg("radius") = 0.5e-3, py::arg("pitch") = 2e-3)
      .def_readwrite("radius", &PorosityGeometry::cavity_radius_r)
      .def_readwrite("pitch", &PorosityGeometry::cavity_pitch_ws);

  py::class_<SurfaceWaveSolution>(m, "SurfaceWaveSolution")
      .def_readonly("gamma_x", &SurfaceWaveSolution::gamma_x)
      .def_readonly("gamma_z", &SurfaceWaveSolution::gamma_z)
      .def_readonly("n_eff", &SurfaceWaveSolution::n_eff)
      .def_readonly("Zs", &SurfaceWaveSolution::Zs)
      .def_readonly("skin_depth", &SurfaceWaveSolution::skin_depth);

  m.def("skin_depth", &skin_depth, py::arg("f"), py::arg("metal"));
  m.def("gamma_x", &gamma_x, py::arg("f"), py::arg("dielectric"), py::arg("metal"));
  m.def("gamma_z", &gamma_z, py::arg("f"), py::arg("gamma_x"));
  m.def("surface_impedance", &surface_impedance, py::arg("f"), py::arg("dielectric"), py::arg("metal"));
  m.def("porosity", &porosity, py::arg("geometry"));
  m.def("effective_permittivity", &effective_permittivity, py::arg("eps_r"), py::arg("rho"));
  m.def("solve_surface_wave", &solve_surface_wave, py::arg("f"), py::arg("dielectric"),
        py::arg("ground"), py::arg("geometry"));
  m.def(
      "equivalent_loss_rate",
      [](double f, double n_eff, double tan_delta, double kappa) {
        const LossRate r = equivalent_loss_rate(f, n_eff, tan_delta, kappa);
        return py::make_tuple(r.db_per_m, r.sigma_eq);
      },
      py::arg("f"), py::arg("n_eff"), py::arg("tan_delta"), py::arg("kappa"),
      "(dB per metre, equivalent conductivity)");

  m.def("corner_width", &corner_width, py::arg("k"), py::arg("pitch") = 2e-3);
  m.def(
      "parse_layout",
      [](const std::string& text) {
        const Layout l = parse_layout(text);
        py::list pins;
        for (const auto& idx : l.grid.filled_set()) pins.append(py::make_tuple(idx.row, idx.col));
        py::dict out;
        out["rows"] = l.grid.rows();
        out["cols"] = l.grid.cols();
        out["pitch"] = l.grid.pitch();
        out["pins"] = pins;
        out["text"] = unparse_layout(l);
        return out;
      },
      py::arg("text"));
  m.def(
      "preset_program",
      [](const std::string& kind, int k, double width) {
        if (kind == "corner") return unparse_layout(preset_corner(k, width));
        if (kind == "straight") return unparse_layout(preset_straight(width, 150e-3, 1));
        if (kind == "tjunction") {
          return unparse_layout(preset_tjunction(k ? JunctionMode::Turn : JunctionMode::Straight, width));
        }
        throw std::invalid_argument("unknown preset kind '" + kind + "'");
      },
      py::arg("kind"), py::arg("k") = 4, py::arg("width") = 10e-3);

  py::register_exception<LayoutError>(m, "LayoutError", PyExc_ValueError);

  py::class_<PeakEstimate>(m, "PeakEstimate")
      .def_readonly("frequency", &PeakEstimate::frequency)
      .def_readonly("value_db", &PeakEstimate::value_db)
      .def_readonly("boundary_peak", &PeakEstimate::boundary_peak);
  m.def(
      "optimal_frequency",
      [](const std::vector<double>& f, const std::vector<double>& s21) {
        return optimal_frequency(curve_from(f, s21));
      },
      py::arg("frequencies"), py::arg("s21_db"));
  m.def(
      "half_power_band",
      [](const std::vector<double>& f, const std::vector<double>& s21, double drop) {
        const Band b = half_power_band(curve_from(f, s21), drop);
        return py::make_tuple(b.low, b.high);
      },
      py::arg("frequencies"), py::arg("s21_db"), py::arg("drop_db") = 3.0);
  m.def(
      "attenuation_fit",
      [](const std::vector<double>& d, const std::vector<double>& levels) {
        const AttenuationFit fit = attenuation_fit(d, levels);
        return py::make_tuple(fit.slope_db_per_m, fit.intercept_db, fit.r2);
      },
      py::arg("distances"), py::arg("levels_db"), "(dB per metre of loss, intercept, R^2)");

  m.def(
      "raytrace",
      [](double d_min, double d_max, double d_step, double coax_db_per_m) {
        RaytraceSweep s;
        s.d_min = d_min;
        s.d_max = d_max;
        s.d_step = d_step;
        s.coax_db_per_m = coax_db_per_m;
        py::dict out;
        std::vector<double> d, pec, cu, ga, space, nonguided;
        for (const auto& r : raytrace_sweep(s)) {
          d.push_back(r.d);
          pec.push_back(r.pec_db);
          cu.push_back(r.copper_db);
          ga.push_back(r.galinstan_db);
          space.push_back(r.space_db);
          nonguided.push_back(r.nonguided_db);
        }
        out["d"] = d;
        out["pec"] = pec;
        out["copper"] = cu;
        out["galinstan"] = ga;
        out["space"] = space;
        out["nonguided"] = nonguided;
        return out;
      },
      py::arg("d_min") = 1.0, py::arg("d_max") = 50.0, py::arg("d_step") = 0.5,
      py::arg("coax_db_per_m") = -1.0);

  m.def("straight_run", &straight_run, py::arg("profile") = "ci", py::arg("width") = 10e-3,
        py::arg("layers") = 1, py::arg("length") = 150e-3,
        py::arg("frequencies") = std::vector<double>{}, py::arg("workers") = 1,
        "Solve a straight pathway; returns frequencies and per-probe S21 curves.");

  m.def(
      "validate",
      [](const std::vector<int>& ids, const std::string& profile) {
        ProjectConfig cfg;
        cfg.apply_profile(Profile::named(profile));
        RunCache cache;
        std::vector<CheckResult> results;
        {
          py::gil_scoped_release release;
          results = run_validation(cfg, cache, ids);
        }
        py::list out;
        for (const auto& r : results) out.append(py::make_tuple(r.id, r.pass, r.line()));
        return out;
      },
      py::arg("ids"), py::arg("profile") = "ci");
}
