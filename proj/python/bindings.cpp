#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "mzisim/analysis.hpp"
#include "mzisim/commands.hpp"
#include "mzisim/constants.hpp"
#include "mzisim/detection.hpp"
#include "mzisim/errors.hpp"
#include "mzisim/interferometer.hpp"
#include "mzisim/photon_stream.hpp"
#include "mzisim/scan.hpp"
#include "mzisim/spectral.hpp"
#include "mzisim/statistics.hpp"

namespace py = pybind11;
using namespace mzisim;

namespace {

py::dict fit_dict(const EnvelopeFit& f) {
  py::dict d;
  d["amplitude"] = f.amplitude;
  d["center_mm"] = f.center_mm;
  d["width_mm"] = f.width_mm;
  d["visibility"] = f.visibility;
  d["period_mm"] = f.period_mm;
  d["phase_rad"] = f.phase_rad;
  d["offset"] = f.offset;
  d["residual_rms"] = f.residual_rms;
  d["iterations"] = f.iterations;
  return d;
}

py::dict bunch_dict(const BunchStats& b) {
  py::dict d;
  d["window_s"] = b.window_s;
  d["n_singles"] = b.n_singles;
  d["n_doubles"] = b.n_doubles;
  d["n_higher"] = b.n_higher;
  d["doubles_fraction"] = b.doubles_fraction;
  return d;
}

SpectralModel tabulated(const std::vector<std::pair<double, double>>& points) {
  TabulatedVisibility t;
  for (auto [dl, v] : points) t.points.push_back({dl, v});
  SpectralModel m(std::move(t));
  m.validate();
  return m;
}

}  // namespace

PYBIND11_MODULE(_mzisim, m) {
  m.doc() = "Mach-Zehnder self-interference simulator core";
  m.attr("__version__") = kToolVersion;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<UnsupportedModeError>(m, "UnsupportedModeError", base.ptr());
  py::register_exception<OutOfRangeError>(m, "OutOfRangeError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<DegenerateInputError>(m, "DegenerateInputError", base.ptr());
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());
  py::register_exception<NoCrossingError>(m, "NoCrossingError", base.ptr());
  py::register_exception<DataFormatError>(m, "DataFormatError", base.ptr());
  py::register_exception<FitFailureError>(m, "FitFailureError", base.ptr());

  py::class_<SpectralModel>(m, "SpectralModel")
      .def_property_readonly("is_parametric", &SpectralModel::is_parametric)
      .def_property_readonly("coherence_length_um", [](const SpectralModel& s) { return coherence_curve(s).coherence_length_um; })
      .def_property_readonly("center_frequency_hz", [](const SpectralModel& s) { return center_frequency(s); })
      .def("visibility", [](const SpectralModel& s, double dl) { return visibility(s, dl); }, py::arg("delta_l_um"))
      .def("sample_frequencies",
           [](const SpectralModel& s, std::size_t n, std::uint64_t seed) {
             Rng rng(seed);
             FrequencySampler f(s);
             std::vector<double> out(n);
             for (auto& v : out) v = f(rng);
             return out;
           },
           py::arg("n"), py::arg("seed") = 0);

  m.def("gaussian", [](double nu, double sigma) { SpectralModel s(GaussianSpectrum{nu, sigma}); s.validate(); return s; },
        py::arg("center_frequency_hz"), py::arg("sigma_nu_hz"));
  m.def("lorentzian", [](double nu, double hwhm) { SpectralModel s(LorentzianSpectrum{nu, hwhm}); s.validate(); return s; },
        py::arg("center_frequency_hz"), py::arg("hwhm_hz"));
  m.def("tabulated", &tabulated, py::arg("points"), "Visibility law from (delta_l_um, visibility) pairs.");
  m.def("calibrate_gaussian", &calibrate_gaussian, py::arg("coherence_length_um"),
        py::arg("center_wavelength_nm") = kDefaultWavelengthNm);
  m.def("reference_cw_table", [] { return SpectralModel(reference_cw_table()); });
  m.def("reference_sp_table", [] { return SpectralModel(reference_sp_table()); });

  m.def("plate_opd_um", [](double theta, double d, double n) { return plate_opd_um({d, n}, theta); },
        py::arg("theta_deg"), py::arg("thickness_mm") = 1.0, py::arg("refractive_index") = 1.53);
  m.def("theta_for_opd_deg", [](double dl, double d, double n) { return theta_for_opd_deg({d, n}, dl); },
        py::arg("delta_l_um"), py::arg("thickness_mm") = 1.0, py::arg("refractive_index") = 1.53);
  m.def(
      "detection_probability",
      [](double dl, double x, std::optional<double> nu, std::optional<double> v, double period, double phase) {
        MziConfig c;
        c.delta_l_um = dl;
        c.fringe_period_mm = period;
        c.phase_offset_rad = phase;
        const auto p = detection_probability(c, nu, v, x);
        return std::pair{p.p_d1, p.p_d2};
      },
      py::arg("delta_l_um"), py::arg("x_mm"), py::arg("nu_hz") = py::none(), py::arg("visibility") = py::none(),
      py::arg("fringe_period_mm") = 20.0 / 6.0, py::arg("phase_offset_rad") = 0.0,
      "Returns (p_d1, p_d2).");

  m.def("generate_arrival_times",
        [](double rate, double duration, std::uint64_t seed) {
          Rng rng(seed);
          return generate_arrival_times(rate, 0.0, duration, rng);
        },
        py::arg("rate_cps"), py::arg("duration_s"), py::arg("seed") = 0);
  m.def("mean_photon_number", &mean_photon_number, py::arg("rate_cps"), py::arg("window_s"));
  m.def("bunching_stats", [](const std::vector<double>& t, double w) { return bunch_dict(bunching_stats(t, w)); },
        py::arg("times"), py::arg("window_s"));
  m.def("conditional_number_distribution", [](double mu) {
    const auto d = conditional_number_distribution(mu);
    py::dict r;
    r["mu"] = d.mu;
    r["probabilities"] = d.probabilities;
    r["mean"] = d.mean;
    r["variance"] = d.variance;
    r["fano"] = d.fano;
    return r;
  }, py::arg("mu"));

  m.def(
      "detect",
      [](const std::vector<double>& t, double t_end, double dead_ns, double dark, double jitter_ps, double eff,
         std::uint64_t seed) { return detect(t, SpcmParams{dead_ns, dark, jitter_ps, eff}, 0.0, t_end, seed); },
      py::arg("times"), py::arg("t_end"), py::arg("dead_time_ns") = 22.0, py::arg("dark_rate_cps") = 50.0,
      py::arg("jitter_sigma_ps") = 350.0 / 2.355, py::arg("efficiency") = 1.0, py::arg("seed") = 0);
  m.def("count_coincidences",
        [](const std::vector<double>& a, const std::vector<double>& b, double w) { return count_coincidences(a, b, w); },
        py::arg("clicks_a"), py::arg("clicks_b"), py::arg("window_s") = 6e-9);

  m.def(
      "run_scan",
      [](const std::string& mode, double dl, const std::optional<SpectralModel>& model, double time_scale,
         std::uint64_t seed, std::optional<double> phase) {
        ExperimentConfig c;
        c.mode = parse_source_mode(mode);
        if (model) c.spectral = *model;
        c.scan.time_scale = time_scale;
        c.seed = seed;
        c.fixed_phase_offset_rad = phase;
        py::gil_scoped_release nogil;
        const auto t = run_scan(c, dl);
        py::gil_scoped_acquire gil;
        py::dict d;
        d["delta_l_um"] = t.delta_l_um;
        d["mode"] = to_string(t.mode);
        d["positions_mm"] = t.positions_mm;
        d["values"] = t.values;
        d["monitor_values"] = t.monitor_values;
        d["seed"] = t.seed;
        d["phase_offset_rad"] = t.phase_offset_rad;
        return d;
      },
      py::arg("mode"), py::arg("delta_l_um"), py::arg("model") = py::none(), py::arg("time_scale") = 0.01,
      py::arg("seed") = 1, py::arg("phase_offset_rad") = py::none());

  m.def("fit_fringe",
        [](const std::vector<double>& x, const std::vector<double>& y) { return fit_dict(fit_fringe(x, y)); },
        py::arg("positions_mm"), py::arg("values"));
  m.def(
      "visibility_from_extrema",
      [](const std::vector<double>& x, const std::vector<double>& y, bool correct) {
        const auto p = visibility_from_extrema(x, y, fit_fringe(x, y), 0.0, correct);
        return std::pair{p.visibility, p.sigma};
      },
      py::arg("positions_mm"), py::arg("values"), py::arg("envelope_correction") = true,
      "Fits the trace, then returns (visibility, sigma) from the extrema averages.");
  m.def(
      "fit_visibility_line",
      [](const std::vector<double>& dl, const std::vector<double>& v) {
        if (dl.size() != v.size()) throw ValidationError("delta_l_um and visibility differ in length");
        std::vector<VisibilityPoint> p;
        for (std::size_t i = 0; i < dl.size(); ++i) p.push_back({dl[i], v[i], 0.0});
        const auto r = fit_visibility_line(p);
        py::dict d;
        d["slope_per_um"] = r.slope_per_um;
        d["intercept"] = r.intercept;
        d["coherence_length_um"] = r.coherence_length_um;
        d["dispersion"] = r.dispersion;
        d["n_points"] = r.n_points;
        return d;
      },
      py::arg("delta_l_um"), py::arg("visibility"));

  m.def(
      "simulate_statistics",
      [](double duration, double rate, std::uint64_t seed) {
        ExperimentConfig c;
        c.source_rate_cps = rate;
        c.seed = seed;
        StatisticsReport r;
        {
          py::gil_scoped_release nogil;
          r = simulate_statistics(c, duration);
        }
        py::dict d;
        d["singles_rate_d1_cps"] = r.singles_rate_d1_cps;
        d["singles_rate_d2_cps"] = r.singles_rate_d2_cps;
        d["coincidence_rate_cps"] = r.coincidence_rate_cps;
        d["accidental_rate_cps"] = r.accidental_rate_cps;
        d["mean_photon_number"] = r.mean_photon_number;
        d["doubles_per_ms"] = r.doubles_per_ms;
        d["conditional_fano"] = r.conditional_fano;
        d["detected_bunching"] = bunch_dict(r.detected_bunching);
        return d;
      },
      py::arg("duration_s") = 1.0, py::arg("rate_cps") = 2e6, py::arg("seed") = 1);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "mzisim");
        std::ostringstream out, err;
        int rc;
        {
          py::gil_scoped_release nogil;
          rc = run_cli(args, out, err);
        }
        return py::make_tuple(rc, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line front end; returns (exit_code, stdout, stderr).");
}
