#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <numbers>
#include <sstream>

#include "clockreg/cli.hpp"
#include "clockreg/config.hpp"
#include "clockreg/errors.hpp"
#include "clockreg/noise.hpp"
#include "clockreg/register.hpp"
#include "clockreg/seqlang.hpp"
#include "clockreg/simulate.hpp"

namespace py = pybind11;
using namespace clockreg;

namespace {

using Settings = std::map<std::string, std::string>;

Config make_config(const Settings& settings) {
  Config cfg;
  for (const auto& [k, v] : settings) set_config_value(cfg, k, v);
  cfg.env.validate();
  return cfg;
}

TransitionId transition(const std::string& name) {
  if (name == "storage") return transitions::kStorage;
  if (name == "working") return transitions::kWorking;
  if (name == "map0") return transitions::kMap0;
  if (name == "map1") return transitions::kMap1;
  Config probe;
  set_config_value(probe, "noise.reference", name);
  return probe.ensemble.reference;
}

py::list diagnostics(const std::vector<seqlang::Diagnostic>& ds, const std::string& name) {
  py::list out;
  for (const auto& d : ds) {
    py::dict e;
    e["severity"] = d.severity == seqlang::Severity::Error ? "error" : "warning";
    e["code"] = d.code;
    e["message"] = d.message;
    e["line"] = d.loc.line;
    e["column"] = d.loc.column;
    e["text"] = seqlang::format_diagnostic(d, name);
    out.append(e);
  }
  return out;
}

Sequence compile_or_throw(const std::string& text, const Config& cfg, const std::string& name) {
  seqlang::ValidationOptions vo;
  vo.env = cfg.env;
  vo.delta_omega_tolerance = cfg.delta_omega_tolerance;
  const auto c = seqlang::compile({name, text}, vo);
  if (!c.ok()) {
    std::string msg;
    for (const auto& d : c.diagnostics) msg += seqlang::format_diagnostic(d, name) + "\n";
    throw InputError(msg);
  }
  return c.sequence;
}

const char* site_name(Site s) { return s == Site::A ? "A" : "B"; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-site clock-qubit register simulation";
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NoSolutionError>(m, "NoSolutionError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "magic_field",
      [](const Settings& s) {
        const Config cfg = make_config(s);
        return find_magic_field(cfg.env.atom, transitions::kStorage, cfg.magic_lo, cfg.magic_hi);
      },
      py::arg("settings") = Settings{}, "Field (T) where the storage transition is first-order field insensitive.");
  m.def(
      "transition_frequency",
      [](const std::string& t, double field, const Settings& s) {
        return transition_frequency(make_config(s).env.atom, transition(t), field);
      },
      py::arg("transition"), py::arg("field"), py::arg("settings") = Settings{});
  m.def(
      "field_sensitivity",
      [](const std::string& t, double field, const Settings& s) {
        return field_sensitivity(make_config(s).env.atom, transition(t), field);
      },
      py::arg("transition"), py::arg("field"), py::arg("settings") = Settings{}, "Hz/T");
  m.def("rabi_transfer", &rabi_transfer, py::arg("omega"), py::arg("detuning"), py::arg("duration"));
  m.def("solve_zero_response_rabi", &solve_zero_response_rabi, py::arg("delta"), py::arg("k"));
  m.def("crosstalk_figure", &crosstalk_figure, py::arg("diff_shift_change"), py::arg("zeeman_shift"));
  m.def("shift_phase_deg", &shift_phase_deg, py::arg("shift"), py::arg("duration"));

  m.def(
      "check_sequence",
      [](const std::string& text, const std::string& name, const Settings& s) {
        const Config cfg = make_config(s);
        seqlang::ValidationOptions vo;
        vo.env = cfg.env;
        vo.delta_omega_tolerance = cfg.delta_omega_tolerance;
        const auto c = seqlang::compile({name, text}, vo);
        py::dict out;
        out["ok"] = c.ok();
        out["diagnostics"] = diagnostics(c.diagnostics, name);
        out["canonical"] = c.ok() ? py::object(py::str(seqlang::format(c.sequence))) : py::object(py::none());
        return out;
      },
      py::arg("text"), py::arg("name") = "<string>", py::arg("settings") = Settings{},
      "Parses and validates .pseq text; returns ok, diagnostics and the canonical form.");

  m.def(
      "run_sequence",
      [](const std::string& text, const Settings& s, unsigned jobs) {
        const Config cfg = make_config(s);
        const Sequence seq = compile_or_throw(text, cfg, "<string>");
        py::dict out;
        if (!seq.scan) {
          RunOptions ro;
          ro.propagation = cfg.propagation;
          for (Site site : sites_of(seq.measure)) {
            const auto psi = run_site(seq, cfg.env, site, 0.0, std::nullopt, ro);
            py::dict pops;
            for (const auto& l : seq.tracked_levels()) pops[py::str(l.label())] = psi.population(l);
            out[site_name(site)] = pops;
          }
          return out;
        }
        ScanOptions so;
        so.run.propagation = cfg.propagation;
        if (cfg.ensemble.distribution.width > 0.0) so.ensemble = cfg.ensemble;
        so.jobs = jobs;
        FringeTable table;
        {
          py::gil_scoped_release release;
          table = fringe_scan(seq, cfg.env, so);
        }
        const auto level = fringe_level(seq);
        for (Site site : sites_of(seq.measure)) {
          py::dict d;
          d["scan"] = table.scan_values(site);
          d["signal"] = table.signal(site, level);
          if (seq.scan->kind == ScanKind::Phase) {
            const auto fit = fit_contrast(table.scan_values(site), table.signal(site, level));
            d["contrast"] = fit.contrast;
            d["phase"] = fit.phase;
          }
          out[site_name(site)] = d;
        }
        return out;
      },
      py::arg("text"), py::arg("settings") = Settings{}, py::arg("jobs") = 1,
      "Simulates .pseq text: per-site fringe (scan, signal, contrast) or final populations.");

  m.def(
      "evaluate_mapping",
      [](double omega1, double omega2, double delta_AB, const Settings& s) {
        const Config cfg = make_config(s);
        const auto r = evaluate_mapping(cfg.env, {.omega1 = omega1, .omega2 = omega2, .delta_AB = delta_AB},
                                        cfg.propagation);
        py::dict out;
        out["a_leakage"] = r.a_leakage;
        out["b_disturbance"] = r.b_disturbance;
        out["b_phase_error"] = r.b_phase_error;
        out["duration"] = r.duration;
        return out;
      },
      py::arg("omega1"), py::arg("omega2"), py::arg("delta_AB"), py::arg("settings") = Settings{});

  m.def(
      "storage_t2star",
      [](double hwhm, const std::vector<double>& delays, std::size_t samples, std::uint64_t seed, unsigned jobs) {
        const Environment env;
        RamseyOptions o;
        o.rabi = 2.0 * std::numbers::pi * 750.0;
        EnsembleConfig cfg;
        cfg.distribution.width = hwhm;
        cfg.n_samples = samples;
        cfg.seed = seed;
        std::vector<ContrastPoint> table;
        {
          py::gil_scoped_release release;
          table = ensemble_contrast(build_ramsey(env, transitions::kStorage, 0.0, o), env, cfg, delays, jobs);
        }
        std::vector<double> contrast;
        for (const auto& p : table) contrast.push_back(p.contrast);
        py::dict out;
        out["delays"] = delays;
        out["contrast"] = contrast;
        out["t2star"] = fit_t2star(table).t2star;
        return out;
      },
      py::arg("hwhm"), py::arg("delays"), py::arg("samples") = 400, py::arg("seed") = 1, py::arg("jobs") = 1,
      "Storage Ramsey contrast under a Lorentzian detuning ensemble and its fitted T2*.");

  m.def(
      "cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "clockreg");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit code, stdout, stderr).");

  m.attr("__version__") = CLOCKREG_VERSION;
}
