#include "clockreg/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "clockreg/config.hpp"
#include "clockreg/errors.hpp"
#include "clockreg/parallel.hpp"
#include "clockreg/register.hpp"
#include "clockreg/seqlang.hpp"
#include "clockreg/simulate.hpp"
#include "json.hpp"

#ifndef CLOCKREG_VERSION
#define CLOCKREG_VERSION "0.0.0"
#endif

namespace clockreg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Context {
  std::string subcommand;
  std::string config_file;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  bool strict = false;
  std::string output_dir = ".";
  bool output_dir_set = false;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  Config cfg;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

void build_config(Context& ctx) {
  if (!ctx.config_file.empty()) load_config_file(ctx.cfg, ctx.config_file);
  for (const auto& o : ctx.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + o + "'");
    set_config_value(ctx.cfg, o.substr(0, eq), o.substr(eq + 1));
  }
  if (ctx.seed) ctx.cfg.ensemble.seed = *ctx.seed;
  ctx.cfg.env.validate();
}

// Everything that determines the outputs; wall-clock time lives in the timing sidecar.
json manifest(const Context& ctx) {
  return {{"tool", "clockreg"},
          {"version", CLOCKREG_VERSION},
          {"subcommand", ctx.subcommand},
          {"inputs", ctx.inputs},
          {"config_file", ctx.config_file},
          {"overrides", ctx.overrides},
          {"seed", ctx.cfg.ensemble.seed},
          {"outputs", ctx.outputs}};
}

std::string output_path(const Context& ctx, const std::string& name) {
  return (fs::path(ctx.output_dir) / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  const fs::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << content;
  if (!f) throw InputError("failed writing '" + path + "'");
}

void write_timing(const Context& ctx, const std::string& stem, double seconds) {
  json t{{"subcommand", ctx.subcommand}, {"wall_clock_s", seconds}, {"jobs", ctx.jobs}, {"outputs", ctx.outputs}};
  write_file(output_path(ctx, stem + ".timing.json"), t.dump(2) + "\n");
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json fit_json(const ContrastFit& f) {
  return {{"contrast", f.contrast}, {"phase_rad", f.phase}, {"offset", f.offset},
          {"rms", f.rms},           {"outliers", f.outliers}, {"degenerate", f.degenerate}};
}

const char* site_name(Site s) { return s == Site::A ? "A" : "B"; }

// Parses and validates a sequence file; diagnostics go to stderr.
Sequence load_sequence(Context& ctx, const std::string& path) {
  ctx.inputs.push_back(path);
  seqlang::ValidationOptions vo;
  vo.env = ctx.cfg.env;
  vo.delta_omega_tolerance = ctx.cfg.delta_omega_tolerance;
  const auto c = seqlang::compile({path, read_file(path)}, vo);
  bool warned = false;
  for (const auto& d : c.diagnostics) {
    *ctx.err << seqlang::format_diagnostic(d, path) << '\n';
    warned = warned || d.severity == seqlang::Severity::Warning;
  }
  if (!c.ok()) throw InputError(path + ": sequence rejected");
  if (warned && ctx.strict) throw InputError(path + ": warnings are errors under --strict");
  return c.sequence;
}

std::optional<EnsembleConfig> ensemble_of(const Config& cfg) {
  if (!(cfg.ensemble.distribution.width > 0.0)) return std::nullopt;
  cfg.ensemble.validate();
  return cfg.ensemble;
}

int cmd_magic_field(Context& ctx) {
  const auto& atom = ctx.cfg.env.atom;
  atom.validate();
  const double b = find_magic_field(atom, transitions::kStorage, ctx.cfg.magic_lo, ctx.cfg.magic_hi);
  const double s_work = field_sensitivity(atom, transitions::kWorking, b);
  json report{{"magic_field_T", b},
              {"magic_field_uT", b * 1e6},
              {"working_sensitivity_Hz_per_T", s_work},
              {"working_sensitivity_kHz_per_mT", s_work * 1e-6},
              {"storage_curvature_Hz_per_T2", field_curvature(atom, transitions::kStorage, b)},
              {"storage_frequency_Hz", transition_frequency(atom, transitions::kStorage, b)}};
  if (ctx.output_dir_set) ctx.outputs.push_back(output_path(ctx, "magic_field.json"));
  report["manifest"] = manifest(ctx);
  const std::string text = report.dump(2) + "\n";
  *ctx.out << text;
  if (ctx.output_dir_set) write_file(ctx.outputs.back(), text);
  return kOk;
}

int cmd_run(Context& ctx, const std::string& seqfile) {
  const Sequence seq = load_sequence(ctx, seqfile);
  const std::string stem = fs::path(seqfile).stem().string();
  const Environment& env = ctx.cfg.env;
  json report;
  report["duration_s"] = total_duration(seq);
  if (const auto ledger = derive_ledger(seq); ledger.complete()) report["delta_omega_Hz"] = delta_omega(ledger);

  if (seq.scan) {
    ScanOptions so;
    so.run.propagation = ctx.cfg.propagation;
    so.ensemble = ensemble_of(ctx.cfg);
    so.jobs = ctx.jobs;
    const FringeTable table = fringe_scan(seq, env, so);
    const std::string csv_path = output_path(ctx, stem + ".csv");
    const std::string json_path = output_path(ctx, stem + ".json");
    ctx.outputs = {csv_path, json_path};

    const HyperfineLevel level = fringe_level(seq);
    report["signal_level"] = level.label();
    report["scan"] = {{"var", seq.scan->var},
                      {"kind", seq.scan->kind == ScanKind::Phase ? "phase" : "frequency"},
                      {"points", seq.scan->values().size()}};
    for (Site s : sites_of(seq.measure)) {
      const auto y = table.signal(s, level);
      if (seq.scan->kind == ScanKind::Phase) {
        const ContrastFit fit = fit_contrast(table.scan_values(s), y);
        report["sites"][site_name(s)] = fit_json(fit);
        *ctx.out << "site " << site_name(s) << ": contrast " << fit.contrast << ", phase " << fit.phase << " rad\n";
      } else {
        const auto x = table.scan_values(s);
        double sum = 0.0, peak = 0.0, at_zero = y.front(), best = std::abs(x.front());
        for (std::size_t i = 0; i < y.size(); ++i) {
          sum += y[i];
          peak = std::max(peak, y[i]);
          if (std::abs(x[i]) < best) best = std::abs(x[i]), at_zero = y[i];
        }
        report["sites"][site_name(s)] = {{"mean", sum / y.size()}, {"max", peak}, {"at_zero", at_zero}};
        *ctx.out << "site " << site_name(s) << ": mean transfer " << sum / y.size() << ", max " << peak << '\n';
      }
    }
    std::ostringstream csv;
    csv << "# manifest " << manifest(ctx).dump() << '\n';
    write_fringe_csv(csv, table);
    write_file(csv_path, csv.str());
    report["manifest"] = manifest(ctx);
    write_file(json_path, report.dump(2) + "\n");
  } else {
    const std::string json_path = output_path(ctx, stem + ".json");
    ctx.outputs = {json_path};
    RunOptions ro;
    ro.propagation = ctx.cfg.propagation;
    for (Site s : sites_of(seq.measure)) {
      const StateVector psi = run_site(seq, env, s, 0.0, std::nullopt, ro);
      json pops;
      for (const auto& l : seq.tracked_levels()) pops[l.label()] = psi.population(l);
      report["sites"][site_name(s)] = {{"populations", pops}};
      *ctx.out << "site " << site_name(s) << ":";
      for (const auto& l : seq.tracked_levels()) *ctx.out << ' ' << l.label() << '=' << psi.population(l);
      *ctx.out << '\n';
    }
    report["manifest"] = manifest(ctx);
    write_file(json_path, report.dump(2) + "\n");
  }
  return kOk;
}

struct Axis {
  std::string name;
  std::vector<double> values;
};

Axis parse_axis(const std::string& spec) {
  static const std::set<std::string> known{"omega1", "omega2", "delta_AB", "noise_width"};
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw InputError("--axis expects name=lo:hi:n, got '" + spec + "'");
  Axis a;
  a.name = spec.substr(0, eq);
  if (!known.count(a.name)) {
    throw InputError("unknown sweep axis '" + a.name + "' (use omega1, omega2, delta_AB, noise_width)");
  }
  double lo = 0, hi = 0;
  int n = 0;
  char tail;
  if (std::sscanf(spec.c_str() + eq + 1, "%lf:%lf:%d%c", &lo, &hi, &n, &tail) != 3 || n < 1 || hi < lo) {
    throw InputError("axis '" + a.name + "' expects lo:hi:n with lo <= hi and n >= 1");
  }
  for (int i = 0; i < n; ++i) a.values.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
  return a;
}

int cmd_sweep(Context& ctx, const std::string& seqfile, const std::vector<std::string>& axis_specs) {
  std::vector<Axis> axes;
  std::set<std::string> names;
  for (const auto& s : axis_specs) {
    axes.push_back(parse_axis(s));
    if (!names.insert(axes.back().name).second) throw InputError("axis '" + axes.back().name + "' given twice");
  }
  const Sequence base = load_sequence(ctx, seqfile);
  const Environment& env = ctx.cfg.env;

  // Mapping schedule implied by the sequence, falling back to the configured one.
  MappingSchedule schedule = ctx.cfg.mapping;
  bool has_mapping = false;
  for (const Item& item : base.items) {
    if (const auto* p = std::get_if<Pulse>(&item)) {
      if (p->transition == transitions::kMap0) schedule.omega1 = p->rabi / kTwoPi, has_mapping = true;
      if (p->transition == transitions::kMap1) schedule.omega2 = p->rabi / kTwoPi, has_mapping = true;
    }
  }
  if (has_mapping) {
    schedule.delta_AB = base.site_b.zeeman;
    schedule.vA = base.site_a.light;
    schedule.vB = base.site_b.light;
  }

  std::size_t total = 1;
  for (const auto& a : axes) total *= a.values.size();
  struct PointResult {
    json params;
    MappingMetrics metrics;
    std::optional<double> contrast;
  };
  std::vector<PointResult> results(total);
  parallel_for(total, ctx.jobs, [&](std::size_t k) {
    Sequence seq = base;
    MappingSchedule s = schedule;
    Config cfg = ctx.cfg;
    json params = json::object();
    std::size_t rest = k;
    for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
      const double v = it->values[rest % it->values.size()];
      rest /= it->values.size();
      params[it->name] = v;
      if (it->name == "omega1") s.omega1 = v;
      else if (it->name == "omega2") s.omega2 = v;
      else if (it->name == "delta_AB") s.delta_AB = v;
      else cfg.ensemble.distribution.width = v;
    }
    for (Item& item : seq.items) {
      if (auto* p = std::get_if<Pulse>(&item)) {
        if (params.contains("omega1") && p->transition == transitions::kMap0) p->rabi = kTwoPi * s.omega1;
        if (params.contains("omega2") && p->transition == transitions::kMap1) p->rabi = kTwoPi * s.omega2;
      }
    }
    if (params.contains("delta_AB")) seq.site_b.zeeman = s.delta_AB;
    PointResult r;
    r.params = params;
    r.metrics = evaluate_mapping(env, s, ctx.cfg.propagation);
    if (seq.scan && seq.scan->kind == ScanKind::Phase) {
      ScanOptions so;
      so.run.propagation = cfg.propagation;
      so.ensemble = ensemble_of(cfg);
      const auto table = fringe_scan(seq, env, so);
      const Site site = sites_of(seq.measure).front();
      r.contrast = fit_contrast(table.scan_values(site), table.signal(site, fringe_level(seq))).contrast;
    }
    results[k] = std::move(r);
  });

  auto dominates = [](const PointResult& a, const PointResult& b) {
    const double ca = a.contrast.value_or(0.0), cb = b.contrast.value_or(0.0);
    const bool no_worse = a.metrics.a_leakage <= b.metrics.a_leakage &&
                          a.metrics.b_disturbance <= b.metrics.b_disturbance && ca >= cb;
    const bool better = a.metrics.a_leakage < b.metrics.a_leakage ||
                        a.metrics.b_disturbance < b.metrics.b_disturbance || ca > cb;
    return no_worse && better;
  };
  json points = json::array(), pareto = json::array();
  std::size_t feasible = 0;
  for (std::size_t i = 0; i < total; ++i) {
    const auto& r = results[i];
    const bool ok = r.metrics.a_leakage <= ctx.cfg.criteria.leakage_max &&
                    r.metrics.b_disturbance <= ctx.cfg.criteria.ab_crosstalk_max;
    feasible += ok;
    json p{{"params", r.params},
           {"a_leakage", r.metrics.a_leakage},
           {"b_disturbance", r.metrics.b_disturbance},
           {"b_phase_error_rad", r.metrics.b_phase_error},
           {"mapping_duration_s", r.metrics.duration},
           {"feasible", ok}};
    p["contrast"] = r.contrast ? json(*r.contrast) : json(nullptr);
    points.push_back(p);
    bool dominated = false;
    for (std::size_t j = 0; j < total && !dominated; ++j) dominated = j != i && dominates(results[j], r);
    if (!dominated) pareto.push_back(i);
  }
  json ax = json::array();
  for (const auto& a : axes) ax.push_back({{"name", a.name}, {"values", a.values}});

  const std::string stem = fs::path(seqfile).stem().string();
  ctx.outputs = {output_path(ctx, stem + ".sweep.json")};
  json report{{"axes", ax},
              {"base_schedule",
               {{"omega1", schedule.omega1}, {"omega2", schedule.omega2}, {"delta_AB", schedule.delta_AB}}},
              {"points", points},
              {"feasible_count", feasible},
              {"pareto", pareto},
              {"manifest", manifest(ctx)}};
  write_file(ctx.outputs.front(), report.dump(2) + "\n");
  *ctx.out << total << " points, " << feasible << " feasible, " << pareto.size() << " on the Pareto front\n";
  return kOk;
}

int cmd_calibrate(Context& ctx) {
  IsolationSearch search = ctx.cfg.search;
  search.jobs = ctx.jobs;
  const IsolationResult r = solve_isolation(ctx.cfg.env, ctx.cfg.criteria, search);
  const std::string report_path = output_path(ctx, "calibration.json");
  const std::string op_path = output_path(ctx, "operating_point.cfg");
  ctx.outputs = {report_path};
  if (r.feasible) ctx.outputs.push_back(op_path);
  const auto& b = r.best;
  json report{{"feasible", r.feasible},
              {"evaluations", r.evaluations},
              {"criteria",
               {{"leakage_max", ctx.cfg.criteria.leakage_max},
                {"crosstalk_max", ctx.cfg.criteria.ab_crosstalk_max},
                {"delta_AB_max", ctx.cfg.criteria.delta_AB}}},
              {"best",
               {{"omega1", b.schedule.omega1},
                {"omega2", b.schedule.omega2},
                {"delta_AB", b.schedule.delta_AB},
                {"a_leakage", b.metrics.a_leakage},
                {"b_disturbance", b.metrics.b_disturbance},
                {"b_phase_error_rad", b.metrics.b_phase_error},
                {"score", b.score}}},
              {"manifest", manifest(ctx)}};
  write_file(report_path, report.dump(2) + "\n");
  *ctx.out << "omega1 " << b.schedule.omega1 << " Hz, omega2 " << b.schedule.omega2 << " Hz, delta_AB "
           << b.schedule.delta_AB << " Hz: leakage " << b.metrics.a_leakage << ", crosstalk "
           << b.metrics.b_disturbance << '\n';
  if (!r.feasible) throw NoSolutionError("no mapping schedule meets the isolation criteria; best point reported in " + report_path);
  std::ostringstream op;
  op << "# " << manifest(ctx).dump() << '\n';
  write_operating_point(op, b.schedule);
  write_file(op_path, op.str());
  return kOk;
}

int cmd_fmt(Context& ctx, const std::string& file, bool in_place) {
  const Sequence seq = load_sequence(ctx, file);
  const std::string text = seqlang::format(seq);
  if (in_place) write_file(file, text);
  else *ctx.out << text;
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  CLI::App app{"Site-resolved clock-qubit register simulator", "clockreg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CLOCKREG_VERSION);
  app.add_option("--config", ctx.config_file, "key=value configuration file");
  app.add_option("--set", ctx.overrides, "configuration override key=value (repeatable, last wins)");
  app.add_option("--seed", ctx.seed, "noise ensemble seed");
  app.add_option("--jobs", ctx.jobs, "worker threads (0 = all cores)");
  app.add_flag("--strict", ctx.strict, "treat warnings as errors");
  auto* outdir = app.add_option("--output-dir", ctx.output_dir, "directory for output files");

  auto* magic = app.add_subcommand("magic-field", "field where the storage transition is first-order insensitive");
  std::string seqfile;
  auto* run_cmd = app.add_subcommand("run", "simulate a .pseq sequence and write fringe/spectrum tables");
  run_cmd->add_option("sequence", seqfile, "sequence file")->required();
  std::vector<std::string> axes;
  auto* sweep = app.add_subcommand("sweep", "grid over mapping parameters and noise width");
  sweep->add_option("sequence", seqfile, "sequence file")->required();
  sweep->add_option("--axis", axes, "name=lo:hi:n with name in omega1, omega2, delta_AB, noise_width");
  auto* calibrate = app.add_subcommand("calibrate", "search Rabi frequencies and delta_AB meeting the isolation criteria");
  bool in_place = false;
  auto* fmt = app.add_subcommand("fmt", "print the canonical form of a .pseq file");
  fmt->add_option("sequence", seqfile, "sequence file")->required();
  fmt->add_flag("-i,--in-place", in_place, "rewrite the file");
  bool dump = false;
  auto* config = app.add_subcommand("config", "show configuration");
  config->add_flag("--dump", dump, "print every key with its effective value")->required();
  for (auto* sub : {magic, run_cmd, sweep, calibrate, fmt, config}) sub->fallthrough();

  const auto started = std::chrono::steady_clock::now();
  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::CallForVersion&) {
      out << CLOCKREG_VERSION << '\n';
      return kOk;
    } catch (const CLI::ParseError& e) {
      err << "clockreg: " << e.what() << '\n';
      return kInputError;
    }
    ctx.output_dir_set = outdir->count() > 0;
    build_config(ctx);
    int code = kOk;
    std::string stem;
    if (magic->parsed()) {
      ctx.subcommand = "magic-field";
      code = cmd_magic_field(ctx);
      stem = "magic_field";
    } else if (run_cmd->parsed()) {
      ctx.subcommand = "run";
      code = cmd_run(ctx, seqfile);
      stem = fs::path(seqfile).stem().string();
    } else if (sweep->parsed()) {
      ctx.subcommand = "sweep";
      code = cmd_sweep(ctx, seqfile, axes);
      stem = fs::path(seqfile).stem().string() + ".sweep";
    } else if (calibrate->parsed()) {
      ctx.subcommand = "calibrate";
      code = cmd_calibrate(ctx);
      stem = "calibration";
    } else if (fmt->parsed()) {
      ctx.subcommand = "fmt";
      return cmd_fmt(ctx, seqfile, in_place);
    } else {
      ctx.subcommand = "config";
      dump_config(out, ctx.cfg);
      return kOk;
    }
    if (!ctx.outputs.empty()) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      write_timing(ctx, stem, secs);
    }
    return code;
  } catch (const NoSolutionError& e) {
    err << "clockreg: no solution: " << e.what() << '\n';
    return kNoSolution;
  } catch (const NumericalError& e) {
    err << "clockreg: numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "clockreg: " << e.what() << '\n';
    return kInputError;
  } catch (const std::domain_error& e) {
    err << "clockreg: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "clockreg: internal error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace clockreg::cli
