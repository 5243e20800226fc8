#include "clockreg/simulate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "clockreg/errors.hpp"
#include "clockreg/parallel.hpp"

namespace clockreg {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::vector<Site> sites_of(SiteMask m) {
  switch (m) {
    case SiteMask::A: return {Site::A};
    case SiteMask::B: return {Site::B};
    case SiteMask::AB: return {Site::A, Site::B};
  }
  return {};
}

Environment sequence_environment(const Environment& env, const Sequence& seq) {
  Environment out = env;
  if (seq.field) out.bias_field = *seq.field;
  return out;
}

LevelArray<double> site_energies(const Environment& env, const SiteShift& shift, bool beff_on) {
  LevelArray<double> e = env.energies();
  if (!beff_on) return e;
  for (std::size_t i = 0; i < kNumLevels; ++i) {
    const auto level = HyperfineLevel::from_index(i);
    e[i] += shift.zeeman * beff_pattern(level);
    if (level.F() == 2) e[i] += shift.light;
  }
  return e;
}

HyperfineLevel fringe_level(const Sequence& seq) {
  for (auto it = seq.items.rbegin(); it != seq.items.rend(); ++it) {
    if (const auto* p = std::get_if<Pulse>(&*it)) return p->transition.upper();
  }
  throw InputError("sequence has no pulse");
}

StateVector run_site(const Sequence& seq, const Environment& base_env, Site site,
                     double scan_value, const std::optional<StateVector>& initial,
                     const RunOptions& options) {
  const Environment env = sequence_environment(base_env, seq);
  const LevelArray<double> reference = env.energies();
  const SiteShift& shift = seq.shift(site);
  LevelArray<double> shifted[2] = {site_energies(env, shift, false),
                                   site_energies(env, shift, true)};
  LevelArray<double> noisy[2] = {shifted[0], shifted[1]};
  for (auto& e : noisy) {
    for (std::size_t i = 0; i < kNumLevels; ++i) e[i] += options.noise * options.noise_pattern[i];
  }
  const std::string scan_var = seq.scan ? seq.scan->var : std::string();

  StateVector psi = initial ? *initial : StateVector::basis(seq.initial);
  bool beff = false;
  double cursor = seq.start_time;
  for (const auto& ti : timeline(seq)) {
    if (ti.start > cursor) psi = free_evolve(psi, ti.start - cursor, noisy[beff], reference);
    if (const auto* p = std::get_if<Pulse>(ti.item)) {
      const Channel* c = seq.find_channel(p->channel);
      if (!c) throw InputError("undeclared channel " + p->channel);
      double frequency = c->frequency;
      if (!c->detune_var.empty()) {
        if (c->detune_var != scan_var || seq.scan->kind != ScanKind::Frequency) {
          throw InputError("channel " + c->id + " detuned by unknown frequency variable " +
                           c->detune_var);
        }
        frequency += scan_value;
      }
      double phase = c->phase_offset;
      if (const auto* v = std::get_if<std::string>(&p->extra_phase)) {
        if (*v != scan_var || seq.scan->kind != ScanKind::Phase) {
          throw InputError("pulse phase uses unknown phase variable " + *v);
        }
        phase += scan_value;
      } else {
        phase += std::get<double>(p->extra_phase);
      }
      const DriveTerm d = env.make_drive(p->transition, p->rabi, frequency, phase);
      const auto& energies = options.noise_during_pulses ? noisy[beff] : shifted[beff];
      psi = evolve(psi, std::span<const DriveTerm>(&d, 1), ti.end - ti.start, energies, ti.start,
                   options.propagation, reference);
    } else if (std::holds_alternative<Delay>(*ti.item)) {
      psi = free_evolve(psi, ti.end - ti.start, noisy[beff], reference);
    } else {
      beff = std::get<BeffSwitch>(*ti.item).on;
    }
    cursor = ti.end;
  }
  return psi;
}

std::vector<double> FringeTable::scan_values(Site site) const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.site == site) out.push_back(r.scan);
  }
  return out;
}

std::vector<double> FringeTable::signal(Site site, const HyperfineLevel& level) const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.site == site) out.push_back(r.populations[level.index()]);
  }
  return out;
}

FringeTable fringe_scan(const Sequence& seq, const Environment& env, const ScanOptions& options) {
  if (!seq.scan) throw InputError("sequence has no scan variable");
  const std::vector<double> values = seq.scan->values();
  if (values.empty()) throw InputError("scan range is empty");
  const std::vector<Site> sites = sites_of(seq.measure);

  std::vector<double> samples{0.0};
  RunOptions run = options.run;
  if (options.ensemble) {
    options.ensemble->validate();
    samples = sample_detunings(*options.ensemble);
    run.noise_pattern = noise_pattern(sequence_environment(env, seq), *options.ensemble);
    run.noise_during_pulses = options.ensemble->during_pulses;
  }

  FringeTable table{.var = seq.scan->var, .kind = seq.scan->kind, .levels = seq.tracked_levels(),
                    .rows = std::vector<FringeRow>(values.size() * sites.size())};
  parallel_for(table.rows.size(), options.jobs, [&](std::size_t k) {
    const double value = values[k / sites.size()];
    const Site site = sites[k % sites.size()];
    LevelArray<double> mean{};
    for (double delta : samples) {
      RunOptions r = run;
      if (options.ensemble) r.noise = delta;
      const auto pops = run_site(seq, env, site, value, std::nullopt, r).populations();
      for (std::size_t i = 0; i < kNumLevels; ++i) mean[i] += pops[i];
    }
    for (auto& m : mean) m /= static_cast<double>(samples.size());
    table.rows[k] = FringeRow{value, site, mean};
  });
  return table;
}

namespace {
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}
}  // namespace

void write_fringe_csv(std::ostream& os, const FringeTable& table) {
  os << (table.kind == ScanKind::Phase ? "scan_deg" : "scan_hz") << ",site";
  for (const auto& l : table.levels) os << ",P(" << l.F() << "," << l.mF() << ")";
  os << '\n';
  for (const auto& r : table.rows) {
    const double scan = table.kind == ScanKind::Phase ? r.scan * 180.0 / kPi : r.scan;
    os << fmt(scan) << ',' << (r.site == Site::A ? "A" : "B");
    for (const auto& l : table.levels) os << ',' << fmt(r.populations[l.index()]);
    os << '\n';
  }
}

ContrastFit fit_contrast(const std::vector<double>& phases, const std::vector<double>& values) {
  const std::size_t n = phases.size();
  if (n != values.size()) throw InputError("fringe phases and values differ in length");
  if (n < 5) throw InputError("contrast fit needs at least 5 points");
  const auto [lo, hi] = std::minmax_element(phases.begin(), phases.end());
  const double span = (*hi - *lo) * static_cast<double>(n) / static_cast<double>(n - 1);
  if (span < 2.0 * kPi * (1.0 - 1e-9)) throw InputError("contrast fit needs a full period");

  ContrastFit fit;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double spread = 0.0;
  for (double v : values) spread = std::max(spread, std::abs(v - mean));
  if (spread < 1e-12) {
    fit.offset = mean;
    fit.degenerate = true;
    return fit;
  }

  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::cos(phases[i]);
    a(i, 2) = std::sin(phases[i]);
    y(i) = values[i];
  }
  const auto qr = a.colPivHouseholderQr();
  if (qr.rank() < 3) {
    fit.offset = mean;
    fit.degenerate = true;
    return fit;
  }
  const Eigen::Vector3d c = qr.solve(y);
  fit.offset = c(0);
  fit.contrast = 2.0 * std::hypot(c(1), c(2));
  fit.phase = std::atan2(c(2), c(1));
  const Eigen::VectorXd r = y - a * c;
  fit.rms = std::sqrt(r.squaredNorm() / static_cast<double>(n));
  // Robust scale (median absolute residual) so a single bad point cannot hide itself.
  std::vector<double> abs_r(n);
  for (std::size_t i = 0; i < n; ++i) abs_r[i] = std::abs(r(static_cast<Eigen::Index>(i)));
  std::nth_element(abs_r.begin(), abs_r.begin() + static_cast<long>(n / 2), abs_r.end());
  const double sigma = 1.4826 * abs_r[n / 2];
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    if (std::abs(r(i)) > 3.0 * sigma && std::abs(r(i)) > 1e-9) ++fit.outliers;
  }
  return fit;
}

ContrastFit fit_fringe(const FringeTable& table, Site site, const HyperfineLevel& level) {
  if (table.kind != ScanKind::Phase) throw InputError("contrast fit needs a phase scan");
  return fit_contrast(table.scan_values(site), table.signal(site, level));
}

}  // namespace clockreg
