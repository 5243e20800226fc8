#include "clockreg/register.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>

#include "clockreg/errors.hpp"
#include "clockreg/parallel.hpp"
#include "clockreg/simulate.hpp"

namespace clockreg {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

StateVector storage_plus() {
  const std::pair<HyperfineLevel, Complex> terms[] = {{levels::kStorage0, 1.0},
                                                      {levels::kStorage1, 1.0}};
  return StateVector::superposition(terms);
}
}  // namespace

Register make_register(const StateVector& state) {
  Register reg;
  for (auto& s : reg.sites) s.population = state;
  return reg;
}

Register apply_beff(Register reg, double delta_AB, double vA, double vB, Site shifted) {
  if (reg.beff_on) throw InputError("B_eff is already on");
  reg.beff_on = true;
  reg.site(shifted).zeeman_shift = delta_AB;
  reg.site(shifted == Site::A ? Site::B : Site::A).zeeman_shift = 0.0;
  reg.site(Site::A).light_shift_delta = vA;
  reg.site(Site::B).light_shift_delta = vB;
  return reg;
}

Register remove_beff(Register reg) {
  reg.beff_on = false;
  for (auto& s : reg.sites) {
    s.zeeman_shift = 0.0;
    s.light_shift_delta = 0.0;
  }
  return reg;
}

double gradient_equivalent(double delta_AB, double spacing, double sensitivity) {
  if (spacing == 0.0) throw InputError("site spacing must be nonzero");
  if (sensitivity == 0.0) throw InputError("field sensitivity must be nonzero");
  return delta_AB / sensitivity / spacing;
}

double solve_zero_response_rabi(double delta, int k) {
  if (!(delta > 0.0)) throw InputError("zero-response detuning must be > 0");
  return zero_response_rabi(delta, k, 1.0);
}

double shift_phase_deg(double shift, double duration) { return 360.0 * shift * duration; }

Sequence mapping_sequence(const Environment& env, const MappingSchedule& s) {
  if (!(s.omega1 > 0.0) || !(s.omega2 > 0.0)) throw InputError("mapping Rabi frequencies must be > 0");
  Sequence seq;
  seq.field = env.bias_field;
  seq.initial = levels::kStorage0;
  seq.site_a = SiteShift{0.0, s.vA};
  seq.site_b = SiteShift{s.delta_AB, s.vB};
  const LevelArray<double> a = site_energies(env, seq.site_a, true);
  auto resonance = [&](const TransitionId& t) {
    return a[t.upper().index()] - a[t.lower().index()];
  };
  seq.channels.push_back(Channel{.id = "c00p", .frequency = resonance(transitions::kMap0)});
  seq.channels.push_back(Channel{.id = "c11p", .frequency = resonance(transitions::kMap1)});
  Pulse p0{.channel = "c00p", .transition = transitions::kMap0, .area = kPi,
           .rabi = kTwoPi * s.omega1, .sites = SiteMask::A};
  Pulse p1{.channel = "c11p", .transition = transitions::kMap1, .area = kPi,
           .rabi = kTwoPi * s.omega2, .sites = SiteMask::A};
  seq.items.push_back(BeffSwitch{true});
  seq.items.push_back(s.reverse ? p1 : p0);
  seq.items.push_back(s.reverse ? p0 : p1);
  seq.measure = SiteMask::AB;
  return seq;
}

Register site_selective_map(const Environment& env, const Register& reg, const Sequence& mapping,
                            const PropagationConfig& config) {
  if (!reg.beff_on) throw InputError("site-selective mapping needs B_eff on");
  Sequence seq = mapping;
  seq.site_a = SiteShift{reg.site(Site::A).zeeman_shift, reg.site(Site::A).light_shift_delta};
  seq.site_b = SiteShift{reg.site(Site::B).zeeman_shift, reg.site(Site::B).light_shift_delta};
  seq.scan.reset();
  if (seq.items.empty() || !std::holds_alternative<BeffSwitch>(seq.items.front())) {
    seq.items.insert(seq.items.begin(), BeffSwitch{true});
  }
  Register out = reg;
  RunOptions opts;
  opts.propagation = config;
  for (auto& s : out.sites) s.population = run_site(seq, env, s.site, 0.0, s.population, opts);
  return out;
}

MappingMetrics evaluate_mapping(const Environment& env, const MappingSchedule& schedule,
                                const PropagationConfig& config) {
  const Sequence seq = mapping_sequence(env, schedule);
  const StateVector initial = storage_plus();
  Register reg = apply_beff(make_register(initial), schedule.delta_AB, schedule.vA, schedule.vB);
  const Register mapped = site_selective_map(env, reg, seq, config);

  MappingMetrics m;
  m.duration = total_duration(seq);
  const StateVector& a = mapped.site(Site::A).population;
  m.a_leakage = std::max(0.0, 1.0 - a.population(levels::kWorking0) - a.population(levels::kWorking1));

  const StateVector& b = mapped.site(Site::B).population;
  const auto before = initial.populations(), after = b.populations();
  for (std::size_t i = 0; i < kNumLevels; ++i) m.b_disturbance += 0.5 * std::abs(after[i] - before[i]);

  const StateVector ideal =
      free_evolve(initial, m.duration, site_energies(env, seq.site_b, true), env.energies());
  const Complex b0 = b.amplitude(levels::kStorage0), b1 = b.amplitude(levels::kStorage1);
  if (std::abs(b0) > 1e-9 && std::abs(b1) > 1e-9) {
    const double ref = std::arg(ideal.amplitude(levels::kStorage1) / ideal.amplitude(levels::kStorage0));
    m.b_phase_error = wrap_angle(std::arg(b1 / b0) - ref);
  }
  return m;
}

void IsolationCriteria::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0)) throw InputError(std::string(name) + " must lie in (0, 1]");
  };
  check(leakage_max, "leakage_max");
  check(ab_crosstalk_max, "ab_crosstalk_max");
  if (!(delta_AB > 0.0)) throw InputError("delta_AB limit must be > 0");
}

namespace {

bool better(const GridPoint& x, const GridPoint& y) {
  const double tol = 1e-12 * std::max(1.0, std::max(x.score, y.score));
  if (std::abs(x.score - y.score) > tol) return x.score < y.score;
  if (x.schedule.omega1 != y.schedule.omega1) return x.schedule.omega1 < y.schedule.omega1;
  if (x.schedule.omega2 != y.schedule.omega2) return x.schedule.omega2 < y.schedule.omega2;
  return x.schedule.delta_AB < y.schedule.delta_AB;
}

std::vector<double> axis(double lo, double hi, int n) {
  if (n == 1 || lo == hi) return {lo};
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

}  // namespace

IsolationResult solve_isolation(const Environment& env, const IsolationCriteria& criteria,
                                const IsolationSearch& search) {
  criteria.validate();
  if (search.points < 1) throw InputError("isolation grid needs at least one point per axis");
  if (!(search.omega1_min > 0.0 && search.omega1_min <= search.omega1_max &&
        search.omega2_min > 0.0 && search.omega2_min <= search.omega2_max &&
        search.delta_min > 0.0 && search.delta_min <= criteria.delta_AB)) {
    throw InputError("invalid isolation search ranges");
  }
  auto evaluate = [&](const MappingSchedule& s) {
    GridPoint p{s, evaluate_mapping(env, s), 0.0};
    p.score = std::max(p.metrics.a_leakage / criteria.leakage_max,
                       p.metrics.b_disturbance / criteria.ab_crosstalk_max);
    return p;
  };

  const auto o1 = axis(search.omega1_min, search.omega1_max, search.points);
  const auto o2 = axis(search.omega2_min, search.omega2_max, search.points);
  const auto dd = axis(search.delta_min, criteria.delta_AB, search.points);
  IsolationResult result;
  result.grid.resize(o1.size() * o2.size() * dd.size());
  parallel_for(result.grid.size(), search.jobs, [&](std::size_t k) {
    const std::size_t i = k / (o2.size() * dd.size());
    const std::size_t j = (k / dd.size()) % o2.size();
    const std::size_t l = k % dd.size();
    result.grid[k] = evaluate(MappingSchedule{.omega1 = o1[i], .omega2 = o2[j], .delta_AB = dd[l]});
  });
  result.evaluations = result.grid.size();

  GridPoint best = result.grid.front();
  for (const auto& p : result.grid) {
    if (better(p, best)) best = p;
  }

  // Golden-section refinement along each axis within one grid cell of the best point.
  auto refine = [&](double MappingSchedule::*field, double lo, double hi, double step) {
    const double start = best.schedule.*field;
    double a = std::max(lo, start - step), b = std::min(hi, start + step);
    if (!(b > a)) return;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    auto at = [&](double v) {
      MappingSchedule s = best.schedule;
      s.*field = v;
      ++result.evaluations;
      return evaluate(s);
    };
    double c = b - g * (b - a), d = a + g * (b - a);
    GridPoint pc = at(c), pd = at(d);
    for (int it = 0; it < search.refine_iterations; ++it) {
      if (better(pc, pd)) {
        b = d;
        d = c;
        pd = pc;
        c = b - g * (b - a);
        pc = at(c);
      } else {
        a = c;
        c = d;
        pc = pd;
        d = a + g * (b - a);
        pd = at(d);
      }
    }
    if (better(pc, best)) best = pc;
    if (better(pd, best)) best = pd;
  };
  auto spacing = [&](double lo, double hi) {
    return search.points > 1 ? (hi - lo) / (search.points - 1) : 0.0;
  };
  refine(&MappingSchedule::omega1, search.omega1_min, search.omega1_max,
         spacing(search.omega1_min, search.omega1_max));
  refine(&MappingSchedule::omega2, search.omega2_min, search.omega2_max,
         spacing(search.omega2_min, search.omega2_max));
  refine(&MappingSchedule::delta_AB, search.delta_min, criteria.delta_AB,
         spacing(search.delta_min, criteria.delta_AB));

  result.best = best;
  result.feasible = best.score <= 1.0;
  return result;
}

void write_operating_point(std::ostream& os, const MappingSchedule& s) {
  char buf[64];
  auto line = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s=%.17g\n", key, v);
    os << buf;
  };
  line("mapping.omega1", s.omega1);
  line("mapping.omega2", s.omega2);
  line("mapping.delta_AB", s.delta_AB);
  line("mapping.vA", s.vA);
  line("mapping.vB", s.vB);
  os << "mapping.reverse=" << (s.reverse ? "true" : "false") << '\n';
}

MappingSchedule read_operating_point(std::istream& is) {
  MappingSchedule s;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("line " + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string v) {
      const auto b = v.find_first_not_of(" \t\r");
      const auto e = v.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "mapping.reverse") {
      if (value != "true" && value != "false") throw InputError("mapping.reverse must be true or false");
      s.reverse = value == "true";
      continue;
    }
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw InputError("line " + std::to_string(lineno) + ": bad number '" + value + "'");
    }
    if (key == "mapping.omega1") s.omega1 = v;
    else if (key == "mapping.omega2") s.omega2 = v;
    else if (key == "mapping.delta_AB") s.delta_AB = v;
    else if (key == "mapping.vA") s.vA = v;
    else if (key == "mapping.vB") s.vB = v;
    else throw InputError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return s;
}

}  // namespace clockreg
