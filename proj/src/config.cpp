#include "clockreg/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>

#include "clockreg/errors.hpp"

namespace clockreg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const char* b = v.data();
  if (!v.empty() && v[0] == '+') ++b;
  auto [p, ec] = std::from_chars(b, v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw InputError(key + ": '" + v + "' is not a number");
  }
  return out;
}

unsigned long long parse_count(const std::string& key, const std::string& v) {
  unsigned long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw InputError(key + ": '" + v + "' is not a non-negative integer");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError(key + ": '" + v + "' is not a boolean");
}

TransitionId parse_transition(const std::string& key, const std::string& v) {
  int f1, m1, f2, m2;
  char tail;
  if (std::sscanf(v.c_str(), "|%d,%d>->|%d,%d>%c", &f1, &m1, &f2, &m2, &tail) != 4) {
    throw InputError(key + ": expected a transition like |1,-1>->|2,0>, got '" + v + "'");
  }
  try {
    return TransitionId::between(HyperfineLevel{f1, m1}, HyperfineLevel{f2, m2});
  } catch (const std::exception& e) {
    throw InputError(key + ": " + e.what());
  }
}

struct Entry {
  std::string key;
  std::function<void(Config&, const std::string&)> set;
  std::function<std::string(const Config&)> get;
};

template <typename Ref>
Entry real(std::string key, Ref ref) {
  return {key,
          [key, ref](Config& c, const std::string& v) { ref(c) = parse_double(key, v); },
          [ref](const Config& c) { return shortest(ref(const_cast<Config&>(c))); }};
}

template <typename Ref>
Entry count(std::string key, Ref ref) {
  return {key,
          [key, ref](Config& c, const std::string& v) {
            using T = std::remove_reference_t<decltype(ref(c))>;
            ref(c) = static_cast<T>(parse_count(key, v));
          },
          [ref](const Config& c) { return std::to_string(ref(const_cast<Config&>(c))); }};
}

template <typename Ref>
Entry flag(std::string key, Ref ref) {
  return {key,
          [key, ref](Config& c, const std::string& v) { ref(c) = parse_bool(key, v); },
          [ref](const Config& c) { return std::string(ref(const_cast<Config&>(c)) ? "true" : "false"); }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    t.push_back(real("atom.hyperfine_splitting", [](Config& c) -> double& { return c.env.atom.hyperfine_splitting; }));
    t.push_back(real("atom.gJ", [](Config& c) -> double& { return c.env.atom.gJ; }));
    t.push_back(real("atom.gI", [](Config& c) -> double& { return c.env.atom.gI; }));
    t.push_back(real("atom.nuclear_spin", [](Config& c) -> double& { return c.env.atom.nuclear_spin; }));
    t.push_back(real("atom.recoil_energy", [](Config& c) -> double& { return c.env.atom.recoil_energy; }));
    t.push_back(real("atom.lattice_wavelength", [](Config& c) -> double& { return c.env.atom.lattice_wavelength; }));
    t.push_back(real("atom.mass", [](Config& c) -> double& { return c.env.atom.mass; }));
    t.push_back(real("field.bias", [](Config& c) -> double& { return c.env.bias_field; }));
    t.push_back(real("lattice.xy_depth", [](Config& c) -> double& { return c.env.lattice.xy_depth; }));
    t.push_back(real("lattice.z_depth", [](Config& c) -> double& { return c.env.lattice.z_depth; }));
    t.push_back(real("lattice.diff_shift_slope", [](Config& c) -> double& { return c.env.lattice.diff_shift_slope; }));
    t.push_back(real("lattice.z_diff_shift", [](Config& c) -> double& { return c.env.lattice.z_diff_shift; }));
    t.push_back(real("beff.delta_AB_slope", [](Config& c) -> double& { return c.env.beff.delta_AB_slope; }));
    t.push_back({"beff.site",
                 [](Config& c, const std::string& v) {
                   if (v != "A" && v != "B") throw InputError("beff.site: expected A or B, got '" + v + "'");
                   c.env.beff.site = v == "A" ? Site::A : Site::B;
                 },
                 [](const Config& c) { return std::string(c.env.beff.site == Site::A ? "A" : "B"); }});
    t.push_back(real("drive.spectator_cutoff", [](Config& c) -> double& { return c.env.drive.spectator_cutoff; }));
    t.push_back(real("drive.sigma_minus_weight", [](Config& c) -> double& { return c.env.drive.polarization_mix[0]; }));
    t.push_back(real("drive.pi_weight", [](Config& c) -> double& { return c.env.drive.polarization_mix[1]; }));
    t.push_back(real("drive.sigma_plus_weight", [](Config& c) -> double& { return c.env.drive.polarization_mix[2]; }));
    t.push_back(real("drive.two_photon_light_shift", [](Config& c) -> double& { return c.env.two_photon_light_shift; }));
    t.push_back(real("propagation.max_step", [](Config& c) -> double& { return c.propagation.max_step; }));
    t.push_back(real("propagation.unitarity_tol", [](Config& c) -> double& { return c.propagation.unitarity_check_tol; }));
    t.push_back(real("ledger.delta_omega_tolerance", [](Config& c) -> double& { return c.delta_omega_tolerance; }));
    t.push_back(real("magic.lo", [](Config& c) -> double& { return c.magic_lo; }));
    t.push_back(real("magic.hi", [](Config& c) -> double& { return c.magic_hi; }));
    t.push_back(count("noise.samples", [](Config& c) -> std::size_t& { return c.ensemble.n_samples; }));
    t.push_back(count("noise.seed", [](Config& c) -> std::uint64_t& { return c.ensemble.seed; }));
    t.push_back({"noise.distribution",
                 [](Config& c, const std::string& v) {
                   try {
                     c.ensemble.distribution.kind = distribution_from_string(v);
                   } catch (const std::exception& e) {
                     throw InputError(std::string("noise.distribution: ") + e.what());
                   }
                 },
                 [](const Config& c) { return to_string(c.ensemble.distribution.kind); }});
    t.push_back(real("noise.width", [](Config& c) -> double& { return c.ensemble.distribution.width; }));
    t.push_back(real("noise.mean", [](Config& c) -> double& { return c.ensemble.distribution.mean; }));
    t.push_back({"noise.profile",
                 [](Config& c, const std::string& v) {
                   if (v == "differential") c.ensemble.profile = NoiseProfile::Differential;
                   else if (v == "field") c.ensemble.profile = NoiseProfile::Field;
                   else throw InputError("noise.profile: expected differential or field, got '" + v + "'");
                 },
                 [](const Config& c) {
                   return std::string(c.ensemble.profile == NoiseProfile::Field ? "field" : "differential");
                 }});
    t.push_back({"noise.reference",
                 [](Config& c, const std::string& v) { c.ensemble.reference = parse_transition("noise.reference", v); },
                 [](const Config& c) { return c.ensemble.reference.label(); }});
    t.push_back(flag("noise.during_pulses", [](Config& c) -> bool& { return c.ensemble.during_pulses; }));
    t.push_back(real("mapping.omega1", [](Config& c) -> double& { return c.mapping.omega1; }));
    t.push_back(real("mapping.omega2", [](Config& c) -> double& { return c.mapping.omega2; }));
    t.push_back(real("mapping.delta_AB", [](Config& c) -> double& { return c.mapping.delta_AB; }));
    t.push_back(real("mapping.vA", [](Config& c) -> double& { return c.mapping.vA; }));
    t.push_back(real("mapping.vB", [](Config& c) -> double& { return c.mapping.vB; }));
    t.push_back(flag("mapping.reverse", [](Config& c) -> bool& { return c.mapping.reverse; }));
    t.push_back(real("isolation.leakage_max", [](Config& c) -> double& { return c.criteria.leakage_max; }));
    t.push_back(real("isolation.crosstalk_max", [](Config& c) -> double& { return c.criteria.ab_crosstalk_max; }));
    t.push_back(real("isolation.delta_AB_max", [](Config& c) -> double& { return c.criteria.delta_AB; }));
    t.push_back(real("search.omega1_min", [](Config& c) -> double& { return c.search.omega1_min; }));
    t.push_back(real("search.omega1_max", [](Config& c) -> double& { return c.search.omega1_max; }));
    t.push_back(real("search.omega2_min", [](Config& c) -> double& { return c.search.omega2_min; }));
    t.push_back(real("search.omega2_max", [](Config& c) -> double& { return c.search.omega2_max; }));
    t.push_back(real("search.delta_min", [](Config& c) -> double& { return c.search.delta_min; }));
    t.push_back(count("search.points", [](Config& c) -> int& { return c.search.points; }));
    t.push_back(count("search.refine_iterations", [](Config& c) -> int& { return c.search.refine_iterations; }));
    return t;
  }();
  return table;
}

}  // namespace

void set_config_value(Config& cfg, const std::string& key, const std::string& value) {
  for (const auto& e : entries()) {
    if (e.key == key) {
      e.set(cfg, trim(value));
      return;
    }
  }
  throw InputError("unknown configuration key '" + key + "'");
}

void load_config(Config& cfg, std::istream& in, const std::string& source) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw InputError(where + "expected key=value");
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const InputError& e) {
      throw InputError(where + e.what());
    }
  }
}

void load_config_file(Config& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read configuration file '" + path + "'");
  load_config(cfg, in, path);
}

std::vector<std::pair<std::string, std::string>> config_entries(const Config& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : entries()) out.emplace_back(e.key, e.get(cfg));
  return out;
}

void dump_config(std::ostream& os, const Config& cfg) {
  for (const auto& [k, v] : config_entries(cfg)) os << k << '=' << v << '\n';
}

}  // namespace clockreg
