#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "clockreg/environment.hpp"
#include "clockreg/noise.hpp"
#include "clockreg/register.hpp"

namespace clockreg {

/// Everything the command-line tool can be told. Loaded from key=value text; every key has a
/// default, see dump_config.
struct Config {
  Environment env;
  PropagationConfig propagation;
  double delta_omega_tolerance = 0.1;  // Hz
  double magic_lo = 100e-6;            // T, bracket for the magic-field search
  double magic_hi = 600e-6;
  EnsembleConfig ensemble;             // used when noise.width > 0
  MappingSchedule mapping{.omega1 = 13279.056191361393, .omega2 = 3887.709571751176, .delta_AB = 23e3};
  IsolationCriteria criteria;
  IsolationSearch search;
};

/// Applies one "key=value" assignment. Throws InputError on an unknown key or a bad value.
void set_config_value(Config& cfg, const std::string& key, const std::string& value);

/// Reads key=value lines; '#' starts a comment. Later lines win.
void load_config(Config& cfg, std::istream& in, const std::string& source = "<config>");
void load_config_file(Config& cfg, const std::string& path);

/// "key=value" for every key, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const Config& cfg);
void dump_config(std::ostream& os, const Config& cfg);

}  // namespace clockreg
