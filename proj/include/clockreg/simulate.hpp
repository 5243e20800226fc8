#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "clockreg/dynamics.hpp"
#include "clockreg/environment.hpp"
#include "clockreg/noise.hpp"
#include "clockreg/sequence.hpp"

namespace clockreg {

struct RunOptions {
  PropagationConfig propagation;
  double noise = 0.0;                 // Hz, static detuning of this trajectory
  LevelArray<double> noise_pattern{};  // per-level multiplier of `noise`
  bool noise_during_pulses = false;
};

std::vector<Site> sites_of(SiteMask m);

/// Environment with the sequence's field override applied.
Environment sequence_environment(const Environment& env, const Sequence& seq);

/// Level energies of one site: lattice-shifted Breit-Rabi values plus, while B_eff is on, the
/// site's Zeeman pattern and F=2 light shift.
LevelArray<double> site_energies(const Environment& env, const SiteShift& shift, bool beff_on);

/// Runs the whole schedule on one site for one scan value. The result is in the interaction
/// picture of the unshifted environment energies.
StateVector run_site(const Sequence& seq, const Environment& env, Site site, double scan_value,
                     const std::optional<StateVector>& initial = std::nullopt,
                     const RunOptions& options = {});

/// Level whose population forms the fringe: the upper level of the last pulse.
HyperfineLevel fringe_level(const Sequence& seq);

struct FringeRow {
  double scan = 0.0;
  Site site = Site::A;
  LevelArray<double> populations{};
};

struct FringeTable {
  std::string var;
  ScanKind kind = ScanKind::Phase;
  std::vector<HyperfineLevel> levels;
  std::vector<FringeRow> rows;

  std::vector<double> scan_values(Site site) const;
  std::vector<double> signal(Site site, const HyperfineLevel& level) const;
};

struct ScanOptions {
  RunOptions run;
  std::optional<EnsembleConfig> ensemble;
  unsigned jobs = 1;
};

/// One row per (scan value, measured site); populations averaged over the ensemble if any.
/// Throws InputError when the sequence has no scan.
FringeTable fringe_scan(const Sequence& seq, const Environment& env, const ScanOptions& options = {});

void write_fringe_csv(std::ostream& os, const FringeTable& table);

/// y = offset + (contrast / 2) cos(phi - phase), fitted by linear least squares.
struct ContrastFit {
  double contrast = 0.0;
  double phase = 0.0;  // rad, in (-pi, pi]
  double offset = 0.0;
  double rms = 0.0;
  int outliers = 0;  // residuals beyond 3 robust sigma (1.4826 x median absolute residual)
  bool degenerate = false;
};

/// Needs >= 5 points spanning at least one period; throws InputError otherwise.
ContrastFit fit_contrast(const std::vector<double>& phases, const std::vector<double>& values);
ContrastFit fit_fringe(const FringeTable& table, Site site, const HyperfineLevel& level);

}  // namespace clockreg
