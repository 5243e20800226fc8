#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "clockreg/dynamics.hpp"
#include "clockreg/environment.hpp"
#include "clockreg/sequence.hpp"

namespace clockreg {

struct SiteConfig {
  Site site = Site::A;
  double zeeman_shift = 0.0;       // Hz, Delta_AB on the shifted site
  double light_shift_delta = 0.0;  // Hz, V_A or V_B
  StateVector population;
};

/// Two-site unit cell. Site shifts act only while `beff_on`.
struct Register {
  std::array<SiteConfig, 2> sites{SiteConfig{.site = Site::A}, SiteConfig{.site = Site::B}};
  bool beff_on = false;
  double beff_ramp = 300e-6;  // s, bookkeeping only: the ramp is instantaneous for the spins

  SiteConfig& site(Site s) { return sites[s == Site::A ? 0 : 1]; }
  const SiteConfig& site(Site s) const { return sites[s == Site::A ? 0 : 1]; }
};

/// Both sites start in `state`.
Register make_register(const StateVector& state = StateVector());

/// Switches B_eff on: `shifted` gets the Zeeman splitting delta_AB, sites get light shifts
/// vA, vB. Throws InputError when B_eff is already on.
Register apply_beff(Register reg, double delta_AB, double vA = 0.0, double vB = 0.0,
                    Site shifted = Site::B);
Register remove_beff(Register reg);

/// Field gradient (T/m) equivalent to a splitting delta_AB (Hz) across `spacing` (m) for a
/// transition with linear sensitivity `sensitivity` (Hz/T).
double gradient_equivalent(double delta_AB, double spacing, double sensitivity);

/// Rabi frequency (Hz) whose pi pulse leaves a transition `delta` Hz away unexcited after k
/// generalized cycles: delta / sqrt(4k^2 - 1).
double solve_zero_response_rabi(double delta, int k);

/// Phase (degrees) accumulated by a frequency offset over a duration.
double shift_phase_deg(double shift, double duration);

/// Site-selective mapping parameters. Rabi frequencies are Omega / 2 pi in Hz.
struct MappingSchedule {
  double omega1 = 0.0;  // |0> -> |0'>
  double omega2 = 0.0;  // |1> -> |1'>
  double delta_AB = 0.0;
  double vA = 0.0;
  double vB = 0.0;
  bool reverse = false;  // drive |1> -> |1'> first
};

/// B_eff on, then the two mapping pi pulses tuned to site A.
Sequence mapping_sequence(const Environment& env, const MappingSchedule& schedule);

/// Runs a mapping sequence on both sites of a register with B_eff on.
/// The sequence's own site shifts are replaced by the register's.
Register site_selective_map(const Environment& env, const Register& reg, const Sequence& mapping,
                            const PropagationConfig& config = {});

struct MappingMetrics {
  double a_leakage = 0.0;       // A-site population outside {|0'>, |1'>}
  double b_disturbance = 0.0;   // total-variation distance of B-site populations
  double b_phase_error = 0.0;   // rad, B-site storage coherence phase vs free evolution
  double duration = 0.0;        // s
};

/// Simulates the mapping on a register prepared in (|0> + |1>)/sqrt 2 on both sites.
MappingMetrics evaluate_mapping(const Environment& env, const MappingSchedule& schedule,
                                const PropagationConfig& config = {});

struct IsolationCriteria {
  double leakage_max = 0.03;
  double ab_crosstalk_max = 0.03;
  double delta_AB = 30e3;  // Hz, largest splitting the lattice can provide

  void validate() const;
};

struct IsolationSearch {
  double omega1_min = 2e3, omega1_max = 20e3;
  double omega2_min = 2e3, omega2_max = 10e3;
  double delta_min = 15e3;
  int points = 9;         // per axis
  int refine_iterations = 30;
  unsigned jobs = 1;
};

struct GridPoint {
  MappingSchedule schedule;
  MappingMetrics metrics;
  double score = 0.0;  // max(leakage / leakage_max, crosstalk / ab_crosstalk_max)
};

struct IsolationResult {
  bool feasible = false;
  GridPoint best;
  std::vector<GridPoint> grid;
  std::size_t evaluations = 0;
};

/// Coarse grid over (omega1, omega2, delta_AB), then golden-section refinement per axis
/// around the best point. Ties break toward lower omega1, then omega2, then delta_AB.
IsolationResult solve_isolation(const Environment& env, const IsolationCriteria& criteria,
                                const IsolationSearch& search = {});

void write_operating_point(std::ostream& os, const MappingSchedule& s);
MappingSchedule read_operating_point(std::istream& is);

}  // namespace clockreg
