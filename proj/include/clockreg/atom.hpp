#pragma once

#include "clockreg/levels.hpp"

namespace clockreg {

namespace constants {
inline constexpr double kPlanck = 6.62607015e-34;         // J s
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg
inline constexpr double kBohrMagnetonHz = 1.39962449361e10;   // mu_B / h, Hz/T
inline constexpr double kRb87Mass = 86.909180520 * kAtomicMassUnit;
}  // namespace constants

/// Ground-manifold constants of 87Rb. Frequencies in Hz, lengths in m.
struct AtomSpec {
  double hyperfine_splitting = 6.834682610904e9;
  double gJ = 2.00233113;
  double gI = -0.0009951414;
  double nuclear_spin = 1.5;
  double recoil_energy = 3499.0;  // E_R / h
  double lattice_wavelength = 810.0e-9;
  double mass = constants::kRb87Mass;

  /// Throws InputError on a non-physical parameter set.
  void validate() const;
};

/// E_R / h = h / (2 M lambda^2).
double recoil_frequency(double wavelength, double mass);

inline constexpr double kMeasuredDiffShiftSlope = 6.1;    // Hz per E_R
inline constexpr double kCalculatedDiffShiftSlope = 4.9;  // Hz per E_R

/// Lattice depths in E_R; the differential (F=2 vs F=1) light shift is linear in xy depth.
struct LatticeConfig {
  double xy_depth = 0.0;
  double z_depth = 0.0;
  double diff_shift_slope = kMeasuredDiffShiftSlope;
  double z_diff_shift = 0.0;  // Hz

  void validate() const;
  double differential_shift() const { return diff_shift_slope * xy_depth + z_diff_shift; }
};

enum class Site { A, B };

/// Phenomenological vector light shift: the B_eff Zeeman splitting scales with xy depth.
struct EffectiveField {
  double delta_AB_slope = 0.0;  // Hz per E_R
  Site site = Site::B;
};

/// Breit-Rabi energy E(F, mF; B) / h in Hz, referenced to the hyperfine centre of gravity.
double breit_rabi_energy(const AtomSpec& spec, const HyperfineLevel& level, double field);

/// All eight Breit-Rabi energies at a field, plus the differential light shift on F=2.
LevelArray<double> level_energies(const AtomSpec& spec, double field,
                                  const LatticeConfig& lattice = {});

/// Per-level multiplier of the B_eff shift: +mF on F=2, -mF on F=1 (linear Zeeman, |gF| = 1/2).
/// Both storage levels get the same multiplier, so the storage pair never moves.
double beff_pattern(const HyperfineLevel& level) noexcept;

double transition_frequency(const AtomSpec& spec, const TransitionId& t, double field,
                            const LatticeConfig& lattice = {}, double site_shift = 0.0);

/// d(frequency)/dB in Hz/T by central difference, relative step 1e-6 with a 1 nT floor.
double field_sensitivity(const AtomSpec& spec, const TransitionId& t, double field);

/// d^2(frequency)/dB^2 in Hz/T^2, central difference with a 1 uT step.
double field_curvature(const AtomSpec& spec, const TransitionId& t, double field);

/// Field in [lo, hi] where field_sensitivity changes sign, by bisection to 1 nT.
/// Throws NoSolutionError when the sensitivity has one sign across the bracket.
double find_magic_field(const AtomSpec& spec, const TransitionId& t, double lo, double hi);

/// |<upper| J_q |lower>| relative to |<2,0| J_0 |1,0>|. Zero for a polarization mismatch.
double coupling_strength(const TransitionId& t, Polarization polarization);

double delta_AB(const EffectiveField& eff, const LatticeConfig& lattice);

/// |diff_shift_change| / |zeeman_shift|.
double crosstalk_figure(double diff_shift_change, double zeeman_shift);

}  // namespace clockreg
