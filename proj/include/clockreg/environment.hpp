#pragma once

#include "clockreg/atom.hpp"
#include "clockreg/dynamics.hpp"

namespace clockreg {

inline constexpr double kDefaultBiasField = 322.9e-6;  // T

/// Static physical context shared by builders, simulation and calibration.
struct Environment {
  AtomSpec atom;
  double bias_field = kDefaultBiasField;
  LatticeConfig lattice;
  EffectiveField beff;
  DriveOptions drive;
  /// Two-photon light shift (Hz) applied to the storage pair while a two-photon pulse is on.
  double two_photon_light_shift = 0.0;

  void validate() const;

  /// Level energies (Hz) at the bias field including the lattice differential shift.
  LevelArray<double> energies() const;

  /// Resonance of `t` at the bias field (lattice shift included, site shifts excluded).
  double resonance(const TransitionId& t) const;

  /// Frequency a channel must carry to drive `t` resonantly (adds the two-photon shift).
  double drive_frequency(const TransitionId& t) const;

  DriveTerm make_drive(const TransitionId& t, double rabi, double frequency, double phase) const;
};

}  // namespace clockreg
