#pragma once

#include <Eigen/Core>
#include <array>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clockreg/levels.hpp"

namespace clockreg {

using Complex = std::complex<double>;
using Amplitudes = Eigen::Matrix<Complex, 8, 1>;

/// Eight complex amplitudes in the interaction picture of a reference level-energy set.
class StateVector {
 public:
  /// |1,-1>, the state the register is loaded in.
  StateVector();
  explicit StateVector(const Amplitudes& amplitudes);

  static StateVector basis(const HyperfineLevel& level);
  /// Normalized sum of the given components.
  static StateVector superposition(std::span<const std::pair<HyperfineLevel, Complex>> terms);

  Complex amplitude(const HyperfineLevel& level) const { return amps_(level.index()); }
  double population(const HyperfineLevel& level) const { return std::norm(amplitude(level)); }
  LevelArray<double> populations() const;
  double norm() const { return amps_.norm(); }

  const Amplitudes& amplitudes() const { return amps_; }
  Amplitudes& amplitudes() { return amps_; }

 private:
  Amplitudes amps_;
};

/// Relative weights of the sigma-, pi and sigma+ components of a microwave field.
using PolarizationMix = std::array<double, 3>;

struct DriveOptions {
  double spectator_cutoff = 1e6;  // Hz
  PolarizationMix polarization_mix{1.0, 1.0, 1.0};
};

/// One coherent drive in the rotating-wave approximation.
///
/// `rabi` is the angular Rabi frequency on `transition`. Other transitions of the same
/// multipolarity within `spectator_cutoff` of `frequency` are driven with strengths scaled by
/// their relative matrix elements and the polarization mix. A TwoPhoton drive couples only
/// its own pair and raises the upper level by `upper_shift` (Hz) while on.
struct DriveTerm {
  TransitionId transition;
  double rabi = 0.0;       // rad/s
  double frequency = 0.0;  // Hz
  double phase = 0.0;      // rad
  Polarization polarization = Polarization::Pi;
  double spectator_cutoff = 1e6;  // Hz
  PolarizationMix polarization_mix{1.0, 1.0, 1.0};
  double upper_shift = 0.0;  // Hz

  static DriveTerm on(const TransitionId& t, double rabi, double frequency, double phase = 0.0,
                      const DriveOptions& options = {});
};

struct PropagationConfig {
  /// Upper bound on the step; 0 selects the largest admissible step.
  double max_step = 0.0;
  double unitarity_check_tol = 1e-10;
};

/// Largest admissible step for a drive set: 1 / (50 x largest |Omega| or |detuning|).
double step_bound(std::span<const DriveTerm> drives, const LevelArray<double>& energies);

/// Propagates `state` for `duration` starting at absolute time `t_start`.
///
/// `energies` are the actual level energies (Hz). The state is expressed in the interaction
/// picture of `reference` (defaults to `energies`); the difference acts as a static detuning.
/// Drives are integrated with a fixed-step fourth-order Magnus scheme in a frame that makes
/// every tree-structured coupling time independent.
StateVector evolve(const StateVector& state, std::span<const DriveTerm> drives, double duration,
                   const LevelArray<double>& energies, double t_start = 0.0,
                   const PropagationConfig& config = {},
                   const std::optional<LevelArray<double>>& reference = std::nullopt);

/// Free precession: phases exp(-2 pi i (E - reference) t).
StateVector free_evolve(const StateVector& state, double duration,
                        const LevelArray<double>& energies,
                        const LevelArray<double>& reference);

/// Two-level transfer probability Omega^2/(Omega^2+delta^2) sin^2(sqrt(Omega^2+delta^2) t / 2).
double rabi_transfer(double omega, double detuning, double duration);

/// Rabi frequency (same units as `detuning`) for which a pi pulse leaves a transition detuned
/// by `detuning`, coupled `strength_ratio` times as strongly, exactly unexcited after k cycles.
double zero_response_rabi(double detuning, int k, double strength_ratio = 1.0);

/// Legs of a two-photon (microwave + rf) transition through an intermediate level.
struct TwoPhotonSpec {
  double mw_rabi = 0.0;  // rad/s
  double rf_rabi = 0.0;  // rad/s
  HyperfineLevel intermediate{2, 0};
  double intermediate_detuning = 100e3;  // Hz, intermediate level above the microwave photon
};

struct TwoPhotonEffective {
  double rabi = 0.0;         // rad/s
  double light_shift = 0.0;  // Hz, shift of the two-photon resonance
  bool weak_detuning = false;  // |detuning| < 5 x the stronger leg
};

/// Adiabatic elimination of the intermediate level:
/// Omega_eff = Omega_mw Omega_rf / (2 Delta), shift = (Omega_mw^2 - Omega_rf^2) / (4 Delta).
TwoPhotonEffective two_photon_effective(const TwoPhotonSpec& spec);

/// Explicit microwave and rf legs for the storage transition, resonant with the two-photon
/// frequency `two_photon_frequency` when the light shift is included.
std::array<DriveTerm, 2> two_photon_legs(const TwoPhotonSpec& spec,
                                         const LevelArray<double>& energies,
                                         double two_photon_frequency, double phase = 0.0);

struct TimedDrive {
  DriveTerm drive;
  double duration = 0.0;
};

struct RoundTripResult {
  StateVector state;
  double theta = 0.0;          // rad, relative |0>/|1> phase picked up
  bool theta_defined = false;  // false when one storage amplitude vanishes
  double leakage = 0.0;        // population outside {|0>, |1>}
  LevelArray<double> residuals{};  // per-level population outside the storage pair
  std::vector<std::string> warnings;
};

/// Runs the mapping pulses forward, then in reverse order, back to back from `t_start`.
RoundTripResult mapping_roundtrip(const StateVector& state, std::span<const TimedDrive> pulses,
                                  const LevelArray<double>& energies, double t_start = 0.0,
                                  double leakage_threshold = 1e-6,
                                  const PropagationConfig& config = {});

}  // namespace clockreg
