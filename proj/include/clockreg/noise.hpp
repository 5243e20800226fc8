#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "clockreg/environment.hpp"
#include "clockreg/levels.hpp"

namespace clockreg {

struct Sequence;

enum class DistributionKind { Lorentzian, Gaussian, TwoPoint };
std::string to_string(DistributionKind k);
DistributionKind distribution_from_string(const std::string& s);

/// Static detuning distribution. `width` is the HWHM (Lorentzian), sigma (Gaussian) or the
/// half separation (two-point), all in Hz.
struct DetuningDistribution {
  DistributionKind kind = DistributionKind::Lorentzian;
  double width = 0.0;
  double mean = 0.0;

  void validate() const;
  double quantile(double u) const;
};

/// How a sampled detuning moves the levels.
/// Differential: every F=2 level shifts by delta (a uniform hyperfine shift).
/// Field: a field offset that moves `reference` by delta; levels follow their own slopes.
enum class NoiseProfile { Differential, Field };

struct EnsembleConfig {
  std::size_t n_samples = 400;
  std::uint64_t seed = 1;
  DetuningDistribution distribution;
  NoiseProfile profile = NoiseProfile::Differential;
  TransitionId reference = transitions::kMap0;
  bool during_pulses = false;  // static shifts also act while pulses are on

  void validate() const;
};

/// Counter-based uniform variate in (0, 1) from (seed, index).
double uniform01(std::uint64_t seed, std::uint64_t index);

/// Stratified, jittered inverse-CDF samples: sample i lies in quantile stratum [i, i+1)/n.
std::vector<double> sample_detunings(const EnsembleConfig& cfg);

/// Per-level multiplier of a sampled detuning.
LevelArray<double> noise_pattern(const Environment& env, const EnsembleConfig& cfg);

struct ContrastPoint {
  double delay = 0.0;     // s
  double contrast = 0.0;
  double stderr_ = 0.0;
};

/// Ensemble-averaged fringe contrast of a Ramsey-type sequence (one with a phase scan) for
/// each total delay. Every Delay of `seq` is rescaled to the requested total.
std::vector<ContrastPoint> ensemble_contrast(const Sequence& seq, const Environment& env,
                                             const EnsembleConfig& cfg,
                                             const std::vector<double>& delays,
                                             unsigned jobs = 1);

enum class DecayModel { Exponential, Gaussian };

struct T2Fit {
  double t2star = 0.0;  // s; infinity when the data do not decay
  double c0 = 0.0;
  double residual = 0.0;  // rms
  bool infinite = false;
};

/// Least-squares fit of C0 exp(-t/T) or C0 exp(-(t/T)^2).
T2Fit fit_t2star(const std::vector<ContrastPoint>& table, DecayModel model = DecayModel::Exponential);

/// A detuning width scaled by a transition's relative field sensitivity.
double sensitivity_scaled_width(double base_width, double ratio);

/// Detuning width (Hz) of a transition with slope s1 (Hz/T) and curvature s2 (Hz/T^2) under
/// a field spread sigma (T): |s1| sigma + |s2| sigma^2 / 2.
double field_noise_width(double sigma, double s1, double s2);

void write_contrast_csv(std::ostream& os, const std::vector<ContrastPoint>& table);

}  // namespace clockreg
