#include "clockreg/atom.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "clockreg/angular.hpp"
#include "clockreg/errors.hpp"

namespace clockreg {

void AtomSpec::validate() const {
  if (!(hyperfine_splitting > 0.0)) throw InputError("hyperfine_splitting must be positive");
  if (nuclear_spin != 1.5) throw InputError("nuclear_spin is fixed at 3/2");
  if (!(recoil_energy > 0.0)) throw InputError("recoil_energy must be positive");
  if (!(lattice_wavelength > 0.0)) throw InputError("lattice_wavelength must be positive");
  if (!(mass > 0.0)) throw InputError("mass must be positive");
  if (!std::isfinite(gJ) || !std::isfinite(gI)) throw InputError("g-factors must be finite");
}

double recoil_frequency(double wavelength, double mass) {
  return constants::kPlanck / (2.0 * mass * wavelength * wavelength);
}

void LatticeConfig::validate() const {
  if (xy_depth < 0.0 || z_depth < 0.0) throw InputError("lattice depths must be >= 0");
}

namespace {

// Unchecked Breit-Rabi: accepts B < 0 so central differences work at B = 0.
double breit_rabi_raw(const AtomSpec& spec, int F, int mF, double field) {
  const double hfs = spec.hyperfine_splitting;
  const double mu = constants::kBohrMagnetonHz * field;
  const double two_i_plus_1 = 2.0 * spec.nuclear_spin + 1.0;
  const double x = (spec.gJ - spec.gI) * mu / hfs;
  const double m = static_cast<double>(mF);
  const double base = -hfs / (2.0 * two_i_plus_1) + spec.gI * m * mu;
  if (std::abs(m) == spec.nuclear_spin + 0.5) {
    // Stretched states: the square root is the signed linear term.
    return base + 0.5 * hfs * (1.0 + (m > 0 ? x : -x));
  }
  const double root = std::sqrt(1.0 + 4.0 * m * x / two_i_plus_1 + x * x);
  return base + (F == 2 ? 0.5 : -0.5) * hfs * root;
}

double transition_raw(const AtomSpec& spec, const TransitionId& t, double field) {
  return breit_rabi_raw(spec, t.upper().F(), t.upper().mF(), field) -
         breit_rabi_raw(spec, t.lower().F(), t.lower().mF(), field);
}

double derivative_step(double field) { return std::max(1e-6 * std::abs(field), 1e-9); }

}  // namespace

double breit_rabi_energy(const AtomSpec& spec, const HyperfineLevel& level, double field) {
  if (!(field >= 0.0)) throw std::domain_error("magnetic field must be >= 0");
  return breit_rabi_raw(spec, level.F(), level.mF(), field);
}

LevelArray<double> level_energies(const AtomSpec& spec, double field,
                                  const LatticeConfig& lattice) {
  LevelArray<double> out{};
  const double light = lattice.differential_shift();
  for (std::size_t i = 0; i < kNumLevels; ++i) {
    const auto level = HyperfineLevel::from_index(i);
    out[i] = breit_rabi_energy(spec, level, field) + (level.F() == 2 ? light : 0.0);
  }
  return out;
}

double beff_pattern(const HyperfineLevel& level) noexcept {
  return level.F() == 2 ? level.mF() : -level.mF();
}

double transition_frequency(const AtomSpec& spec, const TransitionId& t, double field,
                            const LatticeConfig& lattice, double site_shift) {
  const double light = t.is_hyperfine() ? lattice.differential_shift() : 0.0;
  return breit_rabi_energy(spec, t.upper(), field) - breit_rabi_energy(spec, t.lower(), field) +
         light + site_shift;
}

double field_sensitivity(const AtomSpec& spec, const TransitionId& t, double field) {
  const double h = derivative_step(field);
  return (transition_raw(spec, t, field + h) - transition_raw(spec, t, field - h)) / (2.0 * h);
}

double field_curvature(const AtomSpec& spec, const TransitionId& t, double field) {
  constexpr double h = 1e-6;
  return (transition_raw(spec, t, field + h) - 2.0 * transition_raw(spec, t, field) +
          transition_raw(spec, t, field - h)) /
         (h * h);
}

double find_magic_field(const AtomSpec& spec, const TransitionId& t, double lo, double hi) {
  if (!(lo >= 0.0) || !(hi > lo)) throw InputError("field bracket must satisfy 0 <= lo < hi");
  double s_lo = field_sensitivity(spec, t, lo);
  const double s_hi = field_sensitivity(spec, t, hi);
  if (s_lo == 0.0) return lo;
  if (s_hi == 0.0) return hi;
  if ((s_lo > 0.0) == (s_hi > 0.0)) {
    throw NoSolutionError("field sensitivity of " + t.label() +
                          " does not change sign in the bracket");
  }
  constexpr double tolerance = 1e-9;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    const double s_mid = field_sensitivity(spec, t, mid);
    if (s_mid == 0.0) return mid;
    if ((s_mid > 0.0) == (s_lo > 0.0)) {
      lo = mid;
      s_lo = s_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

using Basis = Eigen::Matrix<double, 8, 8>;

// Columns: |F, mF> states expanded over the uncoupled basis |mJ, mI>, row = (mJ + 1/2) * 4 + (mI + 3/2).
const Basis& coupled_states() {
  static const Basis states = [] {
    Basis out = Basis::Zero();
    for (std::size_t i = 0; i < kNumLevels; ++i) {
      const auto level = HyperfineLevel::from_index(i);
      for (int tmj = -1; tmj <= 1; tmj += 2) {
        for (int tmi = -3; tmi <= 3; tmi += 2) {
          const int row = ((tmj + 1) / 2) * 4 + (tmi + 3) / 2;
          out(row, static_cast<Eigen::Index>(i)) =
              angular::clebsch_gordan(1, tmj, 3, tmi, 2 * level.F(), 2 * level.mF());
        }
      }
    }
    return out;
  }();
  return states;
}

// Spherical component J_q (J = 1/2) acting on the uncoupled basis.
Basis electron_spin_component(int q) {
  Basis out = Basis::Zero();
  for (int tmi = -3; tmi <= 3; tmi += 2) {
    const int col_up = 4 + (tmi + 3) / 2;
    const int col_down = (tmi + 3) / 2;
    switch (q) {
      case 0:
        out(col_up, col_up) = 0.5;
        out(col_down, col_down) = -0.5;
        break;
      case 1:  // J_{+1} = -J_+ / sqrt(2)
        out(col_up, col_down) = -1.0 / std::sqrt(2.0);
        break;
      case -1:  // J_{-1} = J_- / sqrt(2)
        out(col_down, col_up) = 1.0 / std::sqrt(2.0);
        break;
      default:
        break;
    }
  }
  return out;
}

double raw_matrix_element(const TransitionId& t, int q) {
  const auto& states = coupled_states();
  const Basis jq = electron_spin_component(q);
  const auto u = static_cast<Eigen::Index>(t.upper().index());
  const auto l = static_cast<Eigen::Index>(t.lower().index());
  return std::abs(states.col(u).dot(jq * states.col(l)));
}

}  // namespace

double coupling_strength(const TransitionId& t, Polarization polarization) {
  int q = 0;
  switch (polarization) {
    case Polarization::SigmaMinus: q = -1; break;
    case Polarization::Pi: q = 0; break;
    case Polarization::SigmaPlus: q = 1; break;
    case Polarization::TwoPhoton: return 0.0;
  }
  if (t.delta_m() != q) return 0.0;
  static const double norm = raw_matrix_element(transitions::kWorking, 0);
  return raw_matrix_element(t, q) / norm;
}

double delta_AB(const EffectiveField& eff, const LatticeConfig& lattice) {
  return eff.delta_AB_slope * lattice.xy_depth;
}

double crosstalk_figure(double diff_shift_change, double zeeman_shift) {
  if (zeeman_shift == 0.0) throw InputError("crosstalk figure needs a nonzero Zeeman shift");
  return std::abs(diff_shift_change) / std::abs(zeeman_shift);
}

}  // namespace clockreg
