#include "clockreg/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "clockreg/atom.hpp"
#include "clockreg/errors.hpp"

namespace clockreg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using Matrix8 = Eigen::Matrix<Complex, 8, 8>;

double wrap_phase(double phi) {
  phi = std::remainder(phi, kTwoPi);
  return phi <= -std::numbers::pi ? phi + kTwoPi : phi;
}

}  // namespace

StateVector::StateVector() : amps_(Amplitudes::Zero()) {
  amps_(levels::kStorage0.index()) = 1.0;
}

StateVector::StateVector(const Amplitudes& amplitudes) : amps_(amplitudes) {}

StateVector StateVector::basis(const HyperfineLevel& level) {
  Amplitudes a = Amplitudes::Zero();
  a(level.index()) = 1.0;
  return StateVector(a);
}

StateVector StateVector::superposition(
    std::span<const std::pair<HyperfineLevel, Complex>> terms) {
  Amplitudes a = Amplitudes::Zero();
  for (const auto& [level, amp] : terms) a(level.index()) += amp;
  const double n = a.norm();
  if (n == 0.0) throw InputError("superposition has zero norm");
  return StateVector(a / n);
}

LevelArray<double> StateVector::populations() const {
  LevelArray<double> out{};
  for (std::size_t i = 0; i < kNumLevels; ++i) out[i] = std::norm(amps_(i));
  return out;
}

DriveTerm DriveTerm::on(const TransitionId& t, double rabi, double frequency, double phase,
                        const DriveOptions& options) {
  DriveTerm d{.transition = t,
              .rabi = rabi,
              .frequency = frequency,
              .phase = phase,
              .polarization = t.natural_polarization(),
              .spectator_cutoff = options.spectator_cutoff,
              .polarization_mix = options.polarization_mix};
  return d;
}

namespace {

// A retained coupling between levels lo and hi (E_hi > E_lo) driven at `omega`.
struct Edge {
  std::size_t lo;
  std::size_t hi;
  double half_rabi;  // rad/s
  double omega;      // drive angular frequency
  double phase;
  double detuning;   // rad/s, drive minus actual pair frequency
};

int polarization_q(Polarization p) {
  switch (p) {
    case Polarization::SigmaMinus: return -1;
    case Polarization::Pi: return 0;
    case Polarization::SigmaPlus: return 1;
    case Polarization::TwoPhoton: return 2;
  }
  return 0;
}

Edge make_edge(std::size_t a, std::size_t b, double rabi, const DriveTerm& d,
               const LevelArray<double>& energies) {
  const bool a_high = energies[a] > energies[b];
  const std::size_t hi = a_high ? a : b;
  const std::size_t lo = a_high ? b : a;
  const double pair = energies[hi] - energies[lo];
  return Edge{lo, hi, 0.5 * rabi, kTwoPi * d.frequency, d.phase, kTwoPi * (d.frequency - pair)};
}

constexpr double kAddressedWindow = 1e6;  // Hz

std::vector<Edge> retained_edges(std::span<const DriveTerm> drives,
                                 const LevelArray<double>& energies) {
  std::vector<Edge> edges;
  for (const auto& d : drives) {
    if (d.rabi < 0.0) throw InputError("drive Rabi frequency must be >= 0");
    const auto& t = d.transition;
    const std::size_t tl = t.lower().index();
    const std::size_t tu = t.upper().index();
    Edge addressed = make_edge(tl, tu, d.rabi, d, energies);
    const double window = std::max(d.spectator_cutoff, kAddressedWindow);
    if (std::abs(addressed.detuning) > kTwoPi * window) {
      throw InputError("drive at " + std::to_string(d.frequency) + " Hz is not within " +
                       std::to_string(window) + " Hz of " + t.label());
    }
    edges.push_back(addressed);
    if (d.polarization == Polarization::TwoPhoton || d.spectator_cutoff <= 0.0 || d.rabi == 0.0) {
      continue;
    }

    const int q_target = polarization_q(d.polarization);
    const double target_weight =
        d.polarization_mix[static_cast<std::size_t>(q_target + 1)] *
        coupling_strength(t, d.polarization);
    if (target_weight <= 0.0) {
      throw InputError("drive polarization carries no weight on " + t.label());
    }

    for (std::size_t i = 0; i < kNumLevels; ++i) {
      for (std::size_t j = 0; j < kNumLevels; ++j) {
        const auto li = HyperfineLevel::from_index(i);
        const auto lj = HyperfineLevel::from_index(j);
        const int dm = lj.mF() - li.mF();
        const bool hyperfine_pair = li.F() == 1 && lj.F() == 2 && std::abs(dm) <= 1;
        const bool zeeman_pair = li.F() == lj.F() && dm == 1;
        if (t.is_hyperfine() ? !hyperfine_pair : !zeeman_pair) continue;
        if (i == tl && j == tu) continue;
        const TransitionId pair(li, lj);
        const auto pol = pair.natural_polarization();
        const double weight = d.polarization_mix[static_cast<std::size_t>(dm + 1)] *
                              coupling_strength(pair, pol);
        if (weight == 0.0) continue;
        Edge e = make_edge(i, j, d.rabi * weight / target_weight, d, energies);
        if (std::abs(e.detuning) <= kTwoPi * d.spectator_cutoff) edges.push_back(e);
      }
    }
  }
  return edges;
}

double bound_from_edges(const std::vector<Edge>& edges) {
  double fastest = 0.0;
  for (const auto& e : edges) {
    fastest = std::max({fastest, 2.0 * e.half_rabi, std::abs(e.detuning)});
  }
  return fastest > 0.0 ? 1.0 / (50.0 * fastest) : std::numeric_limits<double>::infinity();
}

Matrix8 exp_minus_i(const Matrix8& hermitian, double dt) {
  Eigen::SelfAdjointEigenSolver<Matrix8> solver(hermitian);
  const auto& vals = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();
  Eigen::Matrix<Complex, 8, 1> phases;
  for (int i = 0; i < 8; ++i) phases(i) = std::polar(1.0, -vals(i) * dt);
  return vecs * phases.asDiagonal() * vecs.adjoint();
}

}  // namespace

double step_bound(std::span<const DriveTerm> drives, const LevelArray<double>& energies) {
  return bound_from_edges(retained_edges(drives, energies));
}

StateVector evolve(const StateVector& state, std::span<const DriveTerm> drives, double duration,
                   const LevelArray<double>& energies, double t_start,
                   const PropagationConfig& config,
                   const std::optional<LevelArray<double>>& reference) {
  if (duration < 0.0) throw InputError("evolution duration must be >= 0");
  const LevelArray<double>& ref = reference ? *reference : energies;
  if (duration == 0.0) return state;
  if (drives.empty()) return free_evolve(state, duration, energies, ref);

  const std::vector<Edge> edges = retained_edges(drives, energies);

  // Interaction-picture diagonal (rad/s).
  Eigen::Matrix<double, 8, 1> diag;
  for (std::size_t i = 0; i < kNumLevels; ++i) diag(i) = kTwoPi * (energies[i] - ref[i]);
  for (const auto& d : drives) {
    if (d.polarization == Polarization::TwoPhoton && d.upper_shift != 0.0) {
      diag(d.transition.upper().index()) += kTwoPi * d.upper_shift;
    }
  }

  // Frame: choose nu along a spanning forest so tree couplings become static.
  std::array<double, kNumLevels> nu{};
  std::array<bool, kNumLevels> assigned{};
  std::vector<bool> in_tree(edges.size(), false);
  auto rate = [&](const Edge& e) { return e.omega - kTwoPi * (ref[e.hi] - ref[e.lo]); };
  for (std::size_t root = 0; root < kNumLevels; ++root) {
    if (assigned[root]) continue;
    assigned[root] = true;
    nu[root] = diag(root);
    std::vector<std::size_t> queue{root};
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t v = queue[head];
      for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto& e = edges[k];
        if (e.lo != v && e.hi != v) continue;
        const std::size_t other = e.lo == v ? e.hi : e.lo;
        if (assigned[other]) continue;
        assigned[other] = true;
        in_tree[k] = true;
        nu[other] = e.lo == v ? nu[v] + rate(e) : nu[v] - rate(e);
        queue.push_back(other);
      }
    }
  }

  Matrix8 static_part = Matrix8::Zero();
  for (std::size_t i = 0; i < kNumLevels; ++i) static_part(i, i) = diag(i) - nu[i];
  struct Residual {
    std::size_t lo, hi;
    double half_rabi, rate, phase;
  };
  std::vector<Residual> residuals;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    const double r = rate(e) - (nu[e.hi] - nu[e.lo]);
    if (in_tree[k]) {
      const Complex c = e.half_rabi * std::polar(1.0, -e.phase);
      static_part(e.hi, e.lo) += c;
      static_part(e.lo, e.hi) += std::conj(c);
    } else {
      residuals.push_back({e.lo, e.hi, e.half_rabi, r, e.phase});
    }
  }

  const double bound = bound_from_edges(edges);
  if (config.max_step > 0.0 && config.max_step > bound * (1.0 + 1e-12)) {
    throw NumericalError("step-size violation: max_step " + std::to_string(config.max_step) +
                         " s exceeds bound " + std::to_string(bound) + " s");
  }
  const double max_step = config.max_step > 0.0 ? config.max_step : bound;
  const auto steps = static_cast<long>(std::max(1.0, std::ceil(duration / max_step - 1e-9)));
  const double h = duration / static_cast<double>(steps);

  Amplitudes b = state.amplitudes();
  for (std::size_t i = 0; i < kNumLevels; ++i) b(i) *= std::polar(1.0, nu[i] * t_start);

  if (residuals.empty()) {
    const Matrix8 u = exp_minus_i(static_part, h);
    for (long s = 0; s < steps; ++s) b = u * b;
  } else {
    // Fourth-order Magnus with two Gauss-Legendre nodes.
    const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
    const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
    auto hamiltonian = [&](double t) {
      Matrix8 m = static_part;
      for (const auto& r : residuals) {
        const Complex c = r.half_rabi * std::polar(1.0, -(r.rate * t + r.phase));
        m(r.hi, r.lo) += c;
        m(r.lo, r.hi) += std::conj(c);
      }
      return m;
    };
    for (long s = 0; s < steps; ++s) {
      const double t = t_start + h * static_cast<double>(s);
      const Matrix8 h1 = hamiltonian(t + c1 * h);
      const Matrix8 h2 = hamiltonian(t + c2 * h);
      // exp(Omega) with Omega = -i h (H1+H2)/2 - (sqrt3/12) h^2 [H2, H1]; i.e. exp(-i K h).
      const Matrix8 commutator = h2 * h1 - h1 * h2;
      const Matrix8 k =
          0.5 * (h1 + h2) - Complex(0.0, std::sqrt(3.0) / 12.0 * h) * commutator;
      b = exp_minus_i(k, h) * b;
    }
  }

  const double t_end = t_start + duration;
  for (std::size_t i = 0; i < kNumLevels; ++i) b(i) *= std::polar(1.0, -nu[i] * t_end);

  const double drift = std::abs(b.norm() - state.norm());
  if (drift > config.unitarity_check_tol) {
    std::ostringstream msg;
    msg << "norm drift " << std::scientific << drift << " exceeds tolerance "
        << config.unitarity_check_tol;
    throw NumericalError(msg.str());
  }
  return StateVector(b);
}

StateVector free_evolve(const StateVector& state, double duration,
                        const LevelArray<double>& energies,
                        const LevelArray<double>& reference) {
  if (duration < 0.0) throw InputError("evolution duration must be >= 0");
  Amplitudes a = state.amplitudes();
  for (std::size_t i = 0; i < kNumLevels; ++i) {
    a(i) *= std::polar(1.0, -kTwoPi * (energies[i] - reference[i]) * duration);
  }
  return StateVector(a);
}

double rabi_transfer(double omega, double detuning, double duration) {
  if (omega < 0.0) throw std::domain_error("Rabi frequency must be >= 0");
  const double general2 = omega * omega + detuning * detuning;
  if (general2 == 0.0) return 0.0;
  const double s = std::sin(0.5 * std::sqrt(general2) * duration);
  return omega * omega / general2 * s * s;
}

double zero_response_rabi(double detuning, int k, double strength_ratio) {
  if (k < 1) throw InputError("zero-response order k must be >= 1");
  const double denom = 4.0 * k * k - strength_ratio * strength_ratio;
  if (!(denom > 0.0)) throw InputError("spectator coupling too strong for a zero at this order");
  return std::abs(detuning) / std::sqrt(denom);
}

TwoPhotonEffective two_photon_effective(const TwoPhotonSpec& spec) {
  if (spec.intermediate_detuning == 0.0) {
    throw InputError("two-photon reduction needs a nonzero intermediate detuning");
  }
  const double delta = kTwoPi * spec.intermediate_detuning;
  TwoPhotonEffective out;
  out.rabi = std::abs(spec.mw_rabi * spec.rf_rabi / (2.0 * delta));
  out.light_shift =
      (spec.mw_rabi * spec.mw_rabi - spec.rf_rabi * spec.rf_rabi) / (4.0 * delta) / kTwoPi;
  out.weak_detuning = std::abs(delta) < 5.0 * std::max(spec.mw_rabi, spec.rf_rabi);
  return out;
}

std::array<DriveTerm, 2> two_photon_legs(const TwoPhotonSpec& spec,
                                         const LevelArray<double>& energies,
                                         double two_photon_frequency, double phase) {
  const auto& a = levels::kStorage0;
  const auto& b = levels::kStorage1;
  const auto& e = spec.intermediate;
  const double mw_freq =
      energies[e.index()] - energies[a.index()] - spec.intermediate_detuning;
  const double rf_freq = two_photon_frequency - mw_freq;
  DriveTerm mw = DriveTerm::on(TransitionId::between(a, e), spec.mw_rabi, mw_freq, phase,
                               DriveOptions{.spectator_cutoff = 0.0});
  DriveTerm rf = DriveTerm::on(TransitionId::between(e, b), spec.rf_rabi, rf_freq, 0.0,
                               DriveOptions{.spectator_cutoff = 0.0});
  return {mw, rf};
}

RoundTripResult mapping_roundtrip(const StateVector& state, std::span<const TimedDrive> pulses,
                                  const LevelArray<double>& energies, double t_start,
                                  double leakage_threshold, const PropagationConfig& config) {
  const auto& s0 = levels::kStorage0;
  const auto& s1 = levels::kStorage1;
  const double outside = 1.0 - state.population(s0) - state.population(s1);
  if (outside > 1e-12) throw InputError("mapping round trip needs a state on {|0>, |1>}");

  StateVector psi = state;
  double t = t_start;
  auto apply = [&](const TimedDrive& p) {
    const DriveTerm d = p.drive;
    psi = evolve(psi, std::span<const DriveTerm>(&d, 1), p.duration, energies, t, config);
    t += p.duration;
  };
  for (const auto& p : pulses) apply(p);
  for (auto it = pulses.rbegin(); it != pulses.rend(); ++it) apply(*it);

  RoundTripResult out;
  out.state = psi;
  for (std::size_t i = 0; i < kNumLevels; ++i) {
    const auto level = HyperfineLevel::from_index(i);
    if (level == s0 || level == s1) continue;
    out.residuals[i] = psi.population(level);
    out.leakage += out.residuals[i];
  }
  const Complex in0 = state.amplitude(s0), in1 = state.amplitude(s1);
  const Complex out0 = psi.amplitude(s0), out1 = psi.amplitude(s1);
  if (std::abs(in0) > 1e-9 && std::abs(in1) > 1e-9 && std::abs(out0) > 1e-9 &&
      std::abs(out1) > 1e-9) {
    out.theta = wrap_phase(std::arg(out1 / out0) - std::arg(in1 / in0));
    out.theta_defined = true;
  }
  if (out.leakage > leakage_threshold) {
    std::string msg = "mapping round trip leaked " + std::to_string(out.leakage) + ":";
    for (std::size_t i = 0; i < kNumLevels; ++i) {
      if (out.residuals[i] > 0.0) {
        msg += " " + HyperfineLevel::from_index(i).label() + "=" + std::to_string(out.residuals[i]);
      }
    }
    out.warnings.push_back(msg);
  }
  return out;
}

}  // namespace clockreg
