#include <cmath>
#include <numbers>
#include <random>

#include "clockreg/atom.hpp"
#include "clockreg/dynamics.hpp"
#include "clockreg/errors.hpp"
#include "doctest.h"

using namespace clockreg;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const AtomSpec kSpec{};
const LevelArray<double> kEnergies = level_energies(kSpec, 322.9e-6);
const DriveOptions kIsolated{.spectator_cutoff = 0.0};

double resonance(const TransitionId& t) {
  return kEnergies[t.upper().index()] - kEnergies[t.lower().index()];
}

StateVector run(const StateVector& psi, const DriveTerm& d, double duration,
                const PropagationConfig& cfg = {}) {
  return evolve(psi, std::span<const DriveTerm>(&d, 1), duration, kEnergies, 0.0, cfg);
}

}  // namespace

TEST_CASE("closed-form Rabi transfer") {
  const double omega = kTwoPi * 10e3;
  CHECK(rabi_transfer(omega, 0.0, std::numbers::pi / omega) == doctest::Approx(1.0));
  CHECK(rabi_transfer(omega, std::sqrt(3.0) * omega, std::numbers::pi / omega) < 1e-28);
  CHECK(rabi_transfer(omega, 0.2 * omega, std::numbers::pi / omega) ==
        doctest::Approx(0.9606).epsilon(0.0001 / 0.9606));
  CHECK_THROWS_AS(rabi_transfer(-1.0, 0.0, 1.0), std::domain_error);
}

TEST_CASE("resonant pi pulse on the working transition") {
  const double omega = kTwoPi * 10e3;
  const auto d = DriveTerm::on(transitions::kWorking, omega, resonance(transitions::kWorking));
  const auto out = run(StateVector::basis(levels::kWorking1), d, std::numbers::pi / omega);
  CHECK(out.population(levels::kWorking0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("zero-duration evolution is the identity") {
  const auto psi = StateVector::basis(levels::kWorking1);
  const auto d = DriveTerm::on(transitions::kWorking, 1e5, resonance(transitions::kWorking));
  const auto out = run(psi, d, 0.0);
  CHECK((out.amplitudes() - psi.amplitudes()).norm() == 0.0);
}

TEST_CASE("first zero-response point") {
  const double omega = kTwoPi * 10e3;
  const double detuning = std::sqrt(3.0) * omega / kTwoPi;
  const auto d = DriveTerm::on(transitions::kWorking, omega,
                               resonance(transitions::kWorking) + detuning, 0.0, kIsolated);
  const auto out = run(StateVector::basis(levels::kWorking1), d, std::numbers::pi / omega);
  CHECK(out.population(levels::kWorking0) < 1e-6);
}

TEST_CASE("evolve agrees with the two-level oracle on random drives") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> rabi_khz(0.5, 30.0), rel(-5.0, 5.0), cycles(0.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double omega = kTwoPi * 1e3 * rabi_khz(rng);
    const double delta = rel(rng) * omega;
    const double t = cycles(rng) * kTwoPi / omega;
    const auto d = DriveTerm::on(transitions::kWorking, omega,
                                 resonance(transitions::kWorking) + delta / kTwoPi, 0.3, kIsolated);
    const auto out = run(StateVector::basis(levels::kWorking1), d, t);
    worst = std::max(worst, std::abs(out.population(levels::kWorking0) -
                                     rabi_transfer(omega, delta, t)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("step halving and norm drift with non-tree couplings") {
  // A wide cutoff keeps several spectators, closing loops that need the Magnus path.
  const DriveOptions wide{.spectator_cutoff = 5e6};
  const double omega = kTwoPi * 50e3;
  const auto d = DriveTerm::on(transitions::kMap0, omega, resonance(transitions::kMap0), 0.0, wide);
  const auto psi = StateVector::superposition(std::vector<std::pair<HyperfineLevel, Complex>>{
      {levels::kStorage0, 1.0}, {levels::kWorking1, 1.0}, {HyperfineLevel(1, 1), 1.0}});
  const double duration = 20e-6;
  const double bound = step_bound(std::span<const DriveTerm>(&d, 1), kEnergies);
  const auto coarse = run(psi, d, duration, {.max_step = bound});
  const auto fine = run(psi, d, duration, {.max_step = bound / 2});
  const auto pc = coarse.populations(), pf = fine.populations();
  double diff = 0.0;
  for (std::size_t i = 0; i < kNumLevels; ++i) diff = std::max(diff, std::abs(pc[i] - pf[i]));
  CHECK(diff < 1e-8);

  CHECK_THROWS_AS(run(psi, d, duration, {.max_step = 2.0 * bound}), NumericalError);
}

TEST_CASE("norm drift over a millisecond of two-tone driving") {
  // Two tones on one pair form a two-edge loop, so the residual (Magnus) path is exercised.
  const double f = resonance(transitions::kWorking);
  const std::vector<DriveTerm> drives{
      DriveTerm::on(transitions::kWorking, kTwoPi * 10e3, f, 0.0, kIsolated),
      DriveTerm::on(transitions::kWorking, kTwoPi * 10e3, f + 20e3, 1.0, kIsolated)};
  const auto out = evolve(StateVector::basis(levels::kWorking1), drives, 1e-3, kEnergies);
  CHECK(std::abs(out.norm() - 1.0) < 1e-10);
}

TEST_CASE("far spectators barely change the target transfer") {
  const double omega = kTwoPi * 5e3;
  const double f = resonance(transitions::kWorking);
  const auto bare = DriveTerm::on(transitions::kWorking, omega, f, 0.0, kIsolated);
  const auto dressed = DriveTerm::on(transitions::kWorking, omega, f, 0.0, {.spectator_cutoff = 3e6});
  const auto psi = StateVector::basis(levels::kWorking1);
  const double t = std::numbers::pi / omega;
  const double a = run(psi, bare, t).population(levels::kWorking0);
  const double b = run(psi, dressed, t).population(levels::kWorking0);
  CHECK(std::abs(a - b) < 1e-4);
}

TEST_CASE("drive validation") {
  const double f = resonance(transitions::kWorking);
  const auto psi = StateVector::basis(levels::kWorking1);
  CHECK_THROWS_AS(run(psi, DriveTerm::on(transitions::kWorking, -1.0, f), 1e-6), InputError);
  CHECK_THROWS_AS(run(psi, DriveTerm::on(transitions::kWorking, 1e4, f + 5e6), 1e-6), InputError);
  CHECK_THROWS_AS(run(psi, DriveTerm::on(transitions::kWorking, 1e4, f), -1.0), InputError);
}

TEST_CASE("zero-response Rabi frequencies") {
  CHECK(zero_response_rabi(23e3, 1) == doctest::Approx(13279.0).epsilon(1e-4));
  CHECK(zero_response_rabi(23e3, 2) == doctest::Approx(23e3 / std::sqrt(15.0)));
  const double r = 1.0 / std::sqrt(3.0);
  const double omega = kTwoPi * zero_response_rabi(8994.6, 1, r);
  CHECK(rabi_transfer(r * omega, kTwoPi * 8994.6, std::numbers::pi / omega) < 1e-20);
  CHECK_THROWS_AS(zero_response_rabi(1e3, 0), InputError);
  CHECK_THROWS_AS(zero_response_rabi(1e3, 1, 2.0), InputError);
}

TEST_CASE("two-photon effective coupling") {
  SUBCASE("equal legs") {
    const auto eff = two_photon_effective({.mw_rabi = kTwoPi * 12.25e3, .rf_rabi = kTwoPi * 12.25e3});
    CHECK(eff.rabi / kTwoPi == doctest::Approx(750.0).epsilon(1.0 / 750.0));
    CHECK(eff.light_shift == 0.0);
    CHECK_FALSE(eff.weak_detuning);
  }
  SUBCASE("legs tuned to a +50 Hz shift") {
    // a b = 2 Delta x 750 Hz and a^2 - b^2 = 4 Delta x 50 Hz.
    const double delta = 100e3, prod = 2 * delta * 750.0, diff = 4 * delta * 50.0;
    const double a2 = 0.5 * (diff + std::sqrt(diff * diff + 4 * prod * prod));
    const double a = std::sqrt(a2), b = prod / a;
    const auto eff = two_photon_effective({.mw_rabi = kTwoPi * a, .rf_rabi = kTwoPi * b});
    CHECK(eff.light_shift == doctest::Approx(50.0).epsilon(1e-9));
    CHECK(eff.rabi / kTwoPi == doctest::Approx(750.0).epsilon(1e-9));
  }
  CHECK(two_photon_effective({.mw_rabi = 1e5, .rf_rabi = 1e5, .intermediate_detuning = 1e3})
            .weak_detuning);
  CHECK_THROWS_AS(two_photon_effective({.mw_rabi = 1, .rf_rabi = 1, .intermediate_detuning = 0}),
                  InputError);
}

TEST_CASE("explicit two-photon legs agree with the effective coupling") {
  const double delta = 100e3, prod = 2 * delta * 750.0, diff = 4 * delta * 50.0;
  const double a = std::sqrt(0.5 * (diff + std::sqrt(diff * diff + 4 * prod * prod)));
  const TwoPhotonSpec spec{.mw_rabi = kTwoPi * a, .rf_rabi = kTwoPi * (prod / a)};
  const auto eff = two_photon_effective(spec);
  const double f2 = resonance(transitions::kStorage) + eff.light_shift;
  const auto legs = two_photon_legs(spec, kEnergies, f2);
  const double t_pi = std::numbers::pi / eff.rabi;
  // Adiabatic-elimination error scale: (strongest leg / intermediate detuning)^2.
  const double bound = std::pow(std::max(a, prod / a) / delta, 2);
  const auto out = evolve(StateVector(), legs, t_pi, kEnergies);
  CHECK(out.population(levels::kStorage1) > 1.0 - 2.0 * bound);
  CHECK(out.population(spec.intermediate) < bound);

  // The effective term reaches the same state.
  auto d = DriveTerm::on(transitions::kStorage, eff.rabi, f2);
  d.upper_shift = eff.light_shift;
  const auto effective = run(StateVector(), d, t_pi);
  CHECK(effective.population(levels::kStorage1) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(out.population(levels::kStorage1) - effective.population(levels::kStorage1)) <
        2.0 * bound);
}

TEST_CASE("mapping round trip") {
  const double omega = kTwoPi * 10e3;
  const double t_pi = std::numbers::pi / omega;
  const std::vector<TimedDrive> pulses{
      {DriveTerm::on(transitions::kMap0, omega, resonance(transitions::kMap0), 0.0, kIsolated), t_pi},
      {DriveTerm::on(transitions::kMap1, omega, resonance(transitions::kMap1), 0.0, kIsolated), t_pi}};
  const auto plus = StateVector::superposition(std::vector<std::pair<HyperfineLevel, Complex>>{
      {levels::kStorage0, 1.0}, {levels::kStorage1, 1.0}});

  const auto r1 = mapping_roundtrip(plus, pulses, kEnergies, 1e-3);
  CHECK(r1.state.population(levels::kStorage0) == doctest::Approx(0.5).epsilon(2e-6));
  CHECK(r1.state.population(levels::kStorage1) == doctest::Approx(0.5).epsilon(2e-6));
  CHECK(r1.theta_defined);
  CHECK(r1.leakage < 1e-6);
  CHECK(r1.warnings.empty());
  const auto r2 = mapping_roundtrip(plus, pulses, kEnergies, 1e-3);
  CHECK(std::abs(r1.theta - r2.theta) < 1e-9);

  const auto zero = mapping_roundtrip(StateVector(), pulses, kEnergies);
  CHECK(zero.state.population(levels::kStorage0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_FALSE(zero.theta_defined);

  const std::vector<TimedDrive> lopsided{{pulses[0].drive, 0.5 * t_pi}};
  const auto leaky = mapping_roundtrip(plus, lopsided, kEnergies);
  CHECK(leaky.leakage == doctest::Approx(0.5).epsilon(1e-6));
  REQUIRE(leaky.warnings.size() == 1);
  CHECK(leaky.warnings[0].find("|2,0>") != std::string::npos);

  CHECK_THROWS_AS(mapping_roundtrip(StateVector::basis(levels::kWorking0), pulses, kEnergies),
                  InputError);
}
