#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>

#include "clockreg/atom.hpp"
#include "clockreg/errors.hpp"
#include "doctest.h"

using namespace clockreg;

namespace {

// Independent route: diagonalize A I.J + muB B (gJ Jz + gI Iz) on the uncoupled |mJ, mI> basis.
// Row index = (mJ + 1/2) * 4 + (mI + 3/2).
using Mat = Eigen::Matrix<double, 8, 8>;

struct Uncoupled {
  Mat jz = Mat::Zero(), jp = Mat::Zero(), iz = Mat::Zero(), ip = Mat::Zero();
  Uncoupled() {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 4; ++b) {
        const int row = a * 4 + b;
        const double mj = a - 0.5, mi = b - 1.5;
        jz(row, row) = mj;
        iz(row, row) = mi;
        if (a == 0) jp(4 + b, row) = 1.0;  // J+ |-1/2> = |+1/2>
        if (b < 3) ip(a * 4 + b + 1, row) = std::sqrt(1.5 * 2.5 - mi * (mi + 1.0));
      }
    }
  }
  Mat idotj() const {
    return jz * iz + 0.5 * (jp * ip.transpose() + jp.transpose() * ip);
  }
};

// Energies keyed by (F, mF), assigning the upper state of each m sector to F = 2.
std::map<std::pair<int, int>, double> oracle_energies(const AtomSpec& spec, double field) {
  Uncoupled u;
  const double a_hfs = spec.hyperfine_splitting / 2.0;  // A = dE / (I + 1/2)
  const double mu = constants::kBohrMagnetonHz * field;
  const Mat h = a_hfs * u.idotj() + mu * (spec.gJ * u.jz + spec.gI * u.iz);
  std::map<std::pair<int, int>, double> out;
  for (int m = -2; m <= 2; ++m) {
    std::vector<int> rows;
    for (int r = 0; r < 8; ++r) {
      if (std::lround(u.jz(r, r) + u.iz(r, r)) == m) rows.push_back(r);
    }
    Eigen::MatrixXd block(rows.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < rows.size(); ++j) block(i, j) = h(rows[i], rows[j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
    const auto& ev = es.eigenvalues();
    out[{2, m}] = ev(ev.size() - 1);
    if (rows.size() == 2) out[{1, m}] = ev(0);
  }
  return out;
}

// Matrix element |<upper|J_q|lower>| from numerically diagonalized eigenvectors.
double oracle_coupling(const TransitionId& t, int q) {
  Uncoupled u;
  // Tiny field splits the m degeneracy so eigenvectors are |F, mF>.
  const Mat h = u.idotj() + 1e-6 * (u.jz + u.iz);
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  auto vector_for = [&](const HyperfineLevel& l) -> Eigen::Matrix<double, 8, 1> {
    for (int k = 0; k < 8; ++k) {
      const auto v = es.eigenvectors().col(k);
      const double m = v.dot((u.jz + u.iz) * v);
      const double idj = v.dot(u.idotj() * v);
      const int f = idj > 0 ? 2 : 1;  // I.J = +3/4 for F=2, -5/4 for F=1
      if (f == l.F() && std::lround(m) == l.mF()) return v;
    }
    FAIL("no eigenvector");
    return {};
  };
  Mat jq;
  if (q == 0) jq = u.jz;
  else if (q == 1) jq = -u.jp / std::sqrt(2.0);
  else jq = u.jp.transpose() / std::sqrt(2.0);
  return std::abs(vector_for(t.upper()).dot(jq * vector_for(t.lower())));
}

const AtomSpec kSpec{};

}  // namespace

TEST_CASE("hyperfine levels validate their quantum numbers") {
  CHECK_THROWS_AS(HyperfineLevel(1, 2), std::domain_error);
  CHECK_THROWS_AS(HyperfineLevel(3, 0), std::domain_error);
  CHECK_THROWS_AS(HyperfineLevel(2, -3), std::domain_error);
  int count = 0;
  for (int f = 0; f <= 3; ++f)
    for (int m = -3; m <= 3; ++m) count += HyperfineLevel::valid(f, m);
  CHECK(count == 8);
  for (std::size_t i = 0; i < kNumLevels; ++i) {
    CHECK(HyperfineLevel::from_index(i).index() == i);
  }
  CHECK(levels::kStorage1.label() == "|2,1>");
}

TEST_CASE("transition ids enforce the driven-transition rules") {
  CHECK_THROWS(TransitionId(HyperfineLevel(2, 0), HyperfineLevel(1, 0)));
  CHECK_THROWS(TransitionId(HyperfineLevel(1, -1), HyperfineLevel(2, 2)));
  CHECK_NOTHROW(TransitionId(HyperfineLevel(1, -1), HyperfineLevel(2, 1)));
  CHECK(TransitionId::between(levels::kStorage1, levels::kWorking1) == transitions::kMap1);
  CHECK(transitions::kStorage.natural_polarization() == Polarization::TwoPhoton);
  CHECK(transitions::kMap0.natural_polarization() == Polarization::SigmaPlus);
}

TEST_CASE("Breit-Rabi energies at zero field are the hyperfine values") {
  const double hfs = kSpec.hyperfine_splitting;
  CHECK(breit_rabi_energy(kSpec, {2, 0}, 0.0) == doctest::Approx(0.375 * hfs).epsilon(1e-12));
  CHECK(breit_rabi_energy(kSpec, {1, 0}, 0.0) == doctest::Approx(-0.625 * hfs).epsilon(1e-12));
  CHECK(breit_rabi_energy(kSpec, {2, 0}, 0.0) == doctest::Approx(2.5630e9).epsilon(1e-4));
  CHECK(breit_rabi_energy(kSpec, {1, 0}, 0.0) == doctest::Approx(-4.2717e9).epsilon(1e-4));
  CHECK_THROWS_AS(breit_rabi_energy(kSpec, {1, 0}, -1e-6), std::domain_error);
}

TEST_CASE("Breit-Rabi closed form matches direct diagonalization") {
  for (double field : {0.0, 1e-5, 322.9e-6, 1e-3, 5e-3, 1e-2}) {
    const auto oracle = oracle_energies(kSpec, field);
    for (const auto& [key, energy] : oracle) {
      const double got = breit_rabi_energy(kSpec, HyperfineLevel(key.first, key.second), field);
      CHECK(got == doctest::Approx(energy).epsilon(1e-12).scale(kSpec.hyperfine_splitting));
    }
  }
}

TEST_CASE("zero-field energies sum to zero over the manifold") {
  double sum = 0.0;
  for (std::size_t i = 0; i < kNumLevels; ++i) {
    sum += breit_rabi_energy(kSpec, HyperfineLevel::from_index(i), 0.0);
  }
  CHECK(std::abs(sum) < 1e-6 * kSpec.hyperfine_splitting * 1e-6);
}

TEST_CASE("linear Zeeman slope of |1,-1> is about 7 Hz/nT") {
  const double b = 1e-7;
  const double slope =
      (breit_rabi_energy(kSpec, {1, -1}, b) - breit_rabi_energy(kSpec, {1, -1}, 0.0)) / b;
  CHECK(slope * 1e-9 == doctest::Approx(7.0).epsilon(0.01));
}

TEST_CASE("energies are smooth in field up to 10 mT") {
  const double h = 1e-5;
  for (std::size_t i = 0; i < kNumLevels; ++i) {
    const auto level = HyperfineLevel::from_index(i);
    for (double b = h; b < 10e-3; b += 0.25e-3) {
      const double second = (breit_rabi_energy(kSpec, level, b + h) -
                             2.0 * breit_rabi_energy(kSpec, level, b) +
                             breit_rabi_energy(kSpec, level, b - h)) /
                            (h * h);
      CHECK(std::abs(second) < 1e11);
    }
  }
}

TEST_CASE("transition frequencies") {
  SUBCASE("storage resonance at the operating field") {
    const double f = transition_frequency(kSpec, transitions::kStorage, 322.9e-6);
    CHECK(std::abs(f - (6832.325e6 + 2.352975e6)) < 1e3);
  }
  SUBCASE("site shift is additive") {
    const LatticeConfig lattice{.xy_depth = 30.0};
    const double a = transition_frequency(kSpec, transitions::kWorking, 322.9e-6, lattice, 0.0);
    const double b = transition_frequency(kSpec, transitions::kWorking, 322.9e-6, lattice, 23e3);
    CHECK(b - a == doctest::Approx(23e3).epsilon(1e-9));
  }
  SUBCASE("differential light shift is linear in depth") {
    const LatticeConfig deep{.xy_depth = 20.0, .diff_shift_slope = 6.1};
    const LatticeConfig none{.xy_depth = 0.0, .diff_shift_slope = 6.1};
    const double d = transition_frequency(kSpec, transitions::kStorage, 322.9e-6, deep) -
                     transition_frequency(kSpec, transitions::kStorage, 322.9e-6, none);
    CHECK(d == doctest::Approx(122.0).epsilon(1e-6));
  }
}

TEST_CASE("field sensitivities") {
  const double b_star = find_magic_field(kSpec, transitions::kStorage, 0.1e-3, 0.6e-3);
  CHECK(field_sensitivity(kSpec, transitions::kWorking, 322.9e-6) * 1e-6 ==
        doctest::Approx(37.0).epsilon(0.10));
  CHECK(std::abs(field_sensitivity(kSpec, transitions::kStorage, b_star)) < 1e5);
  const TransitionId sensitive(HyperfineLevel(1, -1), HyperfineLevel(2, 0));
  CHECK(field_sensitivity(kSpec, sensitive, 1e-7) * 1e-9 == doctest::Approx(-7.0).epsilon(0.01));
}

TEST_CASE("magic field search") {
  const double b_star = find_magic_field(kSpec, transitions::kStorage, 0.1e-3, 0.6e-3);
  CHECK(std::abs(b_star - 322.9e-6) < 0.5e-6);
  CHECK_THROWS_AS(find_magic_field(kSpec, transitions::kWorking, 0.01e-3, 1e-3), NoSolutionError);
  CHECK_THROWS_AS(find_magic_field(kSpec, transitions::kStorage, 0.4e-3, 0.6e-3), NoSolutionError);

  SUBCASE("storage frequency is stationary at the magic field") {
    const double f0 = transition_frequency(kSpec, transitions::kStorage, b_star);
    for (double d : {-5e-6, 5e-6}) {
      CHECK(std::abs(transition_frequency(kSpec, transitions::kStorage, b_star + d) - f0) < 5.0);
    }
  }
  SUBCASE("working sensitivity follows the quadratic clock shift") {
    const double b = 10e-6;
    const double k = (transition_frequency(kSpec, transitions::kWorking, b) -
                      transition_frequency(kSpec, transitions::kWorking, 0.0)) /
                     (b * b);
    const double s = field_sensitivity(kSpec, transitions::kWorking, b_star);
    CHECK(s == doctest::Approx(2.0 * k * b_star).epsilon(0.10));
  }
}

TEST_CASE("coupling strengths follow the angular-momentum algebra") {
  CHECK(coupling_strength(transitions::kWorking, Polarization::Pi) == doctest::Approx(1.0));
  for (auto p : {Polarization::SigmaMinus, Polarization::Pi, Polarization::SigmaPlus}) {
    CHECK(coupling_strength(transitions::kStorage, p) == 0.0);
  }
  const TransitionId minus(HyperfineLevel(1, 0), HyperfineLevel(2, -1));
  const TransitionId plus(HyperfineLevel(1, -1), HyperfineLevel(2, 0));
  const double ratio = coupling_strength(minus, Polarization::SigmaMinus) /
                       coupling_strength(plus, Polarization::SigmaPlus);
  const double oracle_ratio = oracle_coupling(minus, -1) / oracle_coupling(plus, 1);
  CHECK(ratio == doctest::Approx(oracle_ratio).epsilon(1e-9));
  CHECK(ratio == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));

  SUBCASE("every hyperfine pair agrees with the diagonalization oracle") {
    const double norm = oracle_coupling(transitions::kWorking, 0);
    for (int m1 = -1; m1 <= 1; ++m1) {
      for (int m2 = -2; m2 <= 2; ++m2) {
        const int dm = m2 - m1;
        if (std::abs(dm) > 2) continue;
        const TransitionId t(HyperfineLevel(1, m1), HyperfineLevel(2, m2));
        for (int q = -1; q <= 1; ++q) {
          const auto pol = q == -1 ? Polarization::SigmaMinus
                                   : (q == 0 ? Polarization::Pi : Polarization::SigmaPlus);
          const double got = coupling_strength(t, pol);
          if (dm != q) {
            CHECK(got == 0.0);
          } else {
            CHECK(got == doctest::Approx(oracle_coupling(t, q) / norm).epsilon(1e-9));
          }
        }
      }
    }
  }
}

TEST_CASE("effective-field splitting and crosstalk figure") {
  const EffectiveField eff{.delta_AB_slope = 23e3 / 40.0};
  CHECK(delta_AB(eff, LatticeConfig{.xy_depth = 0.0}) == 0.0);
  CHECK(delta_AB(eff, LatticeConfig{.xy_depth = 40.0}) == doctest::Approx(23e3));
  const EffectiveField typical{.delta_AB_slope = 15e3 / 30.0};
  CHECK(delta_AB(typical, LatticeConfig{.xy_depth = 30.0}) == doctest::Approx(15e3));

  CHECK(crosstalk_figure(25.0, 15e3) == doctest::Approx(1.6667e-3).epsilon(1e-4));
  CHECK(crosstalk_figure(0.0, 15e3) == 0.0);
  CHECK(crosstalk_figure(12.0, 23e3) == doctest::Approx(5.217e-4).epsilon(1e-3));
  CHECK_THROWS_AS(crosstalk_figure(1.0, 0.0), InputError);
}

TEST_CASE("B_eff shifts leave the storage pair untouched") {
  CHECK(beff_pattern(levels::kStorage0) == beff_pattern(levels::kStorage1));
  CHECK(beff_pattern(levels::kWorking0) == 0.0);
  CHECK(beff_pattern(levels::kWorking1) == 0.0);
}

TEST_CASE("recoil energy is consistent with the lattice wavelength") {
  const double er = recoil_frequency(kSpec.lattice_wavelength, kSpec.mass);
  CHECK(er == doctest::Approx(kSpec.recoil_energy).epsilon(1e-3));
  AtomSpec bad = kSpec;
  bad.hyperfine_splitting = -1.0;
  CHECK_THROWS_AS(bad.validate(), InputError);
}
