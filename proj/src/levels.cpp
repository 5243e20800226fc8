#include "clockreg/levels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace clockreg {

bool HyperfineLevel::valid(int F, int mF) noexcept {
  return (F == 1 || F == 2) && std::abs(mF) <= F;
}

HyperfineLevel::HyperfineLevel(int F, int mF) : f_(F), m_(mF) {
  if (!valid(F, mF)) {
    throw std::domain_error("invalid hyperfine level |" + std::to_string(F) + "," +
                            std::to_string(mF) + ">");
  }
}

HyperfineLevel HyperfineLevel::from_index(std::size_t index) {
  if (index < 3) return HyperfineLevel(1, static_cast<int>(index) - 1);
  if (index < kNumLevels) return HyperfineLevel(2, static_cast<int>(index) - 5);
  throw std::out_of_range("hyperfine level index out of range");
}

std::size_t HyperfineLevel::index() const noexcept {
  return f_ == 1 ? static_cast<std::size_t>(m_ + 1) : static_cast<std::size_t>(m_ + 5);
}

std::string HyperfineLevel::label() const {
  return "|" + std::to_string(f_) + "," + std::to_string(m_) + ">";
}

std::string to_string(Polarization p) {
  switch (p) {
    case Polarization::SigmaMinus: return "sigma-";
    case Polarization::Pi: return "pi";
    case Polarization::SigmaPlus: return "sigma+";
    case Polarization::TwoPhoton: return "two-photon";
  }
  return "?";
}

TransitionId::TransitionId(HyperfineLevel lower, HyperfineLevel upper)
    : lower_(lower), upper_(upper) {
  const int dm = upper.mF() - lower.mF();
  if (lower.F() != upper.F()) {
    if (lower.F() != 1) {
      throw std::domain_error("hyperfine transition must run from F=1 to F=2: " + label());
    }
    if (std::abs(dm) > 2) {
      throw std::domain_error("transition " + label() + " has |dm| > 2");
    }
  } else if (dm != 1) {
    throw std::domain_error("Zeeman transition " + label() + " must have dm = +1");
  }
}

TransitionId TransitionId::between(HyperfineLevel a, HyperfineLevel b) {
  if (a.F() == b.F()) {
    return a.mF() < b.mF() ? TransitionId(a, b) : TransitionId(b, a);
  }
  return a.F() == 1 ? TransitionId(a, b) : TransitionId(b, a);
}

Polarization TransitionId::natural_polarization() const noexcept {
  switch (delta_m()) {
    case -1: return Polarization::SigmaMinus;
    case 0: return Polarization::Pi;
    case 1: return Polarization::SigmaPlus;
    default: return Polarization::TwoPhoton;
  }
}

std::string TransitionId::label() const {
  return lower_.label() + "->" + upper_.label();
}

}  // namespace clockreg
