#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <string>

namespace clockreg {

inline constexpr std::size_t kNumLevels = 8;

template <typename T>
using LevelArray = std::array<T, kNumLevels>;

/// A ground-state hyperfine sublevel |F, mF> of the 5S1/2 manifold (I = 3/2).
///
/// Index order: F=1 mF=-1..1 occupy 0..2, F=2 mF=-2..2 occupy 3..7.
class HyperfineLevel {
 public:
  HyperfineLevel(int F, int mF);

  static HyperfineLevel from_index(std::size_t index);
  static bool valid(int F, int mF) noexcept;

  int F() const noexcept { return f_; }
  int mF() const noexcept { return m_; }
  std::size_t index() const noexcept;

  /// "|F,mF>"
  std::string label() const;

  friend bool operator==(const HyperfineLevel&, const HyperfineLevel&) = default;
  friend auto operator<=>(const HyperfineLevel&, const HyperfineLevel&) = default;

 private:
  int f_;
  int m_;
};

enum class Polarization { SigmaMinus, Pi, SigmaPlus, TwoPhoton };

std::string to_string(Polarization p);

/// A driven transition between two sublevels.
///
/// Hyperfine transitions have lower.F == 1, upper.F == 2 and |dm| <= 2.
/// Zeeman (rf) transitions inside one F manifold have |dm| == 1 and lower.mF < upper.mF.
class TransitionId {
 public:
  TransitionId(HyperfineLevel lower, HyperfineLevel upper);

  /// Orders the pair canonically, so |2,1>->|1,0> and |1,0>->|2,1> name the same transition.
  static TransitionId between(HyperfineLevel a, HyperfineLevel b);

  const HyperfineLevel& lower() const noexcept { return lower_; }
  const HyperfineLevel& upper() const noexcept { return upper_; }
  int delta_m() const noexcept { return upper_.mF() - lower_.mF(); }
  bool is_hyperfine() const noexcept { return lower_.F() != upper_.F(); }

  /// Single-photon polarization matching delta_m, or TwoPhoton for |dm| == 2.
  Polarization natural_polarization() const noexcept;

  std::string label() const;

  friend bool operator==(const TransitionId&, const TransitionId&) = default;
  friend auto operator<=>(const TransitionId&, const TransitionId&) = default;

 private:
  HyperfineLevel lower_;
  HyperfineLevel upper_;
};

namespace levels {
// Storage qubit |0>, |1> and working qubit |0'>, |1'>.
inline const HyperfineLevel kStorage0{1, -1};
inline const HyperfineLevel kStorage1{2, 1};
inline const HyperfineLevel kWorking0{2, 0};
inline const HyperfineLevel kWorking1{1, 0};
}  // namespace levels

namespace transitions {
inline const TransitionId kStorage{levels::kStorage0, levels::kStorage1};
inline const TransitionId kWorking{levels::kWorking1, levels::kWorking0};
/// |0> -> |0'>
inline const TransitionId kMap0{levels::kStorage0, levels::kWorking0};
/// |1> -> |1'>
inline const TransitionId kMap1{levels::kWorking1, levels::kStorage1};
}  // namespace transitions

}  // namespace clockreg
