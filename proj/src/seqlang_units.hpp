#pragma once

#include <numbers>
#include <optional>
#include <string>
#include <string_view>

namespace clockreg::seqlang::detail {

enum class Dim { Frequency, Time, Field, Angle };

struct Unit {
  Dim dim;
  int exp10;      // power of ten to the SI unit
  bool degrees;   // angle in degrees
};

inline constexpr double kDegree = std::numbers::pi / 180.0;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

const char* dim_name(Dim d);
const char* dim_units(Dim d);  // "Hz, kHz, MHz, GHz" ...
std::optional<Unit> lookup_unit(std::string_view name);

/// Decimal literal scaled by 10^shift, rounded once. nullopt when out of range.
std::optional<double> decimal_value(std::string_view literal, int shift = 0);

/// Literal + unit to SI (rad for angles).
std::optional<double> to_si(std::string_view literal, const Unit& unit);

/// Shortest decimal text of v / 10^shift, plain notation where short enough.
std::string decimal_text(double v, int shift = 0);

}  // namespace clockreg::seqlang::detail
