#include "seqlang_units.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

namespace clockreg::seqlang::detail {

const char* dim_name(Dim d) {
  switch (d) {
    case Dim::Frequency: return "frequency";
    case Dim::Time: return "time";
    case Dim::Field: return "field";
    case Dim::Angle: return "angle";
  }
  return "?";
}

const char* dim_units(Dim d) {
  switch (d) {
    case Dim::Frequency: return "Hz, kHz, MHz, GHz";
    case Dim::Time: return "s, ms, us, ns";
    case Dim::Field: return "T, mT, uT, nT";
    case Dim::Angle: return "deg, rad";
  }
  return "";
}

std::optional<Unit> lookup_unit(std::string_view name) {
  std::string n(name);
  // Micro sign (U+00B5) and Greek mu (U+03BC) both mean "u".
  for (const char* mu : {"\xC2\xB5", "\xCE\xBC"}) {
    if (n.rfind(mu, 0) == 0) n = "u" + n.substr(2);
  }
  struct Entry {
    const char* name;
    Unit unit;
  };
  static const Entry table[] = {
      {"Hz", {Dim::Frequency, 0, false}},  {"kHz", {Dim::Frequency, 3, false}},
      {"MHz", {Dim::Frequency, 6, false}}, {"GHz", {Dim::Frequency, 9, false}},
      {"s", {Dim::Time, 0, false}},        {"ms", {Dim::Time, -3, false}},
      {"us", {Dim::Time, -6, false}},      {"ns", {Dim::Time, -9, false}},
      {"T", {Dim::Field, 0, false}},       {"mT", {Dim::Field, -3, false}},
      {"uT", {Dim::Field, -6, false}},     {"nT", {Dim::Field, -9, false}},
      {"rad", {Dim::Angle, 0, false}},     {"deg", {Dim::Angle, 0, true}},
  };
  for (const auto& e : table) {
    if (n == e.name) return e.unit;
  }
  return std::nullopt;
}

std::optional<double> decimal_value(std::string_view lit, int shift) {
  std::string digits;
  bool negative = false;
  std::size_t i = 0;
  if (i < lit.size() && (lit[i] == '+' || lit[i] == '-')) negative = lit[i++] == '-';
  long exp = 0;
  bool seen_dot = false;
  for (; i < lit.size() && lit[i] != 'e' && lit[i] != 'E'; ++i) {
    if (lit[i] == '.') {
      seen_dot = true;
    } else {
      digits += lit[i];
      if (seen_dot) --exp;
    }
  }
  if (i < lit.size()) {
    long e = 0;
    const auto rest = lit.substr(i + 1);
    const char* b = rest.data();
    if (!rest.empty() && rest[0] == '+') ++b;
    auto [p, ec] = std::from_chars(b, rest.data() + rest.size(), e);
    if (ec != std::errc() || p != rest.data() + rest.size()) return std::nullopt;
    exp += e;
  }
  if (digits.empty()) return std::nullopt;
  const std::string text = (negative ? "-" : "") + digits + "e" + std::to_string(exp + shift);
  double v = 0.0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<double> to_si(std::string_view literal, const Unit& unit) {
  auto v = decimal_value(literal, unit.exp10);
  if (v && unit.degrees) *v *= kDegree;
  return v;
}

std::string decimal_text(double v, int shift) {
  if (v == 0.0) return "0";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
  const std::string s(buf, end);
  const auto epos = s.find('e');
  std::string mant = s.substr(0, epos);
  long exp = std::strtol(s.c_str() + epos + 1, nullptr, 10);
  bool negative = false;
  if (mant[0] == '-') {
    negative = true;
    mant.erase(0, 1);
  }
  std::string digits;
  for (char c : mant) {
    if (c != '.') digits += c;
  }
  // v = 0.digits... -> integer digits times 10^e
  long e = exp - static_cast<long>(digits.size() - 1) - shift;
  while (digits.size() > 1 && digits.back() == '0') {
    digits.pop_back();
    ++e;
  }
  const long n = static_cast<long>(digits.size());
  std::string out;
  if (e >= 0 && n + e <= 15) {
    out = digits + std::string(static_cast<std::size_t>(e), '0');
  } else if (e < 0 && -e < n) {
    out = digits.substr(0, static_cast<std::size_t>(n + e)) + "." + digits.substr(static_cast<std::size_t>(n + e));
  } else if (e < 0 && -e - n <= 6) {
    out = "0." + std::string(static_cast<std::size_t>(-e - n), '0') + digits;
  } else {
    out = digits.substr(0, 1);
    if (n > 1) out += "." + digits.substr(1);
    out += "e" + std::to_string(e + n - 1);
  }
  return negative ? "-" + out : out;
}

}  // namespace clockreg::seqlang::detail
