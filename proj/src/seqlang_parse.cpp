#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <set>

#include "clockreg/seqlang.hpp"
#include "seqlang_units.hpp"

namespace clockreg::seqlang {

using detail::Dim;

std::string format_diagnostic(const Diagnostic& d, const std::string& file) {
  return file + ":" + std::to_string(d.loc.line) + ":" + std::to_string(d.loc.column) + ": " +
         (d.severity == Severity::Error ? "error" : "warning") + "[" + d.code + "]: " + d.message;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

namespace {

enum class Tok { Ident, Number, Pipe, Comma, Gt, Arrow };

struct Token {
  Tok kind;
  std::string text;
  Location loc;
};

const std::set<std::string>& keywords() {
  static const std::set<std::string> k{
      "field", "init", "start", "channel", "scan", "site",  "beff",   "pulse",  "delay",
      "measure", "freq", "phase", "detune", "to",  "step", "zeeman", "light", "on",
      "off",   "area", "rabi",  "at",     "levels"};
  return k;
}

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

struct Failure {
  Diagnostic diag;
};

[[noreturn]] void fail(const char* code, std::string message, Location loc) {
  throw Failure{Diagnostic{Severity::Error, code, std::move(message), loc}};
}

class LineLexer {
 public:
  LineLexer(std::string_view line, int lineno, std::size_t offset)
      : s_(line), line_(lineno), base_(offset) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (i_ < s_.size()) {
      const unsigned char c = static_cast<unsigned char>(s_[i_]);
      if (c == '#') break;
      if (c == ' ' || c == '\t' || c == '\r') {
        ++i_;
        continue;
      }
      const Location at = here();
      if (c >= 0x80 && utf8_len(i_) == 0) fail("E-LEX", "invalid UTF-8 byte", at);
      if (ident_start(c)) {
        const std::size_t b = i_;
        while (i_ < s_.size() && ident_char(static_cast<unsigned char>(s_[i_]))) {
          if (static_cast<unsigned char>(s_[i_]) < 0x80) {
            ++i_;
            continue;
          }
          const std::size_t n = utf8_len(i_);
          if (n == 0) fail("E-LEX", "invalid UTF-8 byte", here());
          i_ += n;
        }
        out.push_back({Tok::Ident, std::string(s_.substr(b, i_ - b)), at});
      } else if (std::isdigit(c) || c == '.' || ((c == '+' || c == '-') && starts_number(i_ + 1))) {
        out.push_back({Tok::Number, number(), at});
      } else if (c == '-' && i_ + 1 < s_.size() && s_[i_ + 1] == '>') {
        i_ += 2;
        out.push_back({Tok::Arrow, "->", at});
      } else if (c == '|' || c == ',' || c == '>') {
        ++i_;
        out.push_back({c == '|' ? Tok::Pipe : c == ',' ? Tok::Comma : Tok::Gt, std::string(1, char(c)), at});
      } else {
        std::string shown = std::isprint(c) ? std::string(1, char(c)) : "\\x" + hex(c);
        fail("E-LEX", "unexpected character '" + shown + "'", at);
      }
    }
    return out;
  }

  Location end_location() const { return loc_at(std::min(i_, s_.size())); }

 private:
  Location here() const { return loc_at(i_); }
  Location loc_at(std::size_t i) const { return {line_, static_cast<int>(i) + 1, base_ + i}; }

  static std::string hex(unsigned char c) {
    const char* d = "0123456789ABCDEF";
    return {d[c >> 4], d[c & 15]};
  }

  bool starts_number(std::size_t j) const {
    if (j >= s_.size()) return false;
    if (std::isdigit(static_cast<unsigned char>(s_[j]))) return true;
    return s_[j] == '.' && j + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j + 1]));
  }

  // Length of the UTF-8 sequence starting at j, 0 if malformed.
  std::size_t utf8_len(std::size_t j) const {
    const auto b0 = static_cast<unsigned char>(s_[j]);
    std::size_t n = 0;
    if (b0 >= 0xC2 && b0 <= 0xDF) n = 1;
    else if (b0 >= 0xE0 && b0 <= 0xEF) n = 2;
    else if (b0 >= 0xF0 && b0 <= 0xF4) n = 3;
    else return 0;
    for (std::size_t k = 1; k <= n; ++k) {
      if (j + k >= s_.size() || (static_cast<unsigned char>(s_[j + k]) & 0xC0) != 0x80) return 0;
    }
    return n + 1;
  }

  std::string number() {
    const std::size_t b = i_;
    const Location at = here();
    if (s_[i_] == '+' || s_[i_] == '-') ++i_;
    auto digits = [&] {
      std::size_t n = 0;
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_, ++n;
      return n;
    };
    std::size_t n = digits();
    if (i_ < s_.size() && s_[i_] == '.') {
      ++i_;
      n += digits();
    }
    if (n == 0) fail("E-LEX", "malformed number", at);
    if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E')) {
      std::size_t j = i_ + 1;
      if (j < s_.size() && (s_[j] == '+' || s_[j] == '-')) ++j;
      if (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) {
        i_ = j;
        digits();
      }
    }
    if (i_ < s_.size() && (s_[i_] == '.' || std::isdigit(static_cast<unsigned char>(s_[i_])))) {
      fail("E-LEX", "malformed number", at);
    }
    return std::string(s_.substr(b, i_ - b));
  }

  std::string_view s_;
  int line_;
  std::size_t base_;
  std::size_t i_ = 0;
};

class LineParser {
 public:
  LineParser(std::vector<Token> toks, Location end) : t_(std::move(toks)), end_(end) {}

  Line statement() {
    const Token& kw = t_[0];
    if (kw.kind != Tok::Ident) fail("E-SYNTAX", "expected a statement keyword", kw.loc);
    pos_ = 1;
    Line line{FieldStmt{}, kw.loc};
    const std::string& k = kw.text;
    if (k == "field") line.stmt = FieldStmt{quantity(Dim::Field)};
    else if (k == "init") line.stmt = InitStmt{ket()};
    else if (k == "start") line.stmt = StartStmt{quantity(Dim::Time)};
    else if (k == "channel") line.stmt = channel();
    else if (k == "scan") line.stmt = scan();
    else if (k == "site") line.stmt = site();
    else if (k == "beff") line.stmt = beff();
    else if (k == "pulse") line.stmt = pulse();
    else if (k == "delay") line.stmt = DelayStmt{quantity(Dim::Time)};
    else if (k == "measure") line.stmt = measure();
    else fail("E-KEYWORD", "unknown statement '" + k + "'", kw.loc);
    if (pos_ < t_.size()) fail("E-SYNTAX", "unexpected '" + t_[pos_].text + "'", t_[pos_].loc);
    return line;
  }

 private:
  bool at_end() const { return pos_ >= t_.size(); }
  Location loc() const { return at_end() ? end_ : t_[pos_].loc; }
  std::string found() const { return at_end() ? "end of line" : "'" + t_[pos_].text + "'"; }

  bool peek_word(const char* w) const {
    return !at_end() && t_[pos_].kind == Tok::Ident && t_[pos_].text == w;
  }

  void expect(Tok kind, const char* what) {
    if (at_end() || t_[pos_].kind != kind) fail("E-SYNTAX", std::string("expected ") + what + ", found " + found(), loc());
    ++pos_;
  }

  void word(const char* w) {
    if (!peek_word(w)) fail("E-SYNTAX", std::string("expected '") + w + "', found " + found(), loc());
    ++pos_;
  }

  Ident identifier(const char* what) {
    if (at_end() || t_[pos_].kind != Tok::Ident) {
      fail("E-SYNTAX", std::string("expected ") + what + ", found " + found(), loc());
    }
    const Token& t = t_[pos_++];
    if (keywords().count(t.text)) fail("E-KEYWORD", "'" + t.text + "' is a keyword and cannot name a " + what, t.loc);
    return {t.text, t.loc};
  }

  // Number followed by a unit; `allowed` lists acceptable dimensions.
  std::pair<Value, Dim> any_quantity(std::initializer_list<Dim> allowed) {
    if (at_end() || t_[pos_].kind != Tok::Number) fail("E-SYNTAX", "expected a number, found " + found(), loc());
    const Token& num = t_[pos_++];
    std::string expected;
    for (Dim d : allowed) expected += std::string(expected.empty() ? "" : " or ") + detail::dim_name(d) + " (" + detail::dim_units(d) + ")";
    if (at_end() || t_[pos_].kind != Tok::Ident) fail("E-UNIT", "missing unit, expected " + expected, loc());
    const Token& u = t_[pos_];
    const auto unit = detail::lookup_unit(u.text);
    if (!unit) {
      if (keywords().count(u.text)) fail("E-UNIT", "missing unit, expected " + expected, u.loc);
      fail("E-UNIT", "unknown unit '" + u.text + "', expected " + expected, u.loc);
    }
    if (std::find(allowed.begin(), allowed.end(), unit->dim) == allowed.end()) {
      fail("E-UNIT", "'" + u.text + "' is a " + detail::dim_name(unit->dim) + " unit, expected " + expected, u.loc);
    }
    ++pos_;
    const auto v = detail::to_si(num.text, *unit);
    if (!v) fail("E-RANGE", "number '" + num.text + "' is out of range", num.loc);
    return {Value{*v, num.loc}, unit->dim};
  }

  Value quantity(Dim d) { return any_quantity({d}).first; }

  int integer() {
    if (at_end() || t_[pos_].kind != Tok::Number) fail("E-SYNTAX", "expected an integer, found " + found(), loc());
    const Token& t = t_[pos_++];
    const auto v = detail::decimal_value(t.text);
    if (!v || *v != std::floor(*v) || std::abs(*v) > 100) fail("E-SYNTAX", "expected a small integer, found '" + t.text + "'", t.loc);
    return static_cast<int>(*v);
  }

  Ket ket() {
    Ket k;
    k.loc = loc();
    expect(Tok::Pipe, "'|' opening a level");
    k.F = integer();
    expect(Tok::Comma, "','");
    k.mF = integer();
    expect(Tok::Gt, "'>'");
    return k;
  }

  SiteMask mask() {
    if (!at_end() && t_[pos_].kind == Tok::Ident) {
      const std::string& w = t_[pos_].text;
      if (w == "A" || w == "B" || w == "AB") {
        ++pos_;
        return w == "A" ? SiteMask::A : w == "B" ? SiteMask::B : SiteMask::AB;
      }
    }
    fail("E-SYNTAX", "expected A, B or AB, found " + found(), loc());
  }

  // Each optional clause may appear once, in any order.
  void once(std::set<std::string>& seen) {
    const Token& t = t_[pos_];
    if (!seen.insert(t.text).second) fail("E-SYNTAX", "duplicate '" + t.text + "' clause", t.loc);
    ++pos_;
  }

  ChannelStmt channel() {
    ChannelStmt c;
    c.id = identifier("channel");
    word("freq");
    c.freq = quantity(Dim::Frequency);
    std::set<std::string> seen;
    while (!at_end()) {
      if (peek_word("phase")) {
        once(seen);
        c.phase = quantity(Dim::Angle);
      } else if (peek_word("detune")) {
        once(seen);
        c.detune = identifier("scan variable");
      } else {
        fail("E-SYNTAX", "expected 'phase' or 'detune', found " + found(), loc());
      }
    }
    return c;
  }

  ScanStmt scan() {
    ScanStmt s;
    s.var = identifier("scan variable");
    auto [from, dim] = any_quantity({Dim::Angle, Dim::Frequency});
    s.from = from;
    word("to");
    s.to = quantity(dim);
    word("step");
    s.step = quantity(dim);
    s.kind = dim == Dim::Angle ? ScanKind::Phase : ScanKind::Frequency;
    return s;
  }

  SiteStmt site() {
    SiteStmt s;
    const Location at = loc();
    const SiteMask m = mask();
    if (m == SiteMask::AB) fail("E-SYNTAX", "site statement takes A or B", at);
    s.site = m == SiteMask::A ? Site::A : Site::B;
    std::set<std::string> seen;
    while (!at_end()) {
      if (peek_word("zeeman")) {
        once(seen);
        s.zeeman = quantity(Dim::Frequency);
      } else if (peek_word("light")) {
        once(seen);
        s.light = quantity(Dim::Frequency);
      } else {
        fail("E-SYNTAX", "expected 'zeeman' or 'light', found " + found(), loc());
      }
    }
    return s;
  }

  BeffStmt beff() {
    if (peek_word("on") || peek_word("off")) return BeffStmt{t_[pos_++].text == "on"};
    fail("E-SYNTAX", "expected 'on' or 'off', found " + found(), loc());
  }

  PulseStmt pulse() {
    PulseStmt p;
    p.channel = identifier("channel");
    std::set<std::string> seen;
    bool area = false, rabi = false;
    while (!at_end()) {
      if (peek_word("on")) {
        once(seen);
        Ket a = ket();
        expect(Tok::Arrow, "'->'");
        Ket b = ket();
        p.transition = std::make_pair(a, b);
      } else if (peek_word("area")) {
        once(seen);
        p.area = quantity(Dim::Angle);
        area = true;
      } else if (peek_word("rabi")) {
        once(seen);
        p.rabi = quantity(Dim::Frequency);
        rabi = true;
      } else if (peek_word("phase")) {
        once(seen);
        if (!at_end() && t_[pos_].kind == Tok::Ident) p.phase_var = identifier("scan variable");
        else p.phase = quantity(Dim::Angle);
      } else if (peek_word("site")) {
        once(seen);
        p.sites = mask();
      } else if (peek_word("at")) {
        once(seen);
        p.at = quantity(Dim::Time);
      } else {
        fail("E-SYNTAX", "expected one of on, area, rabi, phase, site, at; found " + found(), loc());
      }
    }
    if (!area) fail("E-SYNTAX", "pulse needs an 'area' clause", end_);
    if (!rabi) fail("E-SYNTAX", "pulse needs a 'rabi' clause", end_);
    return p;
  }

  MeasureStmt measure() {
    MeasureStmt m;
    m.sites = mask();
    if (peek_word("levels")) {
      ++pos_;
      do m.levels.push_back(ket());
      while (!at_end());
    }
    return m;
  }

  std::vector<Token> t_;
  Location end_;
  std::size_t pos_ = 0;
};

}  // namespace

ParseResult parse(const SourceProgram& source) {
  ParseResult r;
  r.program.name = source.name;
  const std::string& text = source.text;
  std::size_t offset = 0;
  int lineno = 0;
  while (offset <= text.size()) {
    ++lineno;
    std::size_t nl = text.find('\n', offset);
    if (nl == std::string::npos) nl = text.size();
    const std::string_view line(text.data() + offset, nl - offset);
    try {
      LineLexer lexer(line, lineno, offset);
      auto toks = lexer.run();
      if (!toks.empty()) r.program.lines.push_back(LineParser(std::move(toks), lexer.end_location()).statement());
    } catch (const Failure& f) {
      r.diagnostics.push_back(f.diag);
    }
    offset = nl + 1;
  }
  return r;
}

}  // namespace clockreg::seqlang
