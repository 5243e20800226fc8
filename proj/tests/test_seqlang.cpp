#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "clockreg/seqlang.hpp"
#include "clockreg/simulate.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace clockreg;
using namespace clockreg::seqlang;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;
const fs::path kFixtures = CLOCKREG_FIXTURE_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<fs::path> fixtures(const char* dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(kFixtures / dir)) {
    if (e.path().extension() == ".pseq") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Compiled compile_text(const std::string& text) { return compile({"<test>", text}); }

const Diagnostic* first_error(const Compiled& c) {
  for (const auto& d : c.diagnostics) {
    if (d.severity == Severity::Error) return &d;
  }
  return nullptr;
}

// Line and column must agree with the byte offset.
bool located(const Diagnostic& d, const std::string& text) {
  if (d.loc.offset > text.size() || d.loc.line < 1 || d.loc.column < 1) return false;
  int line = 1;
  std::size_t line_start = 0;
  for (std::size_t i = 0; i < d.loc.offset; ++i) {
    if (text[i] == '\n') ++line, line_start = i + 1;
  }
  return line == d.loc.line && d.loc.offset - line_start + 1 == std::size_t(d.loc.column);
}

}  // namespace

TEST_CASE("channel and pulse literals") {
  const auto c = compile_text(
      "channel c01 freq 6834.678MHz\n"
      "pulse c01 on |1,-1>->|2,1> area 90deg rabi 750Hz\n");
  REQUIRE(c.ok());
  REQUIRE(c.sequence.channels.size() == 1);
  CHECK(c.sequence.channels[0].id == "c01");
  CHECK(c.sequence.channels[0].frequency == 6834678000.0);
  const auto& p = std::get<Pulse>(c.sequence.items[0]);
  CHECK(p.duration() == doctest::Approx((kPi / 2) / (2 * kPi * 750.0)).epsilon(1e-15));
  CHECK(p.transition == transitions::kStorage);
}

TEST_CASE("unit errors carry a location") {
  const auto c = compile_text("channel c freq 6.8GHz\ndelay 1.5 parsecs\n");
  const auto* e = first_error(c);
  REQUIRE(e);
  CHECK(e->code == "E-UNIT");
  CHECK(e->loc.line == 2);
  CHECK(e->loc.column == 11);
  CHECK(format_diagnostic(*e, "x.pseq") == "x.pseq:2:11: error[E-UNIT]: unknown unit 'parsecs', expected time (s, ms, us, ns)");
}

TEST_CASE("every unit normalizes to SI") {
  struct Case {
    const char* text;
    double si;
  };
  const Case freq[] = {{"1Hz", 1.0}, {"1kHz", 1e3}, {"1MHz", 1e6}, {"1GHz", 1e9}};
  for (const auto& c : freq) {
    const auto r = compile_text(std::string("channel c freq ") + c.text + "\ndelay 1s\n");
    REQUIRE(r.ok());
    CHECK(r.sequence.channels[0].frequency == c.si);
  }
  const Case time[] = {{"2s", 2.0}, {"2ms", 2e-3}, {"2us", 2e-6}, {"2\xC2\xB5s", 2e-6}, {"2\xCE\xBCs", 2e-6}, {"2ns", 2e-9}};
  for (const auto& c : time) {
    const auto r = compile_text(std::string("delay ") + c.text + "\n");
    REQUIRE(r.ok());
    CHECK(std::get<Delay>(r.sequence.items[0]).duration == c.si);
  }
  const Case field[] = {{"0.5T", 0.5}, {"322.9uT", 322.9e-6}, {"0.3229mT", 0.3229e-3}, {"322900nT", 322.9e-6}};
  for (const auto& c : field) {
    const auto r = compile_text(std::string("field ") + c.text + "\ndelay 1s\n");
    REQUIRE(r.ok());
    CHECK(*r.sequence.field == c.si);
  }
  const auto a = compile_text("channel c freq 1GHz phase 90deg\nchannel d freq 1GHz phase 2.5rad\ndelay 1s\n");
  REQUIRE(a.ok());
  CHECK(a.sequence.channels[0].phase_offset == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(a.sequence.channels[1].phase_offset == 2.5);
}

TEST_CASE("decimal literals survive the canonical form exactly") {
  std::mt19937_64 rng(7);
  const char* units[] = {"Hz", "kHz", "MHz", "GHz"};
  for (int i = 0; i < 2000; ++i) {
    const int digits = 1 + int(rng() % 12);
    std::string mant;
    for (int k = 0; k < digits; ++k) mant += char('0' + (k == 0 ? 1 + rng() % 9 : rng() % 10));
    const int point = int(rng() % (digits + 1));
    std::string lit = mant.substr(0, point) + "." + mant.substr(point);
    if (lit.front() == '.') lit = "0" + lit;
    if (lit.back() == '.') lit.pop_back();
    const std::string unit = units[rng() % 4];
    const auto r = compile_text("channel c freq " + lit + unit + "\ndelay 1s\n");
    REQUIRE(r.ok());
    const double v = r.sequence.channels[0].frequency;
    const int exp = unit == "Hz" ? 0 : unit == "kHz" ? 3 : unit == "MHz" ? 6 : 9;
    CHECK(v == std::stod(lit + "e" + std::to_string(exp)));
    const auto back = compile_text(format(r.sequence));
    REQUIRE(back.ok());
    CHECK(back.sequence.channels[0].frequency == v);
  }
  for (double deg : {0.1, 1.0, 12.5, 45.0, 90.0, 179.999999999, 420.0, 300.0, 1234.5678}) {
    CHECK(compile_text("delay 1s\n").ok());
    const double rad = deg * kPi / 180.0;
    CHECK(compile_text("channel c freq 1GHz phase " + format_angle(rad) + "\ndelay 1s\n").sequence.channels[0].phase_offset == rad);
  }
  CHECK(format_frequency(6834678113.59) == "6.83467811359GHz");
  CHECK(format_time(1.5e-3) == "1.5ms");
  CHECK(format_field(322.9e-6) == "322.9uT");
  CHECK(format_angle(kPi / 2) == "90deg");
  CHECK(format_time(0.0) == "0ns");
}

TEST_CASE("valid fixtures compile and round-trip canonically") {
  const auto files = fixtures("valid");
  CHECK(files.size() >= 10);
  for (const auto& f : files) {
    CAPTURE(f.filename().string());
    const auto c = compile({f.string(), slurp(f)});
    for (const auto& d : c.diagnostics) MESSAGE(format_diagnostic(d, f.filename().string()));
    REQUIRE(c.ok());
    CHECK(c.diagnostics.empty());
    const std::string canon = format(c.sequence);
    const auto again = compile({"canon", canon});
    REQUIRE(again.ok());
    CHECK(again.sequence == c.sequence);
    CHECK(format(again.sequence) == canon);
  }
}

TEST_CASE("invalid fixtures are rejected with located diagnostics") {
  const auto expected = nlohmann::json::parse(slurp(kFixtures / "invalid" / "expected.json"));
  const auto files = fixtures("invalid");
  CHECK(files.size() >= 15);
  CHECK(expected.size() == files.size());
  for (const auto& f : files) {
    CAPTURE(f.filename().string());
    const std::string text = slurp(f);
    const auto c = compile({f.string(), text});
    CHECK_FALSE(c.ok());
    const auto* e = first_error(c);
    REQUIRE(e);
    CHECK(e->code == expected.at(f.filename().string()).get<std::string>());
    for (const auto& d : c.diagnostics) CHECK(located(d, text));
  }
}

TEST_CASE("four-frequency loop check") {
  const auto good = compile({"modified_ramsey", slurp(kFixtures / "valid" / "modified_ramsey.pseq")});
  REQUIRE(good.ledger);
  CHECK(std::abs(delta_omega(*good.ledger)) < 0.1);

  const auto bad = compile({"open", slurp(kFixtures / "warn" / "modified_ramsey_open_loop.pseq")});
  CHECK(bad.ok());
  REQUIRE(bad.diagnostics.size() == 1);
  CHECK(bad.diagnostics[0].severity == Severity::Warning);
  CHECK(bad.diagnostics[0].code == "E-DELTAOMEGA");
  CHECK(bad.diagnostics[0].message.find("5000.000") != std::string::npos);
  CHECK(delta_omega(*bad.ledger) == doctest::Approx(5000.0).epsilon(1e-9));

  ValidationOptions loose;
  loose.delta_omega_tolerance = 1e4;
  CHECK(compile({"open", slurp(kFixtures / "warn" / "modified_ramsey_open_loop.pseq")}, loose).diagnostics.empty());
}

TEST_CASE("transitions follow the channel frequency when not named") {
  const auto c = compile({"inferred", slurp(kFixtures / "valid" / "inferred.pseq")});
  REQUIRE(c.ok());
  CHECK(std::get<Pulse>(c.sequence.items[0]).transition == transitions::kStorage);
  CHECK(std::get<Pulse>(c.sequence.items[1]).transition == transitions::kMap0);
  // A different field moves every resonance.
  const auto moved = compile({"override", slurp(kFixtures / "valid" / "field_override.pseq")});
  REQUIRE(moved.ok());
  CHECK(std::get<Pulse>(moved.sequence.items[0]).transition == transitions::kMap0);
}

TEST_CASE("overlap points at the offending start time") {
  const std::string text =
      "channel c freq 6834.678113590MHz\n"
      "pulse c on |1,-1>->|2,1> area 90deg rabi 750Hz\n"
      "pulse c on |1,-1>->|2,1> area 90deg rabi 750Hz at 100us\n";
  const auto c = compile_text(text);
  const auto* e = first_error(c);
  REQUIRE(e);
  CHECK(e->code == "E-OVERLAP");
  CHECK(e->loc.line == 3);
  CHECK(text.compare(e->loc.offset, 5, "100us") == 0);
}

TEST_CASE("several bad lines each get a diagnostic") {
  const auto c = compile_text("delay 1 parsec\nbogus\ndelay 1ms $\n");
  REQUIRE(c.diagnostics.size() == 3);
  CHECK(c.diagnostics[0].code == "E-UNIT");
  CHECK(c.diagnostics[1].code == "E-KEYWORD");
  CHECK(c.diagnostics[2].code == "E-LEX");
}

TEST_CASE("compiled fixture reproduces the modified Ramsey fringe") {
  const auto c = compile({"modified_ramsey", slurp(kFixtures / "valid" / "modified_ramsey.pseq")});
  REQUIRE(c.ok());
  const auto fit = fit_fringe(fringe_scan(c.sequence, Environment{}), Site::A, fringe_level(c.sequence));
  CHECK(fit.contrast >= 0.999);
}

TEST_CASE("mutation fuzzing never crashes the front end") {
  std::vector<std::string> corpus;
  for (const auto& f : fixtures("valid")) corpus.push_back(slurp(f));
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789 .,-+|>#eEHzkMGsmuTdgra\n\t\xC2\xB5\xFF";
  std::mt19937_64 rng(2024);
  int rejected = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string text = corpus[rng() % corpus.size()];
    const int edits = 1 + int(rng() % 4);
    for (int k = 0; k < edits && !text.empty(); ++k) {
      const std::size_t pos = rng() % text.size();
      switch (rng() % 5) {
        case 0: text[pos] = alphabet[rng() % alphabet.size()]; break;
        case 1: text.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
        case 2: text.erase(pos, 1 + rng() % 8); break;
        case 3: text.insert(pos, text.substr(rng() % text.size(), rng() % 30)); break;
        default: text = text.substr(0, pos); break;
      }
    }
    Compiled c;
    REQUIRE_NOTHROW(c = compile_text(text));
    if (!c.ok()) {
      ++rejected;
      bool all = true;
      for (const auto& d : c.diagnostics) all = all && located(d, text);
      CHECK(all);
    } else {
      const auto again = compile_text(format(c.sequence));
      CHECK(again.ok());
      CHECK(again.sequence == c.sequence);
    }
  }
  CHECK(rejected > 1000);
}
