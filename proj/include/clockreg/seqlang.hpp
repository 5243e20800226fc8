#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "clockreg/environment.hpp"
#include "clockreg/sequence.hpp"

// Line-oriented pulse-sequence language (.pseq).
//
//   field 322.9uT
//   init |1,-1>
//   start 0s
//   scan phi 0deg to 330deg step 30deg
//   channel c01 freq 6834.677975MHz phase 0deg detune delta
//   site B zeeman 23kHz light 35Hz
//   beff on
//   pulse c01 on |1,-1>->|2,1> area 90deg rabi 750Hz phase phi site A at 1ms
//   delay 1.5ms
//   measure AB levels |2,0> |1,0>
//
// One statement per line, '#' starts a comment. Units may follow the number directly or after
// whitespace.
namespace clockreg::seqlang {

struct Location {
  int line = 1;
  int column = 1;
  std::size_t offset = 0;  // byte offset into the source
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;  // E-SYNTAX, E-UNIT, ...
  std::string message;
  Location loc;
};

/// "file:line:col: error[E-UNIT]: message"
std::string format_diagnostic(const Diagnostic& d, const std::string& file);
bool has_errors(const std::vector<Diagnostic>& diags);

struct SourceProgram {
  std::string name = "<input>";
  std::string text;
};

// Syntax tree. Quantities are already in SI units (Hz, s, T, rad).

struct Value {
  double value = 0.0;
  Location loc;
};

struct Ident {
  std::string name;
  Location loc;
};

struct Ket {
  int F = 0;
  int mF = 0;
  Location loc;
};

struct FieldStmt { Value field; };
struct InitStmt { Ket level; };
struct StartStmt { Value time; };
struct ChannelStmt {
  Ident id;
  Value freq;
  std::optional<Value> phase;
  std::optional<Ident> detune;
};
struct ScanStmt {
  Ident var;
  Value from, to, step;
  ScanKind kind = ScanKind::Phase;
};
struct SiteStmt {
  Site site = Site::A;
  std::optional<Value> zeeman;
  std::optional<Value> light;
};
struct BeffStmt { bool on = true; };
struct PulseStmt {
  Ident channel;
  std::optional<std::pair<Ket, Ket>> transition;
  Value area;
  Value rabi;  // Hz
  std::optional<Value> phase;
  std::optional<Ident> phase_var;
  SiteMask sites = SiteMask::AB;
  std::optional<Value> at;
};
struct DelayStmt { Value duration; };
struct MeasureStmt {
  SiteMask sites = SiteMask::A;
  std::vector<Ket> levels;
};

using Statement = std::variant<FieldStmt, InitStmt, StartStmt, ChannelStmt, ScanStmt, SiteStmt,
                               BeffStmt, PulseStmt, DelayStmt, MeasureStmt>;

struct Line {
  Statement stmt;
  Location loc;  // the keyword
};

struct Program {
  std::string name;
  std::vector<Line> lines;
};

struct ParseResult {
  Program program;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return !has_errors(diagnostics); }
};

/// Lexes and parses every line; a bad line yields one diagnostic and parsing moves on.
ParseResult parse(const SourceProgram& source);

struct ValidationOptions {
  Environment env;                   // resolves transitions when a pulse has no `on`
  double delta_omega_tolerance = 0.1;  // Hz
};

struct Compiled {
  Sequence sequence;
  std::optional<PhaseLedger> ledger;  // present when all four loop channels are driven
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return !has_errors(diagnostics); }
};

/// Resolves channels, scan variables and transitions, lays out time and checks the
/// four-frequency condition.
Compiled validate(const Program& program, const ValidationOptions& options = {});

/// parse + validate.
Compiled compile(const SourceProgram& source, const ValidationOptions& options = {});

/// Canonical text of a sequence. Parsing it back yields an identical Sequence.
std::string format(const Sequence& seq);

/// Canonical spelling of single quantities, exposed for tests.
std::string format_frequency(double hz);
std::string format_time(double s);
std::string format_field(double tesla);
std::string format_angle(double rad);

}  // namespace clockreg::seqlang
