#pragma once

#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "clockreg/environment.hpp"
#include "clockreg/levels.hpp"

namespace clockreg {

/// A phase-continuous oscillator. Its phase at time t is 2 pi f t + phase_offset; every
/// channel shares the reference time t = 0.
struct Channel {
  std::string id;
  double frequency = 0.0;     // Hz
  double phase_offset = 0.0;  // rad
  std::string detune_var;     // frequency scan variable added to `frequency`, if any

  bool operator==(const Channel&) const = default;
};

enum class SiteMask { A, B, AB };
std::string to_string(SiteMask m);

/// Either a fixed phase (rad) or the name of a phase scan variable.
using PhaseArg = std::variant<double, std::string>;

/// `sites` names the site(s) the pulse is tuned to. The microwave field itself reaches
/// every site; selectivity comes only from the site shifts.
struct Pulse {
  std::string channel;
  TransitionId transition;
  double area = 0.0;  // rad
  double rabi = 0.0;  // rad/s
  PhaseArg extra_phase = 0.0;
  SiteMask sites = SiteMask::AB;
  std::optional<double> at;  // s after start_time; otherwise right after the previous item

  double duration() const { return area / rabi; }
  bool operator==(const Pulse&) const = default;
};

struct Delay {
  double duration = 0.0;  // s
  bool operator==(const Delay&) const = default;
};

/// Switches the effective field (site shifts) on or off. Treated as instantaneous.
struct BeffSwitch {
  bool on = true;
  bool operator==(const BeffSwitch&) const = default;
};

using Item = std::variant<Pulse, Delay, BeffSwitch>;

enum class ScanKind { Phase, Frequency };

struct ScanSpec {
  std::string var;
  double from = 0.0;  // rad or Hz
  double to = 0.0;
  double step = 0.0;
  ScanKind kind = ScanKind::Phase;

  std::vector<double> values() const;
  bool operator==(const ScanSpec&) const = default;
};

struct SiteShift {
  double zeeman = 0.0;  // Hz, effective Zeeman splitting while B_eff is on
  double light = 0.0;   // Hz, extra differential light shift while B_eff is on
  bool operator==(const SiteShift&) const = default;
};

struct Sequence {
  std::optional<double> field;  // T; overrides the environment bias field
  HyperfineLevel initial{1, -1};
  double start_time = 0.0;      // s
  std::optional<ScanSpec> scan;
  std::vector<Channel> channels;
  SiteShift site_a;
  SiteShift site_b;
  std::vector<Item> items;
  SiteMask measure = SiteMask::A;
  std::vector<HyperfineLevel> measure_levels;  // empty: the four qubit levels

  const Channel* find_channel(const std::string& id) const;
  const SiteShift& shift(Site s) const { return s == Site::A ? site_a : site_b; }
  std::vector<HyperfineLevel> tracked_levels() const;
  bool operator==(const Sequence&) const = default;
};

/// Pulse or delay with its resolved absolute start time.
struct TimedItem {
  const Item* item;
  double start;
  double end;
};

/// Lays items out in time. Throws InputError when an explicit `at` lands inside an earlier
/// item, on a non-positive Rabi frequency or a negative area/delay.
std::vector<TimedItem> timeline(const Sequence& seq);
double total_duration(const Sequence& seq);

/// Returns a copy with every Delay rescaled so the delays sum to `delay`.
Sequence with_total_delay(const Sequence& seq, double delay);

// Four-frequency phase bookkeeping for the storage/working/mapping loop.

enum class LedgerRole { S01, W0p1p, M00p, M11p };
std::string to_string(LedgerRole r);
std::optional<LedgerRole> role_of(const TransitionId& t);

struct PhaseLedger {
  std::optional<double> phi01, phi0p1p, phi00p, phi11p;          // rad
  std::optional<double> omega01, omega0p1p, omega00p, omega11p;  // Hz
  bool complete() const;
};

/// Collects channel phases and frequencies by the transition each channel drives.
PhaseLedger derive_ledger(const Sequence& seq);

/// omega01 + omega0p1p - omega00p - omega11p (Hz). Throws InputError if a role is missing.
double delta_omega(const PhaseLedger& ledger);

/// phi01 + phi0p1p - phi00p - phi11p + 2 pi delta_omega t0, wrapped to (-pi, pi].
double total_phase(const PhaseLedger& ledger, double t0);

double wrap_angle(double phi);

// Builders. Channel frequencies come from the environment's resonances.

struct RamseyOptions {
  double rabi = 2.0 * std::numbers::pi * 10e3;  // rad/s
  bool echo = false;
  double detuning = 0.0;  // Hz added to the channel frequency
  double scan_step = 30.0 * std::numbers::pi / 180.0;
  std::string channel = "c";
};

/// pi/2 - delay - pi/2(phi), optionally with a pi pulse at the midpoint. Starts in the lower
/// level of `t`; scan variable "phi" on the closing pulse.
Sequence build_ramsey(const Environment& env, const TransitionId& t, double delay,
                      const RamseyOptions& options = {});

struct ModifiedRamseyOptions {
  double storage_rabi = 2.0 * std::numbers::pi * 750.0;  // rad/s
  double working_rabi = 2.0 * std::numbers::pi * 10e3;   // rad/s
  double map0_rabi = 0.0;  // rad/s; 0 = leak-free value for map1 and the remainder for map0
  double map1_rabi = 0.0;
  double mapping_duration = 200e-6;  // s, used when a mapping Rabi frequency is 0
  double storage_delay = 0.0;        // s after the opening pulse
  double working_delay = 0.0;        // s before the closing pulse
  double start_time = 0.0;
  bool reverse_mapping = false;  // map |1> first
  LedgerRole scan_role = LedgerRole::W0p1p;
  double scan_step = 30.0 * std::numbers::pi / 180.0;
  // Per-role detunings (Hz) and phase offsets (rad) applied to the channels.
  double detune01 = 0.0, detune0p1p = 0.0, detune00p = 0.0, detune11p = 0.0;
  double phase01 = 0.0, phase0p1p = 0.0, phase00p = 0.0, phase11p = 0.0;
  SiteMask sites = SiteMask::AB;
  bool beff = false;  // switch B_eff on around the mapping pulses
  SiteShift site_a;
  SiteShift site_b;
};

/// Opens on the storage transition, maps |0>->|0'> and |1>->|1'>, closes on the working
/// transition. Channels c01, c0p1p, c00p, c11p.
Sequence build_modified_ramsey(const Environment& env, const ModifiedRamseyOptions& options = {});

/// Rabi frequency (rad/s) for a pi pulse on `pulse` that leaves the nearby `spectator`
/// transition exactly unexcited (first zero), given the environment's polarization mix.
double leak_free_rabi(const Environment& env, const TransitionId& pulse,
                      const TransitionId& spectator);

/// The spectator next to each mapping transition: |1,1>-|2,0> for map1, |1,0>-|2,-1> for map0.
TransitionId leak_spectator(const TransitionId& mapping);

/// n repetitions of 420(0) 300(180) 60(0) on one channel. Scan variable "delta" detunes the
/// channel over [-span, span] (Hz) when span > 0.
Sequence build_corpse(const Environment& env, const TransitionId& t, int n, double rabi,
                      double span = 0.0, double step = 0.0);

/// A single pulse of area n pi, same scan layout as build_corpse.
Sequence build_pi_train(const Environment& env, const TransitionId& t, int n, double rabi,
                        double span = 0.0, double step = 0.0);

}  // namespace clockreg
