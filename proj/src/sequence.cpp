#include "clockreg/sequence.hpp"

#include <cmath>
#include <numbers>

#include "clockreg/errors.hpp"

namespace clockreg {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

std::string to_string(SiteMask m) {
  switch (m) {
    case SiteMask::A: return "A";
    case SiteMask::B: return "B";
    case SiteMask::AB: return "AB";
  }
  return "?";
}

std::string to_string(LedgerRole r) {
  switch (r) {
    case LedgerRole::S01: return "01";
    case LedgerRole::W0p1p: return "0'1'";
    case LedgerRole::M00p: return "00'";
    case LedgerRole::M11p: return "11'";
  }
  return "?";
}

std::vector<double> ScanSpec::values() const {
  if (step == 0.0 || from == to) return {from};
  const double span = (to - from) / step;
  if (span < 0.0) return {};
  const auto n = static_cast<long>(std::floor(span + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) out.push_back(from + step * static_cast<double>(i));
  return out;
}

const Channel* Sequence::find_channel(const std::string& id) const {
  for (const auto& c : channels) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

std::vector<HyperfineLevel> Sequence::tracked_levels() const {
  if (!measure_levels.empty()) return measure_levels;
  return {levels::kStorage0, levels::kStorage1, levels::kWorking0, levels::kWorking1};
}

std::vector<TimedItem> timeline(const Sequence& seq) {
  std::vector<TimedItem> out;
  out.reserve(seq.items.size());
  double cursor = seq.start_time;
  for (const auto& item : seq.items) {
    if (const auto* p = std::get_if<Pulse>(&item)) {
      if (!(p->rabi > 0.0)) throw InputError("pulse on " + p->channel + " needs a positive Rabi frequency");
      if (p->area < 0.0) throw InputError("pulse on " + p->channel + " has a negative area");
      double start = cursor;
      if (p->at) {
        start = seq.start_time + *p->at;
        if (start < cursor - 1e-12) {
          throw InputError("pulse on " + p->channel + " starts before the previous item ends");
        }
      }
      out.push_back({&item, start, start + p->duration()});
    } else if (const auto* d = std::get_if<Delay>(&item)) {
      if (d->duration < 0.0) throw InputError("negative delay");
      out.push_back({&item, cursor, cursor + d->duration});
    } else {
      out.push_back({&item, cursor, cursor});
    }
    cursor = out.back().end;
  }
  return out;
}

double total_duration(const Sequence& seq) {
  const auto t = timeline(seq);
  return t.empty() ? 0.0 : t.back().end - seq.start_time;
}

Sequence with_total_delay(const Sequence& seq, double delay) {
  if (delay < 0.0) throw InputError("delay must be >= 0");
  double sum = 0.0;
  int count = 0;
  for (const auto& item : seq.items) {
    if (const auto* d = std::get_if<Delay>(&item)) {
      sum += d->duration;
      ++count;
    }
  }
  if (count == 0) throw InputError("sequence has no delay to rescale");
  Sequence out = seq;
  for (auto& item : out.items) {
    if (auto* d = std::get_if<Delay>(&item)) {
      d->duration = sum > 0.0 ? d->duration * delay / sum : delay / count;
    }
  }
  return out;
}

std::optional<LedgerRole> role_of(const TransitionId& t) {
  if (t == transitions::kStorage) return LedgerRole::S01;
  if (t == transitions::kWorking) return LedgerRole::W0p1p;
  if (t == transitions::kMap0) return LedgerRole::M00p;
  if (t == transitions::kMap1) return LedgerRole::M11p;
  return std::nullopt;
}

bool PhaseLedger::complete() const {
  return omega01 && omega0p1p && omega00p && omega11p;
}

PhaseLedger derive_ledger(const Sequence& seq) {
  PhaseLedger ledger;
  for (const auto& item : seq.items) {
    const auto* p = std::get_if<Pulse>(&item);
    if (!p) continue;
    const auto role = role_of(p->transition);
    const Channel* c = seq.find_channel(p->channel);
    if (!role || !c) continue;
    auto assign = [&](std::optional<double>& phi, std::optional<double>& omega) {
      if (omega) return;
      phi = c->phase_offset;
      omega = c->frequency;
    };
    switch (*role) {
      case LedgerRole::S01: assign(ledger.phi01, ledger.omega01); break;
      case LedgerRole::W0p1p: assign(ledger.phi0p1p, ledger.omega0p1p); break;
      case LedgerRole::M00p: assign(ledger.phi00p, ledger.omega00p); break;
      case LedgerRole::M11p: assign(ledger.phi11p, ledger.omega11p); break;
    }
  }
  return ledger;
}

double delta_omega(const PhaseLedger& l) {
  if (!l.complete()) throw InputError("phase ledger needs all four channels (01, 0'1', 00', 11')");
  return *l.omega01 + *l.omega0p1p - *l.omega00p - *l.omega11p;
}

double wrap_angle(double phi) {
  phi = std::remainder(phi, kTwoPi);
  return phi <= -kPi ? phi + kTwoPi : phi;
}

double total_phase(const PhaseLedger& l, double t0) {
  const double dw = delta_omega(l);
  const double phi = l.phi01.value_or(0.0) + l.phi0p1p.value_or(0.0) - l.phi00p.value_or(0.0) -
                     l.phi11p.value_or(0.0);
  return wrap_angle(phi + kTwoPi * dw * t0);
}

namespace {

ScanSpec phase_scan(double step) {
  return ScanSpec{.var = "phi", .from = 0.0, .to = kTwoPi - step, .step = step,
                  .kind = ScanKind::Phase};
}

Pulse make_pulse(const std::string& channel, const TransitionId& t, double area, double rabi,
                 PhaseArg phase = 0.0, SiteMask sites = SiteMask::AB) {
  return Pulse{.channel = channel, .transition = t, .area = area, .rabi = rabi,
               .extra_phase = std::move(phase), .sites = sites, .at = std::nullopt};
}

Sequence single_channel_spectrum(const Environment& env, const TransitionId& t,
                                 std::vector<Item> items, double span, double step) {
  Sequence seq;
  seq.initial = t.lower();
  seq.channels.push_back(Channel{.id = "c", .frequency = env.drive_frequency(t),
                                 .phase_offset = 0.0, .detune_var = span > 0.0 ? "delta" : ""});
  seq.items = std::move(items);
  if (span > 0.0) {
    if (!(step > 0.0)) throw InputError("spectrum step must be > 0");
    seq.scan = ScanSpec{.var = "delta", .from = -span, .to = span, .step = step,
                        .kind = ScanKind::Frequency};
  }
  seq.measure_levels = {t.lower(), t.upper()};
  return seq;
}

}  // namespace

Sequence build_ramsey(const Environment& env, const TransitionId& t, double delay,
                      const RamseyOptions& o) {
  if (delay < 0.0) throw InputError("Ramsey delay must be >= 0");
  Sequence seq;
  seq.initial = t.lower();
  seq.channels.push_back(
      Channel{.id = o.channel, .frequency = env.drive_frequency(t) + o.detuning});
  seq.items.push_back(make_pulse(o.channel, t, kPi / 2, o.rabi));
  if (o.echo) {
    seq.items.push_back(Delay{delay / 2});
    seq.items.push_back(make_pulse(o.channel, t, kPi, o.rabi));
    seq.items.push_back(Delay{delay / 2});
  } else {
    seq.items.push_back(Delay{delay});
  }
  seq.items.push_back(make_pulse(o.channel, t, kPi / 2, o.rabi, std::string("phi")));
  seq.scan = phase_scan(o.scan_step);
  seq.measure_levels = {t.lower(), t.upper()};
  return seq;
}

TransitionId leak_spectator(const TransitionId& mapping) {
  if (mapping == transitions::kMap1) return TransitionId({1, 1}, {2, 0});
  if (mapping == transitions::kMap0) return TransitionId({1, 0}, {2, -1});
  throw InputError("no leak spectator defined for " + mapping.label());
}

double leak_free_rabi(const Environment& env, const TransitionId& pulse,
                      const TransitionId& spectator) {
  const auto pol_p = pulse.natural_polarization();
  const auto pol_s = spectator.natural_polarization();
  if (pol_p == Polarization::TwoPhoton || pol_s == Polarization::TwoPhoton) {
    throw InputError("leak-free Rabi frequency needs single-photon transitions");
  }
  const auto& mix = env.drive.polarization_mix;
  const double wp = mix[static_cast<std::size_t>(pulse.delta_m() + 1)] * coupling_strength(pulse, pol_p);
  const double ws = mix[static_cast<std::size_t>(spectator.delta_m() + 1)] *
                    coupling_strength(spectator, pol_s);
  if (wp <= 0.0) throw InputError("pulse polarization carries no weight");
  const double detuning = env.resonance(spectator) - env.resonance(pulse);
  return kTwoPi * zero_response_rabi(detuning, 1, ws / wp);
}

Sequence build_modified_ramsey(const Environment& env, const ModifiedRamseyOptions& o) {
  const TransitionId first = o.reverse_mapping ? transitions::kMap1 : transitions::kMap0;
  const TransitionId second = o.reverse_mapping ? transitions::kMap0 : transitions::kMap1;
  double rabi_first = o.reverse_mapping ? o.map1_rabi : o.map0_rabi;
  double rabi_second = o.reverse_mapping ? o.map0_rabi : o.map1_rabi;
  if (rabi_second <= 0.0) rabi_second = leak_free_rabi(env, second, leak_spectator(second));
  if (rabi_first <= 0.0) {
    const double remaining = o.mapping_duration - kPi / rabi_second;
    if (!(remaining > 0.0)) {
      throw InputError("mapping duration too short for the leak-free second pulse");
    }
    rabi_first = kPi / remaining;
  }

  Sequence seq;
  seq.start_time = o.start_time;
  seq.initial = levels::kStorage0;
  seq.site_a = o.site_a;
  seq.site_b = o.site_b;
  auto channel = [&](const std::string& id, const TransitionId& t, double detune, double phase) {
    seq.channels.push_back(Channel{.id = id, .frequency = env.drive_frequency(t) + detune,
                                   .phase_offset = phase});
  };
  channel("c01", transitions::kStorage, o.detune01, o.phase01);
  channel("c0p1p", transitions::kWorking, o.detune0p1p, o.phase0p1p);
  channel("c00p", transitions::kMap0, o.detune00p, o.phase00p);
  channel("c11p", transitions::kMap1, o.detune11p, o.phase11p);

  auto phase_for = [&](LedgerRole r) -> PhaseArg {
    if (r == o.scan_role) return std::string("phi");
    return 0.0;
  };
  auto map_channel = [](const TransitionId& t) { return t == transitions::kMap0 ? "c00p" : "c11p"; };
  auto map_role = [](const TransitionId& t) {
    return t == transitions::kMap0 ? LedgerRole::M00p : LedgerRole::M11p;
  };

  seq.items.push_back(make_pulse("c01", transitions::kStorage, kPi / 2, o.storage_rabi,
                                 phase_for(LedgerRole::S01), o.sites));
  if (o.storage_delay > 0.0) seq.items.push_back(Delay{o.storage_delay});
  if (o.beff) seq.items.push_back(BeffSwitch{true});
  seq.items.push_back(make_pulse(map_channel(first), first, kPi, rabi_first,
                                 phase_for(map_role(first)), o.sites));
  seq.items.push_back(make_pulse(map_channel(second), second, kPi, rabi_second,
                                 phase_for(map_role(second)), o.sites));
  if (o.beff) seq.items.push_back(BeffSwitch{false});
  if (o.working_delay > 0.0) seq.items.push_back(Delay{o.working_delay});
  seq.items.push_back(make_pulse("c0p1p", transitions::kWorking, kPi / 2, o.working_rabi,
                                 phase_for(LedgerRole::W0p1p), o.sites));
  seq.scan = phase_scan(o.scan_step);
  seq.measure = o.sites == SiteMask::B ? SiteMask::B : SiteMask::A;
  return seq;
}

Sequence build_corpse(const Environment& env, const TransitionId& t, int n, double rabi,
                      double span, double step) {
  if (n < 1) throw InputError("CORPSE repetition count must be >= 1");
  std::vector<Item> items;
  const double deg = kPi / 180.0;
  for (int i = 0; i < n; ++i) {
    items.push_back(make_pulse("c", t, 420 * deg, rabi, 0.0));
    items.push_back(make_pulse("c", t, 300 * deg, rabi, kPi));
    items.push_back(make_pulse("c", t, 60 * deg, rabi, 0.0));
  }
  return single_channel_spectrum(env, t, std::move(items), span, step);
}

Sequence build_pi_train(const Environment& env, const TransitionId& t, int n, double rabi,
                        double span, double step) {
  if (n < 1) throw InputError("pulse count must be >= 1");
  return single_channel_spectrum(env, t, {make_pulse("c", t, n * kPi, rabi)}, span, step);
}

}  // namespace clockreg
