#include <cmath>
#include <cstdio>
#include <map>

#include "clockreg/errors.hpp"
#include "clockreg/seqlang.hpp"
#include "seqlang_units.hpp"

namespace clockreg::seqlang {

using detail::kDegree;
using detail::kTwoPi;

namespace {

constexpr double kInferenceWindow = 200e3;  // Hz
constexpr std::size_t kMaxScanPoints = 100000;

std::string hz_text(double hz) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f Hz", hz);
  return buf;
}

std::string line_ref(const Location& l) { return "line " + std::to_string(l.line); }

std::vector<TransitionId> all_transitions() {
  std::vector<TransitionId> out;
  for (int m1 = -1; m1 <= 1; ++m1) {
    for (int m2 = -2; m2 <= 2; ++m2) {
      if (std::abs(m2 - m1) <= 2) out.emplace_back(HyperfineLevel{1, m1}, HyperfineLevel{2, m2});
    }
  }
  for (int m = -1; m < 1; ++m) out.emplace_back(HyperfineLevel{1, m}, HyperfineLevel{1, m + 1});
  for (int m = -2; m < 2; ++m) out.emplace_back(HyperfineLevel{2, m}, HyperfineLevel{2, m + 1});
  return out;
}

class Validator {
 public:
  Validator(const Program& p, const ValidationOptions& o) : prog_(p), opt_(o) {}

  Compiled run() {
    for (const Line& line : prog_.lines) {
      std::visit([&](const auto& s) { handle(s, line.loc); }, line.stmt);
    }
    if (items_.empty() && !has_errors(out_.diagnostics)) {
      error("E-EMPTY", "sequence has no pulse or delay", prog_.lines.empty() ? Location{} : prog_.lines.front().loc);
    }
    if (has_errors(out_.diagnostics)) return std::move(out_);
    infer_transitions();
    if (!has_errors(out_.diagnostics)) layout();
    if (!has_errors(out_.diagnostics)) ledger();
    return std::move(out_);
  }

 private:
  struct ItemInfo {
    Location loc;
    std::optional<Location> at;
    bool infer = false;
  };

  Sequence& seq() { return out_.sequence; }

  void error(const char* code, std::string msg, Location loc) {
    out_.diagnostics.push_back({Severity::Error, code, std::move(msg), loc});
  }

  bool once(const std::string& key, const Location& loc, const char* what) {
    auto [it, fresh] = singles_.emplace(key, loc);
    if (!fresh) error("E-DUP", std::string(what) + " already given at " + line_ref(it->second), loc);
    return fresh;
  }

  std::optional<HyperfineLevel> level(const Ket& k) {
    if (!HyperfineLevel::valid(k.F, k.mF)) {
      error("E-RANGE", "no level |" + std::to_string(k.F) + "," + std::to_string(k.mF) + ">", k.loc);
      return std::nullopt;
    }
    return HyperfineLevel{k.F, k.mF};
  }

  // Scan variable reference: must be declared above with the right kind.
  bool scan_var(const Ident& v, ScanKind kind, const char* use) {
    if (!scan_ || scan_->var.name != v.name) {
      error("E-NOVAR", "scan variable '" + v.name + "' is not declared before use", v.loc);
      return false;
    }
    if (scan_->kind != kind) {
      error("E-SCAN", "scan variable '" + v.name + "' is a " +
                          (scan_->kind == ScanKind::Phase ? "phase" : "frequency") + " scan and cannot be used as " + use,
            v.loc);
      return false;
    }
    return true;
  }

  void handle(const FieldStmt& s, const Location& loc) {
    if (!once("field", loc, "field")) return;
    if (!(s.field.value > 0.0 && s.field.value <= 1.0)) {
      error("E-RANGE", "bias field must lie in (0, 1] T", s.field.loc);
      return;
    }
    seq().field = s.field.value;
  }

  void handle(const InitStmt& s, const Location& loc) {
    if (!once("init", loc, "init")) return;
    if (auto l = level(s.level)) seq().initial = *l;
  }

  void handle(const StartStmt& s, const Location& loc) {
    if (!once("start", loc, "start")) return;
    if (s.time.value < 0.0) error("E-RANGE", "start time must be >= 0", s.time.loc);
    else seq().start_time = s.time.value;
  }

  void handle(const ChannelStmt& s, const Location&) {
    if (auto it = channel_lines_.find(s.id.name); it != channel_lines_.end()) {
      error("E-DUPCHAN", "channel '" + s.id.name + "' already declared at " + line_ref(it->second), s.id.loc);
      return;
    }
    channel_lines_.emplace(s.id.name, s.id.loc);
    if (!(s.freq.value > 0.0)) error("E-RANGE", "channel frequency must be > 0", s.freq.loc);
    Channel c{.id = s.id.name, .frequency = s.freq.value};
    if (s.phase) c.phase_offset = s.phase->value;
    if (s.detune && scan_var(*s.detune, ScanKind::Frequency, "a channel detuning")) c.detune_var = s.detune->name;
    seq().channels.push_back(c);
  }

  void handle(const ScanStmt& s, const Location& loc) {
    if (scan_) {
      error("E-SCAN", "only one scan per sequence (first at " + line_ref(scan_line_) + ")", loc);
      return;
    }
    scan_ = s;
    scan_line_ = loc;
    if (!(s.step.value > 0.0)) {
      error("E-SCAN", "scan step must be > 0", s.step.loc);
      return;
    }
    if (s.to.value < s.from.value) {
      error("E-SCAN", "scan end lies below its start", s.to.loc);
      return;
    }
    if ((s.to.value - s.from.value) / s.step.value + 1.0 > double(kMaxScanPoints)) {
      error("E-SCAN", "scan has more than " + std::to_string(kMaxScanPoints) + " points", s.step.loc);
      return;
    }
    seq().scan = ScanSpec{s.var.name, s.from.value, s.to.value, s.step.value, s.kind};
  }

  void handle(const SiteStmt& s, const Location& loc) {
    const bool a = s.site == Site::A;
    if (!once(a ? "site A" : "site B", loc, a ? "site A" : "site B")) return;
    SiteShift& shift = a ? seq().site_a : seq().site_b;
    if (s.zeeman) shift.zeeman = s.zeeman->value;
    if (s.light) shift.light = s.light->value;
  }

  void handle(const BeffStmt& s, const Location& loc) {
    seq().items.push_back(BeffSwitch{s.on});
    items_.push_back({loc});
  }

  void handle(const PulseStmt& s, const Location& loc) {
    bool ok = true;
    if (!channel_lines_.count(s.channel.name)) {
      error("E-NOCHAN", "channel '" + s.channel.name + "' is not declared before use", s.channel.loc);
      ok = false;
    }
    Pulse p{.channel = s.channel.name, .transition = transitions::kStorage};
    if (s.transition) {
      auto a = level(s.transition->first), b = level(s.transition->second);
      if (a && b) {
        try {
          p.transition = TransitionId::between(*a, *b);
        } catch (const std::exception& e) {
          error("E-TRANS", e.what(), s.transition->first.loc);
          ok = false;
        }
      } else {
        ok = false;
      }
    }
    if (s.area.value < 0.0) error("E-RANGE", "pulse area must be >= 0", s.area.loc), ok = false;
    if (!(s.rabi.value > 0.0)) error("E-RANGE", "Rabi frequency must be > 0", s.rabi.loc), ok = false;
    if (s.at && s.at->value < 0.0) error("E-RANGE", "pulse time must be >= 0", s.at->loc), ok = false;
    if (s.phase_var && !scan_var(*s.phase_var, ScanKind::Phase, "a pulse phase")) ok = false;
    if (!ok) return;
    p.area = s.area.value;
    p.rabi = kTwoPi * s.rabi.value;
    if (s.phase_var) p.extra_phase = s.phase_var->name;
    else if (s.phase) p.extra_phase = s.phase->value;
    p.sites = s.sites;
    if (s.at) p.at = s.at->value;
    seq().items.push_back(p);
    items_.push_back({loc, s.at ? std::optional(s.at->loc) : std::nullopt, !s.transition});
  }

  void handle(const DelayStmt& s, const Location& loc) {
    if (s.duration.value < 0.0) {
      error("E-RANGE", "delay must be >= 0", s.duration.loc);
      return;
    }
    seq().items.push_back(Delay{s.duration.value});
    items_.push_back({loc});
  }

  void handle(const MeasureStmt& s, const Location& loc) {
    if (!once("measure", loc, "measure")) return;
    seq().measure = s.sites;
    seq().measure_levels.clear();
    for (const Ket& k : s.levels) {
      if (auto l = level(k)) seq().measure_levels.push_back(*l);
    }
  }

  void infer_transitions() {
    Environment env = opt_.env;
    if (seq().field) env.bias_field = *seq().field;
    static const std::vector<TransitionId> candidates = all_transitions();
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (!items_[i].infer) continue;
      Pulse& p = std::get<Pulse>(seq().items[i]);
      const double f = seq().find_channel(p.channel)->frequency;
      const TransitionId* best = nullptr;
      double best_gap = 0.0;
      for (const auto& t : candidates) {
        const double gap = std::abs(std::abs(env.drive_frequency(t)) - f);
        if (!best || gap < best_gap) best = &t, best_gap = gap;
      }
      if (best_gap > kInferenceWindow) {
        error("E-NOTRANS",
              "no transition within 200 kHz of channel '" + p.channel + "' (nearest " + best->label() +
                  ", " + hz_text(best_gap) + " away); name one with 'on'",
              items_[i].loc);
        continue;
      }
      p.transition = *best;
    }
  }

  void layout() {
    double t = seq().start_time;
    for (std::size_t i = 0; i < items_.size(); ++i) {
      const Item& item = seq().items[i];
      if (const auto* p = std::get_if<Pulse>(&item)) {
        double s = t;
        if (p->at) {
          s = seq().start_time + *p->at;
          if (s < t - 1e-12) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "pulse starts at %.9g s but the previous item ends at %.9g s", s, t);
            error("E-OVERLAP", buf, *items_[i].at);
          }
        }
        t = std::max(t, s + p->duration());
      } else if (const auto* d = std::get_if<Delay>(&item)) {
        t += d->duration;
      }
    }
    if (has_errors(out_.diagnostics)) return;
    try {
      timeline(seq());
    } catch (const InputError& e) {
      error("E-OVERLAP", e.what(), prog_.lines.front().loc);
    }
  }

  void ledger() {
    const PhaseLedger l = derive_ledger(seq());
    if (!l.complete()) return;
    out_.ledger = l;
    const double dw = delta_omega(l);
    if (std::abs(dw) > opt_.delta_omega_tolerance) {
      Location where = prog_.lines.front().loc;
      for (const auto& c : seq().channels) {
        for (const Item& item : seq().items) {
          const auto* p = std::get_if<Pulse>(&item);
          if (p && p->channel == c.id && role_of(p->transition) == LedgerRole::S01) where = channel_lines_.at(c.id);
        }
      }
      out_.diagnostics.push_back({Severity::Warning, "E-DELTAOMEGA",
                                  "four-frequency loop does not close: delta omega = " + hz_text(dw) +
                                      " (tolerance " + hz_text(opt_.delta_omega_tolerance) + ")",
                                  where});
    }
  }

  const Program& prog_;
  const ValidationOptions& opt_;
  Compiled out_;
  std::vector<ItemInfo> items_;
  std::map<std::string, Location> singles_;
  std::map<std::string, Location> channel_lines_;
  std::optional<ScanStmt> scan_;
  Location scan_line_;
};

// Literal whose lowering (factor * to_si) reproduces `target` exactly, searched around `approx`.
std::string exact_literal(double target, double approx, const char* unit_name, double factor) {
  const detail::Unit u = *detail::lookup_unit(unit_name);
  auto works = [&](const std::string& text) {
    const auto v = detail::to_si(text, u);
    return v && factor * *v == target;
  };
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", approx / std::pow(10.0, u.exp10));
  if (const auto rounded = detail::decimal_value(buf, u.exp10)) {
    const std::string text = detail::decimal_text(*rounded, u.exp10);
    if (works(text)) return text + unit_name;
  }
  double up = approx, down = approx;
  for (int k = 0; k <= 16; ++k) {
    for (double c : {up, down}) {
      const std::string text = detail::decimal_text(c, u.exp10);
      if (works(text)) return text + unit_name;
    }
    up = std::nextafter(up, INFINITY);
    down = std::nextafter(down, -INFINITY);
  }
  return {};
}

struct Scale {
  const char* unit;
  double size;
};

std::string scaled(double v, std::initializer_list<Scale> scales) {
  const Scale* pick = scales.end() - 1;
  for (const Scale& s : scales) {
    if (std::abs(v) >= s.size) {
      pick = &s;
      break;
    }
  }
  return detail::decimal_text(v, detail::lookup_unit(pick->unit)->exp10) + pick->unit;
}

std::string rabi_literal(double rad_per_s) {
  const double hz = rad_per_s / kTwoPi;
  const char* unit = std::abs(hz) >= 1e9 ? "GHz" : std::abs(hz) >= 1e6 ? "MHz" : std::abs(hz) >= 1e3 ? "kHz" : "Hz";
  std::string s = exact_literal(rad_per_s, hz, unit, kTwoPi);
  return s.empty() ? format_frequency(hz) : s;
}

std::string ket(const HyperfineLevel& l) {
  return "|" + std::to_string(l.F()) + "," + std::to_string(l.mF()) + ">";
}

}  // namespace

std::string format_frequency(double hz) {
  return scaled(hz, {{"GHz", 1e9}, {"MHz", 1e6}, {"kHz", 1e3}, {"Hz", 0.0}});
}

std::string format_time(double s) { return scaled(s, {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 0.0}}); }

std::string format_field(double t) { return scaled(t, {{"T", 1.0}, {"mT", 1e-3}, {"uT", 1e-6}, {"nT", 0.0}}); }

std::string format_angle(double rad) {
  if (rad == 0.0) return "0deg";
  std::string s = exact_literal(rad, rad / kDegree, "deg", 1.0);
  return s.empty() ? detail::decimal_text(rad) + "rad" : s;
}

Compiled validate(const Program& program, const ValidationOptions& options) {
  return Validator(program, options).run();
}

Compiled compile(const SourceProgram& source, const ValidationOptions& options) {
  ParseResult parsed = parse(source);
  if (!parsed.ok()) {
    Compiled c;
    c.diagnostics = std::move(parsed.diagnostics);
    return c;
  }
  Compiled c = validate(parsed.program, options);
  c.diagnostics.insert(c.diagnostics.begin(), parsed.diagnostics.begin(), parsed.diagnostics.end());
  return c;
}

std::string format(const Sequence& seq) {
  std::string out;
  auto line = [&](const std::string& s) { out += s + "\n"; };
  if (seq.field) line("field " + format_field(*seq.field));
  if (seq.initial != HyperfineLevel{1, -1}) line("init " + ket(seq.initial));
  if (seq.start_time != 0.0) line("start " + format_time(seq.start_time));
  if (seq.scan) {
    const auto& s = *seq.scan;
    auto v = [&](double x) { return s.kind == ScanKind::Phase ? format_angle(x) : format_frequency(x); };
    line("scan " + s.var + " " + v(s.from) + " to " + v(s.to) + " step " + v(s.step));
  }
  for (const auto& c : seq.channels) {
    std::string s = "channel " + c.id + " freq " + format_frequency(c.frequency);
    if (c.phase_offset != 0.0) s += " phase " + format_angle(c.phase_offset);
    if (!c.detune_var.empty()) s += " detune " + c.detune_var;
    line(s);
  }
  for (Site site : {Site::A, Site::B}) {
    const SiteShift& sh = seq.shift(site);
    if (sh == SiteShift{}) continue;
    std::string s = std::string("site ") + (site == Site::A ? "A" : "B");
    if (sh.zeeman != 0.0) s += " zeeman " + format_frequency(sh.zeeman);
    if (sh.light != 0.0) s += " light " + format_frequency(sh.light);
    line(s);
  }
  for (const Item& item : seq.items) {
    if (const auto* p = std::get_if<Pulse>(&item)) {
      std::string s = "pulse " + p->channel + " on " + ket(p->transition.lower()) + "->" +
                      ket(p->transition.upper()) + " area " + format_angle(p->area) + " rabi " +
                      rabi_literal(p->rabi);
      if (const auto* var = std::get_if<std::string>(&p->extra_phase)) s += " phase " + *var;
      else if (std::get<double>(p->extra_phase) != 0.0) s += " phase " + format_angle(std::get<double>(p->extra_phase));
      if (p->sites != SiteMask::AB) s += " site " + to_string(p->sites);
      if (p->at) s += " at " + format_time(*p->at);
      line(s);
    } else if (const auto* d = std::get_if<Delay>(&item)) {
      line("delay " + format_time(d->duration));
    } else {
      line(std::string("beff ") + (std::get<BeffSwitch>(item).on ? "on" : "off"));
    }
  }
  std::string m = "measure " + to_string(seq.measure);
  if (!seq.measure_levels.empty()) {
    m += " levels";
    for (const auto& l : seq.measure_levels) m += " " + ket(l);
  }
  line(m);
  return out;
}

}  // namespace clockreg::seqlang
