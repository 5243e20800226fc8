#include "clockreg/noise.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "clockreg/errors.hpp"
#include "clockreg/parallel.hpp"
#include "clockreg/sequence.hpp"
#include "clockreg/simulate.hpp"

namespace clockreg {

namespace {
constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::string to_string(DistributionKind k) {
  switch (k) {
    case DistributionKind::Lorentzian: return "lorentzian";
    case DistributionKind::Gaussian: return "gaussian";
    case DistributionKind::TwoPoint: return "two-point";
  }
  return "?";
}

DistributionKind distribution_from_string(const std::string& s) {
  if (s == "lorentzian") return DistributionKind::Lorentzian;
  if (s == "gaussian") return DistributionKind::Gaussian;
  if (s == "two-point") return DistributionKind::TwoPoint;
  throw InputError("unknown distribution '" + s + "' (lorentzian, gaussian, two-point)");
}

void DetuningDistribution::validate() const {
  if (!(width >= 0.0) || !std::isfinite(width)) throw InputError("distribution width must be >= 0");
  if (!std::isfinite(mean)) throw InputError("distribution mean must be finite");
}

double DetuningDistribution::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile needs u in (0, 1)");
  switch (kind) {
    case DistributionKind::Lorentzian: return mean + width * std::tan(kPi * (u - 0.5));
    case DistributionKind::Gaussian:
      return mean + width * std::sqrt(2.0) * boost::math::erf_inv(2.0 * u - 1.0);
    case DistributionKind::TwoPoint: return u < 0.5 ? mean - width : mean + width;
  }
  return mean;
}

void EnsembleConfig::validate() const {
  if (n_samples < 1) throw InputError("ensemble needs at least one sample");
  distribution.validate();
}

double uniform01(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t bits = splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

std::vector<double> sample_detunings(const EnsembleConfig& cfg) {
  cfg.validate();
  std::vector<double> out(cfg.n_samples);
  const double n = static_cast<double>(cfg.n_samples);
  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    const double u = (static_cast<double>(i) + uniform01(cfg.seed, i)) / n;
    out[i] = cfg.distribution.quantile(u);
  }
  return out;
}

LevelArray<double> noise_pattern(const Environment& env, const EnsembleConfig& cfg) {
  LevelArray<double> p{};
  if (cfg.profile == NoiseProfile::Differential) {
    for (std::size_t i = 0; i < kNumLevels; ++i) p[i] = HyperfineLevel::from_index(i).F() == 2 ? 1.0 : 0.0;
    return p;
  }
  const double s_ref = field_sensitivity(env.atom, cfg.reference, env.bias_field);
  if (s_ref == 0.0) throw InputError("field noise reference transition is field insensitive");
  const double b = env.bias_field;
  const double h = std::max(1e-6 * b, 1e-9);
  for (std::size_t i = 0; i < kNumLevels; ++i) {
    const auto level = HyperfineLevel::from_index(i);
    const double slope = (breit_rabi_energy(env.atom, level, b + h) -
                          breit_rabi_energy(env.atom, level, std::max(0.0, b - h))) /
                         (b + h - std::max(0.0, b - h));
    p[i] = slope / std::abs(s_ref);
  }
  return p;
}

std::vector<ContrastPoint> ensemble_contrast(const Sequence& seq, const Environment& env,
                                             const EnsembleConfig& cfg,
                                             const std::vector<double>& delays, unsigned jobs) {
  if (delays.empty()) throw InputError("ensemble contrast needs at least one delay");
  if (!seq.scan || seq.scan->kind != ScanKind::Phase) {
    throw InputError("ensemble contrast needs a phase scan");
  }
  cfg.validate();
  const std::vector<double> samples = sample_detunings(cfg);
  const std::vector<double> phases = seq.scan->values();
  const std::size_t m = phases.size();
  if (m < 3) throw InputError("phase scan needs at least 3 points");
  const HyperfineLevel level = fringe_level(seq);
  const Site site = sites_of(seq.measure).front();

  // Least-squares projector onto [1, cos, sin].
  Eigen::MatrixXd a(m, 3);
  for (std::size_t k = 0; k < m; ++k) {
    a(k, 0) = 1.0;
    a(k, 1) = std::cos(phases[k]);
    a(k, 2) = std::sin(phases[k]);
  }
  const Eigen::MatrixXd projector = (a.transpose() * a).ldlt().solve(a.transpose());

  RunOptions base;
  base.noise_pattern = noise_pattern(sequence_environment(env, seq), cfg);
  base.noise_during_pulses = cfg.during_pulses;

  std::vector<ContrastPoint> out(delays.size());
  const std::size_t n = samples.size();
  for (std::size_t d = 0; d < delays.size(); ++d) {
    const Sequence s = with_total_delay(seq, delays[d]);
    std::vector<Eigen::Vector2d> coeffs(n);
    parallel_for(n, jobs, [&](std::size_t i) {
      RunOptions r = base;
      r.noise = samples[i];
      Eigen::VectorXd y(m);
      for (std::size_t k = 0; k < m; ++k) {
        y(k) = run_site(s, env, site, phases[k], std::nullopt, r).population(level);
      }
      const Eigen::Vector3d c = projector * y;
      coeffs[i] = c.tail<2>();
    });
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& c : coeffs) mean += c;
    mean /= static_cast<double>(n);
    const double amp = mean.norm();
    const Eigen::Vector2d dir = amp > 0.0 ? Eigen::Vector2d(mean / amp) : Eigen::Vector2d(1.0, 0.0);
    double var = 0.0;
    for (const auto& c : coeffs) {
      const double dev = 2.0 * (c.dot(dir) - amp);
      var += dev * dev;
    }
    const double sd = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
    out[d] = ContrastPoint{delays[d], 2.0 * amp, sd / std::sqrt(static_cast<double>(n))};
  }
  return out;
}

namespace {

double basis(double t, DecayModel model) {
  return model == DecayModel::Exponential ? t : t * t;
}

}  // namespace

T2Fit fit_t2star(const std::vector<ContrastPoint>& table, DecayModel model) {
  if (table.size() < 4) throw InputError("T2* fit needs at least 4 delays");
  for (const auto& p : table) {
    if (!(p.contrast > 0.0)) throw InputError("T2* fit needs positive contrasts");
    if (p.delay < 0.0) throw InputError("T2* fit needs non-negative delays");
  }

  // Initial guess from log-linear regression: ln C = ln C0 - k x, x = t or t^2.
  const std::size_t n = table.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : table) {
    const double x = basis(p.delay, model), y = std::log(p.contrast);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  if (denom <= 0.0) throw InputError("T2* fit needs distinct delays");
  double k = -(dn * sxy - sx * sy) / denom;
  double c0 = std::exp((sy + k * sx) / dn);

  auto rms_of = [&](double c, double kk) {
    double ss = 0.0;
    for (const auto& p : table) {
      const double r = p.contrast - c * std::exp(-kk * basis(p.delay, model));
      ss += r * r;
    }
    return std::sqrt(ss / dn);
  };

  T2Fit fit;
  double x_max = 0.0;
  for (const auto& p : table) x_max = std::max(x_max, basis(p.delay, model));
  if (!(k * x_max > 1e-6)) {
    fit.infinite = true;
    fit.t2star = std::numeric_limits<double>::infinity();
    fit.c0 = std::exp(sy / dn);
    fit.residual = rms_of(fit.c0, 0.0);
    return fit;
  }

  // Levenberg-Marquardt on the linear-scale residuals.
  double lambda = 1e-3;
  double cost = rms_of(c0, k);
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (const auto& p : table) {
      const double x = basis(p.delay, model);
      const double e = std::exp(-k * x);
      const double r = p.contrast - c0 * e;
      const Eigen::Vector2d j(e, -c0 * x * e);
      jtj += j * j.transpose();
      jtr += j * r;
    }
    Eigen::Matrix2d damped = jtj;
    damped.diagonal() *= 1.0 + lambda;
    const Eigen::Vector2d step = damped.ldlt().solve(jtr);
    const double c_new = c0 + step(0), k_new = k + step(1);
    const double cost_new = rms_of(c_new, k_new);
    if (k_new > 0.0 && cost_new <= cost) {
      const bool converged = std::abs(step(1)) <= 1e-12 * std::abs(k) && std::abs(step(0)) <= 1e-12;
      c0 = c_new;
      k = k_new;
      cost = cost_new;
      lambda *= 0.3;
      if (converged) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  fit.c0 = c0;
  fit.t2star = model == DecayModel::Exponential ? 1.0 / k : 1.0 / std::sqrt(k);
  fit.residual = cost;
  return fit;
}

double sensitivity_scaled_width(double base_width, double ratio) {
  if (ratio < 0.0) throw InputError("sensitivity ratio must be >= 0");
  return base_width * ratio;
}

double field_noise_width(double sigma, double s1, double s2) {
  if (sigma < 0.0) throw InputError("field spread must be >= 0");
  return std::abs(s1) * sigma + 0.5 * std::abs(s2) * sigma * sigma;
}

void write_contrast_csv(std::ostream& os, const std::vector<ContrastPoint>& table) {
  os << "delay_s,contrast,stderr\n";
  char buf[96];
  for (const auto& p : table) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", p.delay, p.contrast, p.stderr_);
    os << buf;
  }
}

}  // namespace clockreg
