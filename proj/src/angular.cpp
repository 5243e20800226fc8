#include "clockreg/angular.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace clockreg::angular {
namespace {

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

bool triangle(int ta, int tb, int tc) {
  return tc <= ta + tb && tc >= std::abs(ta - tb) && ((ta + tb + tc) % 2 == 0);
}

}  // namespace

double wigner_3j(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
  if (tm1 + tm2 + tm3 != 0) return 0.0;
  if (!triangle(tj1, tj2, tj3)) return 0.0;
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tm3) > tj3) return 0.0;
  if ((tj1 + tm1) % 2 || (tj2 + tm2) % 2 || (tj3 + tm3) % 2) return 0.0;

  // Integer arguments of the Racah formula.
  const int a = (tj1 + tj2 - tj3) / 2;
  const int b = (tj1 - tm1) / 2;
  const int c = (tj2 + tm2) / 2;
  const int d = (tj3 - tj2 + tm1) / 2;
  const int e = (tj3 - tj1 - tm2) / 2;

  const double log_delta = log_factorial((tj1 + tj2 - tj3) / 2) +
                           log_factorial((tj1 - tj2 + tj3) / 2) +
                           log_factorial((-tj1 + tj2 + tj3) / 2) -
                           log_factorial((tj1 + tj2 + tj3) / 2 + 1);
  const double log_m = log_factorial((tj1 + tm1) / 2) + log_factorial((tj1 - tm1) / 2) +
                       log_factorial((tj2 + tm2) / 2) + log_factorial((tj2 - tm2) / 2) +
                       log_factorial((tj3 + tm3) / 2) + log_factorial((tj3 - tm3) / 2);

  const int k_min = std::max({0, -d, -e});
  const int k_max = std::min({a, b, c});
  double sum = 0.0;
  for (int k = k_min; k <= k_max; ++k) {
    const double term = std::exp(0.5 * (log_delta + log_m) -
                                 (log_factorial(k) + log_factorial(a - k) + log_factorial(b - k) +
                                  log_factorial(c - k) + log_factorial(d + k) +
                                  log_factorial(e + k)));
    sum += (k % 2 == 0) ? term : -term;
  }
  const int phase = (tj1 - tj2 - tm3) / 2;
  return (phase % 2 == 0) ? sum : -sum;
}

double clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tJ, int tM) {
  const double w = wigner_3j(tj1, tj2, tJ, tm1, tm2, -tM);
  const int phase = (tj1 - tj2 + tM) / 2;
  const double sign = (std::abs(phase) % 2 == 0) ? 1.0 : -1.0;
  return sign * std::sqrt(static_cast<double>(tJ + 1)) * w;
}

}  // namespace clockreg::angular
