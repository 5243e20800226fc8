#pragma once

namespace clockreg::angular {

// All angular momenta are passed doubled (2j, 2m) so half-integers stay exact.

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3) via the Racah formula.
double wigner_3j(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3);

/// <j1 m1; j2 m2 | J M>
double clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tJ, int tM);

}  // namespace clockreg::angular
