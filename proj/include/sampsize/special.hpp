#pragma once

// Special functions used by the interval and power planners.

namespace sampsize::special {

double log_beta(double a, double b);

// Beta(a, b) density at x.
double beta_pdf(double x, double a, double b);

// Regularized incomplete beta I_x(a, b), evaluated with a continued fraction.
double ibeta(double x, double a, double b);

// Inverse of ibeta in x: returns x with I_x(a, b) = p.
// Bracketed Newton iteration with bisection fallback; throws SolverError
// if the bracket does not collapse.
double ibeta_inv(double p, double a, double b);

double normal_cdf(double z);

// Standard normal quantile (Wichura AS241, ~1e-16 relative accuracy).
double normal_quantile(double p);

}  // namespace sampsize::special
