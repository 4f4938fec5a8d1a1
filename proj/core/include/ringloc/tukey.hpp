#pragma once

namespace ringloc::refine {

/// Tukey biweight loss: (k^2/6)(1 - (1 - (r/k)^2)^3) for |r| <= k, k^2/6 beyond.
/// Throws InvalidArgument for k <= 0.
double tukey_rho(double r, double k);

/// Tukey weight (1 - (r/k)^2)^2 for |r| <= k, else 0. Equals rho'(r) / r.
double tukey_weight(double r, double k);

/// Classical 95%-efficiency tuning constant for the biweight.
inline constexpr double kTukeyEfficiency95 = 4.685;

}  // namespace ringloc::refine
