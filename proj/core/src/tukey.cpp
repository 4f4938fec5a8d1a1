#include "ringloc/tukey.hpp"

#include <cmath>

#include "ringloc/error.hpp"

namespace ringloc::refine {

double tukey_rho(double r, double k) {
  if (!(k > 0.0)) throw InvalidArgument("tukey_rho: k must be > 0");
  const double cap = k * k / 6.0;
  if (std::abs(r) > k) return cap;
  const double u = 1.0 - (r / k) * (r / k);
  return cap * (1.0 - u * u * u);
}

double tukey_weight(double r, double k) {
  if (!(k > 0.0)) throw InvalidArgument("tukey_weight: k must be > 0");
  if (std::abs(r) > k) return 0.0;
  const double u = 1.0 - (r / k) * (r / k);
  return u * u;
}

}  // namespace ringloc::refine
