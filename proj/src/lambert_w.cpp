#include "resonance/lambert_w.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "resonance/errors.hpp"

namespace resonance {

namespace {

using C = std::complex<double>;

C seed(int j, C z) {
  const double inv_e = std::exp(-1.0);
  if (std::abs(j) <= 1 && std::abs(z + inv_e) < 0.3) {
    C p = std::sqrt(2.0 * (std::numbers::e * z + 1.0));
    if (j == 0) return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    if ((j == -1 && z.imag() >= 0.0) || (j == 1 && z.imag() < 0.0))
      return -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p * p * p;
  }
  if (j == 0) {
    if (std::abs(z) < 0.25) return z - z * z;
    double ax = std::abs(z.imag());
    if (z.real() > -1.0 && z.real() < 1.5 && ax < 1.0 && z.real() > -2.5 * ax - 0.2)
      return z * (3.0 + 6.0 * z + z * z) / (3.0 + 9.0 * z + 5.0 * z * z);
  }
  C l1 = std::log(z) + C(0.0, 2.0 * std::numbers::pi * j);
  C l2 = std::log(l1);
  return l1 - l2 + l2 / l1;
}

}  // namespace

C lambert_w(int branch, C z) {
  const double inv_e = std::exp(-1.0);
  if (z == C(0.0)) {
    if (branch == 0) return 0.0;
    throw DomainError("lambert_w: z = 0 is a branch point for branch " + std::to_string(branch));
  }
  if (z == C(-inv_e, 0.0)) {
    if (branch == 0) return -1.0;
    if (std::abs(branch) == 1) throw DomainError("lambert_w: z = -1/e is a branch point for branch +-1");
  }
  if (z.imag() == 0.0 && z.real() < 0.0) z = C(z.real(), 0.0);  // -0.0 -> +0.0, upper side of the cut

  C w = seed(branch, z);
  double rel = INFINITY;
  for (int it = 0; it < 50; ++it) {
    C ew = std::exp(w);
    C f = w * ew - z;
    rel = std::abs(f) / std::abs(z);
    if (rel <= 4e-16) break;
    C wp1 = w + 1.0;
    C step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(w))) {
      rel = std::abs(w * std::exp(w) - z) / std::abs(z);
      break;
    }
  }
  if (!(rel <= 1e-13)) {
    std::ostringstream os;
    os.precision(17);
    os << "lambert_w: no convergence for branch " << branch << " at z = " << z << ", last w = " << w
       << ", relative residual " << rel;
    throw NumericalError(os.str());
  }
  return w;
}

C lambert_w_derivative(int branch, C z) {
  if (z == C(0.0)) throw DomainError("lambert_w_derivative: z = 0");
  C w = lambert_w(branch, z);
  if (std::abs(w + 1.0) < 1e-14) throw DomainError("lambert_w_derivative: W = -1");
  return w / ((1.0 + w) * z);
}

}  // namespace resonance
