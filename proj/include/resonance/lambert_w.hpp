#pragma once

#include <complex>

namespace resonance {

// Branch j of the Lambert W function: the solution of w e^w = z.
// Cuts follow Corless et al.; on the negative real axis the value is the limit from above.
// Throws DomainError at branch points (z = 0 for j != 0, z = -1/e for j = +-1) and
// NumericalError if Halley's iteration fails to reach a 1e-13 relative residual.
std::complex<double> lambert_w(int branch, std::complex<double> z);

// W'(z) = W / ((1 + W) z). Throws DomainError at z = 0 or where W = -1.
std::complex<double> lambert_w_derivative(int branch, std::complex<double> z);

}  // namespace resonance
