#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "resonance/potential.hpp"

namespace resonance {

using Vec2cd = Eigen::Matrix<Complex, 2, 1>;

// psi_2 = a e^{ikx} + b e^{-ikx} with a' e^{ikx} + b' e^{-ikx} = 0, X = (a, b), and
// X = (1, 0) right of the support. The Neumann series solves
// X(x) = X_f - int_x^{x_f} mu V(t) / (2ik) A(t, k) X(t) dt with A = a b^T of rank one.
struct SeriesState {
  Vec2cd X;
  int order = 0;
  double remainder_bound = 0.0;  // bound on ||X - X_series|| (2-norm)
};

// Terms X_j(x-) for j = 0..m; X(x-) is their sum. Deltas use the right limit, segments
// 32-point Gauss-Legendre per piece (pieces longer than 10 / |k| are split first).
// Throws DomainError for k = 0 and PreconditionError if supp V2 is not in [0, inf).
std::vector<Vec2cd> series_terms(const Potential& v2, Complex k, double mu, int m, double x = 0.0);
SeriesState series_state(const Potential& v2, Complex k, double mu, int m, double x = 0.0);

// C2 = cosh(w |Im k|) min(w, 1/|k|), w the support width, bounds |sin((t - t') k) / k|.
double series_c2(const Potential& v2, Complex k);
// sup over the support of ||A(x, k)|| = 2 cosh(2 x_max Im k).
double series_m(const Potential& v2, Complex k);
// mu^{m+1} ||V||_1^{m+1} C2^m M C1 / (2|k| (m+1)!), C1 = exp(mu M (||V0||_inf w + sum|alpha|) / (2|k|)).
double series_remainder_bound(const Potential& v2, Complex k, double mu, int m);

struct F2Series {
  Complex value;
  bool pole = false;         // b(0-) = 0
  double remainder_bound = 0.0;
  double value_error_bound = 0.0;  // propagated to f2 = -a / b; infinite when |b| <= bound
  SeriesState state;
};

F2Series f2_series(const Potential& v2, Complex k, double mu, int m);

struct ExpansionReport {
  Complex I;      // integral V e^{2ikx} dx = V^(-2k)
  Complex vhat0;  // integral V
  Complex J;      // ordered double integral of V(t1) V(t2) (-e^{ikt1}) sin((t1 - t2) k) e^{ikt2}, t1 < t2
  Complex c0;     // -2ik / I
  Complex c1;     // vhat0 / I + 2i J / I^2
  std::vector<double> mu;
  std::vector<Complex> mu_f2;  // from the transfer-matrix f2 on scale(V2, mu)
  std::vector<double> ratio;   // |mu f2 - c0 - c1 mu| / mu^2
  double spread = 0.0;         // max ratio / min ratio
  bool bounded(double factor = 2.0) const { return spread <= factor; }
};

// Throws PreconditionError when |I| is negligible or k = 0.
ExpansionReport expansion_check(const Potential& v2, Complex k, const std::vector<double>& mu_list);

}  // namespace resonance
