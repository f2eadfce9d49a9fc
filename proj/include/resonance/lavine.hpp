#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "resonance/potential.hpp"

namespace resonance {

// a e^{i kappa (x - lo)} + b e^{-i kappa (x - lo)} on [lo, hi].
struct ExpPiece {
  double lo = 0.0;
  double hi = 0.0;
  Complex kappa;
  Complex a;
  Complex b;
};

// A state supported in [lo, hi]. Either closed form (pieces tile [lo, hi]) or a callable.
struct CompactState {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<ExpPiece> pieces;
  std::function<Complex(double)> fn;
  double bandwidth = 0.0;  // oscillation rate of fn, sizes the quadrature panels

  Complex operator()(double x) const;
  double norm_squared() const;
  // |phi(lo+)|^2 + |phi(hi-)|^2. These jumps make the spectral density decay like lambda^{-3/2}.
  double edge_weight() const;
};

// C^inf bump on [lo, hi] times e^{i sigma0 x}.
CompactState bump_state(double lo, double hi, double sigma0);

struct ResonantState {
  Complex k0;  // sigma0 - i eps0
  double lambda0 = 0.0;
  double delta0 = 0.0;
  double r = 0.0;
  double h = 0.0;
  std::vector<Complex> samples;  // psi at -r + i h
  double norm = 0.0;             // ||chi psi||
  double boundary_residual = 0.0;  // relative defect of |psi(-r)|^2 + |psi(r)|^2 = 2 eps0 ||phi||^2
  CompactState phi;

  double sigma0() const { return k0.real(); }
  double eps0() const { return -k0.imag(); }
};

// psi = e^{i k0 x} right of the support, continued inward; r = max |x| over supp V.
// h <= 0 selects min(0.01, pi / (20 sigma0)). Throws PreconditionError unless
// |W(k0)| <= 1e-8, Re k0 > 0 and Im k0 < 0.
ResonantState outgoing_state(const Potential& v, Complex k0, double h = 0.0);

// (log(1 + (sigma0 / 2 eps0)^2) / 5 + 1) 6 eps0 / sigma0.
double lavine_constant(double sigma0, double eps0);

// Lorentzian mass of R \ [a, b]: 1 - (atan((b - l0) / d0) - atan((a - l0) / d0)) / pi.
double lorentz_tail(double lambda0, double delta0, double a, double b);
// Lorentzian density (1/pi) Im (lambda0 - i delta0 - lambda)^{-1}.
double lorentz_density(double lambda0, double delta0, double lambda);

struct SpectralMeasure {
  std::vector<double> lambda;
  std::vector<double> density;
  std::vector<std::pair<double, double>> point_masses;  // (lambda_j < 0, mass)
  std::vector<double> skipped;  // grid nodes dropped because |W(sqrt lambda)| < 1e-12
  double tail_estimate = 0.0;   // continuous mass above the last node, from the edge jumps of phi

  double continuous_mass() const;  // trapezoid over the grid
  double total_mass() const;       // continuous + point masses + tail estimate
  double min_density() const;
};

// (1/pi) Im <phi, (H - lambda - i0)^{-1} phi> with the kernel psi_1(x<) psi_2(x>) / W at
// k = sqrt(lambda). Closed form for piecewise-exponential states, 32-point panels otherwise.
// Returns nullopt when |W| < 1e-12.
std::optional<double> density_at(const Potential& v, const CompactState& phi, double lambda);
// The same pairing <phi, R phi> before taking Im; k may be any complex number with W(k) != 0.
Complex resolvent_form(const Potential& v, const CompactState& phi, Complex k);

// grid must be increasing and lie in [0, inf).
SpectralMeasure spectral_density(const Potential& v, const CompactState& phi, const std::vector<double>& grid);
std::vector<double> uniform_grid(double lambda_max, double step);

// Smallest power-of-two multiple of lambda0 + delta0 where the upper Lorentzian tail is below
// 1e-5 and the density is below 1e-6 of its value at lambda0.
double lambda_max_for(const Potential& v, const ResonantState& s);

// integral of e^{-it lambda} d mu: piecewise-linear Filon on the grid plus the point masses.
// Throws PreconditionError if max spacing * |t| > 0.5.
Complex autocorrelation(const SpectralMeasure& m, double t);

struct DtnReport {
  Eigen::Matrix2cd dtn;       // Lambda_k
  Eigen::Matrix2cd inverse;   // (Lambda_k - ik I)^{-1}
  Eigen::Matrix2cd green;     // G(+-r, +-r; k)
  double deviation = 0.0;     // max entrywise |inverse - green|
  double asymmetry = 0.0;     // |Lambda_12 - Lambda_21|
  bool dirichlet_hit = false; // k^2 is (numerically) a Dirichlet eigenvalue on [-r, r]
};

// Requires supp V in [-r, r].
DtnReport dtn_identity_check(const Potential& v, double r, Complex k);

struct LavineReport {
  double C = 0.0;             // lavine_constant(sigma0, eps0)
  double sup_deviation = 0.0; // sup_t |a(t) / ||phi||^2 - e^{-it lambda0 - delta0 |t|}|
  double eps1 = 0.0;          // int_I |d mu - ||phi||^2 d mu_L| / ||phi||^2, I = [(sigma0/2)^2, (3 sigma0/2)^2]
  double eps2 = 0.0;          // lorentz_tail over I
  double T = 0.0;             // t range [0, T]
  double lambda_max = 0.0;
  double mass_error = 0.0;    // |total mass - ||phi||^2| / ||phi||^2
  std::pair<double, double> support;
  bool inequality() const { return sup_deviation <= C; }
  bool chain() const { return sup_deviation <= 2.0 * (eps1 + eps2); }
};

// t_nodes equally spaced times on [0, 3 / delta0].
LavineReport lavine_check(const Potential& v, const ResonantState& s, int t_nodes = 200);

struct PersistenceReport {
  std::vector<double> L;
  std::vector<double> D;  // max over t of |a_L(t) - a_inf(t)|
  bool nonincreasing() const;
};

// a_inf from H = -d^2 + V1, a_L from V1 + V2(. - L), both on uniform grids of the given step up
// to lambda_max. phi must lie left of L + inf supp V2 for every L.
PersistenceReport persistence_proxy(const Potential& v1, const Potential& v2, const CompactState& phi,
                                    const std::vector<double>& L_list, const std::vector<double>& t_grid,
                                    double step, double lambda_max);

}  // namespace resonance
