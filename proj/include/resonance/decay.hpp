#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "resonance/asymptotics.hpp"
#include "resonance/potential.hpp"
#include "resonance/root_finder.hpp"

namespace resonance {

// H_L = -d^2/dx^2 + V1 + mu V2(x - L). In delta mode V2 = delta and mu = e^{-cL}.
enum class DecayMode { delta, general_V2 };

struct DecayConfig {
  double c = 1.0;
  double L = 10.0;
  DecayMode mode = DecayMode::delta;
  double mu = 0.0;  // used in general_V2 mode only

  // Throws PreconditionError unless c, L > 0 (and mu > 0 in general mode).
  void validate() const;
  double coupling() const;  // e^{-cL} or mu
  double line() const { return -0.5 * c; }
};

// D1 e^{(2ik-c)L} - N1 (e^{-cL} - 2ik) with f1 = N1 / D1: the equation
// e^{(2ik-c)L} = f1(k)(e^{-cL} - 2ik) with the denominator of f1 cleared.
// It always vanishes at k = 0 since D1 - N1 = 2ik psi_1.
Complex decay_residual(const Potential& v1, const DecayConfig& cfg, Complex k);
std::pair<Complex, Complex> decay_residual_jet(const Potential& v1, const DecayConfig& cfg, Complex k);

// mu e^{2ikL} D1 D2~ - N1 N2~ with D2~ = -D2 / mu, N2~ = -N2 computed for mu V2.
// Reduces to decay_residual when V2 = delta and mu = e^{-cL}.
Complex general_mu_residual(const Potential& v1, const Potential& v2, const DecayConfig& cfg, Complex k);
std::pair<Complex, Complex> general_mu_residual_jet(const Potential& v1, const Potential& v2,
                                                    const DecayConfig& cfg, Complex k);

// The residuals above divided by k, so the forced zero at the origin is gone and no
// exclusion disk is needed.
AnalyticFunction decay_function(const Potential& v1, const DecayConfig& cfg);
AnalyticFunction general_mu_function(const Potential& v1, const Potential& v2, const DecayConfig& cfg);

ResonanceSet find_decay_resonances(const Potential& v1, const DecayConfig& cfg, const SearchRect& rect);
ResonanceSet find_general_resonances(const Potential& v1, const Potential& v2, const DecayConfig& cfg,
                                     const SearchRect& rect);

struct NearZeroResult {
  Complex k;           // xi e^{-cL}
  Complex xi;
  Complex predicted;   // (2i)^{-1}(1 - 1/f1(0)) e^{-cL}, or (2i)^{-1} e^{-cL} at a pole
  PoleData at_zero;    // classification of f1 at 0
  int iterations = 0;
  double radius = 0.0;       // R = 1/2 + 1/c0
  double contraction = 0.0;  // max |f'(xi)| sampled on the ball
};

// Fixed point of xi = (1 - e^{2ikL} / f1(k)) / (2i), k = xi e^{-cL}. Throws NumericalError
// when the map is not a contraction on the ball |xi| <= R.
NearZeroResult near_zero_resonance(const Potential& v1, const DecayConfig& cfg);

// Number of zeros of decay_function in the square |Re k|, |Im k| <= radius.
int near_zero_count(const Potential& v1, const DecayConfig& cfg, double radius);

struct DecayRegionReport {
  double L0_bound = 0.0;      // threshold from the modulus inequalities
  double L_empirical = 0.0;   // bisection: smallest L in [L_lo, cfg.L] past which U1 and U2 stay empty
  int samples_u1 = 0;
  int samples_u2 = 0;
  double min_margin_u1 = 1.0; // min of 1 - |lhs| / |rhs| over sampled U1 points
  double min_margin_u2 = 1.0; // min of 1 - |rhs| / |lhs| over sampled U2 points
  std::vector<Complex> violations;  // roots in U1 or U2 at cfg.L
  bool ok() const { return violations.empty(); }
};

struct DecayWindow {
  double re_lo = 0.5;
  double re_hi = 6.0;
  double im_lo = -3.0;
};

// U1 = {Im k > -c/2 + a, |f1| > 1/A, |k| > 1/A}, U2 = {Im k < -c/2 - a, |f1| < A, |k| < A}.
DecayRegionReport decay_region_check(const Potential& v1, const DecayConfig& cfg, double a, double A,
                                     const DecayWindow& window = {}, int samples = 40, double L_lo = 1.0);

// Case D1 is the near-zero resonance; k0 is ignored for it. D2 and D6 emit j = 0 only,
// D3 emits the log ladder, D4 and D5 every j in the range. The case must agree with the
// classification of f1 at k0 relative to the line Im k = -c/2 (within 1e-9).
std::vector<ApproxResonance> approx_decay(const Potential& v1, const DecayConfig& cfg, ApproxCase kind, Complex k0,
                                          JRange j, double eps = 0.05);

// Value of the equation an emitted point solves, for round-trip checks:
// z e^z - arg for the Lambert cases, e^{2i(k-k0)L} - rhs for D3, the fixed-point gap for D1.
Complex decay_case_defect(const Potential& v1, const DecayConfig& cfg, const ApproxResonance& a);

}  // namespace resonance
