#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "resonance/potential.hpp"
#include "resonance/root_finder.hpp"

namespace resonance {

// Local structure of a meromorphic f at k0: f = g / (k - k0)^p near a pole,
// f = (k - k0)^q g near a zero, g analytic with g(k0) != 0.
struct PoleData {
  Complex k0;
  int order = 0;       // pole order p, 0 when f is analytic at k0
  int zero_order = 0;  // q, 0 unless f(k0) = 0
  Complex g_at_k0;
  Complex G_at_k0;     // principal p-th root of g_at_k0 (q-th root for zeros); g itself when both are 0
  double phi0 = 0.0;   // arg G_at_k0

  bool is_zero() const { return zero_order > 0; }
  bool is_pole() const { return order > 0; }
};

// f = num / den with both analytic near the probe point.
struct MeromorphicFactor {
  std::function<Complex(Complex)> num;
  std::function<Complex(Complex)> den;
};

// Orders come from the winding of num and den around a square of half side radius,
// g(k0) from the mean of f (k - k0)^p over a circle of that radius. Orders above
// max_order are rejected with NumericalError.
PoleData classify(const MeromorphicFactor& f, Complex k0, double radius = 1e-4, int max_order = 4);
// For f = f1 f2 of the pair. k0 must lie in the closed lower half plane.
PoleData classify_point(const Potential& v1, const Potential& v2, Complex k0);
// For f1 of V1 alone.
PoleData classify_f1(const Potential& v1, Complex k0);

MeromorphicFactor f_factor(const Potential& v1, const Potential& v2);
MeromorphicFactor f1_factor(const Potential& v1);

// Poles of f in rect: zeros of the f1 and f2 denominators, with multiplicity.
std::vector<Root> find_poles(const Potential& v1, const Potential& v2, const SearchRect& rect);

enum class ApproxCase { C1, C2, C3, D1, D2, D3, D4, D5, D6 };
std::string to_string(ApproxCase c);

struct ApproxResonance {
  Complex k;
  ApproxCase kind = ApproxCase::C1;
  int j = 0;
  int l = 0;
  Complex k0;
  double L = 0.0;
  double predicted_error_scale = 0.0;
};

struct JRange {
  int lo = 0;
  int hi = 0;
};

// k_j = (log f(k0) + 2 pi i j) / (2iL). Error scale eps / L.
std::vector<ApproxResonance> approx_case1(const PoleData& pd, Complex f_at_k0, double L, JRange j,
                                          double eps = 0.05);
// All j with Re k_j in [re_lo, re_hi].
JRange case1_j_range(Complex f_at_k0, double L, double re_lo, double re_hi);

// lambda = 2L / p and A = i lambda e^{-i lambda k0} omega^l G(k0).
double case2_lambda(const PoleData& pd, double L);
Complex lambert_argument(const PoleData& pd, double L, int l);
// Smallest lambda with (1 - eps/4) lambda |G(k0)| > e^3.
double case2_lambda_min(const PoleData& pd, double eps = 0.05);

// k_{j,l} = k0 + W_j(A) / (i lambda). Error scale eps / lambda.
std::vector<ApproxResonance> approx_case2(const PoleData& pd, double L, JRange j, double eps = 0.05);
// Two terms of the W_j expansion, W ~ Log_j - log Log_j, written through Phi.
std::vector<ApproxResonance> approx_case2_twoterm(const PoleData& pd, double L, JRange j, double eps = 0.05);
// Phi(k0, l, lambda) in (-1/2, 1/2].
double case2_phi(const PoleData& pd, double lambda, int l);
// p points k_{0,l} = k0 + W_0(A) / (i lambda). Requires |A| < 1/10. Error scale eps e^{-|Im k0| lambda}.
std::vector<ApproxResonance> approx_case3(const PoleData& pd, double L, double eps = 0.05);

struct PairingOptions {
  Complex k0;
  double delta = 0.3;
  // A pair passes when its distance is at most tolerance * predicted_error_scale.
  double tolerance = 1.0;
};

struct PairingReport {
  struct Pair {
    Complex exact;
    Complex approx;
    double distance;
    double allowed;
  };
  std::vector<Pair> pairs;
  std::vector<Complex> orphan_exact;
  std::vector<Complex> orphan_approx;
  double max_distance = 0.0;
  double max_ratio = 0.0;  // max distance / allowed
  bool ok() const { return orphan_exact.empty() && orphan_approx.empty(); }
};

// Greedy nearest-pair matching inside B(k0, delta); a pair is admissible only within
// its allowed distance. Points just outside the disk may serve as partners but are
// never reported as orphans.
PairingReport pair_resonances(const ResonanceSet& exact, const std::vector<ApproxResonance>& approx,
                              const PairingOptions& opt);

}  // namespace resonance
