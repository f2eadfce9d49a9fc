#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "resonance/potential.hpp"

namespace resonance {

struct SearchRect {
  double re_lo = 0.0;
  double re_hi = 1.0;
  double im_lo = -1.0;
  double im_hi = 0.0;
  int max_depth = 60;
  int target_count_per_cell = 1;
};

// An entire function of k. jet, when present, returns {g, g'}; otherwise the
// derivative falls back to Richardson-extrapolated central differences.
// phase_rate bounds |d arg g / dk| away from zeros (e.g. 2L for e^{-2ikL} terms);
// it sets the initial sampling density along contours.
struct AnalyticFunction {
  std::function<Complex(Complex)> value;
  std::function<std::pair<Complex, Complex>(Complex)> jet;
  double phase_rate = 1.0;

  std::pair<Complex, Complex> eval_jet(Complex k) const;
};

struct Root {
  Complex k;
  int multiplicity = 1;
  // |g(k)| / max(1, max |g| on the boundary of the cell that produced the root).
  double residual = 0.0;
};

struct ResonanceSet {
  std::vector<Root> roots;
  SearchRect rect;
  std::optional<double> L;
  int total_winding = 0;
  // Multiplicity removed from the disk |k| < 1e-6 (k = 0 solves the composite
  // equation without being a resonance). total_winding excludes it.
  int excluded_at_origin = 0;
  bool partial = false;  // some cell hit max_depth
};

struct FinderOptions {
  double cluster_radius = 1e-7;    // relative to 1 + |k|
  double origin_exclusion = 1e-6;  // radius of the excluded disk around k = 0
  double residual_tol = 1e-9;
};

// Number of zeros of g inside rect by the argument principle. Throws NumericalError
// if a zero sits on the boundary even after a 1e-9 outward nudge, or if the
// accumulated phase is not within 0.25 of a multiple of 2 pi.
int winding_count(const AnalyticFunction& g, const SearchRect& rect);

// Maximum |g| met while tracing the boundary; returned with the count.
struct WindingResult {
  int count = 0;
  double boundary_max = 0.0;
  SearchRect traced;  // the rectangle actually traced (after any nudge)
};
WindingResult winding(const AnalyticFunction& g, const SearchRect& rect);

ResonanceSet find_zeros(const AnalyticFunction& g, const SearchRect& rect, const FinderOptions& opt = {});

AnalyticFunction wronskian_function(const Potential& v);
// e^{-2ikL} N1 N2 - D1 D2 for the pair V1 (left of 0) and V2(. - L) (V2 right of 0).
AnalyticFunction composite_function(const Potential& v1, const Potential& v2, double L);

ResonanceSet find_resonances(const Potential& v, const SearchRect& rect, const FinderOptions& opt = {});
ResonanceSet find_resonances(const Potential& v1, const Potential& v2, double L, const SearchRect& rect,
                             const FinderOptions& opt = {});

// k = i kappa with W(i kappa) = 0, kappa in (0, kappa_max].
std::vector<Complex> find_bound_states(const Potential& v, double kappa_max);

struct ResonanceFreeReport {
  double L0 = 0.0;
  bool skipped = false;         // L <= L0, the statement is vacuous
  int grid_points_in_region = 0;
  double min_margin = 0.0;      // min over sampled U of 1 - |f| e^{2 Im(k) L}; positive means no root
  std::vector<Complex> violations;
  bool ok() const { return skipped || (violations.empty() && min_margin > 0.0); }
};

// Checks that no resonance lies in U(a, A) = {Im k < -a, |f(k)| < A} within the window
// re in [re_lo, re_hi], im in [im_lo, -a]. samples is the grid size per axis.
ResonanceFreeReport resonance_free_check(const Potential& v1, const Potential& v2, double L, double a,
                                         double A, int samples, double re_lo = 0.5, double re_hi = 6.0,
                                         double im_lo = -2.0);

// Number of resonances in [a, b] x [-c, 0) counted with multiplicity.
int count_in_band(const Potential& v1, const Potential& v2, double L, double a, double b, double c);

}  // namespace resonance
