#include "resonance/root_finder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "resonance/errors.hpp"
#include "resonance/scattering.hpp"

namespace resonance {

namespace {

constexpr double kPi = std::numbers::pi;

class BoundaryTooClose : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

double extent(const Potential& v) {
  auto s = v.support();
  return s ? s->second - s->first : 0.0;
}

struct EdgeTracer {
  const AnalyticFunction& g;
  double phase = 0.0;
  double gmax = 0.0;

  Complex eval(Complex z) {
    Complex w = g.value(z);
    double a = std::abs(w);
    if (!std::isfinite(a)) throw NumericalError("winding: non-finite function value on contour");
    if (a == 0.0) throw BoundaryTooClose("winding: zero on contour");
    gmax = std::max(gmax, a);
    return w;
  }

  void interval(Complex za, Complex ga, Complex zb, Complex gb, int depth) {
    double d = std::arg(gb / ga);
    if (std::abs(d) < kPi / 4) {
      phase += d;
      return;
    }
    if (depth > 60 || std::abs(zb - za) < 1e-13 * (1.0 + std::abs(za)))
      throw BoundaryTooClose("winding: phase unresolved, a zero is too close to the contour");
    Complex zm = 0.5 * (za + zb);
    Complex gm = eval(zm);
    interval(za, ga, zm, gm, depth + 1);
    interval(zm, gm, zb, gb, depth + 1);
  }

  void edge(Complex z0, Complex z1, Complex& g0) {
    double len = std::abs(z1 - z0);
    int n = std::max(8, int(std::ceil(len * g.phase_rate * 8.0 / kPi)));
    Complex prev = g0;
    for (int i = 1; i <= n; ++i) {
      Complex zb = z0 + (z1 - z0) * (double(i) / n);
      Complex gb = eval(zb);
      interval(z0 + (z1 - z0) * (double(i - 1) / n), prev, zb, gb, 0);
      prev = gb;
    }
    g0 = prev;
  }
};

WindingResult trace(const AnalyticFunction& g, const SearchRect& r) {
  EdgeTracer t{g};
  Complex c0(r.re_lo, r.im_lo), c1(r.re_hi, r.im_lo), c2(r.re_hi, r.im_hi), c3(r.re_lo, r.im_hi);
  Complex gv = t.eval(c0);
  t.edge(c0, c1, gv);
  t.edge(c1, c2, gv);
  t.edge(c2, c3, gv);
  t.edge(c3, c0, gv);
  double turns = t.phase / (2.0 * kPi);
  double rounded = std::round(turns);
  if (std::abs(turns - rounded) >= 0.25) {
    std::ostringstream os;
    os << "winding: unreliable count " << turns;
    throw NumericalError(os.str());
  }
  return {int(rounded), t.gmax, r};
}

SearchRect nudged(const SearchRect& r, double eps) {
  SearchRect n = r;
  n.re_lo -= eps;
  n.re_hi += eps;
  n.im_lo -= eps;
  n.im_hi += eps;
  return n;
}

bool inside(Complex k, const SearchRect& r, double slack) {
  return k.real() >= r.re_lo - slack && k.real() <= r.re_hi + slack && k.imag() >= r.im_lo - slack &&
         k.imag() <= r.im_hi + slack;
}

double diag(const SearchRect& r) { return std::hypot(r.re_hi - r.re_lo, r.im_hi - r.im_lo); }

struct Finder {
  const AnalyticFunction& g;
  FinderOptions opt;
  std::vector<Root> roots;
  bool partial = false;

  // Newton (multiplicity-modified for m > 1) from the cell centre.
  std::optional<Complex> newton(const SearchRect& cell, int m) {
    Complex k(0.5 * (cell.re_lo + cell.re_hi), 0.5 * (cell.im_lo + cell.im_hi));
    double dg = diag(cell);
    bool converged = false;
    for (int it = 0; it < 80 && !converged; ++it) {
      auto [v, d] = g.eval_jet(k);
      if (v == Complex(0.0)) break;
      if (d == Complex(0.0) || !std::isfinite(std::abs(d))) return std::nullopt;
      Complex step = double(m) * v / d;
      if (std::abs(step) > 0.5 * dg) step *= 0.5 * dg / std::abs(step);
      k -= step;
      if (!inside(k, cell, 0.5 * dg)) return std::nullopt;
      converged = std::abs(step) <= 1e-14 * (1.0 + std::abs(k));
    }
    if (!converged && g.value(k) != Complex(0.0)) return std::nullopt;
    if (!inside(k, cell, 1e-12 * (1.0 + std::abs(k)))) return std::nullopt;
    return k;
  }

  // w distinct simple roots by Newton with deflation of the ones already found.
  std::optional<std::vector<Complex>> deflated(const SearchRect& cell, int w) {
    std::vector<Complex> found;
    double dg = diag(cell);
    Complex centre(0.5 * (cell.re_lo + cell.re_hi), 0.5 * (cell.im_lo + cell.im_hi));
    for (int n = 0; n < w; ++n) {
      Complex k = centre + 0.1 * dg * std::polar(1.0, 0.7 + 2.1 * n);
      bool ok = false;
      for (int it = 0; it < 100; ++it) {
        auto [v, d] = g.eval_jet(k);
        Complex corr = 0.0;
        for (Complex r : found) corr += 1.0 / (k - r);
        Complex denom = d / v - corr;
        if (v == Complex(0.0)) {
          ok = true;
          break;
        }
        Complex step = 1.0 / denom;
        if (!std::isfinite(std::abs(step))) break;
        if (std::abs(step) > 0.5 * dg) step *= 0.5 * dg / std::abs(step);
        k -= step;
        if (std::abs(step) <= 1e-14 * (1.0 + std::abs(k))) {
          ok = true;
          break;
        }
      }
      if (!ok || !inside(k, cell, 1e-12 * (1.0 + std::abs(k)))) return std::nullopt;
      for (Complex r : found)
        if (std::abs(r - k) <= opt.cluster_radius * (1.0 + std::abs(k))) return std::nullopt;
      found.push_back(k);
    }
    return found;
  }

  void accept(Complex k, int m, double boundary_max) { roots.push_back({k, m, residual(k, boundary_max)}); }

  double residual(Complex k, double boundary_max) const {
    return std::abs(g.value(k)) / std::max(1.0, boundary_max);
  }

  void process(const SearchRect& cell, int w, double boundary_max, int depth) {
    if (w == 0) return;
    double tiny = 10.0 * opt.cluster_radius *
                  (1.0 + std::abs(Complex(0.5 * (cell.re_lo + cell.re_hi), 0.5 * (cell.im_lo + cell.im_hi))));
    if (w == 1 || diag(cell) < tiny) {
      auto k = newton(cell, w);
      if (k && (residual(*k, boundary_max) <= opt.residual_tol || diag(cell) < tiny)) {
        accept(*k, w, boundary_max);
        return;
      }
      if (diag(cell) < tiny || depth >= cell.max_depth) {
        // Give up refining: report the centre with the cell's multiplicity.
        partial = partial || depth >= cell.max_depth;
        accept(Complex(0.5 * (cell.re_lo + cell.re_hi), 0.5 * (cell.im_lo + cell.im_hi)), w, boundary_max);
        return;
      }
    }
    if (w <= cell.target_count_per_cell) {
      auto ks = deflated(cell, w);
      if (ks && std::all_of(ks->begin(), ks->end(),
                            [&](Complex k) { return residual(k, boundary_max) <= opt.residual_tol; })) {
        for (Complex k : *ks) accept(k, 1, boundary_max);
        return;
      }
    }
    if (depth >= cell.max_depth) {
      partial = true;
      if (auto k = newton(cell, w)) accept(*k, w, boundary_max);
      else accept(Complex(0.5 * (cell.re_lo + cell.re_hi), 0.5 * (cell.im_lo + cell.im_hi)), w, boundary_max);
      return;
    }
    static constexpr double fractions[] = {0.5 + 1.0 / 61, 0.5 - 1.0 / 37, 0.5 + 1.0 / 13,
                                           0.5 - 1.0 / 7,  0.31,           0.69};
    bool split_re = (cell.re_hi - cell.re_lo) >= (cell.im_hi - cell.im_lo);
    for (double f : fractions) {
      SearchRect a = cell, b = cell;
      if (split_re) {
        double cut = cell.re_lo + f * (cell.re_hi - cell.re_lo);
        a.re_hi = cut;
        b.re_lo = cut;
      } else {
        double cut = cell.im_lo + f * (cell.im_hi - cell.im_lo);
        a.im_hi = cut;
        b.im_lo = cut;
      }
      WindingResult wa, wb;
      try {
        wa = trace(g, a);
        wb = trace(g, b);
      } catch (const NumericalError&) {
        continue;
      }
      if (wa.count + wb.count != w || wa.count < 0 || wb.count < 0) continue;
      process(a, wa.count, wa.boundary_max, depth + 1);
      process(b, wb.count, wb.boundary_max, depth + 1);
      return;
    }
    throw NumericalError("find_zeros: could not split a cell consistently");
  }
};

std::vector<Root> merge_clusters(std::vector<Root> roots, double radius) {
  std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
    return a.k.real() != b.k.real() ? a.k.real() < b.k.real() : a.k.imag() < b.k.imag();
  });
  std::vector<Root> out;
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    Root acc = roots[i];
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      if (used[j]) continue;
      if (std::abs(roots[j].k - acc.k) <= radius * (1.0 + std::abs(acc.k))) {
        used[j] = true;
        acc.multiplicity += roots[j].multiplicity;
        acc.residual = std::max(acc.residual, roots[j].residual);
      }
    }
    out.push_back(acc);
  }
  return out;
}

}  // namespace

std::pair<Complex, Complex> AnalyticFunction::eval_jet(Complex k) const {
  if (jet) return jet(k);
  double h = 1e-7 * (1.0 + std::abs(k));
  auto cd = [&](double s) { return (value(k + s) - value(k - s)) / (2.0 * s); };
  Complex d = (4.0 * cd(0.5 * h) - cd(h)) / 3.0;
  return {value(k), d};
}

WindingResult winding(const AnalyticFunction& g, const SearchRect& rect) {
  if (!(rect.re_lo < rect.re_hi) || !(rect.im_lo < rect.im_hi))
    throw PreconditionError("winding: degenerate rectangle");
  try {
    return trace(g, rect);
  } catch (const BoundaryTooClose&) {
    return trace(g, nudged(rect, 1e-9));
  }
}

int winding_count(const AnalyticFunction& g, const SearchRect& rect) { return winding(g, rect).count; }

ResonanceSet find_zeros(const AnalyticFunction& g, const SearchRect& rect, const FinderOptions& opt) {
  WindingResult top = winding(g, rect);
  Finder f{g, opt, {}, false};
  f.process(top.traced, top.count, top.boundary_max, 0);
  auto roots = merge_clusters(f.roots, opt.cluster_radius);
  int sum = 0;
  for (const auto& r : roots) sum += r.multiplicity;
  if (sum != top.count) {
    std::ostringstream os;
    os << "find_zeros: multiplicities sum to " << sum << " but the winding number is " << top.count;
    throw InconsistencyError(os.str());
  }
  ResonanceSet out;
  out.rect = rect;
  out.partial = f.partial;
  out.total_winding = top.count;
  for (const auto& r : roots) {
    if (std::abs(r.k) < opt.origin_exclusion) {
      out.excluded_at_origin += r.multiplicity;
      out.total_winding -= r.multiplicity;
    } else {
      out.roots.push_back(r);
    }
  }
  return out;
}

AnalyticFunction wronskian_function(const Potential& v) {
  AnalyticFunction g;
  g.value = [v](Complex k) { return wronskian(v, k); };
  g.jet = [v](Complex k) { return wronskian_jet(v, k); };
  g.phase_rate = 1.0 + 2.0 * extent(v);
  return g;
}

AnalyticFunction composite_function(const Potential& v1, const Potential& v2, double L) {
  AnalyticFunction g;
  g.value = [v1, v2, L](Complex k) { return composite_residual(v1, v2, L, k).first; };
  g.jet = [v1, v2, L](Complex k) { return composite_residual(v1, v2, L, k); };
  g.phase_rate = 1.0 + 2.0 * (L + extent(v1) + extent(v2));
  return g;
}

ResonanceSet find_resonances(const Potential& v, const SearchRect& rect, const FinderOptions& opt) {
  if (rect.im_hi > 0.0) throw PreconditionError("find_resonances: rectangle must lie in Im k <= 0");
  return find_zeros(wronskian_function(v), rect, opt);
}

ResonanceSet find_resonances(const Potential& v1, const Potential& v2, double L, const SearchRect& rect,
                             const FinderOptions& opt) {
  if (rect.im_hi > 0.0) throw PreconditionError("find_resonances: rectangle must lie in Im k <= 0");
  auto out = find_zeros(composite_function(v1, v2, L), rect, opt);
  out.L = L;
  return out;
}

std::vector<Complex> find_bound_states(const Potential& v, double kappa_max) {
  if (!(kappa_max > 0.0)) throw PreconditionError("find_bound_states: kappa_max must be positive");
  auto w = [&](double kappa) { return wronskian(v, Complex(0.0, kappa)).real(); };
  int n = std::max(400, int(std::ceil(kappa_max * (1.0 + extent(v)) * 50.0)));
  std::vector<Complex> out;
  double k0 = kappa_max * 1e-9;
  double w0 = w(k0);
  for (int i = 1; i <= n; ++i) {
    double k1 = kappa_max * double(i) / n;
    double w1 = w(k1);
    if (w1 == 0.0) {
      out.emplace_back(0.0, k1);
    } else if ((w0 < 0.0) != (w1 < 0.0) && w0 != 0.0) {
      double lo = k0, hi = k1, flo = w0;
      for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = w(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      out.emplace_back(0.0, 0.5 * (lo + hi));
    }
    k0 = k1;
    w0 = w1;
  }
  return out;
}

ResonanceFreeReport resonance_free_check(const Potential& v1, const Potential& v2, double L, double a,
                                         double A, int samples, double re_lo, double re_hi, double im_lo) {
  if (!(a > 0.0) || !(A > 0.0)) throw PreconditionError("resonance_free_check: a and A must be positive");
  ResonanceFreeReport rep;
  rep.L0 = std::log(A) / (2.0 * a);
  if (L <= rep.L0) {
    rep.skipped = true;
    return rep;
  }
  rep.min_margin = INFINITY;
  for (int i = 0; i < samples; ++i) {
    for (int j = 0; j < samples; ++j) {
      Complex k(re_lo + (re_hi - re_lo) * (i + 0.5) / samples, im_lo + (-a - im_lo) * (j + 0.5) / samples);
      auto fv = f(v1, v2, k);
      if (fv.pole || std::abs(fv.value) >= A) continue;
      ++rep.grid_points_in_region;
      // |e^{2ikL}| = e^{-2 Im(k) L} exceeds A > |f| there.
      double margin = 1.0 - std::abs(fv.value) * std::exp(2.0 * k.imag() * L);
      rep.min_margin = std::min(rep.min_margin, margin);
    }
  }
  SearchRect rect{re_lo, re_hi, im_lo, -a};
  auto found = find_resonances(v1, v2, L, rect);
  for (const auto& r : found.roots) {
    auto fv = f(v1, v2, r.k);
    if (r.k.imag() < -a && !fv.pole && std::abs(fv.value) < A) rep.violations.push_back(r.k);
  }
  if (rep.grid_points_in_region == 0) rep.min_margin = 1.0;
  return rep;
}

int count_in_band(const Potential& v1, const Potential& v2, double L, double a, double b, double c) {
  if (!(0.0 <= a && a < b) || !(c > 0.0)) throw PreconditionError("count_in_band: need 0 <= a < b, c > 0");
  SearchRect r{a, b, -c, -1e-9};
  return winding_count(composite_function(v1, v2, L), r);
}

}  // namespace resonance
