#include "resonance/decay.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "resonance/errors.hpp"
#include "resonance/lambert_w.hpp"
#include "resonance/scattering.hpp"

namespace resonance {

namespace {

const Complex kI(0.0, 1.0);
constexpr double kPi = std::numbers::pi;
constexpr double kLineTol = 1e-9;

double extent(const Potential& v) {
  auto s = v.support();
  return s ? std::max(std::abs(s->first), std::abs(s->second)) : 0.0;
}


// g / k as an entire function when g(0) = 0. The derivative loses accuracy like
// eps |g| / |k|^2 very close to the origin, which Newton tolerates.
AnalyticFunction divided_by_k(std::function<std::pair<Complex, Complex>(Complex)> jet, double rate) {
  AnalyticFunction out;
  out.value = [jet](Complex k) {
    auto [g, dg] = jet(k);
    return k == Complex(0.0) ? dg : g / k;
  };
  out.jet = [jet](Complex k) -> std::pair<Complex, Complex> {
    auto [g, dg] = jet(k);
    if (k == Complex(0.0)) return {dg, 0.0};
    return {g / k, (dg * k - g) / (k * k)};
  };
  out.phase_rate = rate;
  return out;
}

// D1 / N1 = 1 / f1 near k = 0. At k = 0 both vanish or agree, so the value there
// comes from the classification.
Complex inverse_f1_near_zero(const Potential& v1, Complex k, const PoleData& at0) {
  if (k == Complex(0.0)) {
    if (at0.is_pole()) return 0.0;
    return std::abs(at0.g_at_k0 - 1.0) <= 1e-10 ? Complex(1.0) : 1.0 / at0.g_at_k0;
  }
  auto m = left_factor_data(v1, k);
  return m.den / m.num;
}

bool on_line(const DecayConfig& cfg, Complex k0) { return std::abs(k0.imag() - cfg.line()) <= kLineTol; }

// (g(k0)(e^{-cL} - 2ik0))^{1/p}, the branch function G of the decay cases.
Complex decay_G(const PoleData& pd, const DecayConfig& cfg) {
  int p = std::max(pd.order, pd.zero_order);
  Complex base = pd.g_at_k0 * (std::exp(-cfg.c * cfg.L) - 2.0 * kI * pd.k0);
  return p > 1 ? std::pow(base, 1.0 / p) : base;
}

struct LambertSetup {
  double lambda;
  int p;
  Complex G;
  double sign;  // +1: k = k0 + W / (i lambda); -1: k = k0 - W / (i lambda)
};

LambertSetup lambert_setup(const PoleData& pd, const DecayConfig& cfg) {
  int p = std::max(pd.order, pd.zero_order);
  return {2.0 * cfg.L / p, p, decay_G(pd, cfg), pd.is_zero() ? -1.0 : 1.0};
}

Complex decay_lambert_argument(const LambertSetup& s, const PoleData& pd, const DecayConfig& cfg, int l) {
  Complex omega = std::polar(1.0, 2.0 * kPi * l / s.p);
  if (s.sign < 0.0) return -kI * s.lambda * omega * std::exp((kI * pd.k0 - 0.5 * cfg.c) * s.lambda) / s.G;
  return kI * s.lambda * omega * std::exp((0.5 * cfg.c - kI * pd.k0) * s.lambda) * s.G;
}

Complex d3_rhs(const PoleData& pd, const DecayConfig& cfg) {
  return std::exp((cfg.c - 2.0 * kI * pd.k0) * cfg.L) * pd.g_at_k0 * (std::exp(-cfg.c * cfg.L) - 2.0 * kI * pd.k0);
}

Complex fixed_point_map(const Potential& v1, const DecayConfig& cfg, const PoleData& at0, Complex xi) {
  Complex k = xi * std::exp(-cfg.c * cfg.L);
  return (1.0 - std::exp(2.0 * kI * k * cfg.L) * inverse_f1_near_zero(v1, k, at0)) / (2.0 * kI);
}

Complex near_zero_prediction(const PoleData& at0, const DecayConfig& cfg) {
  double mu = std::exp(-cfg.c * cfg.L);
  if (at0.is_pole()) return mu / (2.0 * kI);
  if (std::abs(at0.g_at_k0 - 1.0) <= 1e-10) return 0.0;
  return (1.0 - 1.0 / at0.g_at_k0) * mu / (2.0 * kI);
}

}  // namespace

void DecayConfig::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw PreconditionError("DecayConfig: c must be positive");
  if (!(L > 0.0) || !std::isfinite(L)) throw PreconditionError("DecayConfig: L must be positive");
  if (mode == DecayMode::general_V2 && !(mu > 0.0)) throw PreconditionError("DecayConfig: mu must be positive");
}

double DecayConfig::coupling() const { return mode == DecayMode::delta ? std::exp(-c * L) : mu; }

std::pair<Complex, Complex> decay_residual_jet(const Potential& v1, const DecayConfig& cfg, Complex k) {
  auto m = left_factor_data(v1, k);
  double mu = std::exp(-cfg.c * cfg.L);
  Complex e = std::exp((2.0 * kI * k - cfg.c) * cfg.L);
  Complex rhs = mu - 2.0 * kI * k;
  Complex value = m.den * e - m.num * rhs;
  Complex deriv = (m.den_k + 2.0 * kI * cfg.L * m.den) * e - m.num_k * rhs + 2.0 * kI * m.num;
  return {value, deriv};
}

Complex decay_residual(const Potential& v1, const DecayConfig& cfg, Complex k) {
  return decay_residual_jet(v1, cfg, k).first;
}

std::pair<Complex, Complex> general_mu_residual_jet(const Potential& v1, const Potential& v2,
                                                    const DecayConfig& cfg, Complex k) {
  Potential scaled = scale(v2, cfg.coupling());
  auto m1 = left_factor_data(v1, k);
  auto m2 = right_factor_data(scaled, k);
  double mu = cfg.coupling();
  Complex e = std::exp(2.0 * kI * k * cfg.L);
  Complex d2 = -m2.den / mu, d2k = -m2.den_k / mu;
  Complex n2 = -m2.num, n2k = -m2.num_k;
  Complex value = mu * e * m1.den * d2 - m1.num * n2;
  Complex deriv = mu * e * (2.0 * kI * cfg.L * m1.den * d2 + m1.den_k * d2 + m1.den * d2k) -
                  (m1.num_k * n2 + m1.num * n2k);
  return {value, deriv};
}

Complex general_mu_residual(const Potential& v1, const Potential& v2, const DecayConfig& cfg, Complex k) {
  return general_mu_residual_jet(v1, v2, cfg, k).first;
}

AnalyticFunction decay_function(const Potential& v1, const DecayConfig& cfg) {
  cfg.validate();
  return divided_by_k([v1, cfg](Complex k) { return decay_residual_jet(v1, cfg, k); },
                      1.0 + 2.0 * (cfg.L + extent(v1)));
}

AnalyticFunction general_mu_function(const Potential& v1, const Potential& v2, const DecayConfig& cfg) {
  cfg.validate();
  if (cfg.mode != DecayMode::general_V2) throw PreconditionError("general_mu_function: needs general_V2 mode");
  Potential scaled = scale(v2, cfg.mu);
  double mu = cfg.mu, L = cfg.L;
  auto jet = [v1, scaled, mu, L](Complex k) -> std::pair<Complex, Complex> {
    auto m1 = left_factor_data(v1, k);
    auto m2 = right_factor_data(scaled, k);
    Complex e = std::exp(2.0 * kI * k * L);
    Complex d2 = -m2.den / mu, d2k = -m2.den_k / mu;
    Complex n2 = -m2.num, n2k = -m2.num_k;
    return {mu * e * m1.den * d2 - m1.num * n2,
            mu * e * (2.0 * kI * L * m1.den * d2 + m1.den_k * d2 + m1.den * d2k) - (m1.num_k * n2 + m1.num * n2k)};
  };
  return divided_by_k(jet, 1.0 + 2.0 * (cfg.L + extent(v1) + extent(v2)));
}

ResonanceSet find_decay_resonances(const Potential& v1, const DecayConfig& cfg, const SearchRect& rect) {
  if (rect.im_hi > 0.0) throw PreconditionError("find_decay_resonances: rectangle must lie in Im k <= 0");
  FinderOptions opt;
  opt.origin_exclusion = 0.0;
  auto out = find_zeros(decay_function(v1, cfg), rect, opt);
  out.L = cfg.L;
  return out;
}

ResonanceSet find_general_resonances(const Potential& v1, const Potential& v2, const DecayConfig& cfg,
                                     const SearchRect& rect) {
  if (rect.im_hi > 0.0) throw PreconditionError("find_general_resonances: rectangle must lie in Im k <= 0");
  FinderOptions opt;
  opt.origin_exclusion = 0.0;
  auto out = find_zeros(general_mu_function(v1, v2, cfg), rect, opt);
  out.L = cfg.L;
  return out;
}

NearZeroResult near_zero_resonance(const Potential& v1, const DecayConfig& cfg) {
  cfg.validate();
  if (cfg.mode != DecayMode::delta) throw PreconditionError("near_zero_resonance: needs delta mode");
  NearZeroResult out;
  out.at_zero = classify_f1(v1, 0.0);
  if (out.at_zero.is_zero()) throw PreconditionError("near_zero_resonance: f1 vanishes at 0");
  out.predicted = near_zero_prediction(out.at_zero, cfg);
  double mu = std::exp(-cfg.c * cfg.L);
  double c0 = std::abs(out.at_zero.g_at_k0);
  out.radius = 0.5 + 1.0 / c0;

  // Slope of the map, by central differences on a ring of the ball and at its center.
  auto slope = [&](Complex z) {
    double h = 1e-3 * out.radius;
    return std::abs(fixed_point_map(v1, cfg, out.at_zero, z + h) - fixed_point_map(v1, cfg, out.at_zero, z - h)) /
           (2.0 * h);
  };
  auto fail = [&](const std::string& what) {
    throw NumericalError("near_zero_resonance: " + what + " on |xi| <= " + std::to_string(out.radius) + " (slope " +
                         std::to_string(out.contraction) + ", L = " + std::to_string(cfg.L) + " too small)");
  };
  out.contraction = slope(0.0);
  for (int m = 0; m < 16; ++m) out.contraction = std::max(out.contraction, slope(std::polar(out.radius, kPi * m / 8.0)));
  if (!(out.contraction < 1.0)) fail("no contraction");

  // Stops at machine precision or once the steps stop shrinking (round-off in D1 / N1
  // grows like eps / e^{-cL} when both vanish at 0).
  Complex xi = 0.0;
  double last = INFINITY;
  for (out.iterations = 1;; ++out.iterations) {
    Complex next = fixed_point_map(v1, cfg, out.at_zero, xi);
    double step = std::abs(next - xi);
    xi = next;
    if (step <= 1e-15 * (1.0 + std::abs(xi)) || (out.iterations > 3 && step >= last)) break;
    if (out.iterations == 200) fail("iteration did not settle");
    last = step;
  }
  out.contraction = std::max(out.contraction, slope(xi));
  if (!(out.contraction < 1.0) || std::abs(xi) > out.radius) fail("fixed point left the ball");
  out.xi = xi;
  out.k = xi * mu;
  return out;
}

int near_zero_count(const Potential& v1, const DecayConfig& cfg, double radius) {
  return winding_count(decay_function(v1, cfg), {-radius, radius, -radius, radius});
}

DecayRegionReport decay_region_check(const Potential& v1, const DecayConfig& cfg, double a, double A,
                                     const DecayWindow& window, int samples, double L_lo) {
  cfg.validate();
  if (!(a > 0.0) || !(A > 0.0)) throw PreconditionError("decay_region_check: a and A must be positive");
  DecayRegionReport rep;
  double line = cfg.line();

  // U2 is empty once e^{2aL} > A(1 + 2A); U1 once e^{-2aL} < (2/A - e^{-cL}) / A.
  double l2 = std::log(A * (1.0 + 2.0 * A)) / (2.0 * a);
  auto h = [&](double L) { return (2.0 / A - std::exp(-cfg.c * L)) / A - std::exp(-2.0 * a * L); };
  double lo = 0.0, hi = 1.0;
  while (h(hi) <= 0.0 && hi < 1e8) hi *= 2.0;
  if (h(lo) > 0.0) hi = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + hi); ++it) {
    double mid = 0.5 * (lo + hi);
    (h(mid) > 0.0 ? hi : lo) = mid;
  }
  rep.L0_bound = std::max({0.0, l2, hi});

  auto in_u1 = [&](Complex k, const FactorValue& fv) {
    return k.imag() > line + a && (fv.pole || std::abs(fv.value) > 1.0 / A) && std::abs(k) > 1.0 / A;
  };
  auto in_u2 = [&](Complex k, const FactorValue& fv) {
    return k.imag() < line - a && !fv.pole && std::abs(fv.value) < A && std::abs(k) < A;
  };

  double mu = std::exp(-cfg.c * cfg.L);
  for (int i = 0; i < samples; ++i) {
    for (int j = 0; j < samples; ++j) {
      Complex k(window.re_lo + (window.re_hi - window.re_lo) * (i + 0.5) / samples,
                window.im_lo * (j + 0.5) / samples);
      auto fv = f1(v1, k);
      double lhs = std::exp((-2.0 * k.imag() - cfg.c) * cfg.L);
      if (in_u1(k, fv)) {
        ++rep.samples_u1;
        if (!fv.pole) rep.min_margin_u1 = std::min(rep.min_margin_u1, 1.0 - lhs / std::abs(fv.value * (mu - 2.0 * kI * k)));
      } else if (in_u2(k, fv)) {
        ++rep.samples_u2;
        rep.min_margin_u2 = std::min(rep.min_margin_u2, 1.0 - std::abs(fv.value * (mu - 2.0 * kI * k)) / lhs);
      }
    }
  }

  SearchRect rect{window.re_lo, window.re_hi, window.im_lo, 0.0};
  auto violations_at = [&](double L) {
    DecayConfig c2 = cfg;
    c2.L = L;
    std::vector<Complex> bad;
    for (const auto& r : find_decay_resonances(v1, c2, rect).roots) {
      auto fv = f1(v1, r.k);
      if (in_u1(r.k, fv) || in_u2(r.k, fv)) bad.push_back(r.k);
    }
    return bad;
  };
  rep.violations = violations_at(cfg.L);
  if (!rep.violations.empty()) {
    rep.L_empirical = INFINITY;
  } else if (L_lo >= cfg.L || violations_at(L_lo).empty()) {
    rep.L_empirical = std::min(L_lo, cfg.L);
  } else {
    double bad = L_lo, good = cfg.L;
    for (int it = 0; it < 12; ++it) {
      double mid = 0.5 * (bad + good);
      (violations_at(mid).empty() ? good : bad) = mid;
    }
    rep.L_empirical = good;
  }
  return rep;
}

std::vector<ApproxResonance> approx_decay(const Potential& v1, const DecayConfig& cfg, ApproxCase kind, Complex k0,
                                          JRange j, double eps) {
  cfg.validate();
  if (cfg.mode != DecayMode::delta) throw PreconditionError("approx_decay: needs delta mode");
  std::vector<ApproxResonance> out;
  if (kind == ApproxCase::D1) {
    auto nz = near_zero_resonance(v1, cfg);
    out.push_back({nz.predicted, kind, 0, 0, 0.0, cfg.L, eps * cfg.L * std::exp(-2.0 * cfg.c * cfg.L)});
    return out;
  }
  PoleData pd = classify_f1(v1, k0);
  double line = cfg.line();
  bool above = k0.imag() > line + kLineTol, below = k0.imag() < line - kLineTol, at = on_line(cfg, k0);
  bool match = false;
  switch (kind) {
    case ApproxCase::D2: match = above && pd.is_zero(); break;
    case ApproxCase::D3: match = at && !pd.is_zero() && !pd.is_pole(); break;
    case ApproxCase::D4: match = at && pd.is_zero(); break;
    case ApproxCase::D5: match = at && pd.is_pole(); break;
    case ApproxCase::D6: match = below && pd.is_pole(); break;
    default: break;
  }
  if (!match)
    throw PreconditionError("approx_decay: k0 does not fit case " + to_string(kind) + " (zero order " +
                            std::to_string(pd.zero_order) + ", pole order " + std::to_string(pd.order) + ")");

  if (kind == ApproxCase::D3) {
    Complex lg = std::log(d3_rhs(pd, cfg));
    for (int n = j.lo; n <= j.hi; ++n) {
      Complex k = k0 + lg / (2.0 * kI * cfg.L) + kPi * n / cfg.L;
      out.push_back({k, kind, n, 0, k0, cfg.L, eps / cfg.L});
    }
    return out;
  }

  auto s = lambert_setup(pd, cfg);
  bool principal_only = kind == ApproxCase::D2 || kind == ApproxCase::D6;
  double scale = principal_only ? eps * std::exp(-std::abs(k0.imag() - line) * s.lambda) : eps / s.lambda;
  for (int l = 0; l < s.p; ++l) {
    Complex arg = decay_lambert_argument(s, pd, cfg, l);
    int lo = principal_only ? 0 : j.lo, hi = principal_only ? 0 : j.hi;
    for (int n = lo; n <= hi; ++n) {
      Complex k = k0 + s.sign * lambert_w(n, arg) / (kI * s.lambda);
      out.push_back({k, kind, n, l, k0, cfg.L, scale});
    }
  }
  return out;
}

Complex decay_case_defect(const Potential& v1, const DecayConfig& cfg, const ApproxResonance& a) {
  if (a.kind == ApproxCase::D1) {
    auto at0 = classify_f1(v1, 0.0);
    double mu = std::exp(-cfg.c * cfg.L);
    Complex xi = a.k / mu;
    return xi - fixed_point_map(v1, cfg, at0, xi);
  }
  PoleData pd = classify_f1(v1, a.k0);
  if (a.kind == ApproxCase::D3) return std::exp(2.0 * kI * (a.k - a.k0) * cfg.L) - d3_rhs(pd, cfg);
  auto s = lambert_setup(pd, cfg);
  Complex z = s.sign * kI * s.lambda * (a.k - a.k0);
  return z * std::exp(z) - decay_lambert_argument(s, pd, cfg, a.l);
}

}  // namespace resonance
