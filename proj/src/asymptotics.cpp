#include "resonance/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "resonance/errors.hpp"
#include "resonance/lambert_w.hpp"
#include "resonance/scattering.hpp"

namespace resonance {

namespace {

const Complex kI(0.0, 1.0);
constexpr double kPi = std::numbers::pi;

int winding_on_square(const std::function<Complex(Complex)>& h, Complex k0, double r) {
  AnalyticFunction a;
  a.value = h;
  return winding_count(a, {k0.real() - r, k0.real() + r, k0.imag() - r, k0.imag() + r});
}

void require_lower_half(Complex k0) {
  if (k0.imag() > 1e-12) throw DomainError("classify_point: k0 must lie in the closed lower half plane");
}

bool on_real_axis(Complex k0) { return std::abs(k0.imag()) <= 1e-10 * (1.0 + std::abs(k0)); }

ApproxResonance make(Complex k, ApproxCase c, int j, int l, const PoleData& pd, double L, double scale) {
  return {k, c, j, l, pd.k0, L, scale};
}

}  // namespace

PoleData classify(const MeromorphicFactor& f, Complex k0, double radius, int max_order) {
  int zn = winding_on_square(f.num, k0, radius);
  int zd = winding_on_square(f.den, k0, radius);
  PoleData pd;
  pd.k0 = k0;
  int net = zd - zn;
  if (net > max_order || -net > max_order)
    throw NumericalError("classify: order " + std::to_string(std::abs(net)) + " exceeds the cap");
  pd.order = std::max(net, 0);
  pd.zero_order = std::max(-net, 0);
  const int n = 64;
  Complex sum = 0.0;
  for (int m = 0; m < n; ++m) {
    Complex d = std::polar(radius, 2.0 * kPi * (m + 0.5) / n);
    Complex v = f.num(k0 + d) / f.den(k0 + d);
    sum += v * std::pow(d, net);
  }
  pd.g_at_k0 = sum / double(n);
  int root = std::max(pd.order, pd.zero_order);
  pd.G_at_k0 = root > 1 ? std::pow(pd.g_at_k0, 1.0 / root) : pd.g_at_k0;
  pd.phi0 = std::arg(pd.G_at_k0);
  return pd;
}

MeromorphicFactor f_factor(const Potential& v1, const Potential& v2) {
  return {[=](Complex k) { return left_factor_data(v1, k).num * right_factor_data(v2, k).num; },
          [=](Complex k) { return left_factor_data(v1, k).den * right_factor_data(v2, k).den; }};
}

MeromorphicFactor f1_factor(const Potential& v1) {
  return {[=](Complex k) { return left_factor_data(v1, k).num; },
          [=](Complex k) { return left_factor_data(v1, k).den; }};
}

PoleData classify_point(const Potential& v1, const Potential& v2, Complex k0) {
  require_lower_half(k0);
  return classify(f_factor(v1, v2), k0);
}

PoleData classify_f1(const Potential& v1, Complex k0) {
  require_lower_half(k0);
  return classify(f1_factor(v1), k0);
}

std::vector<Root> find_poles(const Potential& v1, const Potential& v2, const SearchRect& rect) {
  AnalyticFunction d;
  d.value = [=](Complex k) { return left_factor_data(v1, k).den * right_factor_data(v2, k).den; };
  double extent = 0.0;
  if (auto s = v1.support()) extent += -s->first;
  if (auto s = v2.support()) extent += s->second;
  d.phase_rate = 2.0 + 2.0 * extent;
  return find_zeros(d, rect).roots;
}

std::string to_string(ApproxCase c) {
  static const char* names[] = {"C1", "C2", "C3", "D1", "D2", "D3", "D4", "D5", "D6"};
  return names[static_cast<int>(c)];
}

std::vector<ApproxResonance> approx_case1(const PoleData& pd, Complex f_at_k0, double L, JRange j, double eps) {
  if (pd.is_pole() || pd.is_zero()) throw PreconditionError("approx_case1: f must be analytic and nonzero at k0");
  if (!(L > 0.0)) throw PreconditionError("approx_case1: L must be positive");
  std::vector<ApproxResonance> out;
  Complex lf = std::log(f_at_k0);
  for (int n = j.lo; n <= j.hi; ++n) {
    Complex k = (lf + 2.0 * kPi * kI * double(n)) / (2.0 * kI * L);
    out.push_back(make(k, ApproxCase::C1, n, 0, pd, L, eps / L));
  }
  return out;
}

JRange case1_j_range(Complex f_at_k0, double L, double re_lo, double re_hi) {
  double a = std::arg(f_at_k0);
  return {int(std::ceil((2.0 * L * re_lo - a) / (2.0 * kPi))), int(std::floor((2.0 * L * re_hi - a) / (2.0 * kPi)))};
}

double case2_lambda(const PoleData& pd, double L) {
  int p = std::max(pd.order, pd.zero_order);
  if (p < 1) throw PreconditionError("case2_lambda: k0 is neither a pole nor a zero");
  return 2.0 * L / p;
}

Complex lambert_argument(const PoleData& pd, double L, int l) {
  double lambda = case2_lambda(pd, L);
  Complex omega = std::polar(1.0, 2.0 * kPi * l / pd.order);
  return kI * lambda * std::exp(-kI * lambda * pd.k0) * omega * pd.G_at_k0;
}

double case2_lambda_min(const PoleData& pd, double eps) {
  return std::exp(3.0) / ((1.0 - eps / 4.0) * std::abs(pd.G_at_k0));
}

std::vector<ApproxResonance> approx_case2(const PoleData& pd, double L, JRange j, double eps) {
  if (!pd.is_pole() || !on_real_axis(pd.k0)) throw PreconditionError("approx_case2: needs a pole on the real axis");
  double lambda = case2_lambda(pd, L);
  if (lambda <= case2_lambda_min(pd, eps))
    throw PreconditionError("approx_case2: lambda = " + std::to_string(lambda) + " below lambda_min = " +
                            std::to_string(case2_lambda_min(pd, eps)));
  std::vector<ApproxResonance> out;
  for (int l = 0; l < pd.order; ++l) {
    Complex a = lambert_argument(pd, L, l);
    for (int n = j.lo; n <= j.hi; ++n) {
      Complex k = pd.k0 + lambert_w(n, a) / (kI * lambda);
      out.push_back(make(k, ApproxCase::C2, n, l, pd, L, eps / lambda));
    }
  }
  return out;
}

double case2_phi(const PoleData& pd, double lambda, int l) {
  double x = (-lambda * pd.k0.real() + pd.phi0) / (2.0 * kPi) + double(l) / pd.order + 0.25;
  return x - std::ceil(x - 0.5);
}

std::vector<ApproxResonance> approx_case2_twoterm(const PoleData& pd, double L, JRange j, double eps) {
  if (!pd.is_pole() || !on_real_axis(pd.k0)) throw PreconditionError("approx_case2_twoterm: needs a real pole");
  double lambda = case2_lambda(pd, L);
  if (lambda <= case2_lambda_min(pd, eps)) throw PreconditionError("approx_case2_twoterm: lambda below lambda_min");
  double a = std::log(lambda * std::abs(pd.G_at_k0));
  std::vector<ApproxResonance> out;
  for (int l = 0; l < pd.order; ++l) {
    double phi = case2_phi(pd, lambda, l);
    for (int n = j.lo; n <= j.hi; ++n) {
      Complex log_j(a, 2.0 * kPi * (n + phi));
      Complex k = pd.k0.real() + (log_j - std::log(log_j)) / (kI * lambda);
      out.push_back(make(k, ApproxCase::C2, n, l, pd, L, eps / lambda));
    }
  }
  return out;
}

std::vector<ApproxResonance> approx_case3(const PoleData& pd, double L, double eps) {
  if (!pd.is_pole() || !(pd.k0.imag() < 0.0) || on_real_axis(pd.k0))
    throw PreconditionError("approx_case3: needs a pole strictly below the real axis");
  double lambda = case2_lambda(pd, L);
  std::vector<ApproxResonance> out;
  for (int l = 0; l < pd.order; ++l) {
    Complex a = lambert_argument(pd, L, l);
    if (std::abs(a) >= 0.1)
      throw PreconditionError("approx_case3: |A| = " + std::to_string(std::abs(a)) + " is not below 1/10");
    Complex k = pd.k0 + lambert_w(0, a) / (kI * lambda);
    out.push_back(make(k, ApproxCase::C3, 0, l, pd, L, eps * std::exp(-std::abs(pd.k0.imag()) * lambda)));
  }
  return out;
}

PairingReport pair_resonances(const ResonanceSet& exact, const std::vector<ApproxResonance>& approx,
                              const PairingOptions& opt) {
  double slack = 0.0;
  for (const auto& a : approx) slack = std::max(slack, opt.tolerance * a.predicted_error_scale);
  double outer = opt.delta + slack;

  std::vector<Complex> ex;
  for (const auto& r : exact.roots)
    if (std::abs(r.k - opt.k0) < outer)
      for (int m = 0; m < r.multiplicity; ++m) ex.push_back(r.k);
  std::vector<const ApproxResonance*> ap;
  for (const auto& a : approx)
    if (std::abs(a.k - opt.k0) < outer) ap.push_back(&a);

  struct Cand {
    double d;
    std::size_t e, a;
  };
  std::vector<Cand> cands;
  for (std::size_t e = 0; e < ex.size(); ++e)
    for (std::size_t a = 0; a < ap.size(); ++a) cands.push_back({std::abs(ex[e] - ap[a]->k), e, a});
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) { return x.d < y.d; });

  std::vector<bool> used_e(ex.size(), false), used_a(ap.size(), false);
  PairingReport rep;
  auto inside = [&](Complex k) { return std::abs(k - opt.k0) < opt.delta; };
  for (const auto& c : cands) {
    if (used_e[c.e] || used_a[c.a]) continue;
    double allowed = opt.tolerance * ap[c.a]->predicted_error_scale;
    if (c.d > allowed) continue;
    used_e[c.e] = used_a[c.a] = true;
    if (!inside(ex[c.e]) && !inside(ap[c.a]->k)) continue;
    rep.pairs.push_back({ex[c.e], ap[c.a]->k, c.d, allowed});
    rep.max_distance = std::max(rep.max_distance, c.d);
    rep.max_ratio = std::max(rep.max_ratio, allowed > 0.0 ? c.d / allowed : INFINITY);
  }
  for (std::size_t e = 0; e < ex.size(); ++e)
    if (!used_e[e] && inside(ex[e])) rep.orphan_exact.push_back(ex[e]);
  for (std::size_t a = 0; a < ap.size(); ++a)
    if (!used_a[a] && inside(ap[a]->k)) rep.orphan_approx.push_back(ap[a]->k);
  return rep;
}

}  // namespace resonance
