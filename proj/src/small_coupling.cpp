#include "resonance/small_coupling.hpp"

#include <algorithm>
#include <cmath>

#include "resonance/errors.hpp"
#include "resonance/quadrature.hpp"
#include "resonance/scattering.hpp"

namespace resonance {

namespace {

const Complex kI(0.0, 1.0);
constexpr int kNodes = 32;
constexpr double kMaxPhase = 10.0;  // |k| h per quadrature panel

struct Event {
  bool is_delta;
  double lo, hi;  // delta position in hi
  double value;   // alpha or segment height
};

Vec2cd a_vec(Complex k, double t) { return Vec2cd(std::exp(-kI * k * t), -std::exp(kI * k * t)); }
Vec2cd b_vec(Complex k, double t) { return Vec2cd(std::exp(kI * k * t), std::exp(-kI * k * t)); }

double value_on(const Potential& v, double lo, double hi) {
  double mid = 0.5 * (lo + hi);
  for (const auto& p : v.pieces())
    if (p.lo <= mid && mid < p.hi) return p.value;
  return 0.0;
}

// Deltas and panels from the right end of the support down to x, in that order.
std::vector<Event> layout(const Potential& v, Complex k, double x) {
  auto [slo, shi] = *v.support();
  std::vector<double> bps{shi};
  for (const auto& p : v.pieces()) {
    bps.push_back(p.lo);
    bps.push_back(p.hi);
  }
  for (const auto& d : v.deltas()) bps.push_back(d.x);
  if (x > slo && x < shi) bps.push_back(x);
  std::erase_if(bps, [&](double p) { return p < x || p > shi; });
  std::sort(bps.begin(), bps.end(), std::greater<>());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

  std::vector<Event> out;
  for (std::size_t i = 0; i < bps.size(); ++i) {
    for (const auto& d : v.deltas())
      if (d.x == bps[i]) out.push_back({true, d.x, d.x, d.alpha});
    if (i + 1 == bps.size()) break;
    double lo = bps[i + 1], hi = bps[i];
    double val = value_on(v, lo, hi);
    if (val == 0.0) continue;
    int panels = std::max(1, int(std::ceil(std::abs(k) * (hi - lo) / kMaxPhase)));
    double h = (hi - lo) / panels;
    for (int p = panels - 1; p >= 0; --p)
      out.push_back({false, lo + p * h, p + 1 == panels ? hi : lo + (p + 1) * h, val});
  }
  return out;
}

void require_support(const Potential& v2, Complex k) {
  if (k == Complex(0.0)) throw DomainError("series: k = 0");
  if (auto s = v2.support(); s && s->first < 0.0) throw PreconditionError("series: supp V2 must lie in [0, inf)");
}

}  // namespace

std::vector<Vec2cd> series_terms(const Potential& v2, Complex k, double mu, int m, double x) {
  require_support(v2, k);
  if (m < 0) throw PreconditionError("series: order must be >= 0");
  std::vector<Vec2cd> terms{Vec2cd(1.0, 0.0)};
  if (v2.empty()) {
    terms.resize(m + 1, Vec2cd::Zero());
    return terms;
  }
  const auto& rule = gauss_legendre(kNodes);
  auto events = layout(v2, k, x);

  // s_{j-1}(t) = b(t)^T X_{j-1}(t) at every delta (right limit) and quadrature node.
  std::vector<Eigen::VectorXcd> s(events.size()), next(events.size());
  std::vector<Eigen::VectorXd> nodes(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) {
    const auto& ev = events[e];
    if (ev.is_delta) {
      nodes[e] = Eigen::VectorXd::Constant(1, ev.hi);
    } else {
      double h = ev.hi - ev.lo;
      nodes[e] = (ev.lo + 0.5 * h * (rule.nodes.array() + 1.0)).matrix();
    }
    s[e] = nodes[e].unaryExpr([&](double t) { return std::exp(kI * k * t); });
  }

  Complex pre = -mu / (2.0 * kI * k);
  for (int j = 1; j <= m; ++j) {
    Vec2cd tail = Vec2cd::Zero();  // integral from the current point to x_f
    for (std::size_t e = 0; e < events.size(); ++e) {
      const auto& ev = events[e];
      next[e].resize(nodes[e].size());
      if (ev.is_delta) {
        next[e](0) = b_vec(k, ev.hi).transpose() * (pre * tail);
        tail += ev.value * a_vec(k, ev.hi) * s[e](0);
        continue;
      }
      double half = 0.5 * (ev.hi - ev.lo);
      Eigen::Matrix<Complex, Eigen::Dynamic, 2> g(kNodes, 2);
      for (int n = 0; n < kNodes; ++n) g.row(n) = (ev.value * s[e](n)) * a_vec(k, nodes[e](n)).transpose();
      Eigen::Matrix<Complex, Eigen::Dynamic, 2> partial = half * (rule.tail.cast<Complex>() * g);
      for (int n = 0; n < kNodes; ++n) {
        Vec2cd xn = pre * (tail + partial.row(n).transpose());
        next[e](n) = b_vec(k, nodes[e](n)).transpose() * xn;
      }
      tail += half * (g.transpose() * rule.weights.cast<Complex>());
    }
    terms.push_back(pre * tail);
    std::swap(s, next);
  }
  return terms;
}

double series_c2(const Potential& v2, Complex k) {
  auto sp = v2.support();
  if (!sp) return 0.0;
  double w = sp->second - sp->first;
  return std::cosh(w * std::abs(k.imag())) * std::min(w, 1.0 / std::abs(k));
}

double series_m(const Potential& v2, Complex k) {
  auto sp = v2.support();
  double xmax = sp ? std::max(std::abs(sp->first), std::abs(sp->second)) : 0.0;
  return 2.0 * std::cosh(2.0 * xmax * k.imag());
}

double series_remainder_bound(const Potential& v2, Complex k, double mu, int m) {
  require_support(v2, k);
  if (v2.empty() || mu == 0.0) return 0.0;
  auto sp = *v2.support();
  double w = sp.second - sp.first;
  double alpha_sum = 0.0;
  for (const auto& d : v2.deltas()) alpha_sum += std::abs(d.alpha);
  double M = series_m(v2, k), c2 = series_c2(v2, k), ak = std::abs(k);
  double c1 = std::exp(mu * M * (v2.sup_segment() * w + alpha_sum) / (2.0 * ak));
  double x = mu * std::abs(v2.l1_norm());
  if (m > 0 && c2 == 0.0) return 0.0;
  double log_b = (m + 1) * std::log(x) + (m > 0 ? m * std::log(c2) : 0.0) + std::log(M * c1 / (2.0 * ak)) -
                 std::lgamma(m + 2.0);
  return std::exp(log_b);
}

SeriesState series_state(const Potential& v2, Complex k, double mu, int m, double x) {
  auto terms = series_terms(v2, k, mu, m, x);
  SeriesState st;
  st.X = Vec2cd::Zero();
  for (const auto& t : terms) st.X += t;
  st.order = m;
  st.remainder_bound = series_remainder_bound(v2, k, mu, m);
  return st;
}

F2Series f2_series(const Potential& v2, Complex k, double mu, int m) {
  F2Series out;
  out.state = series_state(v2, k, mu, m, 0.0);
  Complex a = out.state.X(0), b = out.state.X(1);
  out.remainder_bound = out.state.remainder_bound;
  if (b == Complex(0.0)) {
    out.pole = true;
    out.value = Complex(INFINITY, 0.0);
    out.value_error_bound = INFINITY;
    return out;
  }
  out.value = -a / b;
  double d = out.remainder_bound;
  out.value_error_bound = std::abs(b) > d ? d * (1.0 + std::abs(out.value)) / (std::abs(b) - d) : INFINITY;
  return out;
}

ExpansionReport expansion_check(const Potential& v2, Complex k, const std::vector<double>& mu_list) {
  require_support(v2, k);
  ExpansionReport r;
  r.I = fourier_transform(v2, -2.0 * k);
  r.vhat0 = fourier_transform(v2, 0.0);
  if (std::abs(r.I) <= 1e-10 * std::max(1.0, v2.l1_norm()))
    throw PreconditionError("expansion_check: V^(-2k) vanishes at this k");
  // Second-order term at mu = 1: b_2 = 2i J / (2ik)^2.
  auto terms = series_terms(v2, k, 1.0, 2);
  r.J = terms[2](1) * (2.0 * kI * k) * (2.0 * kI * k) / (2.0 * kI);
  r.c0 = -2.0 * kI * k / r.I;
  r.c1 = r.vhat0 / r.I + 2.0 * kI * r.J / (r.I * r.I);
  double lo = INFINITY, hi = 0.0;
  for (double mu : mu_list) {
    auto fv = f2(scale(v2, mu), k);
    Complex mf = fv.pole ? Complex(INFINITY, 0.0) : mu * fv.value;
    double q = std::abs(mf - r.c0 - r.c1 * mu) / (mu * mu);
    r.mu.push_back(mu);
    r.mu_f2.push_back(mf);
    r.ratio.push_back(q);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  r.spread = mu_list.empty() ? 0.0 : (lo > 0.0 ? hi / lo : INFINITY);
  return r;
}

}  // namespace resonance
