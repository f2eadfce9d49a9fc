#include "resonance/lavine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "resonance/errors.hpp"
#include "resonance/quadrature.hpp"
#include "resonance/root_finder.hpp"
#include "resonance/scattering.hpp"

namespace resonance {

namespace {

const Complex kI(0.0, 1.0);
constexpr double kWronskianFloor = 1e-12;
constexpr int kNodes = 32;

// (e^z - 1) / z given ez = e^z.
Complex exprel(Complex z, Complex ez) {
  if (std::abs(z) >= 0.5) return (ez - 1.0) / z;
  Complex term = 1.0, sum = 1.0;
  for (int n = 1; n < 20; ++n) {
    term *= z / double(n + 1);
    sum += term;
  }
  return sum;
}

// Divided difference of exp at a, b.
Complex dd_exp(Complex a, Complex ea, Complex b, Complex eb) { return ea * exprel(b - a, eb / ea); }

// Divided difference of exp at 0, z1, z2. The outer division always uses the widest pair.
Complex dd_exp3(Complex z1, Complex e1, Complex z2, Complex e2) {
  double d1 = std::abs(z1), d2 = std::abs(z2), d12 = std::abs(z2 - z1);
  double m = std::max({d1, d2, d12});
  if (m < 0.5) {
    // sum over n >= 2 of h_{n-2}(z1, z2) / n!, h the complete homogeneous polynomial
    Complex h = 1.0, p2 = 1.0, sum = 0.5;
    double fact = 2.0;
    for (int n = 3; n < 24; ++n) {
      p2 *= z2;
      h = z1 * h + p2;
      fact *= n;
      sum += h / fact;
    }
    return sum;
  }
  if (m == d2) return (dd_exp(z1, e1, z2, e2) - exprel(z1, e1)) / z2;
  if (m == d1) return (dd_exp(z2, e2, z1, e1) - exprel(z2, e2)) / z1;
  return (exprel(z2, e2) - exprel(z1, e1)) / (z2 - z1);
}

struct Region {
  double lo, hi, v;
  double alpha_lo;  // delta at lo, crossed when entering from the previous region
};

double height_on(const Potential& v, double lo, double hi) {
  double mid = 0.5 * (lo + hi);
  for (const auto& p : v.pieces())
    if (p.lo <= mid && mid < p.hi) return p.value;
  return 0.0;
}

double delta_at(const Potential& v, double x) {
  double a = 0.0;
  for (const auto& d : v.deltas())
    if (d.x == x) a += d.alpha;
  return a;
}

std::vector<Region> regions_on(const Potential& v, double lo, double hi, const std::vector<double>& extra = {}) {
  std::vector<double> bps{lo, hi};
  for (const auto& p : v.pieces()) {
    bps.push_back(p.lo);
    bps.push_back(p.hi);
  }
  for (const auto& d : v.deltas()) bps.push_back(d.x);
  bps.insert(bps.end(), extra.begin(), extra.end());
  std::erase_if(bps, [&](double x) { return x < lo || x > hi; });
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  std::vector<Region> out;
  for (std::size_t i = 0; i + 1 < bps.size(); ++i)
    out.push_back({bps[i], bps[i + 1], height_on(v, bps[i], bps[i + 1]), i > 0 ? delta_at(v, bps[i]) : 0.0});
  return out;
}

// p e^{i kappa s} + q e^{-i kappa s}, s = x - region lo.
struct Wave {
  Complex kappa, p, q;
  Complex at(double s) const { return p * std::exp(kI * kappa * s) + q * std::exp(-kI * kappa * s); }
};

Complex local_kappa(Complex k, double v) {
  if (v == 0.0) return k;
  Complex kap = std::sqrt(k * k - v);
  // The basis degenerates at kappa = 0; the solution itself is continuous in kappa.
  if (std::abs(kap) < 1e-6) kap = 1e-6;
  return kap;
}

std::vector<Wave> propagate_right(const std::vector<Region>& regs, Complex k, Complex psi, Complex dpsi) {
  std::vector<Wave> out;
  for (std::size_t j = 0; j < regs.size(); ++j) {
    if (j > 0) dpsi += regs[j].alpha_lo * psi;
    Complex kap = local_kappa(k, regs[j].v);
    Complex d = dpsi / (kI * kap);
    Wave w{kap, 0.5 * (psi + d), 0.5 * (psi - d)};
    Complex e = std::exp(kI * kap * (regs[j].hi - regs[j].lo));
    psi = w.p * e + w.q / e;
    dpsi = kI * kap * (w.p * e - w.q / e);
    out.push_back(w);
  }
  return out;
}

// psi, dpsi are the left limits at the right end of the last region.
std::vector<Wave> propagate_left(const std::vector<Region>& regs, Complex k, Complex psi, Complex dpsi) {
  std::vector<Wave> out(regs.size());
  for (std::size_t j = regs.size(); j-- > 0;) {
    Complex kap = local_kappa(k, regs[j].v);
    Complex d = dpsi / (kI * kap);
    Complex e = std::exp(kI * kap * (regs[j].hi - regs[j].lo));
    Wave w{kap, 0.5 * (psi + d) / e, 0.5 * (psi - d) * e};
    psi = w.p + w.q;
    dpsi = kI * kap * (w.p - w.q);
    dpsi -= regs[j].alpha_lo * psi;
    out[j] = w;
  }
  return out;
}

// integral over [0, h] of |p e^{i kappa s} + q e^{-i kappa s}|^2.
double wave_norm_sq(const Complex& kappa, const Complex& p, const Complex& q, double h) {
  auto integral = [h](Complex z) { return h * exprel(z * h, std::exp(z * h)); };
  Complex m = kappa.imag();
  Complex s = std::norm(p) * integral(-2.0 * m) + std::norm(q) * integral(2.0 * m) +
              2.0 * (p * std::conj(q) * integral(2.0 * kI * kappa.real()));
  return s.real();
}

const ExpPiece& piece_at(const CompactState& phi, double x) {
  auto it = std::upper_bound(phi.pieces.begin(), phi.pieces.end(), x,
                             [](double v, const ExpPiece& p) { return v < p.lo; });
  if (it != phi.pieces.begin()) --it;
  return *it;
}

// Phase at most 10 per 32-point panel.
int panels_for(double width, double rate) { return std::max(4, int(std::ceil(rate * width / 10.0))); }

struct Term {
  Complex c, z, ez;  // c e^{z s / h}, ez = e^z
};

Term operator*(const Term& x, const Term& y) { return {x.c * y.c, x.z + y.z, x.ez * y.ez}; }

using Terms = std::array<Term, 4>;

Terms products(const std::array<Term, 2>& x, const std::array<Term, 2>& y) {
  return {x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1]};
}

Complex single_integral(const Terms& ts, double h) {
  Complex s = 0.0;
  for (const auto& t : ts) s += t.c * exprel(t.z, t.ez);
  return h * s;
}

// integral over 0 < u < s < h of outer(s) inner(u).
Complex lower_double(const Terms& outer, const Terms& inner, double h) {
  Complex s = 0.0;
  for (const auto& g : outer)
    for (const auto& b : inner) s += g.c * b.c * dd_exp3(g.z, g.ez, g.z + b.z, g.ez * b.ez);
  return h * h * s;
}

std::array<Term, 2> wave_terms(const Wave& w, double h) {
  Complex z = kI * w.kappa * h, e = std::exp(z);
  return {Term{w.p, z, e}, Term{w.q, -z, 1.0 / e}};
}

struct Setup {
  std::vector<Region> regs;
  std::vector<Wave> w1, w2;
  Complex W;
};

std::optional<Setup> setup(const Potential& v, const CompactState& phi, Complex k) {
  std::vector<double> extra;
  for (const auto& p : phi.pieces) extra.push_back(p.lo);
  Setup s;
  s.regs = regions_on(v, phi.lo, phi.hi, extra);
  auto l = jost_left(v, k, phi.lo, Side::right);
  auto r = jost_right(v, k, phi.hi, Side::left);
  s.w1 = propagate_right(s.regs, k, l.psi, l.dpsi);
  s.w2 = propagate_left(s.regs, k, r.psi, r.dpsi);
  const Wave &a = s.w1.front(), &b = s.w2.front();
  s.W = kI * a.kappa * ((a.p - a.q) * (b.p + b.q) - (a.p + a.q) * (b.p - b.q));
  if (std::abs(s.W) < kWronskianFloor) return std::nullopt;
  return s;
}

Complex form_closed(const Setup& st, const CompactState& phi) {
  std::size_t n = st.regs.size();
  std::vector<Complex> s_b1(n), s_b2(n), s_g1(n), s_g2(n), d1(n), d2(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& rg = st.regs[j];
    double h = rg.hi - rg.lo;
    const auto& pc = piece_at(phi, 0.5 * (rg.lo + rg.hi));
    Complex shift = std::exp(kI * pc.kappa * (rg.lo - pc.lo));
    Complex a = pc.a * shift, b = pc.b / shift;
    Complex z0 = kI * pc.kappa * h, f = std::exp(z0);
    std::array<Term, 2> ph{Term{a, z0, f}, Term{b, -z0, 1.0 / f}};
    std::array<Term, 2> phc{Term{std::conj(a), std::conj(z0), std::conj(f)},
                            Term{std::conj(b), -std::conj(z0), std::conj(1.0 / f)}};
    auto t1 = wave_terms(st.w1[j], h), t2 = wave_terms(st.w2[j], h);
    Terms b1 = products(t1, ph), b2 = products(t2, ph), g1 = products(phc, t2), g2 = products(phc, t1);
    s_b1[j] = single_integral(b1, h);
    s_b2[j] = single_integral(b2, h);
    s_g1[j] = single_integral(g1, h);
    s_g2[j] = single_integral(g2, h);
    d1[j] = lower_double(g1, b1, h);  // phi^ psi_2 (s) times psi_1 phi (u), u < s
    d2[j] = lower_double(b2, g2, h);  // psi_2 phi (u) times phi^ psi_1 (s), s < u
  }
  Complex total = 0.0, A = 0.0;
  std::vector<Complex> B(n + 1, 0.0);
  for (std::size_t j = n; j-- > 0;) B[j] = B[j + 1] + s_b2[j];
  for (std::size_t j = 0; j < n; ++j) {
    total += A * s_g1[j] + d1[j] + B[j + 1] * s_g2[j] + d2[j];
    A += s_b1[j];
  }
  return total / st.W;
}

Complex form_quadrature(const Setup& st, const CompactState& phi) {
  const auto& rule = gauss_legendre(kNodes);
  struct Panel {
    Eigen::VectorXcd psi1, psi2, ph;
    double half;
  };
  std::vector<Panel> panels;
  for (std::size_t j = 0; j < st.regs.size(); ++j) {
    const auto& rg = st.regs[j];
    double width = rg.hi - rg.lo;
    int np = panels_for(width, std::abs(st.w1[j].kappa) + phi.bandwidth);
    double h = width / np;
    for (int p = 0; p < np; ++p) {
      Panel pn{Eigen::VectorXcd(kNodes), Eigen::VectorXcd(kNodes), Eigen::VectorXcd(kNodes), 0.5 * h};
      for (int i = 0; i < kNodes; ++i) {
        double s = p * h + 0.5 * h * (rule.nodes(i) + 1.0);
        pn.psi1(i) = st.w1[j].at(s);
        pn.psi2(i) = st.w2[j].at(s);
        pn.ph(i) = phi(rg.lo + s);
      }
      panels.push_back(std::move(pn));
    }
  }
  Eigen::VectorXcd w = rule.weights.cast<Complex>();
  Eigen::MatrixXcd tail = rule.tail.cast<Complex>();
  std::size_t n = panels.size();
  std::vector<Complex> B(n + 1, 0.0);
  for (std::size_t p = n; p-- > 0;) B[p] = B[p + 1] + panels[p].half * w.dot(panels[p].psi2.cwiseProduct(panels[p].ph));
  Complex total = 0.0, A = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const auto& pn = panels[p];
    Eigen::VectorXcd f1 = pn.psi1.cwiseProduct(pn.ph), f2 = pn.psi2.cwiseProduct(pn.ph);
    Complex t1 = pn.half * w.dot(f1);
    Eigen::VectorXcd acc = ((A + t1) - (pn.half * (tail * f1)).array()).matrix();
    Eigen::VectorXcd bcc = (B[p + 1] + (pn.half * (tail * f2)).array()).matrix();
    Eigen::VectorXcd inner = pn.psi2.cwiseProduct(acc) + pn.psi1.cwiseProduct(bcc);
    // dot conjugates its first argument, which is exactly phi-bar here.
    total += pn.half * (pn.ph.cwiseProduct(w)).dot(inner);
    A += t1;
  }
  return total / st.W;
}

std::optional<Complex> form(const Potential& v, const CompactState& phi, Complex k) {
  auto st = setup(v, phi, k);
  if (!st) return std::nullopt;
  return phi.pieces.empty() ? form_quadrature(*st, phi) : form_closed(*st, phi);
}

bool has_negative_part(const Potential& v) {
  for (const auto& s : v.segments())
    if (s.value < 0.0) return true;
  for (const auto& d : v.deltas())
    if (d.alpha < 0.0) return true;
  return false;
}

// |<phi, e>|^2 for the normalized eigenfunction at k = i kappa.
double bound_state_mass(const Potential& v, const CompactState& phi, double kappa) {
  Complex k(0.0, kappa);
  auto sp = *v.support();
  double norm_sq = std::exp(2.0 * kappa * sp.first) / (2.0 * kappa);
  auto start = jost_left(v, k, sp.first, Side::right);
  if (sp.second > sp.first) {
    auto regs = regions_on(v, sp.first, sp.second);
    auto waves = propagate_right(regs, k, start.psi, start.dpsi);
    for (std::size_t j = 0; j < regs.size(); ++j)
      norm_sq += wave_norm_sq(waves[j].kappa, waves[j].p, waves[j].q, regs[j].hi - regs[j].lo);
  }
  norm_sq += std::norm(jost_left(v, k, sp.second, Side::right).psi) / (2.0 * kappa);

  const auto& rule = gauss_legendre(kNodes);
  auto regs = regions_on(v, phi.lo, phi.hi);
  auto l = jost_left(v, k, phi.lo, Side::right);
  auto waves = propagate_right(regs, k, l.psi, l.dpsi);
  Complex overlap = 0.0;
  for (std::size_t j = 0; j < regs.size(); ++j) {
    double width = regs[j].hi - regs[j].lo;
    int np = panels_for(width, kappa + phi.bandwidth);
    double h = width / np;
    for (int p = 0; p < np; ++p)
      for (int i = 0; i < kNodes; ++i) {
        double s = p * h + 0.5 * h * (rule.nodes(i) + 1.0);
        overlap += 0.5 * h * rule.weights(i) * std::conj(phi(regs[j].lo + s)) * waves[j].at(s);
      }
  }
  return std::norm(overlap) / norm_sq;
}

}  // namespace

Complex CompactState::operator()(double x) const {
  if (x < lo || x > hi) return 0.0;
  if (pieces.empty()) return fn ? fn(x) : Complex(0.0);
  const auto& p = piece_at(*this, x);
  return p.a * std::exp(kI * p.kappa * (x - p.lo)) + p.b * std::exp(-kI * p.kappa * (x - p.lo));
}

double CompactState::norm_squared() const {
  if (!pieces.empty()) {
    double s = 0.0;
    for (const auto& p : pieces) s += wave_norm_sq(p.kappa, p.a, p.b, p.hi - p.lo);
    return s;
  }
  if (!fn || hi <= lo) return 0.0;
  const auto& rule = gauss_legendre(kNodes);
  int np = std::max(8, panels_for(hi - lo, bandwidth));
  double h = (hi - lo) / np, s = 0.0;
  for (int p = 0; p < np; ++p)
    for (int i = 0; i < kNodes; ++i) s += 0.5 * h * rule.weights(i) * std::norm(fn(lo + p * h + 0.5 * h * (rule.nodes(i) + 1.0)));
  return s;
}

double CompactState::edge_weight() const {
  if (!pieces.empty()) {
    const auto& last = pieces.back();
    Complex e = std::exp(kI * last.kappa * (last.hi - last.lo));
    return std::norm(pieces.front().a + pieces.front().b) + std::norm(last.a * e + last.b / e);
  }
  return fn ? std::norm(fn(lo)) + std::norm(fn(hi)) : 0.0;
}

CompactState bump_state(double lo, double hi, double sigma0) {
  if (!(hi > lo)) throw PreconditionError("bump_state: empty interval");
  CompactState s;
  s.lo = lo;
  s.hi = hi;
  s.fn = [lo, hi, sigma0](double x) {
    double u = (2.0 * x - lo - hi) / (hi - lo);
    if (std::abs(u) >= 1.0) return Complex(0.0);
    return std::exp(-1.0 / (1.0 - u * u)) * std::exp(kI * sigma0 * x);
  };
  s.bandwidth = std::abs(sigma0) + 40.0 / (hi - lo);
  return s;
}

ResonantState outgoing_state(const Potential& v, Complex k0, double h) {
  if (v.empty()) throw PreconditionError("outgoing_state: the zero potential has no resonances");
  if (!(k0.real() > 0.0 && k0.imag() < 0.0))
    throw PreconditionError("outgoing_state: k0 must satisfy Re k0 > 0 > Im k0");
  double w = std::abs(wronskian(v, k0));
  if (!(w <= 1e-8)) throw PreconditionError("outgoing_state: k0 is not a resonance, |W(k0)| = " + std::to_string(w));
  auto sp = *v.support();
  ResonantState s;
  s.k0 = k0;
  s.r = std::max(std::abs(sp.first), std::abs(sp.second));
  if (!(s.r > 0.0)) throw PreconditionError("outgoing_state: support has zero half-width");
  double sigma = k0.real(), eps = -k0.imag();
  s.lambda0 = sigma * sigma - eps * eps;
  s.delta0 = 2.0 * eps * sigma;
  if (h <= 0.0) h = std::min(0.01, M_PI / (20.0 * sigma));
  int n = std::max(1, int(std::ceil(2.0 * s.r / h)));
  s.h = 2.0 * s.r / n;

  auto regs = regions_on(v, -s.r, s.r);
  auto end = jost_right(v, k0, s.r, Side::left);
  auto waves = propagate_left(regs, k0, end.psi, end.dpsi);
  s.phi.lo = -s.r;
  s.phi.hi = s.r;
  for (std::size_t j = 0; j < regs.size(); ++j)
    s.phi.pieces.push_back({regs[j].lo, regs[j].hi, waves[j].kappa, waves[j].p, waves[j].q});
  for (int i = 0; i <= n; ++i) s.samples.push_back(s.phi(i == n ? s.r : -s.r + i * s.h));
  double nsq = s.phi.norm_squared();
  s.norm = std::sqrt(nsq);
  s.boundary_residual = std::abs(s.phi.edge_weight() - 2.0 * eps * nsq) / (2.0 * eps * nsq);
  return s;
}

double lavine_constant(double sigma0, double eps0) {
  if (!(sigma0 > 0.0 && eps0 > 0.0)) throw PreconditionError("lavine_constant: sigma0 and eps0 must be positive");
  double q = sigma0 / (2.0 * eps0);
  return (std::log1p(q * q) / 5.0 + 1.0) * 6.0 * eps0 / sigma0;
}

double lorentz_tail(double lambda0, double delta0, double a, double b) {
  if (!(delta0 > 0.0)) throw PreconditionError("lorentz_tail: delta0 must be positive");
  return 1.0 - (std::atan((b - lambda0) / delta0) - std::atan((a - lambda0) / delta0)) / M_PI;
}

double lorentz_density(double lambda0, double delta0, double lambda) {
  double d = lambda - lambda0;
  return delta0 / (M_PI * (d * d + delta0 * delta0));
}

double SpectralMeasure::continuous_mass() const {
  double s = 0.0;
  for (std::size_t i = 1; i < lambda.size(); ++i) s += 0.5 * (lambda[i] - lambda[i - 1]) * (density[i] + density[i - 1]);
  return s;
}

double SpectralMeasure::total_mass() const {
  double s = continuous_mass() + tail_estimate;
  for (const auto& [l, m] : point_masses) s += m;
  return s;
}

double SpectralMeasure::min_density() const {
  return density.empty() ? 0.0 : *std::min_element(density.begin(), density.end());
}

Complex resolvent_form(const Potential& v, const CompactState& phi, Complex k) {
  auto r = form(v, phi, k);
  if (!r) throw DomainError("resolvent_form: W(k) vanishes");
  return *r;
}

std::optional<double> density_at(const Potential& v, const CompactState& phi, double lambda) {
  if (!(lambda >= 0.0)) throw PreconditionError("density_at: lambda must be >= 0");
  if (lambda == 0.0) {
    // Every ingredient is real at k = 0.
    if (std::abs(wronskian(v, 0.0)) < kWronskianFloor) return std::nullopt;
    return 0.0;
  }
  auto r = form(v, phi, std::sqrt(lambda));
  if (!r) return std::nullopt;
  return r->imag() / M_PI;
}

SpectralMeasure spectral_density(const Potential& v, const CompactState& phi, const std::vector<double>& grid) {
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (!(grid[i] >= 0.0) || (i > 0 && !(grid[i] > grid[i - 1])))
      throw PreconditionError("spectral_density: grid must be increasing in [0, inf)");
  SpectralMeasure m;
  m.lambda.reserve(grid.size());
  m.density.reserve(grid.size());
  for (double l : grid) {
    auto d = density_at(v, phi, l);
    if (!d) {
      m.skipped.push_back(l);
      continue;
    }
    m.lambda.push_back(l);
    m.density.push_back(*d);
  }
  if (!v.empty() && has_negative_part(v)) {
    double kmax = std::sqrt(v.sup_segment()) + v.l1_norm() + 1.0;
    for (Complex kb : find_bound_states(v, kmax))
      m.point_masses.push_back({-kb.imag() * kb.imag(), bound_state_mass(v, phi, kb.imag())});
  }
  if (!grid.empty() && grid.back() > 0.0) m.tail_estimate = phi.edge_weight() / (M_PI * std::sqrt(grid.back()));
  return m;
}

std::vector<double> uniform_grid(double lambda_max, double step) {
  if (!(lambda_max > 0.0 && step > 0.0)) throw PreconditionError("uniform_grid: lambda_max and step must be positive");
  int n = int(std::ceil(lambda_max / step));
  std::vector<double> g(n + 1);
  for (int i = 0; i <= n; ++i) g[i] = lambda_max * double(i) / n;
  return g;
}

double lambda_max_for(const Potential& v, const ResonantState& s) {
  double peak = density_at(v, s.phi, s.lambda0).value_or(0.0);
  double L = s.lambda0 + s.delta0;
  for (int it = 0; it < 60; ++it, L *= 2.0) {
    double upper = 0.5 - std::atan((L - s.lambda0) / s.delta0) / M_PI;
    if (upper >= 1e-5) continue;
    double dmax = 0.0;
    for (int i = 0; i < 8; ++i) dmax = std::max(dmax, std::abs(density_at(v, s.phi, L * (1.0 + i / 32.0)).value_or(0.0)));
    if (dmax < 1e-6 * peak) return L;
  }
  throw NumericalError("lambda_max_for: density does not decay");
}

Complex autocorrelation(const SpectralMeasure& m, double t) {
  double hmax = 0.0;
  for (std::size_t i = 1; i < m.lambda.size(); ++i) hmax = std::max(hmax, m.lambda[i] - m.lambda[i - 1]);
  if (hmax * std::abs(t) > 0.5 * (1.0 + 1e-12))
    throw PreconditionError("autocorrelation: grid too coarse for t = " + std::to_string(t) + ", need spacing <= " +
                            std::to_string(0.5 / std::abs(t)));
  Complex s = 0.0;
  for (const auto& [l, mass] : m.point_masses) s += mass * std::exp(-kI * t * l);
  // Linear interpolant times e^{-it lambda}, integrated exactly per interval.
  double h_cached = -1.0;
  Complex w0 = 0.0, w1 = 0.0, step = 1.0, phase = 1.0;
  for (std::size_t i = 1; i < m.lambda.size(); ++i) {
    double a = m.lambda[i - 1], h = m.lambda[i] - a;
    if (std::abs(h - h_cached) > 1e-9 * h || (i & 1023) == 1) {
      Complex z = -kI * t * h, ez = std::exp(z);
      Complex e1 = exprel(z, ez);
      if (std::abs(z) < 0.5) {
        w1 = 0.0;
        Complex term = 1.0;
        for (int n = 0; n < 20; ++n) {
          w1 += term / double(n + 2);
          term *= z / double(n + 1);
        }
      } else {
        w1 = (ez - e1) / z;
      }
      w0 = e1 - w1;
      h_cached = h;
      step = ez;
      phase = std::exp(-kI * t * a);
    }
    s += h * phase * (m.density[i - 1] * w0 + m.density[i] * w1);
    phase *= step;
  }
  return s;
}

DtnReport dtn_identity_check(const Potential& v, double r, Complex k) {
  if (!(r > 0.0)) throw PreconditionError("dtn_identity_check: r must be positive");
  auto sp = v.support();
  if (sp && (sp->first < -r || sp->second > r)) throw PreconditionError("dtn_identity_check: supp V exceeds [-r, r]");
  double lo = sp ? sp->first : 0.0, hi = sp ? sp->second : 0.0;
  Mat2c T = segment_matrix<Complex>(k, 0.0, r - hi) * transfer_matrix(v, k) * segment_matrix<Complex>(k, 0.0, lo + r);
  DtnReport rep;
  if (std::abs(T(0, 1)) < 1e-12 * T.norm()) {
    rep.dirichlet_hit = true;
    rep.deviation = NAN;
    return rep;
  }
  // psi(-r) = a, psi(r) = b fixes psi'(-r) = (b - T00 a) / T01.
  rep.dtn << T(0, 0) / T(0, 1), -1.0 / T(0, 1), -1.0 / T(0, 1), T(1, 1) / T(0, 1);
  rep.asymmetry = std::abs(rep.dtn(0, 1) - rep.dtn(1, 0));
  rep.inverse = (rep.dtn - kI * k * Eigen::Matrix2cd::Identity()).inverse();
  Complex W = wronskian(v, k);
  Complex p1m = jost_left(v, k, -r, Side::left).psi, p1p = jost_left(v, k, r, Side::right).psi;
  Complex p2m = jost_right(v, k, -r, Side::left).psi, p2p = jost_right(v, k, r, Side::right).psi;
  rep.green << p1m * p2m / W, p1m * p2p / W, p1m * p2p / W, p1p * p2p / W;
  rep.deviation = (rep.inverse - rep.green).cwiseAbs().maxCoeff();
  return rep;
}

namespace {

double integrate_abs_difference(const SpectralMeasure& m, double nsq, double l0, double d0, double a, double b) {
  auto diff = [&](std::size_t i) { return m.density[i] - nsq * lorentz_density(l0, d0, m.lambda[i]); };
  double s = 0.0;
  for (std::size_t i = 1; i < m.lambda.size(); ++i) {
    double x0 = m.lambda[i - 1], x1 = m.lambda[i];
    double lo = std::max(x0, a), hi = std::min(x1, b);
    if (hi <= lo) continue;
    double f0 = diff(i - 1), f1 = diff(i);
    auto interp = [&](double x) { return f0 + (f1 - f0) * (x - x0) / (x1 - x0); };
    s += 0.5 * (hi - lo) * (std::abs(interp(lo)) + std::abs(interp(hi)));
  }
  return s;
}

}  // namespace

LavineReport lavine_check(const Potential& v, const ResonantState& s, int t_nodes) {
  if (t_nodes < 2) throw PreconditionError("lavine_check: need at least two times");
  LavineReport rep;
  double sigma = s.sigma0(), eps = s.eps0();
  rep.C = lavine_constant(sigma, eps);
  rep.T = 3.0 / s.delta0;
  rep.support = {s.phi.lo, s.phi.hi};
  rep.lambda_max = lambda_max_for(v, s);
  auto m = spectral_density(v, s.phi, uniform_grid(rep.lambda_max, 0.45 / rep.T));
  double nsq = s.norm * s.norm;
  rep.mass_error = std::abs(m.total_mass() - nsq) / nsq;
  for (int i = 0; i < t_nodes; ++i) {
    double t = rep.T * i / (t_nodes - 1);
    Complex lor = std::exp(-kI * t * s.lambda0 - s.delta0 * t);
    rep.sup_deviation = std::max(rep.sup_deviation, std::abs(autocorrelation(m, t) / nsq - lor));
  }
  double a = 0.25 * sigma * sigma, b = 2.25 * sigma * sigma;
  rep.eps1 = integrate_abs_difference(m, nsq, s.lambda0, s.delta0, a, b) / nsq;
  rep.eps2 = lorentz_tail(s.lambda0, s.delta0, a, b);
  return rep;
}

bool PersistenceReport::nonincreasing() const {
  for (std::size_t i = 1; i < D.size(); ++i)
    if (D[i] > D[i - 1]) return false;
  return true;
}

PersistenceReport persistence_proxy(const Potential& v1, const Potential& v2, const CompactState& phi,
                                    const std::vector<double>& L_list, const std::vector<double>& t_grid,
                                    double step, double lambda_max) {
  double v2lo = v2.support() ? v2.support()->first : 0.0;
  for (std::size_t i = 0; i < L_list.size(); ++i) {
    if (i > 0 && !(L_list[i] > L_list[i - 1])) throw PreconditionError("persistence_proxy: L_list must increase");
    if (phi.hi > L_list[i] + v2lo) throw PreconditionError("persistence_proxy: phi must lie left of V2(. - L)");
  }
  auto grid = uniform_grid(lambda_max, step);
  auto m_inf = spectral_density(v1, phi, grid);
  std::vector<Complex> a_inf;
  for (double t : t_grid) a_inf.push_back(autocorrelation(m_inf, t));
  PersistenceReport rep;
  for (double L : L_list) {
    Potential vl = v2.l1_norm() == 0.0 ? v1 : combine(v1, translate(v2, L));
    auto m = spectral_density(vl, phi, grid);
    double d = 0.0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) d = std::max(d, std::abs(autocorrelation(m, t_grid[i]) - a_inf[i]));
    rep.L.push_back(L);
    rep.D.push_back(d);
  }
  return rep;
}

}  // namespace resonance
