#include "resonance/scattering.hpp"

#include <algorithm>
#include <cmath>

#include "resonance/errors.hpp"

namespace resonance {

namespace {

constexpr Complex kI(0.0, 1.0);

// C = cos(sqrt(s) d), S = sin(sqrt(s) d)/sqrt(s) and their s-derivatives.
// Both are entire in s, so the branch of sqrt never matters.
template <typename Scalar>
struct CosSin {
  Scalar c, s, dc, ds;
};

template <typename Scalar>
CosSin<Scalar> cos_sin(Scalar s, double d) {
  using std::abs;
  CosSin<Scalar> r;
  if (abs(s) * d * d < 1.0) {
    // Power series in u = -s d^2; a_n = u^{n-1}/(2n)!, b_n = d u^{n-1}/(2n+1)!.
    Scalar u = -s * d * d;
    r.c = Scalar(1);
    r.s = Scalar(d);
    r.dc = Scalar(0);
    r.ds = Scalar(0);
    Scalar an(0.5), bn(d / 6.0);
    for (int n = 1; n < 25; ++n) {
      r.c += an * u;
      r.s += bn * u;
      r.dc -= double(n) * d * d * an;
      r.ds -= double(n) * d * d * bn;
      an *= u / double((2 * n + 1) * (2 * n + 2));
      bn *= u / double((2 * n + 2) * (2 * n + 3));
    }
    return r;
  }
  using std::cos;
  using std::sin;
  using std::sqrt;
  Scalar kappa = sqrt(s);
  r.c = cos(kappa * d);
  r.s = sin(kappa * d) / kappa;
  r.dc = -0.5 * d * r.s;
  r.ds = (d * r.c - r.s) / (2.0 * s);
  return r;
}

}  // namespace

template <typename Scalar>
Mat2<Scalar> segment_matrix(Scalar k, double v, double d) {
  auto cs = cos_sin<Scalar>(k * k - v, d);
  Scalar s = k * k - v;
  Mat2<Scalar> m;
  m << cs.c, cs.s, -s * cs.s, cs.c;
  return m;
}

template <typename Scalar>
MatJet<Scalar> segment_matrix_jet(Scalar k, double v, double d) {
  Scalar s = k * k - v;
  auto cs = cos_sin<Scalar>(s, d);
  MatJet<Scalar> j;
  j.value << cs.c, cs.s, -s * cs.s, cs.c;
  Scalar ds_dk = 2.0 * k;
  j.dk << cs.dc * ds_dk, cs.ds * ds_dk, (-cs.s - s * cs.ds) * ds_dk, cs.dc * ds_dk;
  return j;
}

template Mat2<Complex> segment_matrix<Complex>(Complex, double, double);
template MatJet<Complex> segment_matrix_jet<Complex>(Complex, double, double);

namespace {

// Walks (psi, psi') and optionally its k-derivative between two points of the line.
// With sigma = +1 or -1 the state is (psi, psi' + sigma i k psi) instead of (psi, psi').
// The second component then changes only where V != 0, with no cancellation.
struct Walker {
  const Potential& v;
  Complex k;
  bool with_jet;
  Vec2c y;
  Vec2c dy;
  double x;
  Side side;
  int sigma = 0;

  const Delta* delta_at(double pos) const {
    const auto& ds = v.deltas();
    auto it = std::lower_bound(ds.begin(), ds.end(), pos, [](const Delta& d, double p) { return d.x < p; });
    return (it != ds.end() && it->x == pos) ? &*it : nullptr;
  }

  double value_on(double lo, double hi) const {
    const auto& ps = v.pieces();
    double mid = 0.5 * (lo + hi);
    auto it = std::upper_bound(ps.begin(), ps.end(), mid, [](double p, const Piece& pc) { return p < pc.lo; });
    if (it == ps.begin()) return 0.0;
    --it;
    return (mid < it->hi) ? it->value : 0.0;
  }

  void apply_delta(double alpha) {
    Mat2c m = delta_matrix<Complex>(alpha);
    y = m * y;
    if (with_jet) dy = m * dy;
  }

  void apply_segment(double value, double width) {
    if (sigma != 0) {
      apply_shifted_segment(value, width);
      return;
    }
    if (with_jet) {
      auto j = segment_matrix_jet<Complex>(k, value, width);
      dy = j.dk * y + j.value * dy;
      y = j.value * y;
    } else {
      y = segment_matrix<Complex>(k, value, width) * y;
    }
  }

  // [[C - s ik S, S], [v S, C + s ik S]] in the shifted basis, s = sigma.
  void apply_shifted_segment(double value, double width) {
    auto cs = cos_sin<Complex>(k * k - value, width);
    Complex sik = double(sigma) * kI * k;
    Mat2c m;
    m << cs.c - sik * cs.s, cs.s, value * cs.s, cs.c + sik * cs.s;
    if (with_jet) {
      Complex dc = 2.0 * k * cs.dc, ds = 2.0 * k * cs.ds;
      Complex si = double(sigma) * kI;
      Mat2c dm;
      dm << dc - si * cs.s - sik * ds, ds, value * ds, dc + si * cs.s + sik * ds;
      dy = dm * y + m * dy;
    }
    y = m * y;
  }

  // Cut points strictly between a and b.
  std::vector<double> cuts_between(double a, double b) const {
    std::vector<double> out;
    for (const auto& p : v.pieces()) {
      if (p.lo > a && p.lo < b) out.push_back(p.lo);
    }
    if (!v.pieces().empty()) {
      double last = v.pieces().back().hi;
      if (last > a && last < b) out.push_back(last);
    }
    for (const auto& d : v.deltas())
      if (d.x > a && d.x < b) out.push_back(d.x);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void move_to(double target, Side target_side) {
    if (target > x || (target == x && side == Side::left && target_side == Side::right)) {
      if (side == Side::left) {
        if (auto* d = delta_at(x)) apply_delta(d->alpha);
        side = Side::right;
        if (target == x) return;
      }
      auto cuts = cuts_between(x, target);
      cuts.push_back(target);
      for (double c : cuts) {
        if (c > x) apply_segment(value_on(x, c), c - x);
        x = c;
        if (c != target) {
          if (auto* d = delta_at(c)) apply_delta(d->alpha);
        }
      }
      side = Side::left;
      if (target_side == Side::right) {
        if (auto* d = delta_at(x)) apply_delta(d->alpha);
        side = Side::right;
      }
    } else if (target < x || (target == x && side == Side::right && target_side == Side::left)) {
      if (side == Side::right) {
        if (auto* d = delta_at(x)) apply_delta(-d->alpha);
        side = Side::left;
        if (target == x) return;
      }
      auto cuts = cuts_between(target, x);
      std::reverse(cuts.begin(), cuts.end());
      cuts.push_back(target);
      for (double c : cuts) {
        if (c < x) apply_segment(value_on(c, x), c - x);
        x = c;
        if (c != target) {
          if (auto* d = delta_at(c)) apply_delta(-d->alpha);
        }
      }
      side = Side::right;
      if (target_side == Side::left) {
        if (auto* d = delta_at(x)) apply_delta(-d->alpha);
        side = Side::left;
      }
    }
  }
};

double left_edge(const Potential& v) {
  auto s = v.support();
  return s ? s->first : 0.0;
}

double right_edge(const Potential& v) {
  auto s = v.support();
  return s ? s->second : 0.0;
}

Walker start_left(const Potential& v, Complex k, bool jet) {
  double a = left_edge(v);
  Complex e = std::exp(-kI * k * a);
  Walker w{v, k, jet, Vec2c(e, -kI * k * e), Vec2c::Zero(), a, Side::left};
  if (jet) w.dy = Vec2c(-kI * a * e, -kI * e - kI * k * (-kI * a) * e);
  return w;
}

Walker start_right(const Potential& v, Complex k, bool jet) {
  double b = right_edge(v);
  Complex e = std::exp(kI * k * b);
  Walker w{v, k, jet, Vec2c(e, kI * k * e), Vec2c::Zero(), b, Side::right};
  if (jet) w.dy = Vec2c(kI * b * e, kI * e + kI * k * (kI * b) * e);
  return w;
}

// psi_1 with second component D1 = psi' + ik psi, which is 0 left of the support.
Walker start_left_shifted(const Potential& v, Complex k) {
  double a = left_edge(v);
  Complex e = std::exp(-kI * k * a);
  Walker w{v, k, true, Vec2c(e, 0.0), Vec2c(-kI * a * e, 0.0), a, Side::left, 1};
  return w;
}

// psi_2 with second component D2 = psi' - ik psi, which is 0 right of the support.
Walker start_right_shifted(const Potential& v, Complex k) {
  double b = right_edge(v);
  Complex e = std::exp(kI * k * b);
  Walker w{v, k, true, Vec2c(e, 0.0), Vec2c(kI * b * e, 0.0), b, Side::right, -1};
  return w;
}

JostFrame frame_of(const Walker& w) { return {w.y(0), w.y(1), w.x, w.side}; }
JostJet jet_of(const Walker& w) { return {frame_of(w), w.dy(0), w.dy(1)}; }

}  // namespace

JostFrame jost_left(const Potential& v, Complex k) {
  return jost_left(v, k, right_edge(v), Side::right);
}

JostFrame jost_left(const Potential& v, Complex k, double x, Side side) {
  auto w = start_left(v, k, false);
  w.move_to(x, side);
  return frame_of(w);
}

JostJet jost_left_jet(const Potential& v, Complex k, double x, Side side) {
  auto w = start_left(v, k, true);
  w.move_to(x, side);
  return jet_of(w);
}

JostFrame jost_right(const Potential& v, Complex k) {
  return jost_right(v, k, left_edge(v), Side::left);
}

JostFrame jost_right(const Potential& v, Complex k, double x, Side side) {
  auto w = start_right(v, k, false);
  w.move_to(x, side);
  return frame_of(w);
}

JostJet jost_right_jet(const Potential& v, Complex k, double x, Side side) {
  auto w = start_right(v, k, true);
  w.move_to(x, side);
  return jet_of(w);
}

Mat2c transfer_matrix(const Potential& v, Complex k) {
  Mat2c m = Mat2c::Identity();
  for (int col = 0; col < 2; ++col) {
    Walker w{v, k, false, Vec2c::Unit(col), Vec2c::Zero(), left_edge(v), Side::left};
    w.move_to(right_edge(v), Side::right);
    m.col(col) = w.y;
  }
  return m;
}

Complex wronskian_at(const Potential& v, Complex k, double x) {
  auto p1 = jost_left(v, k, x, Side::right);
  auto p2 = jost_right(v, k, x, Side::right);
  return p1.dpsi * p2.psi - p1.psi * p2.dpsi;
}

Complex wronskian(const Potential& v, Complex k) {
  return wronskian_at(v, k, 0.5 * (left_edge(v) + right_edge(v)));
}

std::pair<Complex, Complex> wronskian_jet(const Potential& v, Complex k) {
  double mid = 0.5 * (left_edge(v) + right_edge(v));
  auto a = jost_left_jet(v, k, mid, Side::right);
  auto b = jost_right_jet(v, k, mid, Side::right);
  Complex w = a.frame.dpsi * b.frame.psi - a.frame.psi * b.frame.dpsi;
  Complex dw = a.dpsi_k * b.frame.psi + a.frame.dpsi * b.psi_k - a.psi_k * b.frame.dpsi -
               a.frame.psi * b.dpsi_k;
  return {w, dw};
}

MobiusData left_factor_data(const Potential& v1, Complex k) {
  if (auto s = v1.support(); s && s->second > 0.0)
    throw PreconditionError("f1 needs supp V1 inside (-inf, 0]");
  auto w = start_left_shifted(v1, k);
  w.move_to(0.0, Side::right);
  Complex p = w.y(0), dp = w.dy(0);
  MobiusData m;
  m.den = w.y(1);
  m.den_k = w.dy(1);
  m.num = m.den - 2.0 * kI * k * p;
  m.num_k = m.den_k - 2.0 * kI * p - 2.0 * kI * k * dp;
  return m;
}

MobiusData right_factor_data(const Potential& v2, Complex k) {
  if (auto s = v2.support(); s && s->first < 0.0)
    throw PreconditionError("f2 needs supp V2 inside [0, inf)");
  auto w = start_right_shifted(v2, k);
  w.move_to(0.0, Side::left);
  Complex p = w.y(0), dp = w.dy(0);
  MobiusData m;
  m.den = w.y(1);
  m.den_k = w.dy(1);
  m.num = m.den + 2.0 * kI * k * p;
  m.num_k = m.den_k + 2.0 * kI * p + 2.0 * kI * k * dp;
  return m;
}

namespace {

FactorValue mobius_value(Complex num, Complex den, double scale) {
  FactorValue out;
  out.den_residual = std::abs(den);
  if (out.den_residual <= 1e-13 * scale) {
    out.pole = true;
    out.value = Complex(INFINITY, 0.0);
  } else {
    out.value = num / den;
  }
  return out;
}

double frame_scale(const Potential& v, Complex k, bool left) {
  auto fr = left ? jost_left(v, k, 0.0, Side::right) : jost_right(v, k, 0.0, Side::left);
  return std::abs(k) * std::abs(fr.psi) + std::abs(fr.dpsi);
}

}  // namespace

FactorValue f1(const Potential& v1, Complex k) {
  auto m = left_factor_data(v1, k);
  return mobius_value(m.num, m.den, frame_scale(v1, k, true));
}

FactorValue f2(const Potential& v2, Complex k) {
  auto m = right_factor_data(v2, k);
  return mobius_value(m.num, m.den, frame_scale(v2, k, false));
}

FactorValue f(const Potential& v1, const Potential& v2, Complex k) {
  auto a = f1(v1, k);
  auto b = f2(v2, k);
  FactorValue out;
  out.den_residual = a.den_residual * b.den_residual;
  if (a.pole || b.pole) {
    out.pole = true;
    out.value = Complex(INFINITY, 0.0);
  } else {
    out.value = a.value * b.value;
  }
  return out;
}

std::pair<Complex, Complex> composite_residual(const Potential& v1, const Potential& v2, double L,
                                               Complex k) {
  auto a = left_factor_data(v1, k);
  auto b = right_factor_data(v2, k);
  Complex e = std::exp(-2.0 * kI * k * L);
  Complex nn = a.num * b.num, dd = a.den * b.den;
  Complex value = e * nn - dd;
  Complex deriv = e * (-2.0 * kI * L * nn + a.num_k * b.num + a.num * b.num_k) -
                  (a.den_k * b.den + a.den * b.den_k);
  return {value, deriv};
}

}  // namespace resonance
