#include <doctest.h>

#include <cmath>
#include <random>

#include "resonance/errors.hpp"
#include "resonance/scattering.hpp"

using namespace resonance;

namespace {

const Complex I(0.0, 1.0);

// Classical RK4 for psi'' = (v - k^2) psi, used as an independent oracle.
Vec2c rk4(Complex k, double v, double d, Vec2c y, int steps) {
  Complex q = v - k * k;
  auto rhs = [&](const Vec2c& s) { return Vec2c(s(1), q * s(0)); };
  double h = d / steps;
  for (int i = 0; i < steps; ++i) {
    Vec2c k1 = rhs(y), k2 = rhs(y + 0.5 * h * k1), k3 = rhs(y + 0.5 * h * k2), k4 = rhs(y + h * k3);
    y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

Complex boxed_f(Complex k) {
  Complex e = std::exp(2.0 * I * k);
  Complex num = -e + 1.0 - 4.0 * I * k - 4.0 * k * k;
  Complex den = -e + 1.0 + 2.0 * I * k * (-e - 1.0);
  return num * num / (den * den);
}

Potential paper_v1() { return Potential({}, {{-1.0, 1.0}, {0.0, 1.0}}); }
Potential paper_v2() { return Potential({}, {{0.0, 1.0}, {1.0, 1.0}}); }

}  // namespace

TEST_CASE("segment matrix: trivial widths and the free rotation") {
  CHECK((segment_matrix<Complex>({1.3, -0.2}, 0.7, 0.0) - Mat2c::Identity()).norm() < 1e-15);
  Mat2c m = segment_matrix<Complex>(1.0, 0.0, M_PI);
  CHECK(std::abs(m(0, 0) + 1.0) < 1e-15);
  CHECK(std::abs(m(0, 1)) < 1e-15);
  CHECK(std::abs(m(1, 0)) < 1e-15);
  CHECK(std::abs(m(1, 1) + 1.0) < 1e-15);
}

TEST_CASE("segment matrix under a barrier matches ODE integration") {
  // k = 1, v = 2: kappa = i, entries cosh, sinh.
  const double d = 0.9;
  Mat2c m = segment_matrix<Complex>(1.0, 2.0, d);
  CHECK(std::abs(m(0, 0) - std::cosh(d)) < 1e-14);
  CHECK(std::abs(m(0, 1) - std::sinh(d)) < 1e-14);
  CHECK(std::abs(m(1, 0) - std::sinh(d)) < 1e-14);
  CHECK(std::abs(m.determinant() - 1.0) < 1e-14);
  for (int col = 0; col < 2; ++col) {
    Vec2c y = rk4(1.0, 2.0, d, Vec2c::Unit(col), 4000);
    CHECK((m.col(col) - y).norm() < 1e-12);
  }
  // A complex k through both the series and the trigonometric paths.
  for (double width : {0.05, 2.5}) {
    Complex k(1.7, -0.4);
    Mat2c t = segment_matrix<Complex>(k, -1.3, width);
    for (int col = 0; col < 2; ++col)
      CHECK((t.col(col) - rk4(k, -1.3, width, Vec2c::Unit(col), 8000)).norm() < 1e-10);
  }
}

TEST_CASE("segment matrix is its own inverse under d -> -d and its jet is the k-derivative") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    Complex k(u(rng), u(rng) / 3.0);
    double v = u(rng) * 2.0, d = std::abs(u(rng));
    Mat2c m = segment_matrix<Complex>(k, v, d);
    CHECK(std::abs(m.determinant() - 1.0) < 1e-12 * m.squaredNorm());
    CHECK((m * segment_matrix<Complex>(k, v, -d) - Mat2c::Identity()).norm() < 1e-11 * m.squaredNorm());
    auto j = segment_matrix_jet<Complex>(k, v, d);
    double h = 1e-5;
    Mat2c fd = (segment_matrix<Complex>(k + h, v, d) - segment_matrix<Complex>(k - h, v, d)) / (2.0 * h);
    CHECK((j.dk - fd).norm() < 1e-7 * (1.0 + j.dk.norm()));
  }
  // Near kappa = 0 the series branch must agree with the closed form.
  Complex k0(std::sqrt(2.0) + 1e-9, 0.0);
  auto series = segment_matrix_jet<Complex>(k0, 2.0, 1.0);
  auto closed = segment_matrix_jet<Complex>(Complex(std::sqrt(2.0) + 0.5, 0.0), 2.0, 1.0);
  CHECK(std::abs(series.value(0, 1) - 1.0) < 1e-8);
  CHECK(std::abs(series.dk(0, 1) - 2.0 * k0 * (-1.0 / 6.0)) < 1e-8);
  CHECK(std::abs(closed.value.determinant() - 1.0) < 1e-13);
}

TEST_CASE("delta matrix") {
  CHECK(delta_matrix<Complex>(0.0) == Mat2c::Identity());
  Mat2c m = delta_matrix<Complex>(1.0);
  CHECK(m(1, 0) == Complex(1.0));
  CHECK(m.determinant() == Complex(1.0));
  CHECK(delta_matrix<Complex>(2.5) * delta_matrix<Complex>(-2.5) == Mat2c::Identity());
}

TEST_CASE("Jost solutions") {
  Complex k(1.1, -0.3);
  Potential zero;
  auto fr = jost_left(zero, k, 2.0, Side::right);
  CHECK(std::abs(fr.psi - std::exp(-I * k * 2.0)) < 1e-14);
  CHECK(std::abs(fr.dpsi + I * k * std::exp(-I * k * 2.0)) < 1e-13);

  const double alpha = 1.7;
  Potential d({}, std::vector<Delta>{{0.0, alpha}});
  auto at0 = jost_left(d, k, 0.0, Side::right);
  CHECK(std::abs(at0.psi - 1.0) < 1e-15);
  CHECK(std::abs(at0.dpsi - (-I * k + alpha)) < 1e-15);
  auto before = jost_left(d, k, 0.0, Side::left);
  CHECK(std::abs(before.dpsi - (-I * k)) < 1e-15);

  // Matrix product oracle: delta(1) segment(3,0,1) delta(1) applied to (e^{3i}, -3i e^{3i}).
  Complex k3(3.0, 0.0);
  Complex e = std::exp(3.0 * I);
  Vec2c start(e, -3.0 * I * e);
  Mat2c D;
  D << 1.0, 0.0, 1.0, 1.0;
  Mat2c S;
  S << std::cos(3.0), std::sin(3.0) / 3.0, -3.0 * std::sin(3.0), std::cos(3.0);
  Vec2c expect = D * S * D * start;
  auto end = jost_left(paper_v1(), k3);
  CHECK(end.x == 0.0);
  CHECK(end.side == Side::right);
  CHECK(std::abs(end.psi - expect(0)) < 1e-14);
  CHECK(std::abs(end.dpsi - expect(1)) < 1e-13);

  // psi_2 is e^{ikx} right of the support and the right-going frame is its left-edge value.
  auto r = jost_right(paper_v2(), k, 1.0, Side::right);
  CHECK(std::abs(r.psi - std::exp(I * k)) < 1e-14);
  auto left_edge = jost_right(paper_v2(), k);
  CHECK(left_edge.x == 0.0);
  CHECK(left_edge.side == Side::left);
}

TEST_CASE("Jost jets are k-derivatives") {
  Potential v({{-0.8, -0.3, 2.0}, {0.1, 0.6, -1.0}}, {{-1.0, 0.7}, {0.0, 1.3}, {0.9, -0.4}});
  Complex k(1.4, -0.6);
  double h = 1e-6;
  for (double x : {-1.2, -0.5, 0.0, 0.4, 1.5}) {
    auto j = jost_left_jet(v, k, x, Side::right);
    auto p = jost_left(v, k + h, x, Side::right), m = jost_left(v, k - h, x, Side::right);
    CHECK(std::abs(j.psi_k - (p.psi - m.psi) / (2.0 * h)) < 1e-7);
    CHECK(std::abs(j.dpsi_k - (p.dpsi - m.dpsi) / (2.0 * h)) < 1e-7);
    auto r = jost_right_jet(v, k, x, Side::left);
    auto rp = jost_right(v, k + h, x, Side::left), rm = jost_right(v, k - h, x, Side::left);
    CHECK(std::abs(r.psi_k - (rp.psi - rm.psi) / (2.0 * h)) < 1e-7);
    CHECK(std::abs(r.dpsi_k - (rp.dpsi - rm.dpsi) / (2.0 * h)) < 1e-7);
  }
}

TEST_CASE("Wronskian closed forms") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 20; ++i) {
    Complex k(u(rng), u(rng));
    CHECK(std::abs(wronskian(Potential(), k) - (-2.0 * I * k)) < 1e-13 * (1.0 + std::abs(k)));
    const double alpha = 0.8;
    CHECK(std::abs(wronskian(Potential({}, std::vector<Delta>{{0.0, alpha}}), k) - (alpha - 2.0 * I * k)) < 1e-12);
  }
  // Two deltas of strength alpha at distance L.
  const double alpha = 1.0, L = 7.0;
  Potential pair({}, {{0.0, alpha}, {L, alpha}});
  CHECK(std::abs(wronskian(pair, 0.0) - (L * alpha * alpha + 2.0 * alpha)) < 1e-12);
  Complex k(0.37, -0.21);
  Complex closed = 2.0 * (alpha - I * k) + I * alpha * alpha * (1.0 - std::exp(2.0 * I * k * L)) / (2.0 * k);
  CHECK(std::abs(wronskian(pair, k) - closed) < 1e-12 * std::abs(closed));
}

TEST_CASE("Wronskian does not depend on the evaluation point") {
  Potential v({{-0.8, -0.3, 2.0}, {0.1, 0.6, -1.0}}, {{-1.0, 0.7}, {0.0, 1.3}, {0.9, -0.4}});
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 20; ++i) {
    Complex k(u(rng) * 2.0, u(rng) / 2.0);
    Complex ref = wronskian(v, k);
    for (double x : {-1.5, -0.9, -0.1, 0.35, 1.2})
      CHECK(std::abs(wronskian_at(v, k, x) - ref) <= 1e-10 * std::abs(ref));
    auto [w, dw] = wronskian_jet(v, k);
    double h = 1e-6;
    Complex fd = (wronskian(v, k + h) - wronskian(v, k - h)) / (2.0 * h);
    CHECK(std::abs(w - ref) <= 1e-13 * std::abs(ref));
    CHECK(std::abs(dw - fd) <= 1e-6 * (1.0 + std::abs(dw)));
  }
}

TEST_CASE("transfer matrices have unit determinant") {
  Potential v({{-0.8, -0.3, 2.0}, {0.1, 0.6, -1.0}}, {{-1.0, 0.7}, {0.0, 1.3}, {0.9, -0.4}});
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    Complex k(u(rng), u(rng) / 3.0);
    Mat2c t = transfer_matrix(v, k);
    CHECK(std::abs(t.determinant() - 1.0) <= 1e-12 * t.squaredNorm());
  }
}

TEST_CASE("f1 and f2 for a single delta") {
  const double alpha = 1.3;
  Potential d({}, std::vector<Delta>{{0.0, alpha}});
  for (Complex k : {Complex(0.5, 0.0), Complex(2.0, -0.7), Complex(-1.0, 0.3)}) {
    Complex expect = (alpha - 2.0 * I * k) / alpha;
    CHECK(std::abs(f1(d, k).value - expect) < 1e-13);
    CHECK(std::abs(f2(d, k).value - expect) < 1e-13);
  }
  auto pole = f1(Potential(), Complex(1.0, -0.5));
  CHECK(pole.pole);
  CHECK(pole.den_residual == 0.0);
  CHECK(f2(Potential(), 2.0).pole);
  CHECK_THROWS_AS(f1(Potential({}, std::vector<Delta>{{0.5, 1.0}}), 1.0), PreconditionError);
  CHECK_THROWS_AS(f2(Potential({}, std::vector<Delta>{{-0.5, 1.0}}), 1.0), PreconditionError);
}

TEST_CASE("f on the delta pair equals its closed form") {
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) {
      Complex k(6.0 * i / 49.0, -1.0 * j / 49.0);
      auto v = f(paper_v1(), paper_v2(), k);
      if (v.pole) continue;
      Complex ref = boxed_f(k);
      worst = std::max(worst, std::abs(v.value - ref) / std::max(1.0, std::abs(ref)));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("|f| > 1 on the real axis and conjugate symmetry") {
  Potential v1({{-1.5, -0.7, 0.9}}, {{-1.0, 1.0}, {0.0, 0.6}});
  Potential v2({{0.2, 0.9, -0.5}}, {{0.0, 1.0}, {1.0, 2.0}});
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    double k = u(rng);
    if (std::abs(k) < 1e-3) continue;
    auto v = f(v1, v2, k);
    if (v.pole) continue;
    CHECK(std::abs(v.value) > 1.0);
    ++checked;
  }
  CHECK(checked > 190);
  for (int i = 0; i < 100; ++i) {
    Complex k(u(rng) / 2.0, u(rng) / 10.0);
    auto a = f(v1, v2, k), b = f(v1, v2, -std::conj(k));
    if (a.pole || b.pole) continue;
    CHECK(std::abs(std::conj(a.value) - b.value) <= 1e-10 * std::abs(b.value));
  }
}

TEST_CASE("zeros of f1 are resonances of V1 alone") {
  const double alpha = 1.0;
  Potential d({}, std::vector<Delta>{{0.0, alpha}});
  Complex k0(0.0, -alpha / 2.0);
  CHECK(std::abs(wronskian(d, k0)) < 1e-15);
  CHECK(std::abs(f1(d, k0).value) < 1e-15);
}

TEST_CASE("composite residual is the rescaled composite Wronskian") {
  Potential v1({{-0.6, -0.2, 1.5}}, {{-1.0, 1.0}, {0.0, 1.0}});
  Potential v2({}, {{0.0, 1.0}, {1.0, 2.0}});
  for (double L : {3.0, 7.5})
    for (Complex k : {Complex(1.3, -0.2), Complex(0.4, 0.1), Complex(3.0, -0.05)}) {
      auto whole = combine(v1, translate(v2, L));
      Complex w = wronskian(whole, k);
      auto [r, dr] = composite_residual(v1, v2, L, k);
      CHECK(std::abs(w - std::exp(2.0 * I * k * L) * r / (2.0 * I * k)) <= 1e-11 * std::abs(w));
      double h = 1e-6;
      Complex fd = (composite_residual(v1, v2, L, k + h).first - composite_residual(v1, v2, L, k - h).first) /
                   (2.0 * h);
      CHECK(std::abs(dr - fd) <= 1e-6 * (1.0 + std::abs(dr)));
    }
}
