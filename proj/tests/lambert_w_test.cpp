#include <doctest.h>

#include <cmath>
#include <numbers>

#include "resonance/errors.hpp"
#include "resonance/lambert_w.hpp"

using namespace resonance;
using C = std::complex<double>;

namespace {

struct Reference {
  int j;
  C z;
  C w;
};

// Values computed with mpmath.lambertw (50 digits) and rounded to double.
const Reference kReference[] = {
    {0, {1.0, 1.0}, {0.6569660692304364, 0.32545033941341506}},
    {0, {-1.0, 0.0}, {-0.31813150520476413, 1.3372357014306895}},
    {-1, {-1.0, 0.0}, {-0.31813150520476413, -1.3372357014306895}},
    {1, {-1.0, 0.0}, {-2.062277729598284, 7.588631178472513}},
    {2, {1000000.0, 0.0}, {11.035485287088454, 11.749639698072837}},
    {-3, {0.0, 1e-06}, {-16.930134125905017, -14.857453178558817}},
    {5, {-2.5, 0.0}, {-2.580504301820895, 32.908468394733035}},
    {-5, {-2.5, 0.001}, {-2.3691362353048935, -26.615156998546546}},
    {1, {0.0, 10.0}, {0.4509815045207101, 6.354042016501981}},
    {0, {-0.3, 0.0}, {-0.4894022271802149, 0.0}},
    {-1, {-0.3, 0.0}, {-1.7813370234216277, 0.0}},
    {1, {-0.3, 0.0}, {-3.3002378364383755, 7.436294411632747}},
    {3, {0.5, -0.5}, {-3.1562684014321327, 16.302116662238987}},
};

}  // namespace

TEST_CASE("Lambert W special values") {
  CHECK(lambert_w(0, 0.0) == C(0.0));
  CHECK(std::abs(lambert_w(0, std::numbers::e) - 1.0) < 1e-15);
  CHECK(lambert_w(0, C(-std::exp(-1.0), 0.0)) == C(-1.0));
  CHECK_THROWS_AS(lambert_w(1, 0.0), DomainError);
  CHECK_THROWS_AS(lambert_w(-1, C(-std::exp(-1.0), 0.0)), DomainError);
}

TEST_CASE("Lambert W against reference values") {
  for (const auto& r : kReference) {
    C w = lambert_w(r.j, r.z);
    CHECK_MESSAGE(std::abs(w - r.w) <= 1e-13 * (1.0 + std::abs(r.w)), "branch " << r.j << " z " << r.z);
  }
}

TEST_CASE("W_{-1}(-0.1) by real bisection") {
  // On the real axis W_{-1} maps (-1/e, 0) onto (-inf, -1), where w e^w is decreasing.
  double lo = -10.0, hi = -1.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid * std::exp(mid) > -0.1) lo = mid; else hi = mid;
  }
  C w = lambert_w(-1, -0.1);
  CHECK(std::abs(w.imag()) == 0.0);
  CHECK(w.real() <= -1.0);
  CHECK(std::abs(w.real() - 0.5 * (lo + hi)) < 1e-14);
}

TEST_CASE("negative zero imaginary part lands on the upper side of the cut") {
  C up = lambert_w(0, C(-2.0, 0.0));
  C down = lambert_w(0, C(-2.0, -0.0));
  CHECK(up == down);
  CHECK(up.imag() > 0.0);
  // Continuity from above: approach the cut with a small positive imaginary part.
  C near = lambert_w(0, C(-2.0, 1e-12));
  CHECK(std::abs(near - up) < 1e-11);
  C below = lambert_w(0, C(-2.0, -1e-12));
  CHECK(std::abs(below - std::conj(up)) < 1e-11);
}

TEST_CASE("Lambert W derivative") {
  CHECK(std::abs(lambert_w_derivative(0, std::numbers::e) - 1.0 / (2.0 * std::numbers::e)) < 1e-15);
  C z(1.0, 1.0);
  double h = 1e-6;
  C fd = (lambert_w(0, z + h) - lambert_w(0, z - h)) / (2.0 * h);
  C d = lambert_w_derivative(0, z);
  CHECK(std::abs(fd - d) <= 1e-5 * std::abs(d));
  C z10(0.0, 10.0);
  C w = lambert_w(1, z10);
  C dw = lambert_w_derivative(1, z10);
  CHECK(std::abs(dw * (1.0 + w) * z10 - w) <= 1e-12 * std::abs(w));
  CHECK_THROWS_AS(lambert_w_derivative(0, 0.0), DomainError);
  CHECK_THROWS_AS(lambert_w_derivative(0, C(-std::exp(-1.0), 0.0)), DomainError);
}

TEST_CASE("round trip and the logarithmic lower bound on rings") {
  double worst = 0.0;
  int lb_violations = 0;
  for (int j = -5; j <= 5; ++j) {
    for (int e = -6; e <= 6; ++e) {
      double r = std::pow(10.0, e);
      for (int a = 0; a < 64; ++a) {
        C z = std::polar(r, -std::numbers::pi + 2.0 * std::numbers::pi * (a + 0.5) / 64.0);
        C w = lambert_w(j, z);
        worst = std::max(worst, std::abs(w * std::exp(w) - z) / std::abs(z));
        if (r > 1.0 && std::abs(w) < 0.5 * std::log(r)) ++lb_violations;
      }
    }
  }
  CHECK(worst <= 1e-12);
  CHECK(lb_violations == 0);
}

TEST_CASE("branches are continuous along circles away from the cut") {
  for (int j = -3; j <= 3; ++j) {
    for (double r : {0.05, 0.5, 3.0, 200.0}) {
      C prev = lambert_w(j, std::polar(r, -std::numbers::pi + 1e-3));
      double worst = 0.0;
      const int n = 4000;
      for (int i = 1; i <= n; ++i) {
        double t = -std::numbers::pi + 1e-3 + (2.0 * std::numbers::pi - 2e-3) * i / n;
        C w = lambert_w(j, std::polar(r, t));
        worst = std::max(worst, std::abs(w - prev));
        prev = w;
      }
      CHECK_MESSAGE(worst < 0.05, "branch " << j << " radius " << r);
    }
  }
}

TEST_CASE("principal branch near zero: |W0(z) - z| <= C |z|^2") {
  double c = 0.0;
  for (int e = 0; e < 40; ++e) {
    double r = 0.1 * std::pow(0.7, e);
    for (int a = 0; a < 64; ++a) {
      C z = std::polar(r * 0.999, 2.0 * std::numbers::pi * a / 64.0);
      c = std::max(c, std::abs(lambert_w(0, z) - z) / std::norm(z));
    }
  }
  MESSAGE("fitted constant C for |W0(z) - z| <= C|z|^2 on |z| < 0.1: " << c);
  CHECK(c < 1.5);
  CHECK(c > 1.0);
}
