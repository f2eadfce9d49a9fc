#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "resonance/asymptotics.hpp"
#include "resonance/errors.hpp"
#include "resonance/lambert_w.hpp"
#include "resonance/scattering.hpp"

using namespace resonance;

namespace {

const Complex I(0.0, 1.0);
const Complex kDoublePole(4.81584231784594, 0.0);

Potential pair_v1() { return Potential({}, {{-1.0, 1.0}, {0.0, 1.0}}); }
Potential pair_v2() { return Potential({}, {{0.0, 1.0}, {1.0, 1.0}}); }
// Unequal strengths push the reflectionless points of V2 off the real axis.
Potential lopsided_v2() { return Potential({}, {{0.0, 1.0}, {1.0, 0.5}}); }

Complex closed_form_f(Complex k) {
  Complex e = std::exp(2.0 * I * k);
  Complex n = -e + 1.0 - 4.0 * I * k - 4.0 * k * k;
  Complex d = -e + 1.0 + 2.0 * I * k * (-e - 1.0);
  return n * n / (d * d);
}

// Roots at L = 30 inside B(k0, 0.3) around the double pole, from an independent
// 40-digit solve of the closed-form equation e^{2ikL} = f(k).
const Complex kDoublePoleRootsL30[] = {
    {4.604090006656903, -0.09546443706504695}, {4.695225162856943, -0.10758668918469926},
    {4.778910423319286, -0.11696760521449667}, {4.858771490880099, -0.11701633045131997},
    {4.9432940209847684, -0.1082438791478428}, {5.035228616980455, -0.09743841448923571},
};

ResonanceSet as_set(const std::vector<ApproxResonance>& a) {
  ResonanceSet s;
  for (const auto& r : a) s.roots.push_back({r.k, 1, 0.0});
  return s;
}

}  // namespace

TEST_CASE("classification of regular points, poles and zeros") {
  auto at3 = classify_point(pair_v1(), pair_v2(), 3.0);
  CHECK(at3.order == 0);
  CHECK(at3.zero_order == 0);
  CHECK(std::abs(at3.g_at_k0 - closed_form_f(3.0)) < 1e-10);
  CHECK(std::abs(at3.g_at_k0) > 1.0);

  auto dp = classify_point(pair_v1(), pair_v2(), kDoublePole);
  CHECK(dp.order == 2);
  CHECK(std::abs(std::pow(dp.G_at_k0, 2) - dp.g_at_k0) <= 1e-10 * std::abs(dp.g_at_k0));
  CHECK(dp.phi0 == doctest::Approx(std::arg(dp.G_at_k0)));
  // g = f (k - k0)^2 from the closed form, sampled close to the pole.
  Complex h(1e-6, 0.0);
  CHECK(std::abs(closed_form_f(kDoublePole + h) * h * h - dp.g_at_k0) < 1e-4 * std::abs(dp.g_at_k0));

  Potential d({}, std::vector<Delta>{{0.0, 1.0}});
  for (double k0 : {-2.0, 0.0, 0.5, 3.0}) CHECK(classify_f1(d, k0).order == 0);
  auto z = classify_f1(d, Complex(0.0, -0.5));
  CHECK(z.is_zero());
  CHECK(z.zero_order == 1);
  CHECK(std::abs(z.g_at_k0 - Complex(0.0, -2.0)) < 1e-10);
  CHECK_THROWS_AS(classify_point(pair_v1(), pair_v2(), Complex(1.0, 0.5)), DomainError);
}

TEST_CASE("poles on the real axis are found with their order") {
  auto poles = find_poles(pair_v1(), pair_v2(), {4.5, 5.2, -0.05, 0.05});
  REQUIRE(poles.size() == 1);
  CHECK(poles[0].multiplicity == 2);
  CHECK(std::abs(poles[0].k - kDoublePole) < 1e-12);
}

TEST_CASE("case 1 ladder") {
  PoleData pd;
  pd.k0 = 1.0;
  auto real = approx_case1(pd, 1.0, 10.0, {-3, 3});
  for (const auto& a : real) {
    CHECK(std::abs(a.k - M_PI * a.j / 10.0) < 1e-15);
    CHECK(a.predicted_error_scale == doctest::Approx(0.005));
  }
  auto deep = approx_case1(pd, std::exp(2.0) * std::polar(1.0, 0.7), 25.0, {-4, 4});
  for (const auto& a : deep) CHECK(a.k.imag() == doctest::Approx(-1.0 / 25.0));

  auto at3 = classify_point(pair_v1(), pair_v2(), 3.0);
  const double L = 30.0;
  auto range = case1_j_range(at3.g_at_k0, L, 2.7, 3.3);
  auto ks = approx_case1(at3, at3.g_at_k0, L, range);
  int expected = 0;
  for (int j = -200; j <= 200; ++j) {
    double re = (std::arg(at3.g_at_k0) + 2.0 * M_PI * j) / (2.0 * L);
    expected += (re >= 2.7 && re <= 3.3);
  }
  REQUIRE(ks.size() == std::size_t(expected));
  CHECK(expected == 5);
  for (std::size_t i = 1; i < ks.size(); ++i)
    CHECK(ks[i].k.real() - ks[i - 1].k.real() == doctest::Approx(M_PI / L));
  for (const auto& a : ks) {
    CHECK(a.k.real() >= 2.7);
    CHECK(a.k.real() <= 3.3);
    CHECK(std::abs(std::exp(2.0 * I * a.k * L) - at3.g_at_k0) <= 1e-12 * std::abs(at3.g_at_k0));
    CHECK(a.k.imag() == doctest::Approx(-std::log(std::abs(at3.g_at_k0)) / (2.0 * L)));
    CHECK(a.k.imag() <= 0.0);
  }
}

TEST_CASE("case 1 pairs with the exact roots at k0 = 3") {
  auto at3 = classify_point(pair_v1(), pair_v2(), 3.0);
  double prev = INFINITY;
  for (double L : {30.0, 60.0, 120.0}) {
    auto ks = approx_case1(at3, at3.g_at_k0, L, case1_j_range(at3.g_at_k0, L, 2.5, 3.5), 0.5);
    auto exact = find_resonances(pair_v1(), pair_v2(), L, {2.5, 3.5, -0.5, 0.0});
    auto rep = pair_resonances(exact, ks, {3.0, 0.3, 1.0});
    CHECK(rep.ok());
    CHECK(rep.pairs.size() >= std::size_t(0.6 * L / M_PI) - 1);
    CHECK(rep.max_distance <= 0.5 / L);
    CHECK(rep.max_distance <= 0.75 * prev);
    prev = rep.max_distance;
  }
}

TEST_CASE("case 2 families satisfy their Lambert equation and pair at the double pole") {
  auto pd = classify_point(pair_v1(), pair_v2(), kDoublePole);
  const double L = 30.0;
  double lambda = case2_lambda(pd, L);
  CHECK(lambda == 30.0);
  auto ks = approx_case2(pd, L, {-10, 10}, 0.5);
  CHECK(ks.size() == 42);
  for (const auto& a : ks) {
    Complex z = I * lambda * (a.k - pd.k0);
    Complex A = lambert_argument(pd, L, a.l);
    CHECK(std::abs(z * std::exp(z) - A) <= 1e-10 * std::abs(A));
  }
  // Far from k0 the per-family spacing approaches 2 pi / lambda.
  std::map<int, std::map<int, Complex>> fam;
  for (const auto& a : ks) fam[a.l][a.j] = a.k;
  for (auto& [l, m] : fam) {
    double s = (m[10].real() - m[5].real()) / 5.0;
    CHECK(std::abs(s / (2.0 * M_PI / lambda) - 1.0) < 0.05);
  }

  auto exact = find_resonances(pair_v1(), pair_v2(), L, {4.4, 5.2, -0.6, 0.0});
  std::vector<Complex> inside;
  for (const auto& r : exact.roots)
    if (std::abs(r.k - kDoublePole) < 0.3) inside.push_back(r.k);
  REQUIRE(inside.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(inside[i] - kDoublePoleRootsL30[i]) < 1e-10);

  auto rep = pair_resonances(exact, ks, {kDoublePole, 0.3, 1.0});
  CHECK(rep.ok());
  CHECK(rep.pairs.size() == 6);
  CHECK(rep.max_distance <= 0.5 / lambda);
  int fam_count[2] = {0, 0};
  for (const auto& p : rep.pairs)
    for (const auto& a : ks)
      if (a.k == p.approx) ++fam_count[a.l];
  CHECK(fam_count[0] == 3);
  CHECK(fam_count[1] == 3);

  CHECK_THROWS_AS(approx_case2(pd, 1.0, {0, 0}), PreconditionError);
  CHECK_THROWS_AS(approx_case2(classify_point(pair_v1(), pair_v2(), 3.0), L, {0, 0}), PreconditionError);
}

TEST_CASE("case 2 pairing tightens as L doubles") {
  auto pd = classify_point(pair_v1(), pair_v2(), kDoublePole);
  double prev = INFINITY;
  for (double L : {30.0, 60.0, 120.0}) {
    auto ks = approx_case2(pd, L, {-40, 40}, 0.5);
    auto exact = find_resonances(pair_v1(), pair_v2(), L, {4.4, 5.2, -0.6, 0.0});
    auto rep = pair_resonances(exact, ks, {kDoublePole, 0.3, 1.0});
    CHECK(rep.ok());
    CHECK(rep.max_distance <= 0.75 * prev);
    prev = rep.max_distance;
  }
}

TEST_CASE("two-term expansion") {
  auto pd = classify_point(pair_v1(), pair_v2(), kDoublePole);
  for (double lambda : {3.0, 17.5, 30.0, 123.4}) {
    for (int l = 0; l < 2; ++l) {
      double phi = case2_phi(pd, lambda, l);
      CHECK(phi > -0.5);
      CHECK(phi <= 0.5);
    }
  }
  double prev = INFINITY;
  for (double L : {30.0, 60.0, 120.0}) {
    auto full = approx_case2(pd, L, {-6, 6});
    auto two = approx_case2_twoterm(pd, L, {-6, 6});
    REQUIRE(full.size() == two.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < full.size(); ++i) {
      CHECK(full[i].j == two[i].j);
      CHECK(full[i].l == two[i].l);
      worst = std::max(worst, std::abs(full[i].k - two[i].k));
    }
    CHECK(worst < prev);
    prev = worst;
    // j = 0 is the deepest member of each family.
    for (int l = 0; l < 2; ++l) {
      double deepest = 0.0;
      int arg = 99;
      for (const auto& a : two)
        if (a.l == l && a.k.imag() < deepest) {
          deepest = a.k.imag();
          arg = a.j;
        }
      CHECK(arg == 0);
    }
  }
}

TEST_CASE("case 3 at a reflectionless point below the axis") {
  auto poles = find_poles(pair_v1(), lopsided_v2(), {1.5, 2.0, -0.5, -0.1});
  REQUIRE(poles.size() == 1);
  Complex k0 = poles[0].k;
  CHECK(std::abs(k0 - Complex(1.76901034753997, -0.300231813700699)) < 1e-10);
  auto pd = classify_point(pair_v1(), lopsided_v2(), k0);
  CHECK(pd.order == 1);

  CHECK_THROWS_AS(approx_case3(pd, 10.0), PreconditionError);
  double prev = INFINITY;
  for (double L : {15.0, 20.0, 25.0}) {
    auto ks = approx_case3(pd, L);
    REQUIRE(ks.size() == 1);
    double lambda = case2_lambda(pd, L);
    Complex A = lambert_argument(pd, L, 0);
    CHECK(std::abs(A) < 0.1);
    CHECK(std::abs(ks[0].k - k0) < std::abs(k0.imag()));
    // W0(z) = z + O(z^2).
    CHECK(std::abs(ks[0].k - (k0 + A / (I * lambda))) <= 1.5 * std::norm(A) / lambda);
    Complex z = I * lambda * (ks[0].k - k0);
    CHECK(std::abs(z * std::exp(z) - A) <= 1e-10 * std::abs(A));

    auto exact = find_resonances(pair_v1(), lopsided_v2(), L,
                                 {k0.real() - 0.1, k0.real() + 0.1, k0.imag() - 0.1, k0.imag() + 0.1});
    double best = INFINITY;
    for (const auto& r : exact.roots) best = std::min(best, std::abs(r.k - ks[0].k));
    CHECK(best < ks[0].predicted_error_scale);
    CHECK(best < 0.75 * prev);
    prev = best;
  }
}

TEST_CASE("pairing report") {
  auto pd = classify_point(pair_v1(), pair_v2(), 3.0);
  auto ks = approx_case1(pd, pd.g_at_k0, 30.0, case1_j_range(pd.g_at_k0, 30.0, 2.6, 3.4));
  auto same = pair_resonances(as_set(ks), ks, {3.0, 0.3, 1.0});
  CHECK(same.ok());
  CHECK(same.max_distance == 0.0);

  auto exact = find_resonances(pair_v1(), pair_v2(), 30.0, {2.5, 3.5, -0.5, 0.0});
  auto shifted = ks;
  for (auto& a : shifted) a.k += 0.1;
  auto rep = pair_resonances(exact, shifted, {3.0, 0.3, 1.0});
  CHECK_FALSE(rep.ok());
  CHECK(rep.orphan_exact.size() + rep.orphan_approx.size() > 0);
}
