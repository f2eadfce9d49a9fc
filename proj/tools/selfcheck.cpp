#include <algorithm>
#include <cmath>
#include <random>

#include "app.hpp"
#include "resonance/asymptotics.hpp"
#include "resonance/errors.hpp"
#include "resonance/lambert_w.hpp"
#include "resonance/lavine.hpp"
#include "resonance/scattering.hpp"

namespace resonance::cli {

namespace {

using nlohmann::json;
using Rng = std::mt19937_64;

double uniform(Rng& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }

// Pieces and deltas on [0, width]; mirrored when left is set.
Potential random_potential(Rng& g, bool left) {
  std::vector<Segment> segs;
  std::vector<Delta> dels;
  int n = 1 + int(uniform(g, 0.0, 2.999));
  double x = 0.0;
  for (int i = 0; i < n; ++i) {
    double w = uniform(g, 0.2, 0.7);
    if (uniform(g, 0.0, 1.0) < 0.6) segs.push_back({x, x + w, uniform(g, -1.5, 3.0)});
    x += w;
  }
  dels.push_back({0.0, uniform(g, 0.3, 2.0)});
  dels.push_back({x, uniform(g, -0.5, 2.0)});
  if (!left) return Potential(segs, dels);
  std::vector<Segment> ms;
  std::vector<Delta> md;
  for (auto it = segs.rbegin(); it != segs.rend(); ++it) ms.push_back({-it->hi, -it->lo, it->value});
  for (auto it = dels.rbegin(); it != dels.rend(); ++it) md.push_back({-it->x, it->alpha});
  return Potential(ms, md);
}

CheckResult abs_f_on_real_axis(Rng& g) {
  double worst = INFINITY;
  int checked = 0;
  for (int p = 0; p < 6; ++p) {
    Potential v1 = random_potential(g, true), v2 = random_potential(g, false);
    for (int i = 0; i < 50; ++i) {
      double k = uniform(g, -12.0, 12.0);
      if (std::abs(k) < 1e-3) continue;
      auto v = f(v1, v2, k);
      if (v.pole) continue;
      worst = std::min(worst, std::abs(v.value));
      ++checked;
    }
  }
  return {"abs_f_on_real_axis", worst > 1.0 && checked > 250, {{"min_abs_f", worst}, {"samples", checked}}};
}

CheckResult conjugate_symmetry(Rng& g) {
  double worst = 0.0;
  for (int p = 0; p < 6; ++p) {
    Potential v1 = random_potential(g, true), v2 = random_potential(g, false);
    for (int i = 0; i < 30; ++i) {
      Complex k(uniform(g, -6.0, 6.0), uniform(g, -1.5, 0.0));
      auto a = f(v1, v2, k), b = f(v1, v2, -std::conj(k));
      if (a.pole || b.pole) continue;
      worst = std::max(worst, std::abs(std::conj(a.value) - b.value) / std::max(1.0, std::abs(b.value)));
    }
  }
  return {"conjugate_symmetry", worst <= 1e-10, {{"max_rel_error", worst}}};
}

CheckResult unit_determinant(Rng& g) {
  double worst = 0.0;
  for (int p = 0; p < 10; ++p) {
    Potential v = combine(random_potential(g, true), translate(random_potential(g, false), 0.5));
    for (int i = 0; i < 20; ++i) {
      Complex k(uniform(g, -8.0, 8.0), uniform(g, -2.0, 2.0));
      Mat2c t = transfer_matrix(v, k);
      worst = std::max(worst, std::abs(t.determinant() - 1.0) / t.squaredNorm());
    }
  }
  return {"unit_determinant", worst <= 1e-12, {{"max_scaled_error", worst}}};
}

CheckResult winding_sum(Rng& g) {
  bool ok = true;
  json runs = json::array();
  for (int p = 0; p < 3; ++p) {
    Potential v1 = random_potential(g, true), v2 = random_potential(g, false);
    double L = uniform(g, 5.0, 12.0);
    auto rs = find_resonances(v1, v2, L, {0.5, 4.0, -1.0, 0.0});
    int sum = 0;
    for (const auto& r : rs.roots) sum += r.multiplicity;
    ok = ok && sum == rs.total_winding && !rs.partial;
    runs.push_back({{"L", L}, {"roots", sum}, {"winding", rs.total_winding}});
  }
  return {"winding_sum", ok, runs};
}

CheckResult lambert_round_trip(Rng& g) {
  double worst = 0.0;
  int lb = 0;
  for (int j = -5; j <= 5; ++j) {
    for (int i = 0; i < 200; ++i) {
      double r = std::pow(10.0, uniform(g, -6.0, 6.0));
      Complex z = std::polar(r, uniform(g, -M_PI, M_PI));
      Complex w = lambert_w(j, z);
      worst = std::max(worst, std::abs(w * std::exp(w) - z) / std::abs(z));
      if (r > 1.0 && std::abs(w) < 0.5 * std::log(r)) ++lb;
    }
  }
  return {"lambert_round_trip", worst <= 1e-12 && lb == 0, {{"max_rel_residual", worst}, {"lower_bound_violations", lb}}};
}

CheckResult dtn_identity(Rng& g) {
  double worst = 0.0;
  int hits = 0;
  for (int p = 0; p < 4; ++p) {
    Potential v = combine(random_potential(g, true), translate(random_potential(g, false), 0.3));
    auto [lo, hi] = *v.support();
    double r = std::max(-lo, hi);
    for (int i = 0; i < 10; ++i) {
      Complex k(uniform(g, 0.2, 6.0), uniform(g, -0.8, 0.8));
      auto rep = dtn_identity_check(v, r, k);
      if (rep.dirichlet_hit) {
        ++hits;
        continue;
      }
      double scale = std::max(1.0, rep.green.cwiseAbs().maxCoeff());
      worst = std::max(worst, rep.deviation / scale);
    }
  }
  return {"dtn_identity", worst <= 1e-9, {{"max_deviation", worst}, {"dirichlet_hits", hits}}};
}

// Outgoing state of a random positive barrier pair: boundary identity and mass conservation.
CheckResult resonant_state(Rng& g) {
  double a = uniform(g, 6.0, 12.0), b = uniform(g, 6.0, 12.0);
  Potential v({}, std::vector<Delta>{{-1.0, a}, {0.0, b}});
  auto rs = find_resonances(v, {1.0, 4.0, -0.6, 0.0});
  const Root* best = nullptr;
  for (const auto& r : rs.roots)
    if (!best || r.k.real() < best->k.real()) best = &r;
  if (!best) return {"resonant_state", false, {{"note", "no resonance found"}}};
  auto s = outgoing_state(v, best->k);
  auto rep = lavine_check(v, s, 100);
  bool ok = s.boundary_residual <= 1e-8 && rep.mass_error <= 1e-3 && rep.inequality();
  return {"resonant_state",
          ok,
          {{"k0", {{"re", s.k0.real()}, {"im", s.k0.imag()}}},
           {"boundary_residual", s.boundary_residual},
           {"mass_error", rep.mass_error},
           {"sup_deviation", rep.sup_deviation},
           {"C", rep.C}}};
}

// Bound states carry point masses; continuous + discrete mass must add up to ||phi||^2.
CheckResult mass_conservation(Rng& g) {
  Potential v({}, std::vector<Delta>{{0.0, uniform(g, -3.0, -1.0)}, {0.7, uniform(g, 0.5, 2.0)}});
  auto bump = bump_state(-1.0, 1.0, uniform(g, 0.0, 2.0));
  std::vector<double> grid = uniform_grid(4.0, 0.01);
  while (grid.back() < 4000.0) grid.push_back(grid.back() * 1.0025);
  auto m = spectral_density(v, bump, grid);
  double nsq = bump.norm_squared(), err = std::abs(m.total_mass() - nsq) / nsq;
  bool ok = err <= 1e-3 && m.min_density() >= -1e-10 && !m.point_masses.empty();
  return {"mass_conservation", ok,
          {{"rel_error", err}, {"point_masses", m.point_masses.size()}, {"min_density", m.min_density()}}};
}

Potential paper_v1() { return Potential({}, std::vector<Delta>{{-1.0, 1.0}, {0.0, 1.0}}); }
Potential paper_v2() { return Potential({}, std::vector<Delta>{{0.0, 1.0}, {1.0, 1.0}}); }

CheckResult pairing_improves() {
  auto pd = classify_point(paper_v1(), paper_v2(), 3.0);
  json d = json::array();
  double prev = INFINITY;
  bool ok = true;
  for (double L : {30.0, 60.0}) {
    auto ks = approx_case1(pd, pd.g_at_k0, L, case1_j_range(pd.g_at_k0, L, 2.7, 3.3), 0.5);
    auto exact = find_resonances(paper_v1(), paper_v2(), L, {2.6, 3.4, -0.5, 0.0});
    auto rep = pair_resonances(exact, ks, {3.0, 0.3, 1.0});
    ok = ok && rep.ok() && rep.max_distance <= prev;
    prev = rep.max_distance;
    d.push_back({{"L", L}, {"max_dist", rep.max_distance}, {"pairs", rep.pairs.size()}});
  }
  return {"pairing_improves_with_L", ok, d};
}

CheckResult persistence() {
  Potential v1({}, std::vector<Delta>{{-1.0, 10.0}, {0.0, 10.0}});
  auto bump = bump_state(-1.0, 0.0, 2.6459);
  std::vector<double> t;
  for (int i = 0; i <= 25; ++i) t.push_back(0.2 * i);
  auto rep = persistence_proxy(v1, paper_v2(), bump, {10.0, 20.0, 40.0}, t, 0.1, 200.0);
  return {"persistence_nonincreasing", rep.nonincreasing(), {{"L", rep.L}, {"D", rep.D}}};
}

}  // namespace

std::vector<CheckResult> selfcheck(std::uint64_t seed) {
  Rng g(seed);
  std::vector<CheckResult> out;
  auto guarded = [&](const char* name, auto fn) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, {{"error", e.what()}}});
    }
  };
  guarded("abs_f_on_real_axis", [&] { return abs_f_on_real_axis(g); });
  guarded("conjugate_symmetry", [&] { return conjugate_symmetry(g); });
  guarded("unit_determinant", [&] { return unit_determinant(g); });
  guarded("winding_sum", [&] { return winding_sum(g); });
  guarded("lambert_round_trip", [&] { return lambert_round_trip(g); });
  guarded("dtn_identity", [&] { return dtn_identity(g); });
  guarded("resonant_state", [&] { return resonant_state(g); });
  guarded("mass_conservation", [&] { return mass_conservation(g); });
  guarded("pairing_improves_with_L", [] { return pairing_improves(); });
  guarded("persistence_nonincreasing", [] { return persistence(); });
  return out;
}

}  // namespace resonance::cli
