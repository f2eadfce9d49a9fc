#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <thread>

#include "app.hpp"
#include "resonance/asymptotics.hpp"
#include "resonance/decay.hpp"
#include "resonance/errors.hpp"
#include "resonance/lavine.hpp"
#include "resonance/small_coupling.hpp"

namespace resonance::cli {

namespace {

using nlohmann::json;

json cplx(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json roots_json(const ResonanceSet& rs) {
  json out = json::array();
  for (const auto& r : rs.roots)
    out.push_back({{"re", r.k.real()}, {"im", r.k.imag()}, {"mult", r.multiplicity}, {"res", r.residual}});
  return out;
}

json approx_json(const std::vector<ApproxResonance>& ap) {
  json out = json::array();
  for (const auto& a : ap)
    out.push_back({{"case", to_string(a.kind)}, {"j", a.j}, {"l", a.l}, {"re", a.k.real()}, {"im", a.k.imag()}});
  return out;
}

FinderOptions finder_options(const Tolerances& t) {
  FinderOptions o;
  o.cluster_radius = t.cluster_radius;
  o.residual_tol = t.residual_tol;
  o.origin_exclusion = t.origin_exclusion;
  return o;
}

struct PairingTotals {
  double max_dist = 0.0;
  int orphans = 0;
  int pairs = 0;

  void add(const PairingReport& r) {
    max_dist = std::max(max_dist, r.max_distance);
    orphans += int(r.orphan_exact.size() + r.orphan_approx.size());
    pairs += int(r.pairs.size());
  }
  json to_json() const { return {{"max_dist", max_dist}, {"orphans", orphans}, {"pairs", pairs}}; }
};

json frame(double L, const ResonanceSet& exact, const std::vector<ApproxResonance>& approx, const PairingTotals& p) {
  json f;
  f["L"] = L;
  f["exact"] = roots_json(exact);
  f["approx"] = approx_json(approx);
  f["pairing"] = p.to_json();
  f["total_winding"] = exact.total_winding;
  f["partial"] = exact.partial;
  return f;
}

std::vector<Anchor> pair_anchors(const RunConfig& cfg) {
  if (!cfg.anchors.empty()) return cfg.anchors;
  std::vector<Anchor> out;
  for (const auto& p : find_poles(cfg.potentials[0], cfg.potentials[1], cfg.rect)) {
    Anchor a;
    a.k0 = p.k;
    out.push_back(a);
  }
  return out;
}

// Approximations for one anchor on the pair; the case follows the local structure of f at k0.
std::vector<ApproxResonance> pair_approx(const RunConfig& cfg, const Anchor& a, double L, json& info) {
  const auto& v1 = cfg.potentials[0];
  const auto& v2 = cfg.potentials[1];
  auto pd = classify_point(v1, v2, a.k0);
  info = {{"k0", cplx(pd.k0)}, {"order", pd.order}, {"zero_order", pd.zero_order}};
  double eps = cfg.tol.eps;
  try {
    if (!pd.is_pole() && !pd.is_zero()) {
      info["case"] = "C1";
      // One spacing past the disk so roots near its rim keep their partners.
      double w = a.delta + M_PI / L;
      JRange j = a.auto_j ? case1_j_range(pd.g_at_k0, L, a.k0.real() - w, a.k0.real() + w) : JRange{a.j_lo, a.j_hi};
      return approx_case1(pd, pd.g_at_k0, L, j, eps);
    }
    if (pd.is_pole() && std::abs(pd.k0.imag()) <= 1e-12) {
      info["case"] = "C2";
      double lambda = case2_lambda(pd, L);
      int J = int(std::ceil(a.delta * lambda / (2.0 * M_PI))) + 4;
      return approx_case2(pd, L, a.auto_j ? JRange{-J, J} : JRange{a.j_lo, a.j_hi}, eps);
    }
    if (pd.is_pole()) {
      info["case"] = "C3";
      return approx_case3(pd, L, eps);
    }
    info["case"] = nullptr;
    info["note"] = "f vanishes at k0; no approximation applies";
  } catch (const PreconditionError& e) {
    info["note"] = e.what();
  }
  return {};
}

json pair_frame(const RunConfig& cfg, double L, bool with_approx) {
  const auto& v1 = cfg.potentials[0];
  const auto& v2 = cfg.potentials[1];
  auto exact = find_resonances(v1, v2, L, cfg.rect, finder_options(cfg.tol));
  std::vector<ApproxResonance> all;
  PairingTotals totals;
  json anchors = json::array();
  if (with_approx) {
    for (const auto& a : pair_anchors(cfg)) {
      json info;
      auto ap = pair_approx(cfg, a, L, info);
      auto rep = pair_resonances(exact, ap, {a.k0, a.delta, cfg.tol.pair_tolerance});
      totals.add(rep);
      info["pairs"] = rep.pairs.size();
      info["max_dist"] = rep.max_distance;
      info["ok"] = rep.ok();
      anchors.push_back(info);
      all.insert(all.end(), ap.begin(), ap.end());
    }
  }
  json f = frame(L, exact, all, totals);
  if (with_approx) f["anchors"] = anchors;
  return f;
}

ApproxCase decay_case(const std::string& s) {
  for (ApproxCase c : {ApproxCase::D2, ApproxCase::D3, ApproxCase::D4, ApproxCase::D5, ApproxCase::D6})
    if (to_string(c) == s) return c;
  throw ValidationError("anchors.case", "unknown decay case " + s);
}

double median_im(const ResonanceSet& rs) {
  std::vector<double> im;
  for (const auto& r : rs.roots)
    for (int m = 0; m < r.multiplicity; ++m) im.push_back(r.k.imag());
  if (im.empty()) return NAN;
  std::sort(im.begin(), im.end());
  std::size_t n = im.size();
  return n % 2 ? im[n / 2] : 0.5 * (im[n / 2 - 1] + im[n / 2]);
}

json decay_frame(const RunConfig& cfg, double L) {
  const auto& v1 = cfg.potentials[0];
  bool general = cfg.potentials.size() == 2;
  DecayConfig dc{*cfg.c, L, general ? DecayMode::general_V2 : DecayMode::delta, std::exp(-*cfg.c * L)};
  auto exact = general ? find_general_resonances(v1, cfg.potentials[1], dc, cfg.rect)
                       : find_decay_resonances(v1, dc, cfg.rect);
  std::vector<ApproxResonance> all;
  PairingTotals totals;
  json anchors = json::array();
  json near_zero = nullptr;
  if (!general) {
    try {
      auto nz = near_zero_resonance(v1, dc);
      near_zero = {{"k", cplx(nz.k)}, {"predicted", cplx(nz.predicted)}, {"iterations", nz.iterations}};
      all.push_back({nz.k, ApproxCase::D1, 0, 0, 0.0, L, 0.0});
    } catch (const NumericalError& e) {
      near_zero = {{"note", e.what()}};
    }
    for (const auto& a : cfg.anchors) {
      json info = {{"k0", cplx(a.k0)}, {"case", a.kind.empty() ? json() : json(a.kind)}};
      if (a.kind.empty()) {
        info["note"] = "decay anchors need an explicit case";
        anchors.push_back(info);
        continue;
      }
      int J = int(std::ceil(a.delta * L / M_PI)) + 2;
      std::vector<ApproxResonance> ap;
      try {
        ap = approx_decay(v1, dc, decay_case(a.kind), a.k0, a.auto_j ? JRange{-J, J} : JRange{a.j_lo, a.j_hi},
                          cfg.tol.eps);
      } catch (const PreconditionError& e) {
        info["note"] = e.what();
      }
      auto rep = pair_resonances(exact, ap, {a.k0, a.delta, cfg.tol.pair_tolerance});
      totals.add(rep);
      info["pairs"] = rep.pairs.size();
      info["max_dist"] = rep.max_distance;
      info["ok"] = rep.ok();
      anchors.push_back(info);
      all.insert(all.end(), ap.begin(), ap.end());
    }
  }
  json f = frame(L, exact, all, totals);
  f["line"] = dc.line();
  f["median_im"] = median_im(exact);
  f["near_zero"] = near_zero;
  f["anchors"] = anchors;
  return f;
}

// Frames are computed by up to n workers and written in L order.
int emit_frames(const RunConfig& cfg, Sink& sink, const std::function<json(double)>& make) {
  unsigned n = cfg.threads > 0 ? unsigned(cfg.threads) : std::max(1u, std::thread::hardware_concurrency());
  std::deque<std::future<json>> inflight;
  std::size_t next = 0;
  auto launch = [&] {
    while (next < cfg.L_list.size() && inflight.size() < n) {
      double L = cfg.L_list[next++];
      inflight.push_back(std::async(std::launch::async, make, L));
    }
  };
  launch();
  for (std::size_t i = 0; i < cfg.L_list.size(); ++i) {
    try {
      sink.record(inflight.front().get());
    } catch (const std::exception& e) {
      sink.failure("frame", e.what(), {{"L", cfg.L_list[i]}});
      return 3;
    }
    inflight.pop_front();
    launch();
  }
  return 0;
}

int run_resonances(const RunConfig& cfg, Sink& sink) {
  if (cfg.potentials.size() == 2)
    return emit_frames(cfg, sink, [&](double L) { return pair_frame(cfg, L, false); });
  auto rs = find_resonances(cfg.potentials[0], cfg.rect, finder_options(cfg.tol));
  sink.record(frame(NAN, rs, {}, {}));
  return 0;
}

int run_smallmu(const RunConfig& cfg, Sink& sink) {
  auto r = expansion_check(cfg.potentials.back(), *cfg.k, cfg.mu);
  json mu_f2 = json::array();
  for (Complex z : r.mu_f2) mu_f2.push_back(cplx(z));
  sink.record({{"record", "smallmu"},
               {"k", cplx(*cfg.k)},
               {"I", cplx(r.I)},
               {"vhat0", cplx(r.vhat0)},
               {"J", cplx(r.J)},
               {"c0", cplx(r.c0)},
               {"c1", cplx(r.c1)},
               {"mu", r.mu},
               {"mu_f2", mu_f2},
               {"ratio", r.ratio},
               {"spread", r.spread},
               {"bounded", r.bounded()}});
  return 0;
}

int run_lavine(const RunConfig& cfg, Sink& sink) {
  const auto& v = cfg.potentials[0];
  Complex k0;
  if (cfg.k) {
    k0 = *cfg.k;
  } else {
    auto rs = find_resonances(v, cfg.rect, finder_options(cfg.tol));
    const Root* best = nullptr;
    for (const auto& r : rs.roots)
      if (r.k.real() > 0.0 && r.k.imag() < 0.0 && (!best || r.k.real() < best->k.real())) best = &r;
    if (!best) throw PreconditionError("lavine: no resonance with Re k > 0 in rect");
    k0 = best->k;
  }
  auto s = outgoing_state(v, k0);
  auto rep = lavine_check(v, s, cfg.t_nodes);
  sink.record({{"record", "lavine"},
               {"k0", cplx(s.k0)},
               {"lambda0", s.lambda0},
               {"delta0", s.delta0},
               {"r", s.r},
               {"norm", s.norm},
               {"boundary_residual", s.boundary_residual},
               {"C", rep.C},
               {"sup_deviation", rep.sup_deviation},
               {"eps1", rep.eps1},
               {"eps2", rep.eps2},
               {"T", rep.T},
               {"lambda_max", rep.lambda_max},
               {"mass_error", rep.mass_error},
               {"support", {rep.support.first, rep.support.second}},
               {"inequality", rep.inequality()},
               {"chain", rep.chain()}});
  return 0;
}

int run_selfcheck(const RunConfig& cfg, Sink& sink) {
  auto checks = selfcheck(cfg.seed);
  int failed = 0;
  for (const auto& c : checks) {
    sink.record({{"record", "check"}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    if (!c.pass) ++failed;
  }
  sink.record({{"record", "summary"}, {"seed", cfg.seed}, {"checks", checks.size()}, {"failed", failed}});
  return failed ? 1 : 0;
}

}  // namespace

int run(const RunConfig& cfg, Sink& sink) {
  try {
    switch (cfg.command) {
      case Command::resonances:
        return run_resonances(cfg, sink);
      case Command::asymptotics:
        return emit_frames(cfg, sink, [&](double L) { return pair_frame(cfg, L, true); });
      case Command::sweep:
        if (cfg.c) return emit_frames(cfg, sink, [&](double L) { return decay_frame(cfg, L); });
        return emit_frames(cfg, sink, [&](double L) { return pair_frame(cfg, L, true); });
      case Command::decay:
        return emit_frames(cfg, sink, [&](double L) { return decay_frame(cfg, L); });
      case Command::smallmu:
        return run_smallmu(cfg, sink);
      case Command::lavine:
        return run_lavine(cfg, sink);
      case Command::selfcheck:
        return run_selfcheck(cfg, sink);
    }
  } catch (const std::exception& e) {
    sink.failure(to_string(cfg.command), e.what());
    return 3;
  }
  return 3;
}

}  // namespace resonance::cli
