#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "app.hpp"
#include "resonance/errors.hpp"

namespace resonance::cli {

namespace {

using nlohmann::json;

const char* const kCommands[] = {"resonances", "asymptotics", "decay", "smallmu", "lavine", "sweep", "selfcheck"};

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ValidationError(field, "expected a number");
  double x = j.get<double>();
  if (!std::isfinite(x)) throw ValidationError(field, "non-finite number");
  return x;
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ValidationError(field, "expected an integer");
  return j.get<int>();
}

// 2.5, [re, im] or {"re": .., "im": ..}.
Complex complex_value(const json& j, const std::string& field) {
  if (j.is_number()) return number(j, field);
  if (j.is_array() && j.size() == 2) return {number(j[0], field + "[0]"), number(j[1], field + "[1]")};
  if (j.is_object() && j.contains("re") && j.contains("im"))
    return {number(j["re"], field + ".re"), number(j["im"], field + ".im")};
  throw ValidationError(field, "expected a number, [re, im] or {re, im}");
}

std::vector<double> number_list(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ValidationError(field, "expected a non-empty array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

SearchRect parse_rect(const json& j) {
  if (!j.is_object()) throw ValidationError("rect", "expected an object");
  SearchRect r;
  for (const char* key : {"re_lo", "re_hi", "im_lo", "im_hi"})
    if (!j.contains(key)) throw ValidationError(std::string("rect.") + key, "missing");
  r.re_lo = number(j["re_lo"], "rect.re_lo");
  r.re_hi = number(j["re_hi"], "rect.re_hi");
  r.im_lo = number(j["im_lo"], "rect.im_lo");
  r.im_hi = number(j["im_hi"], "rect.im_hi");
  if (j.contains("max_depth")) r.max_depth = integer(j["max_depth"], "rect.max_depth");
  if (j.contains("target_count_per_cell"))
    r.target_count_per_cell = integer(j["target_count_per_cell"], "rect.target_count_per_cell");
  if (!(r.re_lo < r.re_hi)) throw ValidationError("rect.re_hi", "must exceed re_lo");
  if (!(r.im_lo < r.im_hi)) throw ValidationError("rect.im_hi", "must exceed im_lo");
  if (r.max_depth < 1) throw ValidationError("rect.max_depth", "must be positive");
  if (r.target_count_per_cell < 1) throw ValidationError("rect.target_count_per_cell", "must be positive");
  return r;
}

Anchor parse_anchor(const json& j, const std::string& field) {
  if (!j.is_object() || !j.contains("k0")) throw ValidationError(field + ".k0", "missing");
  Anchor a;
  a.k0 = complex_value(j["k0"], field + ".k0");
  if (j.contains("delta")) a.delta = number(j["delta"], field + ".delta");
  if (!(a.delta > 0.0)) throw ValidationError(field + ".delta", "must be positive");
  if (j.contains("case")) {
    if (!j["case"].is_string()) throw ValidationError(field + ".case", "expected a string");
    a.kind = j["case"].get<std::string>();
    static const char* const ok[] = {"D2", "D3", "D4", "D5", "D6"};
    if (std::find(std::begin(ok), std::end(ok), a.kind) == std::end(ok))
      throw ValidationError(field + ".case", "expected one of D2..D6");
  }
  if (j.contains("j")) {
    auto r = number_list(j["j"], field + ".j");
    if (r.size() != 2 || r[0] != std::floor(r[0]) || r[1] != std::floor(r[1]) || r[0] > r[1])
      throw ValidationError(field + ".j", "expected [lo, hi] integers with lo <= hi");
    a.auto_j = false;
    a.j_lo = int(r[0]);
    a.j_hi = int(r[1]);
  }
  return a;
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError(field, what);
}

}  // namespace

std::optional<Command> command_from_string(const std::string& s) {
  for (int i = 0; i < 7; ++i)
    if (s == kCommands[i]) return Command(i);
  return std::nullopt;
}

std::string to_string(Command c) { return kCommands[int(c)]; }

RunConfig parse_config(const json& doc, Command command) {
  if (!doc.is_object()) throw ValidationError("<root>", "expected a JSON object");
  RunConfig cfg;
  cfg.command = command;
  if (doc.contains("command")) {
    require(doc["command"].is_string(), "command", "expected a string");
    auto c = command_from_string(doc["command"].get<std::string>());
    require(c.has_value(), "command", "unknown command");
    require(*c == command, "command", "does not match the command line");
  }
  if (doc.contains("potentials")) {
    const auto& p = doc["potentials"];
    require(p.is_array() && !p.empty() && p.size() <= 2, "potentials", "expected one or two potentials");
    for (std::size_t i = 0; i < p.size(); ++i) {
      try {
        cfg.potentials.push_back(potential_from_json(p[i]));
      } catch (const ValidationError& e) {
        std::string what = e.what();
        throw ValidationError("potentials[" + std::to_string(i) + "]." + e.field(), what.substr(e.field().size() + 2));
      }
    }
  }
  if (doc.contains("rect")) {
    cfg.rect = parse_rect(doc["rect"]);
    cfg.has_rect = true;
  }
  require(!(doc.contains("L") && doc.contains("L_list")), "L_list", "give either L or L_list");
  if (doc.contains("L")) cfg.L_list = {number(doc["L"], "L")};
  if (doc.contains("L_list")) cfg.L_list = number_list(doc["L_list"], "L_list");
  for (std::size_t i = 0; i < cfg.L_list.size(); ++i) {
    require(cfg.L_list[i] > 0.0, "L_list", "L must be positive");
    require(i == 0 || cfg.L_list[i] > cfg.L_list[i - 1], "L_list", "must be strictly increasing");
  }
  if (doc.contains("c")) {
    cfg.c = number(doc["c"], "c");
    require(*cfg.c > 0.0, "c", "must be positive");
  }
  if (doc.contains("mu")) {
    cfg.mu = doc["mu"].is_array() ? number_list(doc["mu"], "mu") : std::vector<double>{number(doc["mu"], "mu")};
    for (double m : cfg.mu) require(m > 0.0, "mu", "must be positive");
  }
  if (doc.contains("k")) cfg.k = complex_value(doc["k"], "k");
  if (doc.contains("anchors")) {
    const auto& a = doc["anchors"];
    require(a.is_array(), "anchors", "expected an array");
    for (std::size_t i = 0; i < a.size(); ++i) cfg.anchors.push_back(parse_anchor(a[i], "anchors[" + std::to_string(i) + "]"));
  }
  if (doc.contains("tolerances")) {
    const auto& t = doc["tolerances"];
    require(t.is_object(), "tolerances", "expected an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      std::string f = "tolerances." + it.key();
      double x = number(it.value(), f);
      require(x > 0.0, f, "must be positive");
      if (it.key() == "eps") cfg.tol.eps = x;
      else if (it.key() == "pair_tolerance") cfg.tol.pair_tolerance = x;
      else if (it.key() == "cluster_radius") cfg.tol.cluster_radius = x;
      else if (it.key() == "residual_tol") cfg.tol.residual_tol = x;
      else if (it.key() == "origin_exclusion") cfg.tol.origin_exclusion = x;
      else throw ValidationError(f, "unknown tolerance");
    }
  }
  if (doc.contains("t_nodes")) {
    cfg.t_nodes = integer(doc["t_nodes"], "t_nodes");
    require(cfg.t_nodes >= 2, "t_nodes", "must be at least 2");
  }
  if (doc.contains("threads")) {
    cfg.threads = integer(doc["threads"], "threads");
    require(cfg.threads >= 0, "threads", "must be non-negative");
  }
  if (doc.contains("output_path")) {
    require(doc["output_path"].is_string(), "output_path", "expected a string");
    cfg.output_path = doc["output_path"].get<std::string>();
  }
  if (doc.contains("format")) {
    require(doc["format"].is_string(), "format", "expected a string");
    auto f = doc["format"].get<std::string>();
    require(f == "ndjson" || f == "csv", "format", "expected ndjson or csv");
    cfg.format = f == "csv" ? Format::csv : Format::ndjson;
  }
  if (doc.contains("seed")) {
    require(doc["seed"].is_number_unsigned(), "seed", "expected a non-negative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }

  std::size_t np = cfg.potentials.size();
  switch (command) {
    case Command::resonances:
      require(np >= 1, "potentials", "missing");
      require(cfg.has_rect, "rect", "missing");
      require(np == 1 || !cfg.L_list.empty(), "L", "required for a pair of potentials");
      break;
    case Command::asymptotics:
      require(np == 2, "potentials", "expected V1 and V2");
      require(cfg.has_rect, "rect", "missing");
      require(!cfg.L_list.empty(), "L", "missing");
      break;
    case Command::sweep:
      require(cfg.has_rect, "rect", "missing");
      require(!cfg.L_list.empty(), "L_list", "missing");
      if (cfg.c) require(np >= 1, "potentials", "missing");
      else require(np == 2, "potentials", "expected V1 and V2 (or give c for a decay sweep)");
      break;
    case Command::decay:
      require(np >= 1, "potentials", "missing");
      require(cfg.c.has_value(), "c", "missing");
      require(cfg.has_rect, "rect", "missing");
      require(!cfg.L_list.empty(), "L", "missing");
      break;
    case Command::smallmu:
      require(np >= 1, "potentials", "missing");
      require(cfg.k.has_value(), "k", "missing");
      if (cfg.mu.empty()) cfg.mu = {1e-2, 1e-3, 1e-4, 1e-5};
      break;
    case Command::lavine:
      require(np == 1, "potentials", "expected a single potential");
      require(cfg.k.has_value() || cfg.has_rect, "k", "give k or a rect to search");
      break;
    case Command::selfcheck:
      break;
  }
  return cfg;
}

RunConfig load_config(const std::string& path, Command command) {
  std::ifstream in(path);
  if (!in) throw ValidationError("--config", "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("<root>", e.what());
  }
  return parse_config(doc, command);
}

Sink::Sink(std::ostream& os, Format format, Command command)
    : os_(os), format_(format),
      frames_(command == Command::resonances || command == Command::asymptotics || command == Command::decay ||
              command == Command::sweep) {
  if (format_ != Format::csv) return;
  os_ << (frames_ ? "L,set,case,j,l,re,im,mult,res\n" : "record,field,value\n");
  os_.flush();
}

namespace {

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (!v.is_string()) return v.dump();
  std::string s = v.get<std::string>(), out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

void flatten(const json& v, const std::string& path, std::vector<std::pair<std::string, json>>& out) {
  if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) flatten(it.value(), path.empty() ? it.key() : path + "." + it.key(), out);
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], path + "[" + std::to_string(i) + "]", out);
  } else {
    out.emplace_back(path, v);
  }
}

}  // namespace

void Sink::record(const json& r) {
  if (format_ == Format::ndjson) {
    os_ << r.dump() << '\n';
  } else if (frames_ && r.contains("exact")) {
    std::string L = csv_cell(r["L"]);
    for (const auto& e : r["exact"])
      os_ << L << ",exact,,,," << csv_cell(e["re"]) << ',' << csv_cell(e["im"]) << ',' << csv_cell(e["mult"]) << ','
          << csv_cell(e["res"]) << '\n';
    for (const auto& a : r["approx"])
      os_ << L << ",approx," << csv_cell(a["case"]) << ',' << csv_cell(a["j"]) << ',' << csv_cell(a["l"]) << ','
          << csv_cell(a["re"]) << ',' << csv_cell(a["im"]) << ",,\n";
  } else {
    std::vector<std::pair<std::string, json>> cells;
    flatten(r, "", cells);
    std::string name = r.contains("record") ? csv_cell(r["record"]) : std::string("\"record\"");
    for (const auto& [path, v] : cells) {
      if (frames_) os_ << csv_cell(r.value("L", json())) << ",info," << csv_cell(path) << ",,,,,," << csv_cell(v) << '\n';
      else os_ << name << ',' << csv_cell(path) << ',' << csv_cell(v) << '\n';
    }
  }
  os_.flush();
}

void Sink::failure(const std::string& stage, const std::string& message, const json& where) {
  json r = {{"record", "failure"}, {"stage", stage}, {"message", message}};
  if (!where.is_null()) r["at"] = where;
  record(r);
}

}  // namespace resonance::cli
