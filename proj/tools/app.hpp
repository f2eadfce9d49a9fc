#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "resonance/potential.hpp"
#include "resonance/root_finder.hpp"

namespace resonance::cli {

enum class Command { resonances, asymptotics, decay, smallmu, lavine, sweep, selfcheck };
enum class Format { ndjson, csv };

std::optional<Command> command_from_string(const std::string& s);
std::string to_string(Command c);

struct Anchor {
  Complex k0;
  double delta = 0.3;
  std::string kind;  // decay only: "D2".."D6"; empty means classify
  bool auto_j = true;  // pick the j range that covers the disk
  int j_lo = 0;
  int j_hi = 0;
};

struct Tolerances {
  double eps = 0.5;             // approximation error constant, scales each pair's allowance
  double pair_tolerance = 1.0;  // distance allowed = pair_tolerance * eps-based error scale
  double cluster_radius = 1e-7;
  double residual_tol = 1e-9;
  double origin_exclusion = 1e-6;
};

struct RunConfig {
  Command command = Command::selfcheck;
  std::vector<Potential> potentials;
  SearchRect rect;
  bool has_rect = false;
  std::vector<double> L_list;
  std::optional<double> c;
  std::vector<double> mu;
  std::optional<Complex> k;
  std::vector<Anchor> anchors;
  Tolerances tol;
  int t_nodes = 200;
  int threads = 0;  // 0: hardware concurrency
  std::string output_path;
  Format format = Format::ndjson;
  std::uint64_t seed = 20240611;
};

// Throws ValidationError naming the offending field. Checks the command-specific requirements.
RunConfig parse_config(const nlohmann::json& doc, Command command);
RunConfig load_config(const std::string& path, Command command);

// One record per line (NDJSON) or CSV rows. Flushes after every record.
class Sink {
 public:
  Sink(std::ostream& os, Format format, Command command);
  void record(const nlohmann::json& r);
  void failure(const std::string& stage, const std::string& message, const nlohmann::json& where = nullptr);

 private:
  std::ostream& os_;
  Format format_;
  bool frames_;
};

// Exit status: 0 success, 1 a check failed, 3 internal failure (marker record written).
int run(const RunConfig& cfg, Sink& sink);

struct CheckResult {
  std::string name;
  bool pass = false;
  nlohmann::json detail;
};

// Randomized invariant suites, deterministic for a given seed.
std::vector<CheckResult> selfcheck(std::uint64_t seed);

}  // namespace resonance::cli
