#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "app.hpp"
#include "resonance/errors.hpp"

using namespace resonance;

int main(int argc, char** argv) {
  CLI::App app{"Resonances of one-dimensional Schrodinger operators with separated potentials"};
  std::string command, config_path, out_path, format;
  std::optional<std::uint64_t> seed;
  app.add_option("command", command, "resonances | asymptotics | decay | smallmu | lavine | sweep | selfcheck")
      ->required();
  app.add_option("--config", config_path, "JSON run configuration (optional for selfcheck)");
  app.add_option("--out", out_path, "output file; stdout when absent");
  app.add_option("--format", format, "ndjson (default) or csv")->check(CLI::IsMember({"ndjson", "csv"}));
  app.add_option("--seed", seed, "seed for the randomized checks");
  CLI11_PARSE(app, argc, argv);

  auto cmd = cli::command_from_string(command);
  if (!cmd) {
    std::cerr << "unknown command: " << command << "\n";
    return 2;
  }
  cli::RunConfig cfg;
  try {
    if (config_path.empty() && *cmd != cli::Command::selfcheck) throw ValidationError("--config", "required");
    cfg = config_path.empty() ? cli::parse_config(nlohmann::json::object(), *cmd) : cli::load_config(config_path, *cmd);
  } catch (const ValidationError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return 2;
  }
  if (!out_path.empty()) cfg.output_path = out_path;
  if (!format.empty()) cfg.format = format == "csv" ? cli::Format::csv : cli::Format::ndjson;
  if (seed) cfg.seed = *seed;

  std::ofstream file;
  if (!cfg.output_path.empty()) {
    file.open(cfg.output_path);
    if (!file) {
      std::cerr << "cannot write " << cfg.output_path << "\n";
      return 2;
    }
  }
  std::ostream& os = cfg.output_path.empty() ? std::cout : file;
  cli::Sink sink(os, cfg.format, cfg.command);
  int status = cli::run(cfg, sink);
  if (status == 3) std::cerr << "internal failure; see the failure record in the output\n";
  return status;
}
