#include "cli.hpp"

#include "dyson/io.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>

int main(int argc, char** argv) {
  namespace cli = dyson::cli;
  CLI::App app{"Dyson and Coulomb game laboratory"};
  std::string command, config_path, output;
  std::vector<std::string> overrides;
  std::int64_t seed = -1, workers = -1;
  app.add_option("command", command, "subcommand")->required()->check(CLI::IsMember(cli::commands()));
  app.add_option("-c,--config", config_path, "TOML configuration file")->check(CLI::ExistingFile);
  app.add_option("-s,--set", overrides, "override, e.g. --set game.beta=4");
  app.add_option("--seed", seed, "run seed")->check(CLI::NonNegativeNumber);
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("-o,--output", output, "output directory");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << cli::error_json(cli::ConfigError(e.what())) << "\n";
    return 2;
  }
  if (seed >= 0) overrides.push_back("run.seed=" + std::to_string(seed));
  if (workers >= 0) overrides.push_back("run.workers=" + std::to_string(workers));
  if (!output.empty()) overrides.push_back("run.output=\"" + output + "\"");

  std::string out_dir = output.empty() ? "out" : output;
  try {
    const auto cfg = config_path.empty() ? cli::parse_config("", overrides, command)
                                         : cli::parse_config_file(config_path, overrides, command);
    out_dir = cfg.output;
    for (const auto& [k, v] : cfg.auto_filled) std::cerr << "auto-filled " << k << " = " << dyson::format_number(v) << "\n";
    const auto r = cli::run(cfg);
    for (const auto& f : r.outputs) std::cout << (std::filesystem::path(cfg.output) / f).string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    const std::string doc = cli::error_json(e);
    std::cerr << doc << "\n";
    try {
      if (std::filesystem::is_directory(out_dir)) dyson::write_text((std::filesystem::path(out_dir) / "error.json").string(), doc + "\n");
    } catch (...) {
    }
    return cli::exit_code_for(e);
  }
}
