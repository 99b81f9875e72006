#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "pinnlab/errors.hpp"
#include "pinnlab/harness/analyze.hpp"
#include "pinnlab/harness/train.hpp"

using namespace pinnlab;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"PINN training laboratory"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train one benchmark and write its log");
  std::string case_name, preset = "desk", out, config_file;
  std::uint64_t seed = 0;
  bool use_rba = false;
  train->add_option("--case", case_name, "allen-cahn | helmholtz | burgers | cavity")->required();
  train->add_flag("--rba", use_rba, "Enable residual-based attention");
  train->add_option("--preset", preset, "desk | paper")->check(CLI::IsMember({"desk", "paper"}));
  auto* seed_opt = train->add_option("--seed", seed, "Random seed");
  auto* out_opt = train->add_option("--out", out, "Output directory");
  train->add_option("--config", config_file, "key = value overrides")->check(CLI::ExistingFile);

  auto* analyze = app.add_subcommand("analyze", "Phase report and summary of a log");
  std::string log_path;
  bool as_json = false;
  analyze->add_option("log", log_path, "train_log.csv")->required()->check(CLI::ExistingFile);
  analyze->add_flag("--json", as_json, "Print JSON instead of text");

  auto* report = app.add_subcommand("report", "Tidy CSVs for plotting");
  std::string report_log, report_out;
  report->add_option("log", report_log, "train_log.csv")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      const auto id = pde::parse_case(case_name);
      auto config = harness::make_preset(id, preset);
      if (!config_file.empty()) {
        harness::apply_config_file(config, config_file);
        if (config.case_id != id) throw InvalidArgument("config file case differs from --case");
        if (config.preset != preset) throw InvalidArgument("config file preset differs from --preset");
      }
      if (use_rba) config.rba = true;
      if (*seed_opt) config.seed = seed;
      if (*out_opt) config.out_dir = out;
      const auto result = harness::train(config, &std::cerr);
      std::cout << result.log_path.string() << '\n';
      return result.diverged ? 3 : 0;
    }
    if (*analyze) {
      const auto a = harness::analyze(harness::read_log(log_path));
      harness::write_analysis_csv(fs::path(log_path).parent_path() / "analysis.csv", a);
      std::cout << (as_json ? harness::analysis_json(a) + "\n" : harness::analysis_text(a));
      return 0;
    }
    if (*report) {
      harness::write_report(report_log, report_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
