// Command line front end: run experiments, summarize records, export pools.

#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "altune/config.hpp"
#include "altune/dataset_io.hpp"
#include "altune/errors.hpp"
#include "altune/experiment.hpp"
#include "altune/synthetic_players.hpp"

namespace {

constexpr int kConfigError = 2;

std::vector<std::size_t> parse_centers(const std::string& text) {
  std::vector<std::size_t> centers;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    const unsigned long v = std::stoul(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad window center '" + item + "'");
    centers.push_back(v);
  }
  if (centers.empty()) throw std::invalid_argument("no window centers given");
  return centers;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active learning for game parameter tuning"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  auto* run = app.add_subcommand("run", "Run a cross-validated acquisition experiment");
  run->add_option("--config", config_path, "Experiment config file")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override experiment.master_seed");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  std::string records_path;
  std::string centers_text = "65,280";
  std::size_t halfwidth = 5;
  auto* summarize = app.add_subcommand("summarize", "Window means of a records.csv");
  summarize->add_option("--records", records_path, "records.csv")->required();
  summarize->add_option("--centers", centers_text, "Comma separated window centers");
  summarize->add_option("--halfwidth", halfwidth, "Window halfwidth");

  std::string task = "regression";
  std::size_t n = 0;
  std::uint64_t data_seed = 1;
  std::string data_out;
  auto* gen = app.add_subcommand("gen-data", "Export a synthetic oracle pool as CSV");
  gen->add_option("--task", task, "regression or classification")
      ->check(CLI::IsMember({"regression", "classification"}));
  gen->add_option("--n", n, "Number of samples")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", data_seed, "Pool seed");
  gen->add_option("--out", data_out, "Output CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto config = altune::load_config(config_path);
      if (*seed_opt) config.master_seed = seed;
      const auto result = altune::run_experiment(config, workers);
      altune::emit_outputs(result, config, out_dir);
      std::cout << "wrote " << result.records.size() << " records to " << out_dir << '\n';
    } else if (*summarize) {
      const auto records = altune::load_records(records_path);
      altune::write_summary(std::cout, altune::summarize(records, parse_centers(centers_text), halfwidth));
    } else if (*gen) {
      if (task == "regression") {
        const auto pool = altune::generate_regression_pool(n, {}, altune::default_enemy_space(), data_seed);
        altune::save_regression_csv(data_out, pool.samples());
      } else {
        const auto pool = altune::generate_preference_pool(n, {}, altune::default_control_space(), data_seed);
        altune::save_preference_csv(data_out, pool.samples());
      }
    }
  } catch (const altune::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
