#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "macsim/experiment.hpp"

namespace {

std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> out;
  std::istringstream in(csv);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  if (out.empty()) throw CLI::ValidationError("--values", "empty value list");
  return out;
}

std::vector<std::string> parse_names(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write output file: " + path);
  f << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wireless sensor network MAC protocol simulator"};
  app.require_subcommand(1);

  std::string config_path, csv_path, out_path;
  std::string values_str = "1,2,5,10";
  std::string expect_str = "xmac,wisemac,bmac+,bmac,dmac,tmac,smac";
  std::string param = "interarrival";
  std::string x_col = "interarrival_s", y_col = "avg_node_energy_mj",
              group_col = "protocol";
  std::uint32_t n_seeds = 5;

  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("-o,--output", out_path, "CSV output path (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "Sweep interarrival over seeds");
  sweep->add_option("config", config_path)->required();
  sweep->add_option("--param", param, "swept parameter (only: interarrival)");
  sweep->add_option("--values", values_str, "comma-separated values, seconds");
  sweep->add_option("--seeds", n_seeds, "number of seeds");
  sweep->add_option("-o,--output", out_path, "CSV output path (default stdout)");

  auto* sweep_ta = app.add_subcommand("sweep-ta", "Sweep TMAC's TA timeout");
  sweep_ta->add_option("config", config_path)->required();
  sweep_ta->add_option("--values", values_str, "comma-separated TA values, ms")
      ->required();
  sweep_ta->add_option("--seeds", n_seeds, "number of seeds");
  sweep_ta->add_option("-o,--output", out_path, "CSV output path");

  auto* check = app.add_subcommand("check-ordering",
                                   "Check the per-protocol energy ordering");
  check->add_option("csv", csv_path, "sweep result CSV")->required();
  check->add_option("--expect", expect_str,
                    "expected order, cheapest first (comma-separated)");

  auto* plot = app.add_subcommand("plot-data", "Aggregate a CSV for plotting");
  plot->add_option("csv", csv_path)->required();
  plot->add_option("--x", x_col, "x-axis column");
  plot->add_option("--y", y_col, "y-axis column");
  plot->add_option("--group", group_col, "grouping column");
  plot->add_option("-o,--output", out_path, "output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      macsim::ExperimentConfig cfg = macsim::load_config(config_path);
      if (cfg.sim.protocol == "all")
        throw std::runtime_error("run: pick one protocol (use sweep for all)");
      macsim::MetricsRow row = macsim::run_experiment(cfg.sim, cfg.sim.seed);
      std::string csv = std::string(macsim::kCsvHeader) + "\n" +
                        macsim::format_row(row) + "\n";
      write_output(out_path.empty() ? cfg.output : out_path, csv);
    } else if (*sweep) {
      if (param != "interarrival")
        throw std::runtime_error("sweep: unsupported --param " + param);
      macsim::ExperimentConfig cfg = macsim::load_config(config_path);
      auto rows =
          macsim::sweep_interarrival(cfg, parse_values(values_str), n_seeds);
      write_output(out_path.empty() ? cfg.output : out_path,
                   macsim::rows_to_csv(rows));
    } else if (*sweep_ta) {
      macsim::ExperimentConfig cfg = macsim::load_config(config_path);
      auto rows = macsim::sweep_ta(cfg, parse_values(values_str), n_seeds);
      write_output(out_path.empty() ? cfg.output : out_path,
                   macsim::ta_rows_to_csv(rows));
    } else if (*check) {
      macsim::CsvTable table = macsim::read_csv(csv_path);
      const bool ok =
          macsim::check_ordering(table, parse_names(expect_str), std::cout);
      return ok ? 0 : 1;
    } else if (*plot) {
      macsim::CsvTable table = macsim::read_csv(csv_path);
      write_output(out_path,
                   macsim::emit_plot_data(table, x_col, y_col, group_col));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
