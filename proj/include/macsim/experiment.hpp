#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "macsim/sim.hpp"

namespace macsim {

// Parsed experiment description: one simulation setup plus harness extras.
struct ExperimentConfig {
  SimConfig sim;
  std::string output;  // optional CSV path ([sim] output=)
};

// Section/key text format; unknown sections or keys are hard errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct MetricsRow {
  std::string protocol;
  double interarrival_s = 0;
  std::uint64_t seed = 0;
  SimResult result;
};

MetricsRow run_experiment(const SimConfig& cfg, std::uint64_t seed);

extern const char* const kCsvHeader;
std::string format_row(const MetricsRow& row);
std::string rows_to_csv(const std::vector<MetricsRow>& rows);

// All protocol names in the expected energy order (cheapest first).
const std::vector<std::string>& all_protocols();

// One row per (protocol, interarrival value, seed). Seeds are
// base_seed .. base_seed + n_seeds - 1. protocol "all" expands.
std::vector<MetricsRow> sweep_interarrival(const ExperimentConfig& cfg,
                                           const std::vector<double>& values_s,
                                           std::uint32_t n_seeds);

struct TaRow {
  double ta_ms = 0;
  std::uint64_t seed = 0;
  double delivery_ratio = 0;
  double avg_node_energy_mj = 0;
};
extern const char* const kTaCsvHeader;
std::vector<TaRow> sweep_ta(const ExperimentConfig& cfg,
                            const std::vector<double>& ta_values_ms,
                            std::uint32_t n_seeds);
std::string ta_rows_to_csv(const std::vector<TaRow>& rows);

// Generic CSV-with-header reader (no quoting; plain comma separation).
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  int column_index(const std::string& name) const;  // -1 when absent
};
CsvTable read_csv(const std::string& path);
CsvTable parse_csv_text(const std::string& text);

// Adjacent-pair median comparison per interarrival; gaps must also clear the
// across-seed IQR. Writes one line per comparison to `report`.
bool check_ordering(const CsvTable& table,
                    const std::vector<std::string>& expected,
                    std::ostream& report);

// Long-format (group, x, median y, min y, max y) table.
std::string emit_plot_data(const CsvTable& table, const std::string& x,
                           const std::string& y, const std::string& group);

double median(std::vector<double> v);
double iqr(std::vector<double> v);

}  // namespace macsim
