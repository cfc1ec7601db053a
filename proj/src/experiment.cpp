#include "macsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace macsim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": " + v);
  }
  if (pos != v.size())
    throw std::invalid_argument("config: bad number for " + key + ": " + v);
  return d;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  if (d < 0 || d != std::floor(d))
    throw std::invalid_argument("config: expected non-negative integer for " +
                                key + ": " + v);
  return static_cast<std::uint64_t>(d);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: expected bool for " + key + ": " + v);
}

Tick ms_to_ticks(double v) {
  return static_cast<Tick>(std::llround(v * 1000.0));
}
Tick s_to_ticks(double v) {
  return static_cast<Tick>(std::llround(v * 1e6));
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  bool fbp_given = false;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    lineno++;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": malformed section header");
      section = line.substr(1, line.size() - 2);
      if (section != "protocol" && section != "power" &&
          section != "topology" && section != "traffic" && section != "sim")
        throw std::invalid_argument("config: unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (section.empty())
      throw std::invalid_argument("config: key before any section: " + key);

    MacParams& p = cfg.sim.params;
    if (section == "protocol") {
      if (key == "name") cfg.sim.protocol = val;
      else if (key == "bitrate_bps") p.bitrate_bps = static_cast<std::uint32_t>(parse_u64(key, val));
      else if (key == "ctrl_bytes") p.ctrl_bytes = static_cast<std::uint32_t>(parse_u64(key, val));
      else if (key == "data_bytes") p.data_bytes = static_cast<std::uint32_t>(parse_u64(key, val));
      else if (key == "block_bytes") p.block_bytes = static_cast<std::uint32_t>(parse_u64(key, val));
      else if (key == "header_bytes") p.header_bytes = static_cast<std::uint32_t>(parse_u64(key, val));
      else if (key == "queue_capacity") p.queue_capacity = static_cast<std::uint32_t>(parse_u64(key, val));
      else if (key == "retries") p.retries = static_cast<std::uint32_t>(parse_u64(key, val));
      else if (key == "cw") p.cw = static_cast<std::uint32_t>(parse_u64(key, val));
      else if (key == "sync_period_frames") p.sync_period_frames = static_cast<std::uint32_t>(parse_u64(key, val));
      else if (key == "dmac_retries") p.dmac_retries = static_cast<std::uint32_t>(parse_u64(key, val));
      else if (key == "slot_len_us") p.slot_len = parse_u64(key, val);
      else if (key == "sifs_us") p.sifs = parse_u64(key, val);
      else if (key == "turnaround_us") p.turnaround = parse_u64(key, val);
      else if (key == "frame_len_ms") p.frame_len = ms_to_ticks(parse_double(key, val));
      else if (key == "active_len_ms") p.active_len = ms_to_ticks(parse_double(key, val));
      else if (key == "sync_len_ms") p.sync_len = ms_to_ticks(parse_double(key, val));
      else if (key == "ta_ms") p.ta = ms_to_ticks(parse_double(key, val));
      else if (key == "mu_ms") p.mu = ms_to_ticks(parse_double(key, val));
      else if (key == "dmac_cycle_ms") p.dmac_cycle = ms_to_ticks(parse_double(key, val));
      else if (key == "flood_listen_ms") p.flood_listen = ms_to_ticks(parse_double(key, val));
      else if (key == "tw_ms") p.tw = ms_to_ticks(parse_double(key, val));
      else if (key == "sample_len_ms") p.sample_len = ms_to_ticks(parse_double(key, val));
      else if (key == "theta_ppm") p.theta_ppm = parse_double(key, val);
      else if (key == "preassigned_levels") p.preassigned_levels = parse_bool(key, val);
      else if (key == "full_buffer_priority") { p.full_buffer_priority = parse_bool(key, val); fbp_given = true; }
      else throw std::invalid_argument("config: unknown key in [protocol]: " + key);
    } else if (section == "power") {
      if (key == "sleep_uw") cfg.sim.power.sleep_uw = parse_u64(key, val);
      else if (key == "listen_uw") cfg.sim.power.listen_uw = parse_u64(key, val);
      else if (key == "rx_uw") cfg.sim.power.rx_uw = parse_u64(key, val);
      else if (key == "tx_uw") cfg.sim.power.tx_uw = parse_u64(key, val);
      else throw std::invalid_argument("config: unknown key in [power]: " + key);
    } else if (section == "topology") {
      if (key == "rows") cfg.sim.rows = static_cast<std::uint32_t>(parse_u64(key, val));
      else if (key == "cols") cfg.sim.cols = static_cast<std::uint32_t>(parse_u64(key, val));
      else if (key == "spacing_m") cfg.sim.spacing = parse_double(key, val);
      else if (key == "range_m") cfg.sim.range = parse_double(key, val);
      else if (key == "root") cfg.sim.root = static_cast<NodeId>(parse_u64(key, val));
      else throw std::invalid_argument("config: unknown key in [topology]: " + key);
    } else if (section == "traffic") {
      if (key == "pattern") {
        if (val == "convergecast") cfg.sim.traffic.pattern = TrafficPattern::CONVERGECAST;
        else if (val == "local_gossip") cfg.sim.traffic.pattern = TrafficPattern::LOCAL_GOSSIP;
        else throw std::invalid_argument("config: unknown traffic pattern: " + val);
      } else if (key == "interarrival_s") {
        cfg.sim.traffic.interarrival = s_to_ticks(parse_double(key, val));
      } else {
        throw std::invalid_argument("config: unknown key in [traffic]: " + key);
      }
    } else {  // sim
      if (key == "duration_s") cfg.sim.duration = s_to_ticks(parse_double(key, val));
      else if (key == "seed") cfg.sim.seed = parse_u64(key, val);
      else if (key == "output") cfg.output = val;
      else throw std::invalid_argument("config: unknown key in [sim]: " + key);
    }
  }
  if (cfg.sim.protocol != "all" && !protocol_known(cfg.sim.protocol))
    throw std::invalid_argument("config: unknown protocol: " + cfg.sim.protocol);
  if (!fbp_given && cfg.sim.protocol == "tmac" &&
      cfg.sim.traffic.pattern == TrafficPattern::CONVERGECAST)
    cfg.sim.params.full_buffer_priority = true;
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

MetricsRow run_experiment(const SimConfig& cfg, std::uint64_t seed) {
  SimConfig c = cfg;
  c.seed = seed;
  if (c.protocol == "tmac" &&
      c.traffic.pattern == TrafficPattern::CONVERGECAST &&
      !c.params.full_buffer_priority)
    c.params.full_buffer_priority = true;
  Simulation sim(c);
  MetricsRow row;
  row.protocol = c.protocol;
  row.interarrival_s = to_seconds(c.traffic.interarrival);
  row.seed = seed;
  row.result = sim.run();
  return row;
}

const char* const kCsvHeader =
    "protocol,interarrival_s,seed,delivery_ratio,avg_node_energy_mj,"
    "total_energy_mj,avg_latency_ms,originated,delivered,dropped";

std::string format_row(const MetricsRow& r) {
  char buf[320];
  std::snprintf(buf, sizeof(buf),
                "%s,%.6g,%llu,%.6f,%.6f,%.6f,%.3f,%llu,%llu,%llu",
                r.protocol.c_str(), r.interarrival_s,
                static_cast<unsigned long long>(r.seed),
                r.result.delivery_ratio, r.result.avg_node_energy_mj,
                r.result.total_energy_mj, r.result.avg_latency_ms,
                static_cast<unsigned long long>(r.result.originated),
                static_cast<unsigned long long>(r.result.delivered),
                static_cast<unsigned long long>(r.result.dropped));
  return buf;
}

std::string rows_to_csv(const std::vector<MetricsRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += format_row(r);
    out += '\n';
  }
  return out;
}

const std::vector<std::string>& all_protocols() {
  static const std::vector<std::string> names = {
      "xmac", "wisemac", "bmac+", "bmac", "dmac", "tmac", "smac"};
  return names;
}

std::vector<MetricsRow> sweep_interarrival(const ExperimentConfig& cfg,
                                           const std::vector<double>& values_s,
                                           std::uint32_t n_seeds) {
  if (values_s.empty() || n_seeds == 0)
    throw std::invalid_argument("sweep: need at least one value and one seed");
  std::vector<std::string> protocols;
  if (cfg.sim.protocol == "all")
    protocols = all_protocols();
  else
    protocols.push_back(cfg.sim.protocol);

  std::vector<MetricsRow> rows;
  for (const auto& proto : protocols) {
    for (double v : values_s) {
      for (std::uint32_t i = 0; i < n_seeds; ++i) {
        SimConfig c = cfg.sim;
        c.protocol = proto;
        c.traffic.interarrival = s_to_ticks(v);
        rows.push_back(run_experiment(c, cfg.sim.seed + i));
      }
    }
  }
  return rows;
}

const char* const kTaCsvHeader = "ta_ms,seed,delivery_ratio,avg_node_energy_mj";

std::vector<TaRow> sweep_ta(const ExperimentConfig& cfg,
                            const std::vector<double>& ta_values_ms,
                            std::uint32_t n_seeds) {
  if (cfg.sim.protocol != "tmac")
    throw std::invalid_argument("sweep-ta requires protocol name=tmac");
  if (ta_values_ms.empty() || n_seeds == 0)
    throw std::invalid_argument("sweep-ta: need at least one value and one seed");
  std::vector<TaRow> rows;
  for (double ta : ta_values_ms) {
    for (std::uint32_t i = 0; i < n_seeds; ++i) {
      SimConfig c = cfg.sim;
      c.params.ta = ms_to_ticks(ta);
      if (c.params.ta == 0) c.params.ta = 1;
      MetricsRow m = run_experiment(c, cfg.sim.seed + i);
      rows.push_back(TaRow{ta, m.seed, m.result.delivery_ratio,
                           m.result.avg_node_energy_mj});
    }
  }
  return rows;
}

std::string ta_rows_to_csv(const std::vector<TaRow>& rows) {
  std::string out = kTaCsvHeader;
  out += '\n';
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.6g,%llu,%.6f,%.6f", r.ta_ms,
                  static_cast<unsigned long long>(r.seed), r.delivery_ratio,
                  r.avg_node_energy_mj);
    out += buf;
    out += '\n';
  }
  return out;
}

int CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable parse_csv_text(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (first) {
      t.columns = cells;
      first = false;
    } else {
      if (cells.size() != t.columns.size())
        throw std::runtime_error("csv: ragged row: " + line);
      t.rows.push_back(cells);
    }
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open csv file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv_text(ss.str());
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}
}  // namespace

double iqr(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("iqr of empty set");
  std::sort(v.begin(), v.end());
  return quantile(v, 0.75) - quantile(v, 0.25);
}

bool check_ordering(const CsvTable& table,
                    const std::vector<std::string>& expected,
                    std::ostream& report) {
  const int pc = table.column_index("protocol");
  const int ic = table.column_index("interarrival_s");
  const int ec = table.column_index("avg_node_energy_mj");
  if (pc < 0 || ic < 0 || ec < 0)
    throw std::runtime_error(
        "check-ordering: csv must have protocol, interarrival_s and "
        "avg_node_energy_mj columns");
  if (expected.size() < 2)
    throw std::invalid_argument("check-ordering: need at least two protocols");

  std::map<double, std::map<std::string, std::vector<double>>> data;
  for (const auto& row : table.rows) {
    data[std::stod(row[ic])][row[pc]].push_back(std::stod(row[ec]));
  }
  if (data.empty()) throw std::runtime_error("check-ordering: empty csv");

  bool pass = true;
  for (const auto& [inter, per_proto] : data) {
    for (const auto& name : expected) {
      if (per_proto.find(name) == per_proto.end())
        throw std::runtime_error("check-ordering: no rows for protocol '" +
                                 name + "' at interarrival " +
                                 std::to_string(inter));
    }
    for (std::size_t i = 0; i + 1 < expected.size(); ++i) {
      const auto& a = expected[i];
      const auto& b = expected[i + 1];
      const double ma = median(per_proto.at(a));
      const double mb = median(per_proto.at(b));
      const double gap = mb - ma;
      const double spread =
          std::max(iqr(per_proto.at(a)), iqr(per_proto.at(b)));
      const bool ok = ma < mb && gap > spread;
      pass = pass && ok;
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "interarrival_s=%.6g %s < %s: %s (medians %.6f vs %.6f, "
                    "gap %.6f, iqr %.6f)",
                    inter, a.c_str(), b.c_str(), ok ? "PASS" : "FAIL", ma, mb,
                    gap, spread);
      report << buf << "\n";
    }
  }
  report << (pass ? "ORDERING PASS" : "ORDERING FAIL") << "\n";
  return pass;
}

std::string emit_plot_data(const CsvTable& table, const std::string& x,
                           const std::string& y, const std::string& group) {
  const int xc = table.column_index(x);
  const int yc = table.column_index(y);
  const int gc = table.column_index(group);
  if (xc < 0) throw std::runtime_error("plot-data: unknown column: " + x);
  if (yc < 0) throw std::runtime_error("plot-data: unknown column: " + y);
  if (gc < 0) throw std::runtime_error("plot-data: unknown column: " + group);

  std::map<std::pair<std::string, double>, std::vector<double>> buckets;
  for (const auto& row : table.rows) {
    buckets[{row[gc], std::stod(row[xc])}].push_back(std::stod(row[yc]));
  }
  std::ostringstream out;
  out << group << "," << x << ",median_" << y << ",min_" << y << ",max_" << y
      << "\n";
  char buf[256];
  for (const auto& [key, vals] : buckets) {
    const double mn = *std::min_element(vals.begin(), vals.end());
    const double mx = *std::max_element(vals.begin(), vals.end());
    std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6f,%.6f,%.6f",
                  key.first.c_str(), key.second, median(vals), mn, mx);
    out << buf << "\n";
  }
  return out.str();
}

}  // namespace macsim
