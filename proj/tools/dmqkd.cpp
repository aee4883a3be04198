// dmqkd: discrete-modulation CV-QKD key-rate calculator.
//
// Subcommands:
//   eta-scan        source-quality scan over QAM sizes, V_G and V_A
//   keyrate         one operating point with full diagnostics (JSON)
//   sweep           key rate vs distance for a set of constellations (CSV)
//   noise-frontier  largest tolerable excess noise per distance (CSV)

#include <atomic>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <thread>

#include <CLI11.hpp>

#include "dmqkd/config.hpp"
#include "dmqkd/report.hpp"
#include "dmqkd/version.hpp"

namespace {

using namespace dmqkd;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitPartial = 4;

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  std::string format;
  int threads = -1;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path, "JSON config file");
  cmd->add_option("--out", args->out_path, "Output path (default: stdout)");
  cmd->add_option("--threads", args->threads, "Worker threads (0 = all cores)");
  cmd->add_option("--format", args->format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--override", args->overrides,
                  "Config override KEY=VALUE (repeatable, dotted paths)");
}

RunConfig load(const CommonArgs& args) {
  RunConfig cfg = args.config_path.empty()
                      ? parse_config("{}", args.overrides)
                      : load_config_file(args.config_path, args.overrides);
  if (args.threads >= 0) cfg.threads = args.threads;
  if (!args.out_path.empty()) cfg.output.path = args.out_path;
  if (args.format == "csv") cfg.output.format = OutputConfig::Format::csv;
  if (args.format == "json") cfg.output.format = OutputConfig::Format::json;
  return cfg;
}

void write_output(const RunConfig& cfg, const std::string& content) {
  if (cfg.output.path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(cfg.output.path, std::ios::binary);
  if (!out) throw config_error("cannot open output path: " + cfg.output.path);
  out << content;
}

std::string table_to_json(const CsvTable& table, const RunConfig& cfg,
                          const std::vector<std::string>& extra) {
  nlohmann::json j;
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(cfg.config_hash));
  j["metadata"] = {{"tool", std::string("dmqkd ") + kVersion},
                   {"config_hash", hex},
                   {"defaults", cfg.defaults_applied},
                   {"notes", extra}};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json obj;
    for (std::size_t i = 0; i < table.columns.size(); ++i)
      obj[table.columns[i]] = row[i];
    rows.push_back(obj);
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

std::string render(const RunConfig& cfg, const CsvTable& table,
                   const std::vector<std::string>& extra = {}) {
  if (cfg.output.format == OutputConfig::Format::json)
    return table_to_json(table, cfg, extra);
  return render_csv(table, metadata_header(cfg.config_hash,
                                           cfg.defaults_applied, extra));
}

// Index-dispatched worker pool; results keep input order.
template <typename Fn>
void parallel_rows(std::size_t count, int threads, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  unsigned hw = std::thread::hardware_concurrency();
  unsigned n = threads > 0 ? static_cast<unsigned>(threads) : (hw > 0 ? hw : 1);
  n = std::min<std::size_t>(n, std::max<std::size_t>(count, 1));
  if (n <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

int cmd_eta_scan(const RunConfig& cfg) {
  const auto& scan = cfg.eta_scan;
  if (scan.qam_sides.empty() || scan.vg_list.empty() || scan.va_list.empty())
    throw config_error(
        "eta-scan needs eta_scan.L_list, eta_scan.V_G_list and eta_scan.V_A_list");

  struct Row {
    int side;
    double vg, va;
  };
  std::vector<Row> grid;
  for (int side : scan.qam_sides)
    for (double vg : scan.vg_list)
      for (double va : scan.va_list) grid.push_back({side, vg, va});

  CsvTable table;
  table.columns = {"qam_n", "V_G", "V_A", "r", "one_minus_eta_A", "error"};
  table.rows.resize(grid.size());

  parallel_rows(grid.size(), cfg.threads, [&](std::size_t i) {
    const Row& g = grid[i];
    std::vector<std::string> row(6);
    row[0] = std::to_string(g.side * g.side);
    row[1] = format_number(g.vg);
    row[2] = format_number(g.va);
    try {
      const double r = calibrate_r(g.side, g.vg, g.va);
      const auto pure =
          build_purification(qam_constellation({g.side, r, g.vg}),
                             cfg.numerics.cutoff);
      if (!pure.eta_a)
        throw numeric_error("eta_A undefined for this source");
      row[3] = format_number(r);
      row[4] = format_number(1.0 - *pure.eta_a);
    } catch (const std::exception& e) {
      row[5] = e.what();
    }
    table.rows[i] = std::move(row);
  });

  bool partial = false;
  for (const auto& row : table.rows) partial |= !row[5].empty();
  write_output(cfg, render(cfg, table));
  return partial ? kExitPartial : kExitOk;
}

int cmd_keyrate(const RunConfig& cfg) {
  const ThreeModeSource src =
      make_source(cfg.constellation, cfg.protocol, cfg.numerics);
  const ChannelParams ch = make_channel(cfg.channel);
  KeyRatePoint pt = key_rate(src, ch, cfg.protocol.beta,
                             cfg.protocol.measurement, cfg.numerics);
  if (cfg.channel.distance_km) pt.distance_km = *cfg.channel.distance_km;
  write_output(cfg, keyrate_to_json(pt, cfg.config_hash, cfg.defaults_applied));
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg) {
  SweepSpec spec;
  spec.distances_km = cfg.sweep.distances_km;
  spec.transmittances = cfg.sweep.transmittances;
  spec.att_db_per_km = cfg.channel.att_db_per_km;
  spec.excess_noise = cfg.channel.excess_noise;
  spec.convention = cfg.channel.convention;
  spec.beta = cfg.protocol.beta;
  spec.measurement = cfg.protocol.measurement;
  spec.numerics = cfg.numerics;
  spec.include_gaussian = cfg.sweep.include_gaussian;
  spec.gaussian_v_mod = cfg.sweep.gaussian_v_mod;
  spec.threads = cfg.threads;
  for (const auto& cc : cfg.sweep.constellations)
    spec.sources.push_back(make_source(cc, cfg.protocol, cfg.numerics));

  const auto points = sweep(spec);
  bool partial = false;
  for (const auto& p : points) partial |= !p.error.empty();
  write_output(cfg, render(cfg, sweep_table(points)));
  return partial ? kExitPartial : kExitOk;
}

int cmd_noise_frontier(const RunConfig& cfg) {
  const auto& nf = cfg.noise_frontier;
  if (nf.distances_km.empty() || nf.constellations.empty())
    throw config_error(
        "noise-frontier needs noise_frontier.distances_km and "
        "noise_frontier.constellations");

  std::vector<ThreeModeSource> sources;
  for (const auto& cc : nf.constellations)
    sources.push_back(make_source(cc, cfg.protocol, cfg.numerics));

  struct Row {
    std::size_t source;
    double distance;
  };
  std::vector<Row> grid;
  for (std::size_t s = 0; s < sources.size(); ++s)
    for (double d : nf.distances_km) grid.push_back({s, d});

  CsvTable table;
  table.columns = {"distance_km", "constellation", "eps_max", "reason"};
  table.rows.resize(grid.size());

  parallel_rows(grid.size(), cfg.threads, [&](std::size_t i) {
    const Row& g = grid[i];
    std::vector<std::string> row(4);
    row[0] = format_number(g.distance);
    row[1] = sources[g.source].constellation.label;
    try {
      const double t =
          distance_to_transmittance(g.distance, cfg.channel.att_db_per_km);
      const double eps = tolerable_excess_noise(
          sources[g.source], t, cfg.channel.convention, cfg.protocol.beta,
          cfg.protocol.measurement, cfg.numerics, cfg.numerics.frontier_tol);
      row[2] = format_number(eps);
    } catch (const std::exception& e) {
      row[3] = e.what();
    }
    table.rows[i] = std::move(row);
  });

  bool partial = false;
  for (const auto& row : table.rows) partial |= !row[3].empty();
  write_output(cfg, render(cfg, table,
                           {"frontier_tol: " +
                            format_number(cfg.numerics.frontier_tol)}));
  return partial ? kExitPartial : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("dmqkd ") + dmqkd::kVersion +
               " - discrete-modulation CV-QKD key rates"};
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* eta = app.add_subcommand("eta-scan", "Source-quality scan");
  CLI::App* kr = app.add_subcommand("keyrate", "Single operating point (JSON)");
  CLI::App* sw = app.add_subcommand("sweep", "Key rate vs distance (CSV)");
  CLI::App* nf = app.add_subcommand("noise-frontier", "Tolerable excess noise");
  for (CLI::App* cmd : {eta, kr, sw, nf}) add_common(cmd, &args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    const RunConfig cfg = load(args);
    if (eta->parsed()) return cmd_eta_scan(cfg);
    if (kr->parsed()) return cmd_keyrate(cfg);
    if (sw->parsed()) return cmd_sweep(cfg);
    if (nf->parsed()) return cmd_noise_frontier(cfg);
    return kExitConfig;
  } catch (const dmqkd::config_error& e) {
    std::cerr << "{\"error_class\":\"config\",\"message\":"
              << nlohmann::json(e.what()).dump() << "}\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "{\"error_class\":\"numeric\",\"message\":"
              << nlohmann::json(e.what()).dump() << "}\n";
    return kExitNumeric;
  }
}
