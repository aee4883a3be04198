#include "dmqkd/report.hpp"

#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>

#include "dmqkd/version.hpp"

namespace dmqkd {

std::string format_number(double x) {
  if (std::isnan(x)) return "";
  if (x == 0.0) return "0";
  char buf[48];
  if (std::abs(x) < 1e-3) {
    std::snprintf(buf, sizeof buf, "%.10e", x);
  } else {
    std::snprintf(buf, sizeof buf, "%.10g", x);
  }
  return buf;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string metadata_header(std::uint64_t config_hash,
                            const std::vector<std::string>& defaults_applied,
                            const std::vector<std::string>& extra) {
  std::ostringstream out;
  out << "# dmqkd " << kVersion << "\n";
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(config_hash));
  out << "# config_hash: " << hex << "\n";
  out << "# defaults:";
  for (const auto& d : defaults_applied) out << " " << d;
  out << "\n";
  for (const auto& line : extra) out << "# " << line << "\n";
  return out.str();
}

namespace {

std::string csv_cell(const std::string& raw) {
  if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
  std::string quoted = "\"";
  for (char c : raw) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

std::string render_csv(const CsvTable& table, const std::string& header) {
  std::ostringstream out;
  out << header;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out << ',';
    out << csv_cell(table.columns[i]);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << csv_cell(row[i]);
    }
    out << '\n';
  }
  return out.str();
}

std::string keyrate_to_json(const KeyRatePoint& p, std::uint64_t config_hash,
                            const std::vector<std::string>& defaults_applied) {
  nlohmann::json j;
  j["tool"] = std::string("dmqkd ") + kVersion;
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(config_hash));
  j["config_hash"] = hex;
  j["defaults_applied"] = defaults_applied;
  if (!std::isnan(p.distance_km)) j["distance_km"] = p.distance_km;
  j["T_C"] = p.transmittance;
  j["eps_C"] = p.excess_noise;
  j["constellation"] = p.constellation_label;
  j["beta"] = p.beta;
  j["I_AB_bits"] = p.mutual_info;
  j["S_sup_bits"] = p.holevo_sup;
  j["K_R_bits"] = p.key_rate;
  j["K_R_clamped_bits"] = p.key_rate_clamped;
  j["kappa_star"] = {{"k11", p.kappa11_star}, {"k22", p.kappa22_star}};
  j["search_evaluations"] = p.search_evaluations;
  j["reduced_1d"] = p.reduced_1d;
  j["feasible"] = p.feasible;
  j["feasibility_margin"] = p.feasibility_margin;
  j["cutoff"] = p.cutoff;
  if (!p.error.empty()) j["error"] = p.error;
  return j.dump(2) + "\n";
}

CsvTable sweep_table(const std::vector<KeyRatePoint>& points) {
  CsvTable table;
  table.columns = {"distance_km", "T_C",   "eps_C",        "constellation",
                   "I_AB",        "S_sup", "K_R",          "K_R_clamped",
                   "error"};
  for (const auto& p : points) {
    table.rows.push_back({format_number(p.distance_km),
                          format_number(p.transmittance),
                          format_number(p.excess_noise), p.constellation_label,
                          p.error.empty() ? format_number(p.mutual_info) : "",
                          p.error.empty() ? format_number(p.holevo_sup) : "",
                          p.error.empty() ? format_number(p.key_rate) : "",
                          p.error.empty() ? format_number(p.key_rate_clamped) : "",
                          p.error});
  }
  return table;
}

}  // namespace dmqkd
