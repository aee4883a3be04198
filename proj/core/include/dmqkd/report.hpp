#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmqkd/keyrate.hpp"

namespace dmqkd {

// Deterministic number formatting for CSV output: '.' decimal separator,
// scientific notation for 0 < |x| < 1e-3, empty cell for NaN.
std::string format_number(double x);

std::uint64_t fnv1a64(const std::string& data);

// Metadata header lines ('#'-prefixed) embedded at the top of every output
// file; contains no timestamps so identical configs give identical bytes.
std::string metadata_header(std::uint64_t config_hash,
                            const std::vector<std::string>& defaults_applied,
                            const std::vector<std::string>& extra = {});

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

// RFC-style comma-separated rendering with LF line endings; cells containing
// commas or quotes are quoted.
std::string render_csv(const CsvTable& table, const std::string& header);

std::string keyrate_to_json(const KeyRatePoint& p, std::uint64_t config_hash,
                            const std::vector<std::string>& defaults_applied);

CsvTable sweep_table(const std::vector<KeyRatePoint>& points);

}  // namespace dmqkd
