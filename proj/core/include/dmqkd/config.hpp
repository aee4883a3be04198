#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dmqkd/channel.hpp"
#include "dmqkd/constellation.hpp"
#include "dmqkd/keyrate.hpp"

namespace dmqkd {

// One run = one JSON config file; CLI --override KEY=VALUE flags are applied
// to the raw document before parsing. Every defaulted key is echoed in the
// output metadata so reruns are reproducible from the output alone.

struct ConstellationConfig {
  enum class Kind { qam, custom };
  Kind kind = Kind::qam;
  int side = 4;              // L for qam
  double gauss_vg = 3.0;     // V_G
  std::optional<double> spacing_r;
  std::optional<double> target_va;
  Constellation custom;      // populated for kind == custom
  std::string label;
};

struct ChannelConfig {
  std::optional<double> transmittance;
  std::optional<double> distance_km;
  double excess_noise = 0.0;
  NoiseConvention convention = NoiseConvention::paper_cloner;
  double att_db_per_km = 0.2;
};

struct ProtocolConfig {
  double beta = 0.95;
  Measurement measurement = Measurement::homodyne_x;
  double eta_bs = 0.9;
};

struct OutputConfig {
  std::string path;  // empty = stdout
  enum class Format { csv, json };
  Format format = Format::csv;
};

struct SweepSection {
  std::vector<double> distances_km;
  std::vector<double> transmittances;
  std::vector<ConstellationConfig> constellations;
  bool include_gaussian = false;
  double gaussian_v_mod = 0;  // 0 = match first constellation's B0 variance
};

struct EtaScanSection {
  std::vector<int> qam_sides;      // L values
  std::vector<double> vg_list;
  std::vector<double> va_list;
};

struct NoiseFrontierSection {
  std::vector<double> distances_km;
  std::vector<ConstellationConfig> constellations;
};

struct RunConfig {
  ConstellationConfig constellation;  // for single-point keyrate runs
  ChannelConfig channel;
  ProtocolConfig protocol;
  NumericsParams numerics;
  OutputConfig output;
  SweepSection sweep;
  EtaScanSection eta_scan;
  NoiseFrontierSection noise_frontier;
  int threads = 0;

  std::vector<std::string> defaults_applied;  // "section.key=value" entries
  std::string canonical_json;                 // fully defaulted document
  std::uint64_t config_hash = 0;              // FNV-1a of canonical_json
};

// Parses (and validates) a config document; `overrides` entries are
// KEY=VALUE with dotted paths, e.g. "channel.eps_C=0.05". Throws
// config_error on schema violations.
RunConfig parse_config(const std::string& json_text,
                       const std::vector<std::string>& overrides = {});

RunConfig load_config_file(const std::string& path,
                           const std::vector<std::string>& overrides = {});

// Builds the three-mode source described by a constellation section
// (calibrating r against target_VA when requested).
ThreeModeSource make_source(const ConstellationConfig& cc,
                            const ProtocolConfig& protocol,
                            const NumericsParams& numerics);

ChannelParams make_channel(const ChannelConfig& ch);

}  // namespace dmqkd
