#include "dmqkd/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "dmqkd/report.hpp"

namespace dmqkd {

using json = nlohmann::json;

namespace {

Measurement parse_measurement(const std::string& s) {
  if (s == "homodyne_x" || s == "homodyne") return Measurement::homodyne_x;
  if (s == "homodyne_p") return Measurement::homodyne_p;
  if (s == "heterodyne") return Measurement::heterodyne;
  throw config_error("protocol.measurement: unknown value \"" + s + "\"");
}

std::string measurement_name(Measurement m) {
  switch (m) {
    case Measurement::homodyne_x: return "homodyne_x";
    case Measurement::homodyne_p: return "homodyne_p";
    case Measurement::heterodyne: return "heterodyne";
  }
  return "homodyne_x";
}

NoiseConvention parse_convention(const std::string& s) {
  if (s == "paper_cloner" || s == "cloner") return NoiseConvention::paper_cloner;
  if (s == "input_referred") return NoiseConvention::input_referred;
  throw config_error("channel.convention: unknown value \"" + s + "\"");
}

std::string convention_name(NoiseConvention c) {
  return c == NoiseConvention::paper_cloner ? "paper_cloner" : "input_referred";
}

// Reads keys with defaults, recording every default applied.
class Section {
 public:
  Section(const json& root, std::string name, std::vector<std::string>* defaults)
      : name_(std::move(name)), defaults_(defaults) {
    if (root.contains(name_)) {
      if (!root.at(name_).is_object())
        throw config_error(name_ + ": expected an object");
      obj_ = &root.at(name_);
    }
  }

  bool has(const char* key) const { return obj_ && obj_->contains(key); }
  const json& raw(const char* key) const { return obj_->at(key); }
  bool present() const { return obj_ != nullptr; }

  template <typename T>
  T get(const char* key, const T& fallback) const {
    if (has(key)) {
      try {
        return obj_->at(key).get<T>();
      } catch (const json::exception& e) {
        throw config_error(name_ + "." + key + ": " + e.what());
      }
    }
    defaults_->push_back(name_ + "." + key + "=" + json(fallback).dump());
    return fallback;
  }

 private:
  std::string name_;
  const json* obj_ = nullptr;
  std::vector<std::string>* defaults_;
};

ConstellationConfig parse_constellation_node(const json& node,
                                             const std::string& where) {
  ConstellationConfig cc;
  if (!node.is_object())
    throw config_error(where + ": expected a constellation object");
  const std::string type = node.value("type", std::string("qam"));
  if (type == "qam") {
    cc.kind = ConstellationConfig::Kind::qam;
    if (!node.contains("L")) throw config_error(where + ": qam needs \"L\"");
    cc.side = node.at("L").get<int>();
    cc.gauss_vg = node.value("V_G", 3.0);
    if (node.contains("r")) cc.spacing_r = node.at("r").get<double>();
    if (node.contains("target_VA")) cc.target_va = node.at("target_VA").get<double>();
    if (!cc.spacing_r && !cc.target_va)
      throw config_error(where + ": qam needs \"r\" or \"target_VA\"");
    if (cc.spacing_r && cc.target_va)
      throw config_error(where + ": give either \"r\" or \"target_VA\", not both");
  } else if (type == "custom") {
    cc.kind = ConstellationConfig::Kind::custom;
    cc.custom = load_constellation(node.dump());
  } else {
    throw config_error(where + ": unknown constellation type \"" + type + "\"");
  }
  cc.label = node.value("label", std::string());
  return cc;
}

json constellation_to_json(const ConstellationConfig& cc) {
  json node;
  if (cc.kind == ConstellationConfig::Kind::qam) {
    node["type"] = "qam";
    node["L"] = cc.side;
    node["V_G"] = cc.gauss_vg;
    if (cc.spacing_r) node["r"] = *cc.spacing_r;
    if (cc.target_va) node["target_VA"] = *cc.target_va;
  } else {
    node["type"] = "custom";
    json pts = json::array();
    for (std::size_t i = 0; i < cc.custom.size(); ++i) {
      pts.push_back({{"x", 2.0 * cc.custom.points[i].real()},
                     {"p", 2.0 * cc.custom.points[i].imag()},
                     {"prob", cc.custom.probs[i]}});
    }
    node["points"] = pts;
  }
  if (!cc.label.empty()) node["label"] = cc.label;
  return node;
}

void apply_override_path(json& root, const std::string& entry) {
  const auto eq = entry.find('=');
  if (eq == std::string::npos || eq == 0)
    throw config_error("override \"" + entry + "\": expected KEY=VALUE");
  const std::string path = entry.substr(0, eq);
  const std::string value = entry.substr(eq + 1);

  json* node = &root;
  std::size_t start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw config_error("override \"" + entry + "\": empty key");
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace

RunConfig parse_config(const std::string& json_text,
                       const std::vector<std::string>& overrides) {
  json root;
  try {
    root = json_text.empty() ? json::object() : json::parse(json_text);
  } catch (const json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
  if (!root.is_object()) throw config_error("config: top level must be an object");
  for (const auto& ov : overrides) apply_override_path(root, ov);

  RunConfig cfg;
  auto& defaults = cfg.defaults_applied;

  if (root.contains("constellation")) {
    cfg.constellation =
        parse_constellation_node(root.at("constellation"), "constellation");
  } else {
    cfg.constellation.target_va = 3.0;
    defaults.push_back("constellation={\"type\":\"qam\",\"L\":4,\"V_G\":3.0,"
                       "\"target_VA\":3.0}");
  }

  {
    Section ch(root, "channel", &defaults);
    if (ch.has("T_C")) cfg.channel.transmittance = ch.raw("T_C").get<double>();
    if (ch.has("distance_km"))
      cfg.channel.distance_km = ch.raw("distance_km").get<double>();
    if (cfg.channel.transmittance && cfg.channel.distance_km)
      throw config_error("channel: give either T_C or distance_km, not both");
    if (!cfg.channel.transmittance && !cfg.channel.distance_km) {
      defaults.push_back("channel.T_C=1.0");
      cfg.channel.transmittance = 1.0;
    }
    cfg.channel.excess_noise = ch.get("eps_C", 0.0);
    cfg.channel.convention =
        parse_convention(ch.get<std::string>("convention", "paper_cloner"));
    cfg.channel.att_db_per_km = ch.get("att_db_per_km", 0.2);
  }

  {
    Section pr(root, "protocol", &defaults);
    cfg.protocol.beta = pr.get("beta", 0.95);
    cfg.protocol.measurement =
        parse_measurement(pr.get<std::string>("measurement", "homodyne_x"));
    cfg.protocol.eta_bs = pr.get("eta_BS", 0.9);
    if (!(cfg.protocol.beta > 0 && cfg.protocol.beta <= 1))
      throw config_error("protocol.beta must lie in (0, 1]");
    if (!(cfg.protocol.eta_bs > 0 && cfg.protocol.eta_bs < 1))
      throw config_error("protocol.eta_BS must lie in (0, 1)");
  }

  {
    Section nm(root, "numerics", &defaults);
    cfg.numerics.cutoff = nm.get("cutoff", 0);
    cfg.numerics.mi_grid = nm.get("mi_grid_points", 4001);
    cfg.numerics.kappa_tol = nm.get("kappa_tol", 1e-6);
    cfg.numerics.seed_grid = nm.get("seed_grid_points", 33);
    cfg.numerics.frontier_tol = nm.get("frontier_tol", 1e-4);
    if (cfg.numerics.mi_grid < 201)
      throw config_error("numerics.mi_grid_points must be >= 201");
    if (cfg.numerics.kappa_tol <= 0 || cfg.numerics.frontier_tol <= 0)
      throw config_error("numerics tolerances must be positive");
  }

  {
    Section out(root, "output", &defaults);
    cfg.output.path = out.get<std::string>("path", "");
    const std::string fmt = out.get<std::string>("format", "csv");
    if (fmt == "csv") cfg.output.format = OutputConfig::Format::csv;
    else if (fmt == "json") cfg.output.format = OutputConfig::Format::json;
    else throw config_error("output.format must be csv or json");
  }

  if (root.contains("sweep")) {
    const json& sw = root.at("sweep");
    cfg.sweep.distances_km =
        sw.value("distances_km", std::vector<double>{});
    cfg.sweep.transmittances = sw.value("T_C_list", std::vector<double>{});
    cfg.sweep.include_gaussian = sw.value("include_gaussian", false);
    cfg.sweep.gaussian_v_mod = sw.value("gaussian_V_mod", 0.0);
    if (sw.contains("constellations")) {
      int idx = 0;
      for (const auto& node : sw.at("constellations"))
        cfg.sweep.constellations.push_back(parse_constellation_node(
            node, "sweep.constellations[" + std::to_string(idx++) + "]"));
    }
  }

  if (root.contains("eta_scan")) {
    const json& es = root.at("eta_scan");
    cfg.eta_scan.qam_sides = es.value("L_list", std::vector<int>{});
    cfg.eta_scan.vg_list = es.value("V_G_list", std::vector<double>{});
    cfg.eta_scan.va_list = es.value("V_A_list", std::vector<double>{});
  }

  if (root.contains("noise_frontier")) {
    const json& nf = root.at("noise_frontier");
    cfg.noise_frontier.distances_km =
        nf.value("distances_km", std::vector<double>{});
    if (nf.contains("constellations")) {
      int idx = 0;
      for (const auto& node : nf.at("constellations"))
        cfg.noise_frontier.constellations.push_back(parse_constellation_node(
            node, "noise_frontier.constellations[" + std::to_string(idx++) + "]"));
    }
  }

  cfg.threads = root.value("threads", 0);

  // Canonical fully-defaulted document; its hash identifies the run.
  json canon;
  canon["constellation"] = constellation_to_json(cfg.constellation);
  json ch;
  if (cfg.channel.distance_km) ch["distance_km"] = *cfg.channel.distance_km;
  else ch["T_C"] = *cfg.channel.transmittance;
  ch["eps_C"] = cfg.channel.excess_noise;
  ch["convention"] = convention_name(cfg.channel.convention);
  ch["att_db_per_km"] = cfg.channel.att_db_per_km;
  canon["channel"] = ch;
  canon["protocol"] = {{"beta", cfg.protocol.beta},
                       {"measurement", measurement_name(cfg.protocol.measurement)},
                       {"eta_BS", cfg.protocol.eta_bs}};
  canon["numerics"] = {{"cutoff", cfg.numerics.cutoff},
                       {"mi_grid_points", cfg.numerics.mi_grid},
                       {"kappa_tol", cfg.numerics.kappa_tol},
                       {"seed_grid_points", cfg.numerics.seed_grid},
                       {"frontier_tol", cfg.numerics.frontier_tol}};
  canon["output"] = {{"path", cfg.output.path},
                     {"format", cfg.output.format == OutputConfig::Format::csv
                                    ? "csv" : "json"}};
  if (root.contains("sweep")) {
    json sw;
    if (!cfg.sweep.distances_km.empty()) sw["distances_km"] = cfg.sweep.distances_km;
    if (!cfg.sweep.transmittances.empty()) sw["T_C_list"] = cfg.sweep.transmittances;
    sw["include_gaussian"] = cfg.sweep.include_gaussian;
    if (cfg.sweep.gaussian_v_mod > 0) sw["gaussian_V_mod"] = cfg.sweep.gaussian_v_mod;
    json arr = json::array();
    for (const auto& cc : cfg.sweep.constellations)
      arr.push_back(constellation_to_json(cc));
    sw["constellations"] = arr;
    canon["sweep"] = sw;
  }
  if (root.contains("eta_scan")) {
    canon["eta_scan"] = {{"L_list", cfg.eta_scan.qam_sides},
                         {"V_G_list", cfg.eta_scan.vg_list},
                         {"V_A_list", cfg.eta_scan.va_list}};
  }
  if (root.contains("noise_frontier")) {
    json arr = json::array();
    for (const auto& cc : cfg.noise_frontier.constellations)
      arr.push_back(constellation_to_json(cc));
    canon["noise_frontier"] = {
        {"distances_km", cfg.noise_frontier.distances_km},
        {"constellations", arr}};
  }

  cfg.canonical_json = canon.dump();
  cfg.config_hash = fnv1a64(cfg.canonical_json);
  return cfg;
}

RunConfig load_config_file(const std::string& path,
                           const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

ThreeModeSource make_source(const ConstellationConfig& cc,
                            const ProtocolConfig& protocol,
                            const NumericsParams& numerics) {
  Constellation c;
  if (cc.kind == ConstellationConfig::Kind::qam) {
    QamSpec spec;
    spec.side = cc.side;
    spec.gauss_vg = cc.gauss_vg;
    spec.spacing_r = cc.spacing_r
                         ? *cc.spacing_r
                         : calibrate_r(cc.side, cc.gauss_vg, *cc.target_va);
    c = qam_constellation(spec);
  } else {
    c = cc.custom;
  }
  if (!cc.label.empty()) c.label = cc.label;
  const PurifiedSource pure = build_purification(c, numerics.cutoff);
  return split_on_beamsplitter(pure, protocol.eta_bs);
}

ChannelParams make_channel(const ChannelConfig& ch) {
  ChannelParams out;
  out.transmittance = ch.transmittance
                          ? *ch.transmittance
                          : distance_to_transmittance(*ch.distance_km,
                                                      ch.att_db_per_km);
  out.excess_noise = ch.excess_noise;
  out.convention = ch.convention;
  out.validate();
  return out;
}

}  // namespace dmqkd
