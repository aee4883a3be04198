#include "dmqkd/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

namespace dmqkd {

using json = nlohmann::json;

double Constellation::max_abs_amplitude() const {
  double m = 0;
  for (const auto& pt : points) m = std::max(m, std::abs(pt));
  return m;
}

void validate_constellation(const Constellation& c) {
  if (c.points.empty() || c.points.size() != c.probs.size())
    throw config_error("constellation: points/probs must be non-empty and equal-sized");
  double sum = 0;
  for (double p : c.probs) {
    if (p <= 0) throw config_error("constellation: probabilities must be positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw config_error("constellation: probabilities sum to " + std::to_string(sum) +
                       ", expected 1");
  for (std::size_t i = 0; i < c.points.size(); ++i)
    for (std::size_t j = i + 1; j < c.points.size(); ++j)
      if (std::abs(c.points[i] - c.points[j]) < 1e-9)
        throw config_error("constellation: duplicate points at indices " +
                           std::to_string(i) + ", " + std::to_string(j));
}

std::vector<double> qam_probabilities(int side, double gauss_vg) {
  if (side < 1) throw config_error("qam: L must be >= 1");
  if (gauss_vg <= 0) throw config_error("qam: V_G must be positive");
  std::vector<double> w(static_cast<std::size_t>(side) * side);
  double sum = 0;
  for (int mu = 1; mu <= side; ++mu) {
    for (int nu = 1; nu <= side; ++nu) {
      const double gx = 2 * mu - 1 - side;
      const double gy = 2 * nu - 1 - side;
      const double v = std::exp(-(gx * gx + gy * gy) / (2.0 * gauss_vg));
      w[static_cast<std::size_t>(mu - 1) * side + (nu - 1)] = v;
      sum += v;
    }
  }
  for (double& v : w) v /= sum;
  return w;
}

Constellation qam_constellation(const QamSpec& spec) {
  if (spec.side < 1) throw config_error("qam: L must be >= 1");
  if (spec.spacing_r <= 0) throw config_error("qam: r must be positive");
  Constellation c;
  c.standard_qam = true;
  c.qam_side = spec.side;
  c.label = std::to_string(spec.side * spec.side) + "-QAM";
  c.probs = qam_probabilities(spec.side, spec.gauss_vg);
  c.points.reserve(c.probs.size());
  for (int mu = 1; mu <= spec.side; ++mu)
    for (int nu = 1; nu <= spec.side; ++nu)
      c.points.emplace_back((2 * mu - 1 - spec.side) * spec.spacing_r,
                            (2 * nu - 1 - spec.side) * spec.spacing_r);
  if (spec.side > 1) validate_constellation(c);
  return c;
}

Moments constellation_moments(const Constellation& c) {
  if (c.points.empty() || c.points.size() != c.probs.size())
    throw config_error("constellation_moments: invalid constellation");
  Moments m;
  double mx = 0, mp = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    mx += c.probs[i] * 2.0 * c.points[i].real();
    mp += c.probs[i] * 2.0 * c.points[i].imag();
  }
  double vx = 0, vp = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double dx = 2.0 * c.points[i].real() - mx;
    const double dp = 2.0 * c.points[i].imag() - mp;
    vx += c.probs[i] * dx * dx;
    vp += c.probs[i] * dp * dp;
  }
  m.mean_x = mx;
  m.mean_p = mp;
  m.var_x = 1.0 + vx;
  m.var_p = 1.0 + vp;
  return m;
}

double calibrate_r(int side, double gauss_vg, double target_va, double tol) {
  if (target_va <= 1.0)
    throw numeric_error("calibrate_r: target V_A must exceed the shot noise (V_A > 1)");
  if (side < 2)
    throw numeric_error("calibrate_r: L = 1 has V_A = 1 for every r; target unreachable");
  // V_x(r) = 1 + 4 r^2 Var_grid exactly, with Var_grid the per-axis variance
  // of the unit-spacing grid under the discrete-Gaussian weights.
  const auto probs = qam_probabilities(side, gauss_vg);
  double mean = 0, var = 0;
  for (int mu = 1; mu <= side; ++mu)
    for (int nu = 1; nu <= side; ++nu)
      mean += probs[static_cast<std::size_t>(mu - 1) * side + (nu - 1)] *
              (2 * mu - 1 - side);
  for (int mu = 1; mu <= side; ++mu)
    for (int nu = 1; nu <= side; ++nu) {
      const double d = (2 * mu - 1 - side) - mean;
      var += probs[static_cast<std::size_t>(mu - 1) * side + (nu - 1)] * d * d;
    }
  if (var <= 0) throw numeric_error("calibrate_r: degenerate grid variance");
  const double r = std::sqrt((target_va - 1.0) / (4.0 * var));

  const auto check =
      constellation_moments(qam_constellation({side, r, gauss_vg}));
  if (std::abs(check.var_x - target_va) > std::max(tol, 1e-12))
    throw numeric_error("calibrate_r: achieved V_x = " + std::to_string(check.var_x) +
                        " misses target " + std::to_string(target_va));
  return r;
}

Constellation load_constellation(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw config_error(std::string("constellation document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("type"))
    throw config_error("constellation document: missing \"type\"");
  const std::string type = doc.at("type").get<std::string>();

  if (type == "qam") {
    QamSpec spec;
    spec.side = doc.at("L").get<int>();
    spec.gauss_vg = doc.at("V_G").get<double>();
    if (doc.contains("r")) {
      spec.spacing_r = doc.at("r").get<double>();
    } else if (doc.contains("target_VA")) {
      spec.spacing_r =
          calibrate_r(spec.side, spec.gauss_vg, doc.at("target_VA").get<double>());
    } else {
      throw config_error("qam constellation: need \"r\" or \"target_VA\"");
    }
    return qam_constellation(spec);
  }

  if (type == "custom") {
    Constellation c;
    c.label = doc.value("label", std::string("custom"));
    if (!doc.contains("points") || !doc.at("points").is_array() ||
        doc.at("points").empty())
      throw config_error("custom constellation: \"points\" must be a non-empty array");
    for (const auto& pt : doc.at("points")) {
      const double x = pt.at("x").get<double>();
      const double p = pt.at("p").get<double>();
      const double prob = pt.at("prob").get<double>();
      if (prob <= 0)
        throw config_error("custom constellation: probabilities must be positive");
      // (x, p) are quadrature means; the amplitude is (x + i p) / 2.
      c.points.emplace_back(0.5 * x, 0.5 * p);
      c.probs.push_back(prob);
    }
    double sum = 0;
    for (double p : c.probs) sum += p;
    if (std::abs(sum - 1.0) > 1e-12) {
      if (!doc.value("auto_normalize", false))
        throw config_error("custom constellation: probabilities sum to " +
                           std::to_string(sum) +
                           "; set auto_normalize to accept");
      for (double& p : c.probs) p /= sum;
    }
    validate_constellation(c);
    return c;
  }

  throw config_error("constellation document: unknown type \"" + type + "\"");
}

}  // namespace dmqkd
