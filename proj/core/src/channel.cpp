#include "dmqkd/channel.hpp"

#include <cmath>

namespace dmqkd {

void ChannelParams::validate() const {
  if (!(transmittance > 0.0 && transmittance <= 1.0))
    throw config_error("channel: T_C must lie in (0, 1]");
  if (excess_noise < 0.0)
    throw config_error("channel: eps_C must be non-negative");
  if (convention == NoiseConvention::paper_cloner && transmittance < 1.0) {
    const double ve =
        (1.0 + transmittance * excess_noise) / (1.0 - transmittance);
    if (ve < 1.0)
      throw config_error("channel: cloner variance V_E < 1");
  }
}

double ChannelParams::conditional_variance() const {
  if (transmittance == 1.0) return 1.0 + excess_noise;
  switch (convention) {
    case NoiseConvention::paper_cloner: {
      const double ve =
          (1.0 + transmittance * excess_noise) / (1.0 - transmittance);
      return transmittance + (1.0 - transmittance) * ve;
    }
    case NoiseConvention::input_referred:
      return 1.0 + transmittance * excess_noise;
  }
  throw config_error("channel: unknown noise convention");
}

double distance_to_transmittance(double d_km, double att_db_per_km) {
  if (d_km < 0) throw config_error("distance_to_transmittance: negative distance");
  if (att_db_per_km <= 0)
    throw config_error("distance_to_transmittance: attenuation must be positive");
  return std::pow(10.0, -att_db_per_km * d_km / 10.0);
}

PartialCM apply_channel(const ThreeModeSource& src, const ChannelParams& ch) {
  ch.validate();
  const double t = ch.transmittance;
  const double rt = std::sqrt(t);
  const Eigen::Matrix2d eye = Eigen::Matrix2d::Identity();

  PartialCM out;
  out.channel = ch;
  out.cond_var = ch.conditional_variance();
  out.gamma.mode_labels = {"A", "C", "B"};
  out.gamma.m = src.gamma.m;

  Eigen::Matrix2d gamma_b;
  if (t == 1.0) {
    // Identity channel apart from (input-referred) excess noise; the cloner
    // variance formula is singular here and both conventions coincide.
    gamma_b = src.gamma_b0() + ch.excess_noise * eye;
  } else if (ch.convention == NoiseConvention::paper_cloner) {
    const double ve = (1.0 + t * ch.excess_noise) / (1.0 - t);
    gamma_b = t * src.gamma_b0() + (1.0 - t) * ve * eye;
  } else {
    gamma_b = t * (src.gamma_b0() - eye) + eye + t * ch.excess_noise * eye;
  }

  out.gamma.m.block<2, 2>(4, 4) = gamma_b;
  out.gamma.m.block<2, 2>(2, 4) = rt * src.phi_cb0();
  out.gamma.m.block<2, 2>(4, 2) = out.gamma.m.block<2, 2>(2, 4).transpose();
  out.kappa_true = rt * src.phi_ab0();
  out.gamma.m.block<2, 2>(0, 4).setZero();
  out.gamma.m.block<2, 2>(4, 0).setZero();

  // The model's own kappa must be admissible; anything else signals broken
  // parameters upstream.
  Eigen::MatrixXd check = out.gamma.m;
  check.block<2, 2>(0, 4) = out.kappa_true;
  check.block<2, 2>(4, 0) = out.kappa_true.transpose();
  if (!is_physical(check, 1e-7))
    throw numeric_error("apply_channel: channel output fails the uncertainty check");
  return out;
}

ConditionalOutput conditional_output(const ThreeModeSource& src,
                                     const ChannelParams& ch, std::size_t index,
                                     Quadrature q) {
  ch.validate();
  if (index >= src.cond_means.size())
    throw std::out_of_range("conditional_output: index out of range");
  ConditionalOutput out;
  const auto& m = src.cond_means[index];
  out.mean = std::sqrt(ch.transmittance) * (q == Quadrature::x ? m.x_b0 : m.p_b0);
  out.variance = ch.conditional_variance();
  return out;
}

}  // namespace dmqkd
