#pragma once

#include <Eigen/Dense>

#include "dmqkd/source.hpp"
#include "dmqkd/symplectic.hpp"

namespace dmqkd {

// How the excess-noise parameter enters the channel output variance.
//
// paper_cloner: entangling cloner with TMSV variance
//   V_E = (1 + T_C eps_C) / (1 - T_C);  gamma_B = T gamma_B0 + (1-T) V_E I.
//   Note eps_C = 0 does NOT reduce to pure loss under this convention.
// input_referred: gamma_B = T (gamma_B0 - I) + I + T eps_C I, the common
//   convention where eps_C = 0 is pure loss.
enum class NoiseConvention { paper_cloner, input_referred };

struct ChannelParams {
  double transmittance = 1.0;  // T_C in (0, 1]
  double excess_noise = 0.0;   // eps_C >= 0, SNU
  NoiseConvention convention = NoiseConvention::paper_cloner;

  void validate() const;  // throws config_error
  // Conditional (single-state) output variance per quadrature.
  double conditional_variance() const;
};

// T_C = 10^(-att * d / 10). Default 0.2 dB/km.
double distance_to_transmittance(double d_km, double att_db_per_km = 0.2);

// gamma_ACB with the A-B covariance block unknown (zeroed). The blocks
// touched by the channel are gamma_B and phi_CB = sqrt(T) phi_CB0; kappa_true
// records the value the entangling-cloner model actually induces.
struct PartialCM {
  CovarianceMatrix gamma;        // 6x6, modes (A, C, B); kappa slots zero
  Eigen::Matrix2d kappa_true;    // sqrt(T) * phi_AB0
  double cond_var = 1;           // conditional output variance per quadrature
  ChannelParams channel;

  Eigen::Matrix2d gamma_b() const { return gamma.block(2, 2); }
  Eigen::Matrix2d phi_cb() const { return gamma.block(1, 2); }
};

PartialCM apply_channel(const ThreeModeSource& src, const ChannelParams& ch);

enum class Quadrature { x, p };

struct ConditionalOutput {
  double mean = 0;
  double variance = 1;
};

// Homodyne outcome distribution at Bob for constellation point i.
ConditionalOutput conditional_output(const ThreeModeSource& src,
                                     const ChannelParams& ch,
                                     std::size_t index, Quadrature q);

}  // namespace dmqkd
