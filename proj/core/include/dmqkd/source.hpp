#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "dmqkd/constellation.hpp"
#include "dmqkd/fock.hpp"
#include "dmqkd/symplectic.hpp"

namespace dmqkd {

// Two-mode purification |psi_AD> = sum_{jk} C_{jk} |j>_A |k>_D of the
// constellation mixture rho_D, together with its 4x4 covariance matrix.
//
// Construction: diagonalize rho_D = sum_i v_i |theta_i><theta_i| and set
// |psi_AD> = sum_i sqrt(v_i) |theta_i*>_A |theta_i>_D (conjugated
// coefficients on mode A), which makes C Hermitian.
struct PurifiedSource {
  fock::Matrix coeff;             // C, dim x dim
  Eigen::VectorXd eigenvalues;    // retained spectrum of rho_D, descending
  Constellation constellation;
  int cutoff = 0;

  Eigen::Matrix4d gamma_ad;       // ordering (x_A, p_A, x_D, p_D)
  bool standard_form = false;     // gamma_ad matches [[V I, phi sZ],[phi sZ, V I]]
  double v_a = 1;                 // standard-form V_A (mean of x/p otherwise)
  double phi_ad = 0;              // standard-form scalar, >= 0
  std::optional<double> eta_a;    // phi^2/(V_A^2-1); empty if not standard or V_A ~ 1

  double reconstruction_residual = 0;  // max-norm of Tr_A|psi><psi| - rho_D
};

// cutoff = 0 selects the default cutoff rule for the constellation.
PurifiedSource build_purification(const Constellation& c, int cutoff = 0);

// Three-mode source: mode D split on a beamsplitter into C (reflected,
// sqrt(1-eta_BS)) and B0 (transmitted, sqrt(eta_BS)).
struct ThreeModeSource {
  CovarianceMatrix gamma;   // 6x6, modes (A, C, B0)
  double eta_bs = 0;
  double v_a = 1;
  int cutoff = 0;
  Constellation constellation;

  struct CondMean {
    double x_c, p_c, x_b0, p_b0;
  };
  std::vector<CondMean> cond_means;  // one per constellation point

  Eigen::Matrix2d gamma_a() const { return gamma.block(0, 0); }
  Eigen::Matrix2d gamma_c() const { return gamma.block(1, 1); }
  Eigen::Matrix2d gamma_b0() const { return gamma.block(2, 2); }
  Eigen::Matrix2d phi_ac() const { return gamma.block(0, 1); }
  Eigen::Matrix2d phi_ab0() const { return gamma.block(0, 2); }
  Eigen::Matrix2d phi_cb0() const { return gamma.block(1, 2); }
};

ThreeModeSource split_on_beamsplitter(const PurifiedSource& src, double eta_bs);

// Conditional means of mode C for constellation point i (the values Alice
// records alongside the chosen index).
std::pair<double, double> second_sequence(const ThreeModeSource& src,
                                          std::size_t index);

}  // namespace dmqkd
