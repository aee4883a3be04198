#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dmqkd/errors.hpp"

// Covariance-matrix machinery for Gaussian states in shot-noise units with
// quadrature ordering (x_1, p_1, ..., x_N, p_N). A matrix gamma is physical
// iff gamma + i*Omega >= 0.

namespace dmqkd {

struct CovarianceMatrix {
  Eigen::MatrixXd m;                      // 2N x 2N real symmetric
  std::vector<std::string> mode_labels;   // size N
  bool standardized = false;

  int modes() const { return static_cast<int>(m.rows()) / 2; }
  // 2x2 sub-block between modes i and j.
  Eigen::Matrix2d block(int i, int j) const { return m.block<2, 2>(2 * i, 2 * j); }
};

// Symplectic form: diag(w, ..., w) with w = [[0, 1], [-1, 0]].
Eigen::MatrixXd omega(int n_modes);

// Minimum eigenvalue of the Hermitian matrix gamma + i*Omega.
double min_physicality_eig(const Eigen::MatrixXd& gamma);

bool is_physical(const Eigen::MatrixXd& gamma, double tol = 1e-8);
bool is_physical(const CovarianceMatrix& gamma, double tol = 1e-8);

// Two-mode standard form: local symplectics S_C, S_B such that
// S (gamma_CB) S^T = [[a I, diag(phi_x, phi_p)], [diag(phi_x, phi_p), b I]]
// with phi_x >= |phi_p|.
struct StandardFormCB {
  Eigen::Matrix4d gamma_std;
  Eigen::Matrix2d s_c;
  Eigen::Matrix2d s_b;
  double a = 0;
  double b = 0;
  double phi_x = 0;
  double phi_p = 0;
};

StandardFormCB standard_form_cb(const Eigen::Matrix4d& gamma_cb);

// The mode-A companion of S_C: S_A sigma_z S_C^T = sigma_z, i.e.
// S_A = sigma_z (S_C^T)^{-1} sigma_z.
Eigen::Matrix2d extend_sa(const Eigen::Matrix2d& s_c);

// |eig(i Omega gamma)| deduplicated to N values >= 1 - 1e-8, descending.
std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& gamma);

// Von Neumann entropy contribution of one symplectic eigenvalue, in bits:
// g(nu) = ((nu+1)/2) log2((nu+1)/2) - ((nu-1)/2) log2((nu-1)/2).
// Values in [1 - clip_tol, 1] are clipped to 1; below that is an error.
double g_entropy(double nu, double clip_tol = 1e-8);

// sum_k g(nu_k) for the Gaussian state with this covariance matrix.
double gaussian_entropy(const Eigen::MatrixXd& gamma, double nu_clip = 1e-8);

enum class Measurement { homodyne_x, homodyne_p, heterodyne };

// Conditional covariance matrix of the remaining modes after measuring the
// last mode. Homodyne uses the pseudo-inverse limit of the measured
// quadrature; heterodyne uses (gamma_B + I)^{-1}.
Eigen::MatrixXd conditional_cm(const Eigen::MatrixXd& gamma, Measurement meas);

// Gaussian Holevo bound on the eavesdropper information about the
// measurement of the last mode:
//   S = sum g(nu of gamma) - sum g(nu of gamma_conditional).
double holevo_bound(const Eigen::MatrixXd& gamma_full, Measurement meas,
                    double nu_clip = 1e-8);

}  // namespace dmqkd
