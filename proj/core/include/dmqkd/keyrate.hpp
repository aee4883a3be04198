#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dmqkd/channel.hpp"
#include "dmqkd/source.hpp"
#include "dmqkd/symplectic.hpp"

namespace dmqkd {

struct NumericsParams {
  int cutoff = 0;            // 0 = automatic per constellation
  int mi_grid = 4001;        // integration points for mutual information
  double kappa_tol = 1e-6;   // termination width of the kappa refinement
  int seed_grid = 33;        // coarse-grid points per axis before refinement
  double frontier_tol = 1e-4;
};

// Channel state brought to the search frame: gamma_CB standardized by local
// symplectics S_C, S_B and S_A chosen to preserve sigma_z cross blocks. The
// kappa search runs on the standardized block kappa' = S_A kappa S_B^T;
// Holevo bounds are evaluated on the lab-frame matrix so that the measured
// quadrature keeps its physical meaning.
struct StandardizedState {
  Eigen::MatrixXd gamma_lab;   // 6x6, kappa slots zero
  Eigen::Matrix2d s_a, s_c, s_b;
  double phi_x = 0, phi_p = 0; // standardized C-B cross entries
  Eigen::Matrix2d kappa_true_std;
  Measurement measurement = Measurement::homodyne_x;

  Eigen::MatrixXd with_kappa(const Eigen::Matrix2d& kappa_std) const;
  double min_eig_at(const Eigen::Matrix2d& kappa_std) const;
  double holevo_at(const Eigen::Matrix2d& kappa_std) const;
  // Search objective. Homodyne keys are sliced from randomly switched x/p
  // quadratures, so the adversary bound is the x/p average; this is also
  // what makes the bound symmetric under the kappa mirror map and the
  // antidiagonal reduction exact. Heterodyne is used as-is.
  double objective_at(const Eigen::Matrix2d& kappa_std) const;
  bool symmetric_cross() const;  // phi_x == phi_p within 1e-9
};

StandardizedState standardize(const PartialCM& pcm, Measurement meas);

struct KappaInterval {
  double center = 0;
  double radius = 0;
  double lo() const { return center - radius; }
  double hi() const { return center + radius; }
};

// Feasible intervals along the kappa11 / kappa22 axes through the feasible
// center (bisection on the minimum eigenvalue of gamma + i Omega), plus the
// Cauchy-Schwarz outer half-widths that bound the whole feasible set.
struct KappaBounds {
  KappaInterval k11, k22;
  double outer11 = 0, outer22 = 0;
};

KappaBounds kappa_bounds(const StandardizedState& st);

// Closed-form axis interval from the quadratic dependence of
// det(gamma + i Omega) on a single kappa entry (the minor-determinant
// identity). Cross-check for the bisection route; empty when the quadratic
// is degenerate (e.g. globally singular pure states).
std::optional<KappaInterval> kappa_interval_determinant(
    const StandardizedState& st,
    int axis,  // 0: kappa11, 1: kappa22
    double other_value);

struct SupResult {
  double s_sup = 0;
  Eigen::Matrix2d kappa_star = Eigen::Matrix2d::Zero();
  int evaluations = 0;
  bool reduced_1d = false;
  double feasibility_margin = 0;  // min-eig at kappa_star
};

// Worst-case Gaussian Holevo bound over the uncertainty-feasible kappa set,
// with kappa12 = kappa21 = 0. One-dimensional search along kappa22 = -kappa11
// when phi_x = phi_p, otherwise a 2D coarse grid plus coordinate descent.
// force_2d runs the 2D path even on symmetric instances (consistency checks).
SupResult sup_holevo(const StandardizedState& st, double tol = 1e-6,
                     int seed_grid = 33, bool force_2d = false);

// I(M_A : H_B) in bits per use: differential entropy of the Gaussian-mixture
// outcome minus the identical per-point conditional entropy, by Simpson
// integration on grid_points (made odd) spanning +/- (max|mean| + 10 sigma).
double mutual_information(const ThreeModeSource& src, const ChannelParams& ch,
                          Measurement meas, int grid_points = 4001);

struct KeyRatePoint {
  double distance_km = std::numeric_limits<double>::quiet_NaN();
  double transmittance = 1;
  double excess_noise = 0;
  std::string constellation_label;
  double beta = 1;
  double mutual_info = 0;       // bits/use
  double holevo_sup = 0;        // bits/use
  double key_rate = 0;          // beta * I - S, signed
  double key_rate_clamped = 0;  // max(key_rate, 0)
  double kappa11_star = 0;
  double kappa22_star = 0;
  int search_evaluations = 0;
  bool reduced_1d = false;
  bool feasible = true;
  double feasibility_margin = 0;
  int cutoff = 0;
  std::string error;  // empty on success (sweeps record per-point failures)
};

KeyRatePoint key_rate(const ThreeModeSource& src, const ChannelParams& ch,
                      double beta, Measurement meas,
                      const NumericsParams& numerics = {});

// Ideal Gaussian-modulation reference at matched channel-input variance:
// EPR source of variance v_mod, I = (1/2) log2(V_B / V_cond), Holevo from
// the two-mode covariance matrix (kappa fully known, no search).
KeyRatePoint gaussian_reference(double v_mod, const ChannelParams& ch,
                                double beta, Measurement meas);

// Largest excess noise with positive key rate at the given channel
// transmittance, by sign-change bisection to |delta eps| <= tol.
double tolerable_excess_noise(const ThreeModeSource& src, double transmittance,
                              NoiseConvention convention, double beta,
                              Measurement meas,
                              const NumericsParams& numerics = {},
                              double tol = 1e-4);

struct SweepSpec {
  std::vector<ThreeModeSource> sources;  // one per constellation
  std::vector<double> distances_km;      // preferred grid
  std::vector<double> transmittances;    // used when distances_km is empty
  double att_db_per_km = 0.2;
  double excess_noise = 0.0;
  NoiseConvention convention = NoiseConvention::paper_cloner;
  double beta = 0.95;
  Measurement measurement = Measurement::homodyne_x;
  NumericsParams numerics;
  bool include_gaussian = false;
  double gaussian_v_mod = 0;  // 0 = match the first source's B0 variance
  int threads = 0;            // 0 = hardware concurrency
};

// Evaluates every (source x grid) point; per-point failures are recorded in
// KeyRatePoint::error and do not abort the sweep. Output order matches the
// input grid regardless of thread count.
std::vector<KeyRatePoint> sweep(const SweepSpec& spec);

}  // namespace dmqkd
