#include "dmqkd/source.hpp"

#include <cmath>

namespace dmqkd {

namespace {

constexpr double kEigenvalueClip = 1e-12;

// <M_A (x) N_D> on |psi> = sum_{jk} C_{jk} |j>_A |k>_D equals
// Tr(C^dag M C N^T).
double pair_expectation(const fock::Matrix& coeff, const fock::Matrix& op_a,
                        const fock::Matrix& op_d) {
  const std::complex<double> t =
      (coeff.adjoint() * op_a * coeff * op_d.transpose()).trace();
  if (std::abs(t.imag()) > 1e-9 * std::max(1.0, std::abs(t)))
    throw numeric_error("purification: non-real pair expectation");
  return t.real();
}

}  // namespace

PurifiedSource build_purification(const Constellation& c, int cutoff) {
  validate_constellation(c);
  const int dim = cutoff > 0 ? cutoff : fock::default_cutoff(c.max_abs_amplitude());

  std::vector<fock::Vector> states;
  states.reserve(c.size());
  for (const auto& beta : c.points)
    states.push_back(fock::coherent_vector(beta, dim));
  const fock::Matrix rho_d = fock::mixture_density(states, c.probs);

  const auto eig = fock::hermitian_eigendecomposition(rho_d);

  // Retain eigenvalues above the clip threshold; the purification
  // |psi_AD> = sum_k sqrt(v_k) |theta_k*>_A |theta_k>_D has coefficient
  // matrix C = sum_k sqrt(v_k) conj(theta_k) theta_k^T (Hermitian).
  PurifiedSource src;
  src.constellation = c;
  src.cutoff = dim;
  int retained = 0;
  while (retained < eig.values.size() && eig.values(retained) > kEigenvalueClip)
    ++retained;
  if (retained == 0)
    throw numeric_error("build_purification: all-zero eigenvalue spectrum");
  src.eigenvalues = eig.values.head(retained);

  src.coeff = fock::Matrix::Zero(dim, dim);
  for (int k = 0; k < retained; ++k) {
    const fock::Vector theta = eig.vectors.col(k);
    src.coeff.noalias() +=
        std::sqrt(eig.values(k)) * theta.conjugate() * theta.transpose();
  }

  // Tr_A |psi><psi| must reproduce rho_D.
  const fock::Matrix rho_d_check = src.coeff.transpose() * src.coeff.conjugate();
  src.reconstruction_residual = (rho_d_check - rho_d).cwiseAbs().maxCoeff();
  if (src.reconstruction_residual > 1e-8)
    throw numeric_error("build_purification: Tr_A residual " +
                        std::to_string(src.reconstruction_residual));

  const auto quad = fock::quadrature_operators(dim);
  const fock::Matrix rho_a = src.coeff * src.coeff.adjoint();

  const double mean_xa = fock::expectation(quad.x, rho_a);
  const double mean_pa = fock::expectation(quad.p, rho_a);
  const double mean_xd = fock::expectation(quad.x, rho_d);
  const double mean_pd = fock::expectation(quad.p, rho_d);
  const double var_xa = fock::expectation(quad.x * quad.x, rho_a) - mean_xa * mean_xa;
  const double var_pa = fock::expectation(quad.p * quad.p, rho_a) - mean_pa * mean_pa;
  const double var_xd = fock::expectation(quad.x * quad.x, rho_d) - mean_xd * mean_xd;
  const double var_pd = fock::expectation(quad.p * quad.p, rho_d) - mean_pd * mean_pd;

  const double cxx = pair_expectation(src.coeff, quad.x, quad.x) - mean_xa * mean_xd;
  const double cxp = pair_expectation(src.coeff, quad.x, quad.p) - mean_xa * mean_pd;
  const double cpx = pair_expectation(src.coeff, quad.p, quad.x) - mean_pa * mean_xd;
  const double cpp = pair_expectation(src.coeff, quad.p, quad.p) - mean_pa * mean_pd;

  // x-p correlations of each mode (zero for standard QAM).
  const double axp =
      0.5 * fock::expectation(quad.x * quad.p + quad.p * quad.x, rho_a) -
      mean_xa * mean_pa;
  const double dxp =
      0.5 * fock::expectation(quad.x * quad.p + quad.p * quad.x, rho_d) -
      mean_xd * mean_pd;

  src.gamma_ad << var_xa, axp, cxx, cxp,
                  axp, var_pa, cpx, cpp,
                  cxx, cpx, var_xd, dxp,
                  cxp, cpp, dxp, var_pd;

  // Standard form [[V I, phi sigma_z], [phi sigma_z, V I]]: equal variances,
  // vanishing x-p blocks, opposite-sign x/p cross covariances.
  const double scale = std::max(1.0, src.gamma_ad.cwiseAbs().maxCoeff());
  const double tol = 1e-8 * scale;
  const bool standard = std::abs(var_xa - var_pa) <= tol &&
                        std::abs(var_xd - var_pd) <= tol &&
                        std::abs(var_xa - var_xd) <= tol &&
                        std::abs(axp) <= tol && std::abs(dxp) <= tol &&
                        std::abs(cxp) <= tol && std::abs(cpx) <= tol &&
                        std::abs(cxx + cpp) <= tol;
  if (!standard && c.standard_qam)
    throw numeric_error(
        "build_purification: standard QAM produced a non-standard gamma_AD");

  src.standard_form = standard;
  if (standard) {
    src.v_a = 0.25 * (var_xa + var_pa + var_xd + var_pd);
    src.phi_ad = 0.5 * (cxx - cpp);  // cpp = -cxx up to noise
    if (src.v_a > 1.0 + 1e-12) {
      const double eta = src.phi_ad * src.phi_ad / (src.v_a * src.v_a - 1.0);
      if (eta > 1.0 + 1e-6)
        throw numeric_error("build_purification: eta_A = " + std::to_string(eta) +
                            " violates the uncertainty bound");
      src.eta_a = std::min(eta, 1.0);
    }
  } else {
    src.v_a = 0.25 * (var_xa + var_pa + var_xd + var_pd);
  }
  return src;
}

ThreeModeSource split_on_beamsplitter(const PurifiedSource& src, double eta_bs) {
  if (!(eta_bs > 0.0 && eta_bs < 1.0))
    throw config_error("split_on_beamsplitter: eta_BS must lie in (0, 1)");

  const double t = std::sqrt(eta_bs);        // B0 takes sqrt(eta_BS) of D
  const double r = std::sqrt(1.0 - eta_bs);  // C takes sqrt(1 - eta_BS)

  // Mode D mixes with a vacuum ancilla:
  //   x_C  = r x_D - t x_vac,   x_B0 = t x_D + r x_vac.
  const Eigen::Matrix2d gamma_a = src.gamma_ad.block<2, 2>(0, 0);
  const Eigen::Matrix2d gamma_d = src.gamma_ad.block<2, 2>(2, 2);
  const Eigen::Matrix2d phi_ad = src.gamma_ad.block<2, 2>(0, 2);
  const Eigen::Matrix2d eye = Eigen::Matrix2d::Identity();

  ThreeModeSource out;
  out.eta_bs = eta_bs;
  out.v_a = src.v_a;
  out.cutoff = src.cutoff;
  out.constellation = src.constellation;
  out.gamma.mode_labels = {"A", "C", "B0"};
  out.gamma.m.resize(6, 6);
  out.gamma.m.block<2, 2>(0, 0) = gamma_a;
  out.gamma.m.block<2, 2>(0, 2) = r * phi_ad;
  out.gamma.m.block<2, 2>(0, 4) = t * phi_ad;
  out.gamma.m.block<2, 2>(2, 2) = r * r * gamma_d + t * t * eye;
  out.gamma.m.block<2, 2>(2, 4) = r * t * (gamma_d - eye);
  out.gamma.m.block<2, 2>(4, 4) = t * t * gamma_d + r * r * eye;
  out.gamma.m.block<2, 2>(2, 0) = out.gamma.m.block<2, 2>(0, 2).transpose();
  out.gamma.m.block<2, 2>(4, 0) = out.gamma.m.block<2, 2>(0, 4).transpose();
  out.gamma.m.block<2, 2>(4, 2) = out.gamma.m.block<2, 2>(2, 4).transpose();

  if (!is_physical(out.gamma.m, 1e-8))
    throw numeric_error("split_on_beamsplitter: unphysical three-mode CM");

  out.cond_means.reserve(src.constellation.size());
  for (const auto& beta : src.constellation.points) {
    ThreeModeSource::CondMean m;
    m.x_c = 2.0 * r * beta.real();
    m.p_c = 2.0 * r * beta.imag();
    m.x_b0 = 2.0 * t * beta.real();
    m.p_b0 = 2.0 * t * beta.imag();
    out.cond_means.push_back(m);
  }
  return out;
}

std::pair<double, double> second_sequence(const ThreeModeSource& src,
                                          std::size_t index) {
  if (index >= src.cond_means.size())
    throw std::out_of_range("second_sequence: index out of range");
  return {src.cond_means[index].x_c, src.cond_means[index].p_c};
}

}  // namespace dmqkd
