#include "dmqkd/symplectic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace dmqkd {

namespace {

using Cplx = std::complex<double>;

Eigen::MatrixXcd uncertainty_matrix(const Eigen::MatrixXd& gamma) {
  const Eigen::MatrixXd sym = 0.5 * (gamma + gamma.transpose());
  const int n = static_cast<int>(gamma.rows()) / 2;
  Eigen::MatrixXcd h = sym.cast<Cplx>();
  h += Cplx(0, 1) * omega(n).cast<Cplx>();
  return h;
}

// 2x2 real matrices with det 1 are exactly the one-mode symplectics.
void check_symplectic(const Eigen::Matrix2d& s, const char* what) {
  if (std::abs(s.determinant() - 1.0) > 1e-9)
    throw numeric_error(std::string(what) + ": matrix is not symplectic");
}

}  // namespace

Eigen::MatrixXd omega(int n_modes) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  for (int k = 0; k < n_modes; ++k) {
    w(2 * k, 2 * k + 1) = 1;
    w(2 * k + 1, 2 * k) = -1;
  }
  return w;
}

double min_physicality_eig(const Eigen::MatrixXd& gamma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(uncertainty_matrix(gamma),
                                                         Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool is_physical(const Eigen::MatrixXd& gamma, double tol) {
  return min_physicality_eig(gamma) >= -tol;
}

bool is_physical(const CovarianceMatrix& gamma, double tol) {
  return is_physical(gamma.m, tol);
}

StandardFormCB standard_form_cb(const Eigen::Matrix4d& gamma_cb) {
  // Local reduction of each single-mode block to a scalar matrix
  // (rotation to principal axes, then a squeeze), followed by a signed SVD
  // of the cross block with rotation factors.
  const auto reduce_block = [](const Eigen::Matrix2d& g) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (g + g.transpose()));
    Eigen::Matrix2d v = es.eigenvectors();
    if (v.determinant() < 0) v.col(1) *= -1;
    const double l1 = es.eigenvalues()(0), l2 = es.eigenvalues()(1);
    if (l1 <= 0)
      throw numeric_error("standard_form_cb: non-positive mode block");
    const Eigen::Matrix2d rot = v.transpose();
    Eigen::Matrix2d sq = Eigen::Matrix2d::Zero();
    sq(0, 0) = std::pow(l2 / l1, 0.25);
    sq(1, 1) = std::pow(l1 / l2, 0.25);
    struct R { Eigen::Matrix2d s; double a; };
    return R{sq * rot, std::sqrt(l1 * l2)};
  };

  const auto rc = reduce_block(gamma_cb.block<2, 2>(0, 0));
  const auto rb = reduce_block(gamma_cb.block<2, 2>(2, 2));

  const Eigen::Matrix2d cross = rc.s * gamma_cb.block<2, 2>(0, 2) * rb.s.transpose();
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(cross,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix2d u = svd.matrixU();
  Eigen::Matrix2d v = svd.matrixV();
  double d0 = svd.singularValues()(0);
  double d1 = svd.singularValues()(1);
  if (u.determinant() < 0) {
    u.col(1) *= -1;
    d1 = -d1;
  }
  if (v.determinant() < 0) {
    v.col(1) *= -1;
    d1 = -d1;
  }

  StandardFormCB out;
  out.s_c = u.transpose() * rc.s;
  out.s_b = v.transpose() * rb.s;
  out.a = rc.a;
  out.b = rb.a;
  out.phi_x = d0;
  out.phi_p = d1;
  check_symplectic(out.s_c, "standard_form_cb (S_C)");
  check_symplectic(out.s_b, "standard_form_cb (S_B)");

  Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
  s.block<2, 2>(0, 0) = out.s_c;
  s.block<2, 2>(2, 2) = out.s_b;
  out.gamma_std = s * gamma_cb * s.transpose();

  Eigen::Matrix4d target = Eigen::Matrix4d::Zero();
  target.block<2, 2>(0, 0) = out.a * Eigen::Matrix2d::Identity();
  target.block<2, 2>(2, 2) = out.b * Eigen::Matrix2d::Identity();
  target(0, 2) = target(2, 0) = out.phi_x;
  target(1, 3) = target(3, 1) = out.phi_p;
  const double resid = (out.gamma_std - target).cwiseAbs().maxCoeff();
  if (resid > 1e-9 * std::max(1.0, gamma_cb.cwiseAbs().maxCoeff()))
    throw numeric_error("standard_form_cb: residual " + std::to_string(resid) +
                        " after symmetrization");
  out.gamma_std = target;  // exact standard form
  return out;
}

Eigen::Matrix2d extend_sa(const Eigen::Matrix2d& s_c) {
  check_symplectic(s_c, "extend_sa");
  Eigen::Matrix2d sz;
  sz << 1, 0, 0, -1;
  const Eigen::Matrix2d sa = sz * s_c.transpose().inverse() * sz;
  check_symplectic(sa, "extend_sa (result)");
  return sa;
}

std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& gamma) {
  const int n = static_cast<int>(gamma.rows()) / 2;
  const Eigen::MatrixXcd m =
      Cplx(0, 1) * omega(n).cast<Cplx>() * gamma.cast<Cplx>();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(m, false);
  if (solver.info() != Eigen::Success)
    throw numeric_error("symplectic_eigenvalues: eigensolver failed");

  std::vector<double> mags(2 * n);
  for (int k = 0; k < 2 * n; ++k) mags[k] = std::abs(solver.eigenvalues()(k));
  std::sort(mags.begin(), mags.end(), std::greater<>());

  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) {
    const double hi = mags[2 * k], lo = mags[2 * k + 1];
    if (hi - lo > 1e-8 * (1.0 + hi))
      throw numeric_error("symplectic_eigenvalues: +/- pairing failed");
    out[k] = 0.5 * (hi + lo);
    if (out[k] < 1.0 - 1e-6)
      throw numeric_error("symplectic_eigenvalues: value " +
                          std::to_string(out[k]) + " below 1 (non-physical input)");
  }
  return out;
}

double g_entropy(double nu, double clip_tol) {
  if (nu < 1.0) {
    if (nu < 1.0 - clip_tol)
      throw numeric_error("g_entropy: nu = " + std::to_string(nu) + " below 1");
    return 0.0;
  }
  const double up = 0.5 * (nu + 1.0);
  const double dn = 0.5 * (nu - 1.0);
  double s = up * std::log2(up);
  if (dn > 0) s -= dn * std::log2(dn);
  return s;
}

double gaussian_entropy(const Eigen::MatrixXd& gamma, double nu_clip) {
  double s = 0;
  for (double nu : symplectic_eigenvalues(gamma)) s += g_entropy(nu, nu_clip);
  return s;
}

Eigen::MatrixXd conditional_cm(const Eigen::MatrixXd& gamma, Measurement meas) {
  const Eigen::Index rest = gamma.rows() - 2;
  if (rest < 2) throw std::invalid_argument("conditional_cm: need >= 2 modes");
  const Eigen::MatrixXd gamma_rest = gamma.topLeftCorner(rest, rest);
  const Eigen::MatrixXd sigma = gamma.topRightCorner(rest, 2);
  const Eigen::Matrix2d gb = gamma.bottomRightCorner(2, 2);

  switch (meas) {
    case Measurement::homodyne_x: {
      if (gb(0, 0) <= 1e-12)
        throw numeric_error("conditional_cm: degenerate measured variance");
      const Eigen::VectorXd v = sigma.col(0);
      return gamma_rest - v * v.transpose() / gb(0, 0);
    }
    case Measurement::homodyne_p: {
      if (gb(1, 1) <= 1e-12)
        throw numeric_error("conditional_cm: degenerate measured variance");
      const Eigen::VectorXd v = sigma.col(1);
      return gamma_rest - v * v.transpose() / gb(1, 1);
    }
    case Measurement::heterodyne: {
      const Eigen::Matrix2d denom = gb + Eigen::Matrix2d::Identity();
      return gamma_rest - sigma * denom.inverse() * sigma.transpose();
    }
  }
  throw std::invalid_argument("conditional_cm: unknown measurement");
}

double holevo_bound(const Eigen::MatrixXd& gamma_full, Measurement meas,
                    double nu_clip) {
  const double joint = gaussian_entropy(gamma_full, nu_clip);
  const double cond = gaussian_entropy(conditional_cm(gamma_full, meas), nu_clip);
  return joint - cond;
}

}  // namespace dmqkd
