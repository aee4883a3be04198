#include "dmqkd/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dmqkd::fock {

namespace {
constexpr double kLeakageBound = 1e-10;
}

double coherent_leakage(double abs_alpha, int dim) {
  const double lambda = abs_alpha * abs_alpha;
  if (lambda == 0.0) return 0.0;
  // 1 - sum_{n < dim} e^{-lambda} lambda^n / n!
  double term = std::exp(-lambda);
  double cumulative = term;
  for (int n = 1; n < dim; ++n) {
    term *= lambda / n;
    cumulative += term;
  }
  return std::max(0.0, 1.0 - cumulative);
}

int default_cutoff(double max_abs_alpha) {
  const double a2 = max_abs_alpha * max_abs_alpha;
  int dim = static_cast<int>(std::ceil(2.0 * a2 + 60.0));
  while (coherent_leakage(max_abs_alpha, dim) > kLeakageBound) ++dim;
  return dim;
}

Vector coherent_vector(Complex alpha, int dim) {
  if (dim < 1) throw std::invalid_argument("coherent_vector: dim must be >= 1");
  if (coherent_leakage(std::abs(alpha), dim) > kLeakageBound) {
    throw cutoff_error("coherent_vector: cutoff " + std::to_string(dim) +
                       " too small for |alpha| = " +
                       std::to_string(std::abs(alpha)) + " (need >= " +
                       std::to_string(default_cutoff(std::abs(alpha))) + ")");
  }
  Vector v(dim);
  // c_n = e^{-|a|^2/2} a^n / sqrt(n!)
  v(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * alpha / std::sqrt(double(n));
  v.normalize();
  return v;
}

Quadratures quadrature_operators(int dim) {
  if (dim < 2) throw std::invalid_argument("quadrature_operators: dim must be >= 2");
  Matrix x = Matrix::Zero(dim, dim);
  Matrix p = Matrix::Zero(dim, dim);
  for (int n = 0; n + 1 < dim; ++n) {
    const double s = std::sqrt(double(n + 1));
    x(n, n + 1) = s;
    x(n + 1, n) = s;
    p(n, n + 1) = Complex(0, -s);
    p(n + 1, n) = Complex(0, s);
  }
  return {std::move(x), std::move(p)};
}

Matrix mixture_density(const std::vector<Vector>& states,
                       const std::vector<double>& probs) {
  if (states.empty() || states.size() != probs.size())
    throw std::invalid_argument("mixture_density: states/probs size mismatch");
  const Eigen::Index dim = states.front().size();
  double psum = 0;
  for (double p : probs) {
    if (p < 0) throw std::invalid_argument("mixture_density: negative probability");
    psum += p;
  }
  if (std::abs(psum - 1.0) > 1e-12)
    throw std::invalid_argument("mixture_density: probabilities must sum to 1");

  Matrix rho = Matrix::Zero(dim, dim);
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].size() != dim)
      throw std::invalid_argument("mixture_density: dimension mismatch");
    rho.noalias() += probs[i] * states[i] * states[i].adjoint();
  }
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
  return rho;
}

Eigensystem hermitian_eigendecomposition(const Matrix& rho, double hermitian_tol) {
  if (rho.rows() != rho.cols())
    throw std::invalid_argument("hermitian_eigendecomposition: matrix not square");
  const double herm_dev = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm_dev > hermitian_tol)
    throw std::invalid_argument(
        "hermitian_eigendecomposition: input deviates from Hermitian by " +
        std::to_string(herm_dev));

  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (rho + rho.adjoint()));
  if (solver.info() != Eigen::Success)
    throw numeric_error("hermitian_eigendecomposition: eigensolver failed");

  const Eigen::Index n = rho.rows();
  Eigensystem out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  out.clip_magnitude = 0;
  // Eigen returns ascending order; flip to descending and clip negatives.
  for (Eigen::Index k = 0; k < n; ++k) {
    double v = solver.eigenvalues()(n - 1 - k);
    if (v < 0) {
      out.clip_magnitude = std::max(out.clip_magnitude, -v);
      v = 0;
    }
    out.values(k) = v;
    out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  return out;
}

double expectation(const Matrix& op, const Matrix& rho) {
  if (op.rows() != rho.rows() || op.cols() != rho.cols())
    throw std::invalid_argument("expectation: dimension mismatch");
  const Complex t = (op * rho).trace();
  if (std::abs(t.imag()) > 1e-10 * std::max(1.0, std::abs(t)))
    throw numeric_error("expectation: non-real trace, |imag| = " +
                        std::to_string(std::abs(t.imag())));
  return t.real();
}

double expectation(const Matrix& op, const Vector& psi) {
  if (op.cols() != psi.size())
    throw std::invalid_argument("expectation: dimension mismatch");
  const Complex t = psi.adjoint() * op * psi;
  return t.real();
}

}  // namespace dmqkd::fock
