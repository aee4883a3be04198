#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "dmqkd/errors.hpp"

// Truncated Fock-space numerics in shot-noise units (SNU).
//
// Conventions used throughout the library:
//   X = a + a^dag,  P = i(a^dag - a)
// so a coherent state |alpha> has quadrature means (2 Re alpha, 2 Im alpha)
// and Var(X) = Var(P) = 1.

namespace dmqkd::fock {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Probability mass of |alpha> lost beyond the first `dim` Fock states.
double coherent_leakage(double abs_alpha, int dim);

// Smallest cutoff with leakage <= 1e-10 for amplitudes up to max_abs_alpha,
// floored at ceil(2*max_abs_alpha^2 + 60).
int default_cutoff(double max_abs_alpha);

// Normalized coherent-state vector; throws cutoff_error when the leakage
// bound 1e-10 cannot be met at this dim.
Vector coherent_vector(Complex alpha, int dim);

struct Quadratures {
  Matrix x;
  Matrix p;
};

// Hermitian tridiagonal X and P at the given cutoff (dim >= 2).
Quadratures quadrature_operators(int dim);

// rho = sum_i probs[i] |states[i]><states[i]|, hermitized and trace-normalized.
Matrix mixture_density(const std::vector<Vector>& states,
                       const std::vector<double>& probs);

struct Eigensystem {
  Eigen::VectorXd values;   // descending, negatives clipped to 0
  Matrix vectors;           // orthonormal columns, same order
  double clip_magnitude;    // largest negative eigenvalue clipped away
};

Eigensystem hermitian_eigendecomposition(const Matrix& rho,
                                         double hermitian_tol = 1e-10);

// Re Tr(op * rho); throws numeric_error if the imaginary part exceeds 1e-10.
double expectation(const Matrix& op, const Matrix& rho);

// <psi| op |psi> for a state vector.
double expectation(const Matrix& op, const Vector& psi);

}  // namespace dmqkd::fock
