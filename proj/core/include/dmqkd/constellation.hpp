#pragma once

#include <complex>
#include <string>
#include <vector>

#include "dmqkd/errors.hpp"

namespace dmqkd {

// A set of coherent-state amplitudes at mode D (the pre-beamsplitter mode)
// with sending probabilities. Amplitudes are SNU amplitudes, i.e. the state
// |beta> has quadrature means (2 Re beta, 2 Im beta).
struct Constellation {
  std::vector<std::complex<double>> points;
  std::vector<double> probs;
  std::string label;
  bool standard_qam = false;  // built by qam_constellation with exact grid
  int qam_side = 0;           // L for a standard L^2-QAM, else 0

  std::size_t size() const { return points.size(); }
  double max_abs_amplitude() const;
};

// L^2-QAM grid with half-spacing r and discrete-Gaussian parameter V_G.
struct QamSpec {
  int side = 0;          // L; n = L^2 points
  double spacing_r = 0;  // half the row/column spacing, SNU amplitude
  double gauss_vg = 0;   // V_G of the discrete Gaussian weights
};

// Discrete-Gaussian sending probabilities on the unit-spacing (r0 = 1) grid;
// independent of the actual spacing r. Row-major over (mu, nu) in [1, L]^2.
std::vector<double> qam_probabilities(int side, double gauss_vg);

// Standard QAM constellation: points (2mu-1-L) r + i (2nu-1-L) r with
// discrete-Gaussian probabilities evaluated at unit spacing.
Constellation qam_constellation(const QamSpec& spec);

struct Moments {
  double mean_x = 0;
  double mean_p = 0;
  double var_x = 1;   // includes the shot-noise unit
  double var_p = 1;
};

// Classical amplitude-cloud moments plus shot noise:
// V = 1 + sum_i p_i (xbar_i - xbar)^2 with xbar_i = 2 Re beta_i.
Moments constellation_moments(const Constellation& c);

// Half-spacing r such that the QAM's V_x equals target_va. Exact inversion of
// V_x = 1 + 4 r^2 Var_grid; throws numeric_error for unreachable targets
// (L = 1 or target <= 1).
double calibrate_r(int side, double gauss_vg, double target_va,
                   double tol = 1e-9);

// Parse a constellation document (JSON text). Two schemas:
//   {"type":"qam", "L":16, "V_G":3.0, "r":0.43}            (or "target_VA")
//   {"type":"custom", "points":[{"x":..,"p":..,"prob":..},...],
//    "auto_normalize":false}
// Custom points are (x, p) quadrature means; the amplitude is (x + i p)/2.
Constellation load_constellation(const std::string& json_text);

// Enforces the Constellation invariants: matching sizes, positive
// probabilities summing to 1 within 1e-12, pairwise-distinct points
// (separation > 1e-9). Throws config_error.
void validate_constellation(const Constellation& c);

}  // namespace dmqkd
