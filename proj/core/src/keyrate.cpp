#include "dmqkd/keyrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace dmqkd {

namespace {

// Kappa candidates at (or numerically on) the feasibility boundary are part
// of the supremum's closure; accept a hair of slack and let the entropy
// clipping absorb it.
constexpr double kFeasTol = 1e-9;
constexpr double kNuClip = 1e-6;

Eigen::Matrix2d diag2(double a, double b) {
  Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// Maximize f on [a, b] by golden-section; f is evaluated at interior points
// only. Returns {argmax, max}.
template <typename F>
std::pair<double, double> golden_max(F&& f, double a, double b, double tol,
                                     int* evals) {
  static const double inv_gr = 2.0 / (1.0 + std::sqrt(5.0));
  double c = b - (b - a) * inv_gr;
  double d = a + (b - a) * inv_gr;
  double fc = f(c);
  double fd = f(d);
  *evals += 2;
  while (std::abs(b - a) > tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * inv_gr;
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * inv_gr;
      fd = f(d);
    }
    ++(*evals);
  }
  return fc > fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

// Boundary of {t >= t0 : feasible(center + t * dir)} by doubling expansion
// and bisection. min-eig perturbations are 1-Lipschitz in each kappa entry,
// so a 1e-8 bracket pins the boundary min-eig well inside +/- 1e-6.
template <typename Feas>
double directional_boundary(Feas&& feasible, double cap, double tol = 1e-8) {
  if (!(cap > 0)) return 0.0;
  double lo = 0.0;
  double step = std::max(1e-6, 1e-3 * cap);
  double hi = step;
  while (hi < cap && feasible(hi)) {
    lo = hi;
    hi = std::min(cap, hi * 2.0);
  }
  if (hi >= cap && feasible(cap)) return cap;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

Eigen::MatrixXd StandardizedState::with_kappa(const Eigen::Matrix2d& kappa_std) const {
  const Eigen::Matrix2d kappa_lab =
      s_a.inverse() * kappa_std * s_b.inverse().transpose();
  Eigen::MatrixXd g = gamma_lab;
  g.block<2, 2>(0, 4) = kappa_lab;
  g.block<2, 2>(4, 0) = kappa_lab.transpose();
  return g;
}

double StandardizedState::min_eig_at(const Eigen::Matrix2d& kappa_std) const {
  return min_physicality_eig(with_kappa(kappa_std));
}

double StandardizedState::holevo_at(const Eigen::Matrix2d& kappa_std) const {
  return holevo_bound(with_kappa(kappa_std), measurement, kNuClip);
}

double StandardizedState::objective_at(const Eigen::Matrix2d& kappa_std) const {
  if (measurement == Measurement::heterodyne)
    return holevo_bound(with_kappa(kappa_std), Measurement::heterodyne, kNuClip);
  const Eigen::MatrixXd g = with_kappa(kappa_std);
  return 0.5 * (holevo_bound(g, Measurement::homodyne_x, kNuClip) +
                holevo_bound(g, Measurement::homodyne_p, kNuClip));
}

bool StandardizedState::symmetric_cross() const {
  return std::abs(phi_x - phi_p) <= 1e-9 * std::max(1.0, std::abs(phi_x));
}

StandardizedState standardize(const PartialCM& pcm, Measurement meas) {
  Eigen::Matrix4d gcb;
  gcb.block<2, 2>(0, 0) = pcm.gamma.block(1, 1);
  gcb.block<2, 2>(0, 2) = pcm.gamma.block(1, 2);
  gcb.block<2, 2>(2, 0) = pcm.gamma.block(2, 1);
  gcb.block<2, 2>(2, 2) = pcm.gamma.block(2, 2);
  const StandardFormCB sf = standard_form_cb(gcb);

  StandardizedState st;
  st.gamma_lab = pcm.gamma.m;
  st.gamma_lab.block<2, 2>(0, 4).setZero();
  st.gamma_lab.block<2, 2>(4, 0).setZero();
  st.s_c = sf.s_c;
  st.s_b = sf.s_b;
  st.s_a = extend_sa(sf.s_c);
  st.phi_x = sf.phi_x;
  st.phi_p = sf.phi_p;
  st.kappa_true_std = st.s_a * pcm.kappa_true * st.s_b.transpose();
  st.measurement = meas;
  return st;
}

std::optional<KappaInterval> kappa_interval_determinant(
    const StandardizedState& st, int axis, double other_value) {
  const auto det_at = [&](double k) {
    const Eigen::Matrix2d kappa =
        axis == 0 ? diag2(k, other_value) : diag2(other_value, k);
    const Eigen::MatrixXd g = st.with_kappa(kappa);
    Eigen::MatrixXcd m = g.cast<std::complex<double>>();
    m += std::complex<double>(0, 1) * omega(3).cast<std::complex<double>>();
    return m.determinant().real();
  };
  // det(gamma + i Omega) is an exact quadratic in a single kappa entry.
  const double h = 1.0;
  const double d0 = det_at(0.0), dp = det_at(h), dm = det_at(-h);
  const double a2 = 0.5 * (dp + dm - 2.0 * d0);
  const double a1 = 0.5 * (dp - dm);
  const double scale = std::max({std::abs(d0), std::abs(a1), 1e-30});
  if (std::abs(a2) < 1e-12 * scale) return std::nullopt;
  const double disc = a1 * a1 - 4.0 * a2 * d0;
  if (disc < 0) return std::nullopt;
  KappaInterval out;
  out.center = -a1 / (2.0 * a2);
  out.radius = std::sqrt(disc) / (2.0 * std::abs(a2));
  return out;
}

KappaBounds kappa_bounds(const StandardizedState& st) {
  KappaBounds out;
  const Eigen::Matrix2d ga = st.s_a * st.gamma_lab.block<2, 2>(0, 0) * st.s_a.transpose();
  const Eigen::Matrix2d gb = st.s_b * st.gamma_lab.block<2, 2>(4, 4) * st.s_b.transpose();
  out.outer11 = std::sqrt(ga(0, 0) * gb(0, 0));
  out.outer22 = std::sqrt(ga(1, 1) * gb(1, 1));

  // Feasible center: seed with the model's own kappa, then recenter with the
  // determinant quadratic along each axis until the centers settle.
  double c11 = st.kappa_true_std(0, 0);
  double c22 = st.kappa_true_std(1, 1);
  for (int pass = 0; pass < 60; ++pass) {
    double moved = 0;
    if (const auto i11 = kappa_interval_determinant(st, 0, c22)) {
      moved = std::max(moved, std::abs(i11->center - c11));
      c11 = i11->center;
    }
    if (const auto i22 = kappa_interval_determinant(st, 1, c11)) {
      moved = std::max(moved, std::abs(i22->center - c22));
      c22 = i22->center;
    }
    if (moved < 1e-12) break;
  }
  if (st.min_eig_at(diag2(c11, c22)) < -kFeasTol) {
    c11 = st.kappa_true_std(0, 0);
    c22 = st.kappa_true_std(1, 1);
    if (st.min_eig_at(diag2(c11, c22)) < -kFeasTol)
      throw numeric_error("kappa_bounds: no feasible center (unphysical inputs)");
  }

  const auto axis_interval = [&](int axis, double center, double other,
                                 double cap) {
    const auto feas = [&](double sgn) {
      return [&, sgn](double t) {
        const double k = center + sgn * t;
        return st.min_eig_at(axis == 0 ? diag2(k, other) : diag2(other, k)) >=
               -kFeasTol;
      };
    };
    const double up = directional_boundary(feas(+1.0), cap);
    const double dn = directional_boundary(feas(-1.0), cap);
    KappaInterval iv;
    iv.center = center + 0.5 * (up - dn);
    iv.radius = 0.5 * (up + dn);
    return iv;
  };

  out.k11 = axis_interval(0, c11, c22, 2.0 * out.outer11 + std::abs(c11) + 1.0);
  out.k22 = axis_interval(1, c22, c11, 2.0 * out.outer22 + std::abs(c22) + 1.0);
  return out;
}

SupResult sup_holevo(const StandardizedState& st, double tol, int seed_grid,
                     bool force_2d) {
  seed_grid = std::max(seed_grid, 3);
  SupResult res;
  int evals = 0;
  const auto holevo = [&](const Eigen::Matrix2d& k) {
    ++evals;
    return st.objective_at(k);
  };
  const auto feasible = [&](const Eigen::Matrix2d& k) {
    return st.min_eig_at(k) >= -kFeasTol;
  };

  const KappaBounds bounds = kappa_bounds(st);
  res.reduced_1d = st.symmetric_cross() && !force_2d;

  if (res.reduced_1d) {
    // Search along kappa22 = -kappa11. The sign-map symmetry guarantees the
    // line meets the feasible set: the midpoint of any feasible kappa and
    // its mirror image lies on it.
    const auto at = [](double t) { return diag2(t, -t); };
    double t0 = 0.5 * (st.kappa_true_std(0, 0) - st.kappa_true_std(1, 1));
    if (!feasible(at(t0)) && feasible(at(0.0))) t0 = 0.0;
    if (!feasible(at(t0)))
      throw numeric_error("sup_holevo: no feasible point on the reduced line");

    const double cap = 2.0 * std::max(bounds.outer11, bounds.outer22) +
                       std::abs(t0) + 1.0;
    const double up =
        directional_boundary([&](double s) { return feasible(at(t0 + s)); }, cap);
    const double dn =
        directional_boundary([&](double s) { return feasible(at(t0 - s)); }, cap);
    const double lo = t0 - dn, hi = t0 + up;

    double best_t = t0;
    double best_v = holevo(at(t0));
    const double width = hi - lo;
    if (width > tol) {
      for (int i = 0; i < seed_grid; ++i) {
        const double t = lo + width * i / (seed_grid - 1);
        if (!feasible(at(t))) continue;
        const double v = holevo(at(t));
        if (v > best_v) {
          best_v = v;
          best_t = t;
        }
      }
      const double step = width / (seed_grid - 1);
      const double ga = std::max(lo, best_t - step);
      const double gb = std::min(hi, best_t + step);
      const auto [tg, vg] = golden_max(
          [&](double t) {
            return feasible(at(t)) ? holevo(at(t))
                                   : -std::numeric_limits<double>::infinity();
          },
          ga, gb, tol, &evals);
      if (vg > best_v) {
        best_v = vg;
        best_t = tg;
      }
    }
    res.s_sup = best_v;
    res.kappa_star = at(best_t);
  } else {
    // 2D search over (kappa11, kappa22) inside the Cauchy-Schwarz box.
    double bk11 = st.kappa_true_std(0, 0);
    double bk22 = st.kappa_true_std(1, 1);
    double best_v = holevo(diag2(bk11, bk22));
    const double o11 = bounds.outer11, o22 = bounds.outer22;
    for (int i = 0; i < seed_grid; ++i) {
      const double k1 = -o11 + 2.0 * o11 * i / (seed_grid - 1);
      for (int j = 0; j < seed_grid; ++j) {
        const double k2 = -o22 + 2.0 * o22 * j / (seed_grid - 1);
        const Eigen::Matrix2d k = diag2(k1, k2);
        if (!feasible(k)) continue;
        const double v = holevo(k);
        if (v > best_v) {
          best_v = v;
          bk11 = k1;
          bk22 = k2;
        }
      }
    }

    // Direction-set descent: golden refinement along the axes and both
    // diagonals through the current point (the feasible set is a diagonal
    // sliver, where axis-only descent stalls on the ridge).
    const Eigen::Vector2d dirs[] = {{1, 0}, {0, 1},
                                    {M_SQRT1_2, -M_SQRT1_2},
                                    {M_SQRT1_2, M_SQRT1_2}};
    const double cap0 = 2.0 * (o11 + o22) + std::abs(bk11) + std::abs(bk22) + 1.0;
    for (int sweep_i = 0; sweep_i < 60; ++sweep_i) {
      double moved = 0;
      for (const auto& dir : dirs) {
        const Eigen::Vector2d base(bk11, bk22);
        const auto at = [&](double s) {
          const Eigen::Vector2d k = base + s * dir;
          return diag2(k(0), k(1));
        };
        const double up = directional_boundary(
            [&](double s) { return feasible(at(s)); }, cap0);
        const double dn = directional_boundary(
            [&](double s) { return feasible(at(-s)); }, cap0);
        if (up + dn <= tol) continue;
        const auto [s_new, v_new] = golden_max(
            [&](double s) {
              return feasible(at(s)) ? holevo(at(s))
                                     : -std::numeric_limits<double>::infinity();
            },
            -dn, up, tol, &evals);
        if (v_new > best_v) {
          best_v = v_new;
          moved = std::max(moved, std::abs(s_new));
          bk11 = base(0) + s_new * dir(0);
          bk22 = base(1) + s_new * dir(1);
        }
      }
      if (moved <= tol) break;
    }
    res.s_sup = best_v;
    res.kappa_star = diag2(bk11, bk22);
  }

  res.evaluations = evals;
  res.feasibility_margin = st.min_eig_at(res.kappa_star);
  return res;
}

namespace {

// Differential entropy (bits) of a 1D Gaussian mixture by Simpson's rule on
// an odd grid spanning +/- (max|mean| + 10 sigma).
double mixture_entropy_1d(const std::vector<double>& means,
                          const std::vector<double>& probs, double var,
                          int points) {
  if (points % 2 == 0) ++points;
  double max_mean = 0;
  for (double m : means) max_mean = std::max(max_mean, std::abs(m));
  const double sigma = std::sqrt(var);
  const double span = max_mean + 10.0 * sigma;
  const double h = 2.0 * span / (points - 1);
  const double norm = 1.0 / std::sqrt(2.0 * M_PI * var);

  double acc = 0;
  for (int i = 0; i < points; ++i) {
    const double y = -span + i * h;
    double p = 0;
    for (std::size_t k = 0; k < means.size(); ++k) {
      const double d = y - means[k];
      p += probs[k] * norm * std::exp(-0.5 * d * d / var);
    }
    const double f = p > 1e-300 ? -p * std::log2(p) : 0.0;
    const double w = (i == 0 || i == points - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * f;
  }
  return acc * h / 3.0;
}

// Joint entropy of the product-kernel 2D mixture (heterodyne outcomes).
double mixture_entropy_2d(const std::vector<double>& means_x,
                          const std::vector<double>& means_p,
                          const std::vector<double>& probs, double var,
                          int points) {
  if (points % 2 == 0) ++points;
  double mx = 0, mp = 0;
  for (double m : means_x) mx = std::max(mx, std::abs(m));
  for (double m : means_p) mp = std::max(mp, std::abs(m));
  const double sigma = std::sqrt(var);
  const double span_x = mx + 10.0 * sigma;
  const double span_p = mp + 10.0 * sigma;
  const double hx = 2.0 * span_x / (points - 1);
  const double hp = 2.0 * span_p / (points - 1);
  const double norm = 1.0 / std::sqrt(2.0 * M_PI * var);
  const auto n = static_cast<Eigen::Index>(probs.size());

  Eigen::MatrixXd gx(n, points), gp(n, points);
  for (Eigen::Index k = 0; k < n; ++k)
    for (int i = 0; i < points; ++i) {
      const double dx = -span_x + i * hx - means_x[k];
      const double dp = -span_p + i * hp - means_p[k];
      gx(k, i) = norm * std::exp(-0.5 * dx * dx / var);
      gp(k, i) = norm * std::exp(-0.5 * dp * dp / var);
    }
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(probs.data(), n);
  const Eigen::MatrixXd joint = gx.transpose() * w.asDiagonal() * gp;

  const auto simpson_w = [&](int i) {
    return (i == 0 || i == points - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
  };
  double acc = 0;
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j) {
      const double p = joint(i, j);
      if (p > 1e-300) acc -= simpson_w(i) * simpson_w(j) * p * std::log2(p);
    }
  return acc * hx * hp / 9.0;
}

struct CollapsedMeans {
  std::vector<double> means;
  std::vector<double> probs;
};

// Merge constellation points sharing a marginal mean (QAM columns/rows).
CollapsedMeans collapse(const std::vector<double>& means,
                        const std::vector<double>& probs) {
  std::vector<std::size_t> order(means.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return means[a] < means[b]; });
  CollapsedMeans out;
  for (std::size_t i : order) {
    if (!out.means.empty() && std::abs(means[i] - out.means.back()) < 1e-12) {
      out.probs.back() += probs[i];
    } else {
      out.means.push_back(means[i]);
      out.probs.push_back(probs[i]);
    }
  }
  return out;
}

double mutual_information_impl(const ThreeModeSource& src,
                               const ChannelParams& ch, Measurement meas,
                               int grid_points) {
  const double rt = std::sqrt(ch.transmittance);
  const std::size_t n = src.constellation.size();
  std::vector<double> means_x(n), means_p(n);
  for (std::size_t i = 0; i < n; ++i) {
    means_x[i] = rt * src.cond_means[i].x_b0;
    means_p[i] = rt * src.cond_means[i].p_b0;
  }
  const double cond_var = ch.conditional_variance();

  if (meas == Measurement::heterodyne) {
    // Per-quadrature estimator: one vacuum unit of detection noise.
    const double v = cond_var + 1.0;
    const int pts = std::min(grid_points, 1001);
    const double joint =
        mixture_entropy_2d(means_x, means_p, src.constellation.probs, v, pts);
    const double cond = std::log2(2.0 * M_PI * M_E * v);  // two quadratures
    return std::max(0.0, joint - cond);
  }

  const auto& raw = meas == Measurement::homodyne_x ? means_x : means_p;
  const auto cm = collapse(raw, src.constellation.probs);
  const double mix = mixture_entropy_1d(cm.means, cm.probs, cond_var, grid_points);
  const double cond = 0.5 * std::log2(2.0 * M_PI * M_E * cond_var);
  return std::max(0.0, mix - cond);
}

}  // namespace

double mutual_information(const ThreeModeSource& src, const ChannelParams& ch,
                          Measurement meas, int grid_points) {
  ch.validate();
  if (grid_points < 201)
    throw std::invalid_argument("mutual_information: grid too small");
  const double coarse = mutual_information_impl(src, ch, meas, grid_points);
  const double fine = mutual_information_impl(src, ch, meas, 2 * grid_points - 1);
  if (std::abs(coarse - fine) > 1e-6)
    throw numeric_error("mutual_information: integration grid too coarse (" +
                        std::to_string(std::abs(coarse - fine)) +
                        " change on refinement)");
  return coarse;
}

KeyRatePoint key_rate(const ThreeModeSource& src, const ChannelParams& ch,
                      double beta, Measurement meas,
                      const NumericsParams& numerics) {
  if (!(beta > 0.0 && beta <= 1.0))
    throw config_error("key_rate: beta must lie in (0, 1]");
  KeyRatePoint pt;
  pt.transmittance = ch.transmittance;
  pt.excess_noise = ch.excess_noise;
  pt.constellation_label = src.constellation.label;
  pt.beta = beta;
  pt.cutoff = src.cutoff;

  const PartialCM pcm = apply_channel(src, ch);
  const StandardizedState st = standardize(pcm, meas);
  const SupResult sup = sup_holevo(st, numerics.kappa_tol, numerics.seed_grid);
  // Homodyne keys pool randomly switched x and p slices; the per-use mutual
  // information is their average (identical for x/p-symmetric sources).
  if (meas == Measurement::heterodyne) {
    pt.mutual_info = mutual_information(src, ch, meas, numerics.mi_grid);
  } else {
    pt.mutual_info =
        0.5 * (mutual_information(src, ch, Measurement::homodyne_x,
                                  numerics.mi_grid) +
               mutual_information(src, ch, Measurement::homodyne_p,
                                  numerics.mi_grid));
  }
  pt.holevo_sup = sup.s_sup;
  pt.key_rate = beta * pt.mutual_info - pt.holevo_sup;
  pt.key_rate_clamped = std::max(0.0, pt.key_rate);
  pt.kappa11_star = sup.kappa_star(0, 0);
  pt.kappa22_star = sup.kappa_star(1, 1);
  pt.search_evaluations = sup.evaluations;
  pt.reduced_1d = sup.reduced_1d;
  pt.feasible = true;
  pt.feasibility_margin = sup.feasibility_margin;
  return pt;
}

KeyRatePoint gaussian_reference(double v_mod, const ChannelParams& ch,
                                double beta, Measurement meas) {
  ch.validate();
  if (v_mod <= 1.0)
    throw config_error("gaussian_reference: modulation variance must exceed 1");
  if (!(beta > 0.0 && beta <= 1.0))
    throw config_error("gaussian_reference: beta must lie in (0, 1]");

  const double t = ch.transmittance;
  const double cond_var = ch.conditional_variance();
  const double v_b = t * (v_mod - 1.0) + cond_var;
  const double phi = std::sqrt(t * (v_mod * v_mod - 1.0));

  Eigen::MatrixXd gamma(4, 4);
  gamma.setZero();
  gamma.block<2, 2>(0, 0) = v_mod * Eigen::Matrix2d::Identity();
  gamma.block<2, 2>(2, 2) = v_b * Eigen::Matrix2d::Identity();
  gamma(0, 2) = gamma(2, 0) = phi;
  gamma(1, 3) = gamma(3, 1) = -phi;

  KeyRatePoint pt;
  pt.transmittance = t;
  pt.excess_noise = ch.excess_noise;
  pt.constellation_label = "gaussian";
  pt.beta = beta;
  pt.mutual_info = meas == Measurement::heterodyne
                       ? std::log2((v_b + 1.0) / (cond_var + 1.0))
                       : 0.5 * std::log2(v_b / cond_var);
  pt.holevo_sup = holevo_bound(gamma, meas, kNuClip);
  pt.key_rate = beta * pt.mutual_info - pt.holevo_sup;
  pt.key_rate_clamped = std::max(0.0, pt.key_rate);
  pt.kappa11_star = phi;
  pt.kappa22_star = -phi;
  pt.feasible = true;
  pt.feasibility_margin = min_physicality_eig(gamma);
  return pt;
}

double tolerable_excess_noise(const ThreeModeSource& src, double transmittance,
                              NoiseConvention convention, double beta,
                              Measurement meas, const NumericsParams& numerics,
                              double tol) {
  const auto rate = [&](double eps) {
    ChannelParams ch;
    ch.transmittance = transmittance;
    ch.excess_noise = eps;
    ch.convention = convention;
    return key_rate(src, ch, beta, meas, numerics).key_rate;
  };
  if (rate(0.0) <= 0.0)
    throw numeric_error("tolerable_excess_noise: no positive rate at eps = 0");

  double lo = 0.0, hi = 0.01;
  while (rate(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1024.0)
      throw numeric_error("tolerable_excess_noise: rate stays positive");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (rate(mid) > 0.0 ? lo : hi) = mid;
  }
  return lo;
}

std::vector<KeyRatePoint> sweep(const SweepSpec& spec) {
  struct Job {
    int source = -1;  // -1: gaussian reference row
    double distance_km = std::numeric_limits<double>::quiet_NaN();
    double transmittance = 1;
  };

  std::vector<Job> jobs;
  const auto push_grid = [&](int source_idx) {
    if (!spec.distances_km.empty()) {
      for (double d : spec.distances_km)
        jobs.push_back({source_idx, d,
                        distance_to_transmittance(d, spec.att_db_per_km)});
    } else {
      for (double t : spec.transmittances)
        jobs.push_back({source_idx, std::numeric_limits<double>::quiet_NaN(), t});
    }
  };
  for (int s = 0; s < static_cast<int>(spec.sources.size()); ++s) push_grid(s);
  if (spec.include_gaussian) push_grid(-1);

  double gauss_v = spec.gaussian_v_mod;
  if (gauss_v <= 0 && !spec.sources.empty())
    gauss_v = spec.sources.front().gamma_b0()(0, 0);

  std::vector<KeyRatePoint> results(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      ChannelParams ch;
      ch.transmittance = job.transmittance;
      ch.excess_noise = spec.excess_noise;
      ch.convention = spec.convention;
      KeyRatePoint pt;
      try {
        pt = job.source < 0
                 ? gaussian_reference(gauss_v, ch, spec.beta, spec.measurement)
                 : key_rate(spec.sources[job.source], ch, spec.beta,
                            spec.measurement, spec.numerics);
      } catch (const std::exception& e) {
        pt.constellation_label =
            job.source < 0 ? "gaussian"
                           : spec.sources[job.source].constellation.label;
        pt.transmittance = job.transmittance;
        pt.excess_noise = spec.excess_noise;
        pt.beta = spec.beta;
        pt.feasible = false;
        pt.error = e.what();
      }
      pt.distance_km = job.distance_km;
      results[i] = std::move(pt);
    }
  };

  unsigned hw = std::thread::hardware_concurrency();
  unsigned n_threads = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                        : (hw > 0 ? hw : 1);
  n_threads = std::min<unsigned>(n_threads, std::max<std::size_t>(jobs.size(), 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return results;
}

}  // namespace dmqkd
