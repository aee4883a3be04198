// Acceptance suite: prints one PASS/FAIL line per criterion and exits with
// the number of failed criteria. Indented lines are supporting measurements.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dmqkd/config.hpp"
#include "dmqkd/keyrate.hpp"
#include "dmqkd/report.hpp"

namespace {

using namespace dmqkd;

int g_failures = 0;

void line(bool ok, int idx, const std::string& what) {
  std::printf("%s  criterion %d: %s\n", ok ? "PASS" : "FAIL", idx, what.c_str());
  if (!ok) ++g_failures;
}

void note(const std::string& what) { std::printf("      %s\n", what.c_str()); }

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

PurifiedSource qam_pure(int side, double vg, double va) {
  const double r = calibrate_r(side, vg, va);
  return build_purification(qam_constellation({side, r, vg}));
}

ThreeModeSource qam_source(int side, double vg, double va) {
  return split_on_beamsplitter(qam_pure(side, vg, va), 0.9);
}

ChannelParams chan(double t, double eps, NoiseConvention conv) {
  ChannelParams ch;
  ch.transmittance = t;
  ch.excess_noise = eps;
  ch.convention = conv;
  return ch;
}

Constellation random_constellation(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(2, 64);
  std::uniform_real_distribution<double> amp(-1.6, 1.6);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  Constellation c;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    for (;;) {
      const std::complex<double> pt(amp(rng), amp(rng));
      bool clash = false;
      for (const auto& q : c.points) clash |= std::abs(q - pt) < 1e-6;
      if (!clash) {
        c.points.push_back(pt);
        break;
      }
    }
    c.probs.push_back(weight(rng));
  }
  double sum = 0;
  for (double p : c.probs) sum += p;
  for (double& p : c.probs) p /= sum;
  c.label = "random-" + std::to_string(n);
  return c;
}

double classical_xc_xb0(const ThreeModeSource& src) {
  double mean_c = 0, mean_b = 0;
  const auto& probs = src.constellation.probs;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    mean_c += probs[i] * src.cond_means[i].x_c;
    mean_b += probs[i] * src.cond_means[i].x_b0;
  }
  double acc = 0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    acc += probs[i] * (src.cond_means[i].x_c - mean_c) *
           (src.cond_means[i].x_b0 - mean_b);
  return acc;
}

Eigen::Matrix2d diag_kappa(double a, double b) {
  Eigen::Matrix2d k = Eigen::Matrix2d::Zero();
  k(0, 0) = a;
  k(1, 1) = b;
  return k;
}

StandardizedState synthetic_state(double va, double c_ac, double a, double vb,
                                  double phi_x, double phi_p, Measurement meas) {
  StandardizedState st;
  st.gamma_lab = Eigen::MatrixXd::Zero(6, 6);
  st.gamma_lab.block<2, 2>(0, 0) = va * Eigen::Matrix2d::Identity();
  st.gamma_lab.block<2, 2>(2, 2) = a * Eigen::Matrix2d::Identity();
  st.gamma_lab.block<2, 2>(4, 4) = vb * Eigen::Matrix2d::Identity();
  st.gamma_lab(0, 2) = st.gamma_lab(2, 0) = -c_ac;
  st.gamma_lab(1, 3) = st.gamma_lab(3, 1) = c_ac;
  st.gamma_lab(2, 4) = st.gamma_lab(4, 2) = phi_x;
  st.gamma_lab(3, 5) = st.gamma_lab(5, 3) = phi_p;
  st.s_a = st.s_c = st.s_b = Eigen::Matrix2d::Identity();
  st.phi_x = phi_x;
  st.phi_p = phi_p;
  st.kappa_true_std = Eigen::Matrix2d::Zero();
  st.measurement = meas;
  return st;
}

// --------------------------------------------------------------------------

void criterion1_eta_reproduction() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Case {
    int side;
    double va, vg, expected, rel_lo, rel_hi;
  };
  // rel_lo/rel_hi: acceptable band as multiples of the expected value.
  const Case cases[] = {
      {4, 3.0, 3.0, 3.7e-3, 0.8, 1.2},   {4, 5.0, 4.5, 1e-2, 0.8, 1.2},
      {8, 3.0, 5.0, 2.4e-5, 0.75, 1.25}, {8, 5.0, 6.0, 1.4e-4, 0.75, 1.25},
      {16, 5.0, 11.0, 6.5e-8, 0.5, 1.5}, {16, 3.0, 8.0, 8.2e-10, 1.0 / 3, 3.0},
  };
  bool ok = true;
  int max_cutoff = 0;
  for (const auto& c : cases) {
    const auto pure = qam_pure(c.side, c.vg, c.va);
    max_cutoff = std::max(max_cutoff, pure.cutoff);
    const double gap = pure.eta_a ? 1.0 - *pure.eta_a : -1.0;
    const bool in_band =
        gap >= c.rel_lo * c.expected && gap <= c.rel_hi * c.expected;
    ok &= in_band;
    note(fmt("%d-QAM V_A=%.1f V_G=%.2f: 1-eta_A = %.3e (expected %.1e, %s)",
             c.side * c.side, c.va, c.vg, gap, c.expected,
             in_band ? "in band" : "OUT OF BAND"));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  ok &= secs <= 300.0 && max_cutoff <= 256;
  note(fmt("runtime %.1f s, max cutoff %d", secs, max_cutoff));
  line(ok, 1, "eta_A reproduction at the quoted optima");
}

void criterion2_covariance_oracle() {
  std::mt19937_64 rng(20250810);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = random_constellation(rng);
    const auto src = split_on_beamsplitter(build_purification(c), 0.9);
    worst = std::max(worst,
                     std::abs(src.phi_cb0()(0, 0) - classical_xc_xb0(src)));
  }
  note(fmt("worst |<dx_C dx_B0>_Fock - mean-product sum| = %.3e over 20 "
           "random constellations (n <= 64)",
           worst));
  line(worst <= 1e-8, 2, "Fock-basis C-B0 covariance matches the analytic sum");
}

void criterion3_physicality() {
  bool ok = true;
  std::mt19937_64 rng(424242);
  double worst_state = 0;
  std::vector<ThreeModeSource> sources;
  for (int trial = 0; trial < 8; ++trial)
    sources.push_back(
        split_on_beamsplitter(build_purification(random_constellation(rng)), 0.9));
  sources.push_back(qam_source(4, 3.0, 3.0));
  sources.push_back(qam_source(8, 6.0, 5.0));
  for (const auto& s : sources)
    worst_state = std::min(worst_state, min_physicality_eig(s.gamma.m));
  ok &= worst_state >= -1e-8;
  note(fmt("worst min-eig(gamma_ACB0 + i Omega) = %.3e", worst_state));

  double worst_boundary = 0;
  const auto probe = [&](const ThreeModeSource& src, double t, double eps) {
    const auto st = standardize(
        apply_channel(src, chan(t, eps, NoiseConvention::input_referred)),
        Measurement::homodyne_x);
    const auto b = kappa_bounds(st);
    for (double edge : {b.k11.lo(), b.k11.hi()}) {
      const double e = st.min_eig_at(diag_kappa(edge, b.k22.center));
      worst_boundary = std::max(worst_boundary, std::abs(e));
    }
    for (double edge : {b.k22.lo(), b.k22.hi()}) {
      const double e = st.min_eig_at(diag_kappa(b.k11.center, edge));
      worst_boundary = std::max(worst_boundary, std::abs(e));
    }
  };
  probe(sources.back(), 0.5, 0.02);
  probe(sources.back(), 0.2, 0.05);
  probe(sources.front(), 0.7, 0.01);
  ok &= worst_boundary <= 1e-6;
  note(fmt("worst |min-eig| at kappa interval boundaries = %.3e", worst_boundary));
  line(ok, 3, "physicality of source CMs and kappa feasibility boundaries");
}

void criterion4_symmetries() {
  bool ok = true;

  // Off-diagonal sign flip at the Holevo-bound level.
  double worst_flip = 0;
  const StandardizedState st =
      synthetic_state(3.0, 0.8, 1.5, 1.9, 0.55, 0.35, Measurement::homodyne_x);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(-0.3, 0.3);
  for (int trial = 0; trial < 12; ++trial) {
    Eigen::Matrix2d k;
    k << unif(rng), unif(rng), unif(rng), unif(rng);
    for (int shrink = 0; shrink < 40 && st.min_eig_at(k) < -1e-9; ++shrink)
      k *= 0.5;
    if (st.min_eig_at(k) < -1e-9) continue;
    Eigen::Matrix2d flipped = k;
    flipped(0, 1) *= -1;
    flipped(1, 0) *= -1;
    worst_flip =
        std::max(worst_flip, std::abs(st.holevo_at(k) - st.holevo_at(flipped)));
  }
  ok &= worst_flip <= 1e-6;
  note(fmt("worst |S(k12,k21) - S(-k12,-k21)| = %.3e", worst_flip));

  // Sign map (-k22, -k11, phi_p, phi_x) with the measurement swapped.
  double worst_map = 0;
  const struct {
    double va, c, a, vb, px, pp;
  } params[] = {{3.2, 0.7, 1.6, 2.1, 0.6, 0.25},
                {2.4, 0.5, 1.3, 1.7, 0.35, 0.3},
                {4.0, 1.1, 1.8, 2.6, 0.8, 0.45}};
  for (const auto& p : params) {
    const auto s1 =
        synthetic_state(p.va, p.c, p.a, p.vb, p.px, p.pp, Measurement::homodyne_x);
    const auto s2 =
        synthetic_state(p.va, p.c, p.a, p.vb, p.pp, p.px, Measurement::homodyne_p);
    for (const auto& kd : {std::pair{0.3, -0.2}, {0.1, 0.05}, {-0.25, 0.15}}) {
      const auto k1 = diag_kappa(kd.first, kd.second);
      const auto k2 = diag_kappa(-kd.second, -kd.first);
      if (s1.min_eig_at(k1) < -1e-9 || s2.min_eig_at(k2) < -1e-9) continue;
      worst_map =
          std::max(worst_map, std::abs(s1.holevo_at(k1) - s2.holevo_at(k2)));
    }
  }
  ok &= worst_map <= 1e-6;
  note(fmt("worst sign-map mismatch = %.3e", worst_map));

  // Reduced 1D vs full 2D search on pipeline states (phi_x = phi_p).
  double worst_search = 0;
  const auto src = qam_source(4, 3.0, 3.0);
  for (double t : {0.6, 0.25}) {
    const auto stp = standardize(
        apply_channel(src, chan(t, 0.03, NoiseConvention::input_referred)),
        Measurement::homodyne_x);
    const auto reduced = sup_holevo(stp, 1e-7);
    const auto full = sup_holevo(stp, 1e-7, 33, /*force_2d=*/true);
    worst_search = std::max(worst_search, std::abs(reduced.s_sup - full.s_sup));
  }
  ok &= worst_search <= 1e-5;
  note(fmt("worst |S_sup(1D) - S_sup(2D)| = %.3e", worst_search));
  line(ok, 4, "Holevo-bound symmetries and search-path consistency");
}

void criterion5_lossless_limit() {
  // The identity-channel bound is the Gaussian-extremality penalty of the
  // source alone, so near-ideal sources (eta_A -> 1) make it vanish. The
  // Fig.-4 simulation sources carry a visible penalty; reported below.
  struct Case {
    int side;
    double va, vg;
  };
  const Case cases[] = {{4, 1.1, 1.9}, {8, 2.0, 3.75}, {16, 5.0, 11.0}};
  const double beta = 0.95;
  bool ok = true;
  for (const auto& c : cases) {
    const auto src = qam_source(c.side, c.vg, c.va);
    const auto pt = key_rate(src, chan(1.0, 0.0, NoiseConvention::paper_cloner),
                             beta, Measurement::homodyne_x);
    const double gap = std::abs(pt.key_rate - beta * pt.mutual_info);
    const bool pass = pt.holevo_sup <= 1e-4 && gap <= 1e-4;
    ok &= pass;
    note(fmt("%d-QAM V_A=%.2f V_G=%.2f: S_sup(T=1) = %.3e, |K - beta I| = %.3e",
             c.side * c.side, c.va, c.vg, pt.holevo_sup, gap));
  }
  for (const auto& c : {Case{4, 3.0, 3.0}, Case{8, 5.0, 6.0}}) {
    const auto src = qam_source(c.side, c.vg, c.va);
    const auto st = standardize(
        apply_channel(src, chan(1.0, 0.0, NoiseConvention::paper_cloner)),
        Measurement::homodyne_x);
    note(fmt("reported (not gated): %d-QAM V_A=%.0f source penalty at T=1: "
             "S_sup = %.3e",
             c.side * c.side, c.va, sup_holevo(st).s_sup));
  }
  line(ok, 5, "lossless channel: S_sup <= 1e-4 and K = beta*I for all three "
              "QAM sizes (near-ideal sources)");
}

void criterion6_gaussian_proximity() {
  const auto q256 = qam_source(16, 11.0, 5.0);
  bool ok = true;
  for (double d : {10.0, 25.0, 50.0}) {
    const auto ch =
        chan(distance_to_transmittance(d), 0.01, NoiseConvention::paper_cloner);
    const auto qam = key_rate(q256, ch, 0.95, Measurement::homodyne_x);
    const auto ref = gaussian_reference(4.6, ch, 0.95, Measurement::homodyne_x);
    const double rel = std::abs(qam.key_rate / ref.key_rate - 1.0);
    ok &= rel <= 0.05;
    note(fmt("paper_cloner d=%2.0f km: K(256-QAM) = %.6f, K(gaussian) = %.6f, "
             "rel dev %.4f",
             d, qam.key_rate, ref.key_rate, rel));
  }
  for (double d : {10.0, 25.0, 50.0}) {
    const auto ch = chan(distance_to_transmittance(d), 0.01,
                         NoiseConvention::input_referred);
    const auto qam = key_rate(q256, ch, 0.95, Measurement::homodyne_x);
    const auto ref = gaussian_reference(4.6, ch, 0.95, Measurement::homodyne_x);
    note(fmt("reported (not gated) input_referred d=%2.0f km: rel dev %.4f", d,
             std::abs(qam.key_rate / ref.key_rate - 1.0)));
  }
  line(ok, 6, "256-QAM within 5% of the ideal Gaussian reference at matched "
              "variance 4.6");
}

void criterion7_ordering_and_shape() {
  // Shape claims are gated on the clamped rate: the published curves are
  // log-scale and show only the positive region, and the signed rate
  // returns to 0- as T -> 0.
  const auto conv = NoiseConvention::input_referred;
  const auto q16 = qam_source(4, 3.0, 3.0);
  const auto q64 = qam_source(8, 6.0, 5.0);
  const auto q256 = qam_source(16, 11.0, 5.0);
  bool ordered = true, monotone_d = true;
  double prev16 = 1e9, prev64 = 1e9, prev256 = 1e9;
  for (double d = 0.0; d <= 80.0; d += 10.0) {
    const auto ch = chan(distance_to_transmittance(d), 0.05, conv);
    const double k16 =
        key_rate(q16, ch, 0.95, Measurement::homodyne_x).key_rate_clamped;
    const double k64 =
        key_rate(q64, ch, 0.95, Measurement::homodyne_x).key_rate_clamped;
    const double k256 =
        key_rate(q256, ch, 0.95, Measurement::homodyne_x).key_rate_clamped;
    ordered &= k256 >= k64 && k64 >= k16;
    monotone_d &= k16 <= prev16 + 1e-12 && k64 <= prev64 + 1e-12 &&
                  k256 <= prev256 + 1e-12;
    prev16 = k16;
    prev64 = k64;
    prev256 = k256;
  }
  note(fmt("ordering 256 >= 64 >= 16 pointwise on 0..80 km at eps=0.05: %s",
           ordered ? "holds" : "violated"));
  note(fmt("clamped rates monotone non-increasing in distance: %s",
           monotone_d ? "holds" : "violated"));

  bool monotone_eps = true;
  for (const auto* src : {&q16, &q64, &q256}) {
    double prev = 1e9;
    for (double eps : {0.01, 0.03, 0.05, 0.08}) {
      const auto ch = chan(distance_to_transmittance(25.0), eps, conv);
      const double k =
          key_rate(*src, ch, 0.95, Measurement::homodyne_x).key_rate_clamped;
      monotone_eps &= k <= prev + 1e-12;
      prev = k;
    }
  }
  note(fmt("clamped rates monotone non-increasing in excess noise: %s",
           monotone_eps ? "holds" : "violated"));

  bool frontier_ordered = true;
  NumericsParams fast;
  fast.mi_grid = 2001;
  for (double d : {25.0, 50.0}) {
    const double t = distance_to_transmittance(d);
    const double e16 = tolerable_excess_noise(q16, t, conv, 0.95,
                                              Measurement::homodyne_x, fast, 1e-4);
    const double e64 = tolerable_excess_noise(q64, t, conv, 0.95,
                                              Measurement::homodyne_x, fast, 1e-4);
    const double e256 = tolerable_excess_noise(q256, t, conv, 0.95,
                                               Measurement::homodyne_x, fast, 1e-4);
    frontier_ordered &= e256 >= e64 && e64 >= e16;
    note(fmt("tolerable excess noise at %2.0f km: 16-QAM %.4f, 64-QAM %.4f, "
             "256-QAM %.4f",
             d, e16, e64, e256));
  }
  line(ordered && monotone_d && monotone_eps && frontier_ordered, 7,
       "Fig.-4 shape claims: constellation ordering, distance/noise "
       "monotonicity, noise-frontier ordering");
}

void criterion8_convergence() {
  const auto base = qam_pure(4, 3.0, 3.0);
  const auto doubled =
      build_purification(base.constellation, 2 * base.cutoff);
  const double eta_rel =
      std::abs(*base.eta_a - *doubled.eta_a) / *base.eta_a;

  const auto src = qam_source(4, 3.0, 3.0);
  const auto ch = chan(0.5, 0.02, NoiseConvention::input_referred);
  const double mi_a = mutual_information(src, ch, Measurement::homodyne_x, 4001);
  const double mi_b = mutual_information(src, ch, Measurement::homodyne_x, 8001);

  const auto st = standardize(apply_channel(src, ch), Measurement::homodyne_x);
  const double s_a = sup_holevo(st, 1e-6).s_sup;
  const double s_b = sup_holevo(st, 5e-7).s_sup;

  note(fmt("cutoff doubling: relative eta_A change %.3e", eta_rel));
  note(fmt("integration grid doubling: I_AB change %.3e", std::abs(mi_a - mi_b)));
  note(fmt("kappa tolerance halving: S_sup change %.3e", std::abs(s_a - s_b)));
  line(eta_rel < 1e-9 && std::abs(mi_a - mi_b) < 1e-6 &&
           std::abs(s_a - s_b) < 1e-5,
       8, "convergence gates (cutoff, integration grid, search tolerance)");
}

void criterion9_determinism() {
#ifndef DMQKD_CLI_PATH
  line(false, 9, "CLI binary path not wired in");
  return;
#else
  char tmpl[] = "/tmp/dmqkd_accept_XXXXXX";
  const char* dir = mkdtemp(tmpl);
  if (!dir) {
    line(false, 9, "cannot create temp directory");
    return;
  }
  const std::string base(dir);
  const std::string cfg_path = base + "/sweep.json";
  {
    std::ofstream cfg(cfg_path);
    cfg << R"({
      "channel": {"eps_C": 0.01, "convention": "input_referred"},
      "protocol": {"beta": 0.95, "measurement": "homodyne_x", "eta_BS": 0.9},
      "numerics": {"mi_grid_points": 2001},
      "sweep": {
        "distances_km": [0.0, 25.0, 50.0],
        "include_gaussian": true,
        "constellations": [
          {"type": "qam", "L": 4, "V_G": 3.0, "target_VA": 3.0},
          {"type": "qam", "L": 8, "V_G": 6.0, "target_VA": 5.0}
        ]
      }
    })";
  }
  const auto run = [&](const std::string& out, int threads) {
    const std::string cmd = std::string(DMQKD_CLI_PATH) + " sweep --config " +
                            cfg_path + " --out " + out + " --threads " +
                            std::to_string(threads);
    return std::system(cmd.c_str());
  };
  const auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool ok = true;
  ok &= run(base + "/a.csv", 1) == 0;
  ok &= run(base + "/b.csv", 1) == 0;
  ok &= run(base + "/c.csv", 4) == 0;
  ok &= run(base + "/d.csv", 2) == 0;
  const std::string a = slurp(base + "/a.csv");
  ok &= !a.empty();
  ok &= a == slurp(base + "/b.csv");
  ok &= a == slurp(base + "/c.csv");
  ok &= a == slurp(base + "/d.csv");
  note(fmt("four CLI sweep runs (threads 1,1,4,2): %zu bytes each, %s",
           a.size(), ok ? "byte-identical" : "MISMATCH"));
  line(ok, 9, "identical config produces byte-identical CSV at any thread count");
#endif
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion1_eta_reproduction();
  criterion2_covariance_oracle();
  criterion3_physicality();
  criterion4_symmetries();
  criterion5_lossless_limit();
  criterion6_gaussian_proximity();
  criterion7_ordering_and_shape();
  criterion8_convergence();
  criterion9_determinism();
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::printf("%d/9 criteria passed in %.1f s\n", 9 - g_failures, secs);
  return g_failures;
}
