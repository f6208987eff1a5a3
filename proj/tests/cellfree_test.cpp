#include <cmath>
#include <vector>

#include <doctest.h>

#include "cfmimo/cellfree.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/rng.hpp"
#include "cfmimo/scenario.hpp"

using namespace cfmimo;

namespace {

struct Instance {
  Deployment dep;
  PilotBook pilots;
  EstimationStats stats;
  ChannelMoments moments;
  ScenarioConfig cfg;
};

Instance make_instance(uint64_t seed, int tau_up = 4, int tau_dp = 4) {
  Instance inst;
  inst.cfg.m_aps = 25;
  inst.cfg.l_antennas = 2;
  inst.cfg.k_ues = 8;
  inst.cfg.tau_up = tau_up;
  inst.cfg.tau_dp = tau_dp;
  inst.dep = build_cellfree(inst.cfg, seed);
  inst.pilots = build_pilot_book(inst.dep.beta, tau_up, tau_dp);
  inst.stats = uplink_estimation_stats(inst.dep.beta, inst.pilots.up_gram, tau_up, inst.dep.e_up);
  inst.stats.eta = uniform_power_control(inst.stats.gamma, inst.cfg.l_antennas);
  inst.moments = downlink_channel_moments(inst.dep.beta, inst.stats, inst.cfg.l_antennas,
                                          inst.pilots, tau_dp, inst.dep.e_dp);
  return inst;
}

// Independent route to the static (no-aging) SINR: every autocorrelation
// factor deleted, assembled from scratch rather than via ChannelMoments.
double static_sinr_from_scratch(const Mat& beta, const Mat& gamma, const Mat& eta,
                                const Mat& up_gram, const Mat& dp_gram, int l, int tau_dp,
                                double e_dp, double e_d, int k, bool trained) {
  const int m = beta.rows(), k_ues = beta.cols();
  auto varsigma = [&](int rx, int tx) {
    double v = 0.0;
    for (int a = 0; a < m; ++a) v += l * eta(a, tx) * gamma(a, tx) * beta(a, rx);
    return v;
  };
  double gain = 0.0;
  for (int a = 0; a < m; ++a) gain += l * std::sqrt(eta(a, k)) * gamma(a, k);
  double kappa = 0.0;
  if (trained && tau_dp > 0) {
    double contaminated = 0.0;
    for (int tx = 0; tx < k_ues; ++tx) contaminated += dp_gram(tx, k) * varsigma(k, tx);
    const double own = varsigma(k, k);
    kappa = tau_dp * e_dp * own * own / (1.0 + tau_dp * e_dp * contaminated);
  }
  double num = e_d * (gain * gain + kappa);
  double den = 1.0 + e_d * (varsigma(k, k) - kappa);
  for (int kp = 0; kp < k_ues; ++kp) {
    if (kp == k) continue;
    double cross = 0.0;
    for (int a = 0; a < m; ++a) {
      cross += l * std::sqrt(eta(a, kp)) * gamma(a, kp) * beta(a, k) / beta(a, kp);
    }
    den += e_d * (varsigma(k, kp) + cross * cross * up_gram(kp, k));
  }
  return num / den;
}

}  // namespace

TEST_CASE("uplink estimation statistics") {
  // Perfect-estimation limit: orthogonal pilots and huge training energy.
  {
    Mat beta(3, 2);
    beta(0, 0) = 1e-8;
    beta(0, 1) = 3e-9;
    beta(1, 0) = 5e-8;
    beta(1, 1) = 2e-8;
    beta(2, 0) = 1e-9;
    beta(2, 1) = 4e-8;
    const Mat id = Mat::identity(2);
    const auto s = uplink_estimation_stats(beta, id, 1, 1e15);
    for (int a = 0; a < 3; ++a) {
      for (int u = 0; u < 2; ++u) {
        CHECK(s.gamma(a, u) == doctest::Approx(beta(a, u)).epsilon(1e-5));
        CHECK(s.gamma(a, u) <= beta(a, u));
      }
    }
    // No training power: estimates carry nothing.
    const auto zero = uplink_estimation_stats(beta, id, 1, 0.0);
    for (double g : zero.gamma.data()) CHECK(g == 0.0);
  }

  // Hand-evaluated shared-pilot case: one AP, two UEs, unit fading,
  // tau_up * e_up = 1 gives gamma = 1/3 for both.
  {
    Mat beta(1, 2, 1.0);
    Mat all_ones(2, 2, 1.0);
    const auto s = uplink_estimation_stats(beta, all_ones, 1, 1.0);
    CHECK(s.gamma(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(s.gamma(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
}

TEST_CASE("uniform power control") {
  {
    Mat gamma(1, 1, 2.5e-8);
    const Mat eta = uniform_power_control(gamma, 4);
    CHECK(eta(0, 0) == doctest::Approx(1.0 / (4 * 2.5e-8)).epsilon(1e-15));
  }
  const Instance inst = make_instance(3);
  const int l = inst.cfg.l_antennas;
  for (int a = 0; a < inst.cfg.m_aps; ++a) {
    double budget = 0.0;
    for (int u = 0; u < inst.cfg.k_ues; ++u) {
      budget += inst.stats.eta(a, u) * inst.stats.gamma(a, u);
    }
    CHECK(std::fabs(budget - 1.0 / l) < 1e-12);
  }
  // Homogeneity: doubling gamma halves eta.
  Mat doubled = inst.stats.gamma;
  for (int a = 0; a < doubled.rows(); ++a) {
    for (int u = 0; u < doubled.cols(); ++u) doubled(a, u) *= 2.0;
  }
  const Mat eta2 = uniform_power_control(doubled, l);
  for (int a = 0; a < eta2.rows(); ++a) {
    for (int u = 0; u < eta2.cols(); ++u) {
      CHECK(eta2(a, u) == doctest::Approx(inst.stats.eta(a, u) / 2.0).epsilon(1e-12));
    }
  }
  Mat dead(1, 2, 0.0);
  CHECK_THROWS_AS(uniform_power_control(dead, 2), std::invalid_argument);
}

TEST_CASE("channel moments structure") {
  const Instance inst = make_instance(11);
  const int k_ues = inst.cfg.k_ues;

  // Cross terms vanish for orthogonal uplink pilots.
  for (int k = 0; k < k_ues; ++k) {
    for (int kp = 0; kp < k_ues; ++kp) {
      if (k != kp && inst.pilots.up_gram(k, kp) == 0.0) {
        CHECK(inst.moments.mu(k, kp, 0.9) == 0.0);
        CHECK(inst.moments.pseudo(k, kp, 0.9) == 0.0);
      }
      CHECK(inst.moments.varsigma(k, kp) > 0.0);
      // Pseudo-variance magnitude is capped by the variance.
      CHECK(std::fabs(inst.moments.pseudo(k, kp, 1.0)) <= inst.moments.varsigma(k, kp));
    }
    // Estimate variance cannot exceed the channel-gain variance.
    CHECK(inst.moments.kappa[k] >= 0.0);
    CHECK(inst.moments.kappa[k] <= inst.moments.varsigma(k, k));
  }

  // Perfect downlink-training limit: orthogonal pilots and huge pilot
  // energy drive kappa to the full channel-gain variance.
  {
    ScenarioConfig cfg = inst.cfg;
    cfg.tau_up = 8;  // orthogonal uplink pilots -> singleton downlink groups
    cfg.tau_dp = 8;
    const Deployment dep = build_cellfree(cfg, 21);
    PilotBook pilots = build_pilot_book(dep.beta, cfg.tau_up, cfg.tau_dp);
    // Force singleton downlink pilots so the contamination sum is the own term.
    for (int u = 0; u < cfg.k_ues; ++u) pilots.dp_index[u] = u;
    pilots.dp_gram = gram(pilots.dp_index);
    EstimationStats stats =
        uplink_estimation_stats(dep.beta, pilots.up_gram, cfg.tau_up, dep.e_up);
    stats.eta = uniform_power_control(stats.gamma, cfg.l_antennas);
    const ChannelMoments m = downlink_channel_moments(dep.beta, stats, cfg.l_antennas, pilots,
                                                      cfg.tau_dp, 1e25);
    for (int k = 0; k < cfg.k_ues; ++k) {
      CHECK(m.kappa[k] == doctest::Approx(m.varsigma(k, k)).epsilon(1e-6));
      CHECK(m.kappa[k] <= m.varsigma(k, k));
    }
  }
}

TEST_CASE("sinr: aged-out channel and dominance") {
  const Instance inst = make_instance(17);
  for (int k = 0; k < inst.cfg.k_ues; ++k) {
    CHECK(sinr_downlink_training(inst.moments, k, 0.0, inst.dep.e_d) == 0.0);
    CHECK(sinr_statistical_csi(inst.moments, k, 0.0, inst.dep.e_d) == 0.0);
  }
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = static_cast<int>(rng.uniform(0.0, inst.cfg.k_ues));
    const double rho = rng.uniform(-1.0, 1.0);
    const double dt = sinr_downlink_training(inst.moments, k, rho, inst.dep.e_d);
    const double sc = sinr_statistical_csi(inst.moments, k, rho, inst.dep.e_d);
    CHECK(dt >= sc * (1.0 - 1e-12));
  }
  // Without a downlink pilot phase the two SINRs coincide.
  const Instance plain = make_instance(17, 4, 0);
  for (int k = 0; k < plain.cfg.k_ues; ++k) {
    CHECK(plain.moments.kappa[k] == 0.0);
    const double dt = sinr_downlink_training(plain.moments, k, 0.7, plain.dep.e_d);
    const double sc = sinr_statistical_csi(plain.moments, k, 0.7, plain.dep.e_d);
    CHECK(dt == doctest::Approx(sc).epsilon(1e-15));
  }
}

TEST_CASE("sinr: strictly increasing in rho^2") {
  const Instance inst = make_instance(23);
  for (int k = 0; k < inst.cfg.k_ues; ++k) {
    double prev_dt = -1.0, prev_sc = -1.0;
    for (double rho : {0.0, 0.3, 0.6, 0.9, 1.0}) {
      const double dt = sinr_downlink_training(inst.moments, k, rho, inst.dep.e_d);
      const double sc = sinr_statistical_csi(inst.moments, k, rho, inst.dep.e_d);
      CHECK(dt > prev_dt);
      CHECK(sc > prev_sc);
      prev_dt = dt;
      prev_sc = sc;
    }
  }
}

TEST_CASE("sinr: static reduction matches the no-aging formula exactly") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const Instance inst = make_instance(300 + seed);
    for (int k = 0; k < inst.cfg.k_ues; ++k) {
      for (bool trained : {true, false}) {
        const double via_moments =
            trained ? sinr_downlink_training(inst.moments, k, 1.0, inst.dep.e_d)
                    : sinr_statistical_csi(inst.moments, k, 1.0, inst.dep.e_d);
        const double direct = static_sinr_from_scratch(
            inst.dep.beta, inst.stats.gamma, inst.stats.eta, inst.pilots.up_gram,
            inst.pilots.dp_gram, inst.cfg.l_antennas, inst.cfg.tau_dp, inst.dep.e_dp,
            inst.dep.e_d, k, trained);
        CHECK(std::fabs(via_moments - direct) <= 1e-12 * std::fabs(direct));
      }
    }
  }
}

TEST_CASE("per-symbol and average spectral efficiency") {
  CHECK(se_per_symbol(0.0) == 0.0);
  CHECK(se_per_symbol(1.0) == 1.0);
  CHECK(se_per_symbol(3.0) == 2.0);
  CHECK_THROWS_AS(se_per_symbol(-0.1), std::domain_error);

  // Constant trace: s * tau_dd / tau_frame.
  std::vector<double> flat(200, 1.5);
  CHECK(average_se_downlink_training(flat, 10, 10, 200) ==
        doctest::Approx(1.5 * 200.0 / 220.0).epsilon(1e-15));
  CHECK(average_se_statistical_csi(flat, 10, 200) ==
        doctest::Approx(1.5 * 200.0 / 210.0).epsilon(1e-15));

  CHECK(average_se_downlink_training({}, 10, 10, 0) == 0.0);
  CHECK(average_se_statistical_csi({}, 10, 0) == 0.0);

  // Linear ramp against a direct sum.
  std::vector<double> ramp(100);
  double direct = 0.0;
  for (int i = 0; i < 100; ++i) {
    ramp[i] = 0.01 * i;
    direct += ramp[i];
  }
  CHECK(average_se_downlink_training(ramp, 5, 5, 100) ==
        doctest::Approx(direct / 110.0).epsilon(1e-15));
  CHECK_THROWS_AS(average_se_downlink_training(ramp, 5, 5, 99), std::invalid_argument);

  CHECK(sum_se(std::vector<double>{1, 2, 3}) == 6.0);
  CHECK(sum_se(std::vector<double>{}) == 0.0);
  CHECK(sum_se(std::vector<double>{3, 1, 2}) == 6.0);
}

TEST_CASE("per-ue average consistency with manual assembly") {
  const Instance inst = make_instance(31);
  const int tau_dd = 50;
  const Mat rho = make_rho_table(inst.dep.velocities, inst.cfg.carrier_hz,
                                 inst.cfg.symbol_duration_s(),
                                 inst.cfg.tau_up + inst.cfg.tau_dp + tau_dd);
  const auto avg = per_ue_average_se(inst.moments, rho, CfScheme::kDownlinkTraining,
                                     inst.cfg.tau_up, inst.cfg.tau_dp, tau_dd, inst.dep.e_d);
  for (int k = 0; k < inst.cfg.k_ues; ++k) {
    std::vector<double> trace;
    for (int n = inst.cfg.tau_up + inst.cfg.tau_dp;
         n < inst.cfg.tau_up + inst.cfg.tau_dp + tau_dd; ++n) {
      trace.push_back(
          se_per_symbol(sinr_downlink_training(inst.moments, k, rho(k, n), inst.dep.e_d)));
    }
    CHECK(avg[k] == doctest::Approx(average_se_downlink_training(
                        trace, inst.cfg.tau_up, inst.cfg.tau_dp, tau_dd))
                        .epsilon(1e-14));
  }
}

TEST_CASE("optimal tau_dd") {
  const std::vector<int> single{300};
  auto f = [](int tau) { return tau / (tau + 20.0) * std::pow(2.0, -tau / 300.0); };
  CHECK(optimal_tau_dd(f, single).first == 300);

  std::vector<int> grid;
  for (int tau = 10; tau <= 2000; tau += 10) grid.push_back(tau);
  // Exhaustive-scan oracle.
  int best = grid[0];
  for (int tau : grid) {
    if (f(tau) > f(best)) best = tau;
  }
  const auto [tau_star, value] = optimal_tau_dd(f, grid);
  CHECK(tau_star == best);
  CHECK(value == doctest::Approx(f(best)).epsilon(1e-15));

  // Ties break to the smaller duration.
  auto flat = [](int) { return 1.0; };
  CHECK(optimal_tau_dd(flat, std::vector<int>{50, 20, 90}).first == 20);
  CHECK_THROWS_AS(optimal_tau_dd(f, std::vector<int>{}), std::invalid_argument);
}
