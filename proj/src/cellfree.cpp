#include "cfmimo/cellfree.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cfmimo/numerics.hpp"

namespace cfmimo {

EstimationStats uplink_estimation_stats(const Mat& beta, const Mat& up_gram, int tau_up,
                                        double e_up) {
  if (tau_up < 1) throw std::invalid_argument("uplink_estimation_stats: tau_up must be >= 1");
  if (e_up < 0.0) throw std::domain_error("uplink_estimation_stats: negative uplink SNR");
  const int m = beta.rows(), k = beta.cols();
  if (up_gram.rows() != k || up_gram.cols() != k) {
    throw std::invalid_argument("uplink_estimation_stats: gram shape mismatch");
  }
  const double te = tau_up * e_up;
  const double sqrt_te = std::sqrt(te);
  EstimationStats s;
  s.c = Mat(m, k);
  s.gamma = Mat(m, k);
  for (int a = 0; a < m; ++a) {
    for (int u = 0; u < k; ++u) {
      double contamination = 0.0;
      for (int up = 0; up < k; ++up) contamination += beta(a, up) * up_gram(up, u);
      const double c = sqrt_te * beta(a, u) / (te * contamination + 1.0);
      s.c(a, u) = c;
      s.gamma(a, u) = sqrt_te * c * beta(a, u);
    }
  }
  return s;
}

Mat uniform_power_control(const Mat& gamma, int l_antennas) {
  if (l_antennas < 1) throw std::invalid_argument("uniform_power_control: bad antenna count");
  const int m = gamma.rows(), k = gamma.cols();
  Mat eta(m, k);
  for (int a = 0; a < m; ++a) {
    double total = 0.0;
    for (int u = 0; u < k; ++u) total += gamma(a, u);
    if (!(total > 0.0)) {
      throw std::invalid_argument("uniform_power_control: AP " + std::to_string(a) +
                                  " has an all-zero estimate-variance row");
    }
    const double value = 1.0 / (l_antennas * total);
    for (int u = 0; u < k; ++u) eta(a, u) = value;
  }
  return eta;
}

ChannelMoments downlink_channel_moments(const Mat& beta, const EstimationStats& stats,
                                        int l_antennas, const PilotBook& pilots, int tau_dp,
                                        double e_dp) {
  const int m = beta.rows(), k = beta.cols();
  const Mat& gamma = stats.gamma;
  const Mat& eta = stats.eta;
  if (!gamma.same_shape(beta) || !eta.same_shape(beta)) {
    throw std::invalid_argument("downlink_channel_moments: stats shape mismatch");
  }
  const double l = static_cast<double>(l_antennas);

  ChannelMoments mom;
  mom.mean_factor = Mat(k, k);
  mom.varsigma = Mat(k, k);
  mom.pseudo_factor = Mat(k, k);
  mom.kappa.assign(k, 0.0);

  for (int rx = 0; rx < k; ++rx) {
    for (int tx = 0; tx < k; ++tx) {
      double mean = 0.0, var = 0.0, pseudo = 0.0;
      for (int a = 0; a < m; ++a) {
        const double g = gamma(a, tx);
        const double ratio = beta(a, rx) / beta(a, tx);
        mean += l * std::sqrt(eta(a, tx)) * g * ratio;
        var += l * eta(a, tx) * g * beta(a, rx);
        pseudo += l * eta(a, tx) * g * g * ratio * ratio;
      }
      const double phi = pilots.up_gram(tx, rx);
      mom.mean_factor(rx, tx) = mean * phi;
      mom.varsigma(rx, tx) = var;
      mom.pseudo_factor(rx, tx) = pseudo * phi;
    }
  }

  const double tdp_e = tau_dp * e_dp;
  for (int u = 0; u < k; ++u) {
    double contaminated = 0.0;
    for (int tx = 0; tx < k; ++tx) {
      contaminated += pilots.dp_gram(tx, u) * mom.varsigma(u, tx);
    }
    const double own = mom.varsigma(u, u);
    mom.kappa[u] = tdp_e > 0.0 ? tdp_e * own * own / (1.0 + tdp_e * contaminated) : 0.0;
  }
  return mom;
}

double sinr_downlink_training(const ChannelMoments& m, int k, double rho, double e_d) {
  const int n_ues = m.varsigma.rows();
  const double rho2 = rho * rho;
  const double gain = m.mean_factor(k, k);
  const double num = rho2 * e_d * (gain * gain + m.kappa[k]);
  double den = 1.0 + e_d * (m.varsigma(k, k) - rho2 * m.kappa[k]);
  for (int kp = 0; kp < n_ues; ++kp) {
    if (kp == k) continue;
    const double cross = m.mean_factor(k, kp);
    den += e_d * (m.varsigma(k, kp) + rho2 * cross * cross);
  }
  return num / den;
}

double sinr_statistical_csi(const ChannelMoments& m, int k, double rho, double e_d) {
  const int n_ues = m.varsigma.rows();
  const double rho2 = rho * rho;
  const double gain = m.mean_factor(k, k);
  const double num = rho2 * e_d * gain * gain;
  double den = 1.0 + e_d * m.varsigma(k, k);
  for (int kp = 0; kp < n_ues; ++kp) {
    if (kp == k) continue;
    const double cross = m.mean_factor(k, kp);
    den += e_d * (m.varsigma(k, kp) + rho2 * cross * cross);
  }
  return num / den;
}

double se_per_symbol(double sinr) {
  if (!(sinr >= 0.0)) throw std::domain_error("se_per_symbol: negative SINR");
  return std::log2(1.0 + sinr);
}

Mat make_rho_table(const std::vector<double>& velocities, double f_c, double t_s,
                   int n_symbols) {
  const int k = static_cast<int>(velocities.size());
  Mat rho(k, n_symbols);
  for (int u = 0; u < k; ++u) {
    for (int n = 0; n < n_symbols; ++n) {
      rho(u, n) = jakes_rho(velocities[u], f_c, t_s, n);
    }
  }
  return rho;
}

double average_se_downlink_training(std::span<const double> data_se, int tau_up, int tau_dp,
                                    int tau_dd) {
  if (static_cast<int>(data_se.size()) != tau_dd) {
    throw std::invalid_argument("average_se_downlink_training: trace length != tau_dd");
  }
  const double frame = tau_up + tau_dp + tau_dd;
  double total = 0.0;
  for (double se : data_se) total += se;
  return tau_dd == 0 ? 0.0 : total / frame;
}

double average_se_statistical_csi(std::span<const double> data_se, int tau_up, int tau_dd) {
  if (static_cast<int>(data_se.size()) != tau_dd) {
    throw std::invalid_argument("average_se_statistical_csi: trace length != tau_dd");
  }
  const double frame = tau_up + tau_dd;
  double total = 0.0;
  for (double se : data_se) total += se;
  return tau_dd == 0 ? 0.0 : total / frame;
}

double sum_se(std::span<const double> per_ue_average) {
  double total = 0.0;
  for (double v : per_ue_average) total += v;
  return total;
}

std::vector<double> per_ue_average_se(const ChannelMoments& m, const Mat& rho_table,
                                      CfScheme scheme, int tau_up, int tau_dp, int tau_dd,
                                      double e_d) {
  const int k = m.varsigma.rows();
  const bool trained = scheme == CfScheme::kDownlinkTraining;
  const int start = trained ? tau_up + tau_dp : tau_up;
  if (rho_table.cols() < start + tau_dd) {
    throw std::invalid_argument("per_ue_average_se: rho table too short for the frame");
  }
  const double frame = trained ? tau_up + tau_dp + tau_dd : tau_up + tau_dd;
  std::vector<double> out(k, 0.0);
  for (int u = 0; u < k; ++u) {
    double total = 0.0;
    for (int n = start; n < start + tau_dd; ++n) {
      const double rho = rho_table(u, n);
      const double sinr = trained ? sinr_downlink_training(m, u, rho, e_d)
                                  : sinr_statistical_csi(m, u, rho, e_d);
      total += se_per_symbol(sinr);
    }
    out[u] = tau_dd == 0 ? 0.0 : total / frame;
  }
  return out;
}

std::pair<int, double> optimal_tau_dd(const std::function<double(int)>& evaluate,
                                      std::span<const int> grid) {
  if (grid.empty()) throw std::invalid_argument("optimal_tau_dd: empty grid");
  int best_tau = grid[0];
  double best_value = evaluate(grid[0]);
  for (size_t i = 1; i < grid.size(); ++i) {
    const double v = evaluate(grid[i]);
    const bool better = v > best_value || (v == best_value && grid[i] < best_tau);
    if (better) {
      best_value = v;
      best_tau = grid[i];
    }
  }
  return {best_tau, best_value};
}

}  // namespace cfmimo
