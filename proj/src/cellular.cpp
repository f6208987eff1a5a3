#include "cfmimo/cellular.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cfmimo/cellfree.hpp"

namespace cfmimo {

Mat cellular_estimation_stats(const Mat& beta, int ues_per_cell, int tau_up, double e_up) {
  if (tau_up < 1) throw std::invalid_argument("cellular_estimation_stats: tau_up must be >= 1");
  if (e_up < 0.0) throw std::domain_error("cellular_estimation_stats: negative uplink SNR");
  const int cells = beta.rows();
  const int k = beta.cols();
  if (ues_per_cell < 1 || k % ues_per_cell != 0 || k / ues_per_cell != cells) {
    throw std::invalid_argument("cellular_estimation_stats: inconsistent dimensions");
  }
  const double te = tau_up * e_up;
  const double sqrt_te = std::sqrt(te);
  Mat gamma(cells, k);
  for (int j = 0; j < cells; ++j) {
    for (int u = 0; u < k; ++u) {
      const int slot = u % ues_per_cell;  // pilot reuse one: same slot in every cell
      double contamination = 0.0;
      for (int lp = 0; lp < cells; ++lp) contamination += beta(j, lp * ues_per_cell + slot);
      const double c = sqrt_te * beta(j, u) / (te * contamination + 1.0);
      gamma(j, u) = sqrt_te * c * beta(j, u);
    }
  }
  return gamma;
}

std::vector<double> cellular_uniform_power(const Mat& gamma, int ues_per_cell,
                                           int bs_antennas) {
  const int cells = gamma.rows();
  std::vector<double> eta(gamma.cols(), 0.0);
  for (int j = 0; j < cells; ++j) {
    double total = 0.0;
    for (int i = 0; i < ues_per_cell; ++i) total += gamma(j, j * ues_per_cell + i);
    if (!(total > 0.0)) {
      throw std::invalid_argument("cellular_uniform_power: BS " + std::to_string(j) +
                                  " has all-zero estimate variances");
    }
    const double value = 1.0 / (bs_antennas * total);
    for (int i = 0; i < ues_per_cell; ++i) eta[j * ues_per_cell + i] = value;
  }
  return eta;
}

std::vector<double> cellular_kappa(const Mat& beta, const Mat& gamma,
                                   const std::vector<double>& eta, int ues_per_cell,
                                   int bs_antennas, int tau_dp, double e_dp) {
  const int cells = beta.rows();
  const int k = beta.cols();
  const double mc = static_cast<double>(bs_antennas);
  const double tdp_e = tau_dp * e_dp;
  std::vector<double> kappa(k, 0.0);
  if (tdp_e <= 0.0) return kappa;
  for (int u = 0; u < k; ++u) {
    const int l = u / ues_per_cell;
    const int slot = u % ues_per_cell;
    const double own = mc * eta[u] * gamma(l, u) * beta(l, u);
    double contamination = 0.0;
    for (int lp = 0; lp < cells; ++lp) {
      const int peer = lp * ues_per_cell + slot;  // downlink pilot shared across cells
      contamination += mc * eta[peer] * gamma(lp, peer) * beta(lp, u);
    }
    kappa[u] = tdp_e * own * own / (1.0 + tdp_e * contamination);
  }
  return kappa;
}

CellularStats build_cellular_stats(const Deployment& dep, int tau_up, int tau_dp) {
  if (dep.serving_cell.empty() || dep.ues_per_cell < 1) {
    throw std::invalid_argument("build_cellular_stats: deployment is not cellular");
  }
  CellularStats s;
  s.cells = static_cast<int>(dep.ap_positions.size());
  s.ues_per_cell = dep.ues_per_cell;
  s.bs_antennas = dep.l_antennas;
  s.beta = dep.beta;
  s.serving = dep.serving_cell;
  s.gamma = cellular_estimation_stats(dep.beta, dep.ues_per_cell, tau_up, dep.e_up);
  s.eta = cellular_uniform_power(s.gamma, dep.ues_per_cell, dep.l_antennas);
  s.kappa = cellular_kappa(s.beta, s.gamma, s.eta, dep.ues_per_cell, dep.l_antennas, tau_dp,
                           dep.e_dp);
  return s;
}

CellularSinrTerms cellular_sinr_terms(const CellularStats& s) {
  const int cells = s.cells;
  const int kc = s.ues_per_cell;
  const int k = cells * kc;
  const double mc = static_cast<double>(s.bs_antennas);

  CellularSinrTerms t;
  t.gain2.assign(k, 0.0);
  t.interf.assign(k, 0.0);
  t.cross2.assign(k, 0.0);
  t.kappa = s.kappa;

  for (int u = 0; u < k; ++u) {
    const int l = u / kc;
    const int slot = u % kc;
    const double gain = mc * std::sqrt(s.eta[u]) * s.gamma(l, u);
    t.gain2[u] = gain * gain;
    double interf = 0.0;
    for (int lp = 0; lp < cells; ++lp) {
      for (int i = 0; i < kc; ++i) {
        const int tx = lp * kc + i;
        interf += mc * s.eta[tx] * s.gamma(lp, tx) * s.beta(lp, u);
      }
    }
    t.interf[u] = interf;
    double cross2 = 0.0;
    for (int lp = 0; lp < cells; ++lp) {
      if (lp == l) continue;
      const int peer = lp * kc + slot;
      const double c =
          mc * std::sqrt(s.eta[peer]) * s.gamma(lp, peer) * s.beta(lp, u) / s.beta(lp, peer);
      cross2 += c * c;
    }
    t.cross2[u] = cross2;
  }
  return t;
}

double cellular_sinr_downlink_training(const CellularSinrTerms& t, int ue, double rho,
                                       double e_d) {
  const double rho2 = rho * rho;
  const double num = rho2 * (t.gain2[ue] + t.kappa[ue]);
  const double den = t.interf[ue] + rho2 * t.cross2[ue] - rho2 * t.kappa[ue] + 1.0 / e_d;
  return num / den;
}

double cellular_sinr_statistical_csi(const CellularSinrTerms& t, int ue, double rho,
                                     double e_d) {
  const double rho2 = rho * rho;
  const double num = rho2 * t.gain2[ue];
  const double den = t.interf[ue] + rho2 * t.cross2[ue] + 1.0 / e_d;
  return num / den;
}

std::vector<double> cellular_per_ue_average_se(const CellularSinrTerms& t,
                                               const Mat& rho_table, CellScheme scheme,
                                               int tau_up, int tau_dp, int tau_dd,
                                               double e_d) {
  const int k = static_cast<int>(t.gain2.size());
  const bool trained = scheme == CellScheme::kDownlinkTraining;
  const int start = trained ? tau_up + tau_dp : tau_up;
  if (rho_table.cols() < start + tau_dd) {
    throw std::invalid_argument("cellular_per_ue_average_se: rho table too short");
  }
  const double frame = trained ? tau_up + tau_dp + tau_dd : tau_up + tau_dd;
  std::vector<double> out(k, 0.0);
  for (int u = 0; u < k; ++u) {
    double total = 0.0;
    for (int n = start; n < start + tau_dd; ++n) {
      const double rho = rho_table(u, n);
      const double sinr = trained ? cellular_sinr_downlink_training(t, u, rho, e_d)
                                  : cellular_sinr_statistical_csi(t, u, rho, e_d);
      total += se_per_symbol(sinr);
    }
    out[u] = tau_dd == 0 ? 0.0 : total / frame;
  }
  return out;
}

}  // namespace cfmimo
