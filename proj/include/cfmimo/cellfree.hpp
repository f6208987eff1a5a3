#ifndef CFMIMO_CELLFREE_HPP
#define CFMIMO_CELLFREE_HPP

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "cfmimo/matrix.hpp"
#include "cfmimo/pilots.hpp"

namespace cfmimo {

// Per-link uplink estimation statistics and power-control coefficients.
// c(m,k) is the MMSE scaling applied to the despread pilot observation;
// gamma(m,k) is the variance of each entry of the channel estimate.
struct EstimationStats {
  Mat c;      // M x K
  Mat gamma;  // M x K
  Mat eta;    // M x K power-control coefficients
};

// gamma(m,k) = sqrt(tau_up*e_up) * c(m,k) * beta(m,k), with c(m,k) the MMSE
// scaling under pilot contamination given by the 0/1 uplink Gram matrix.
// eta is left empty; fill it with uniform_power_control.
EstimationStats uplink_estimation_stats(const Mat& beta, const Mat& up_gram, int tau_up,
                                        double e_up);

// Full-power uniform allocation: eta(m,k) = 1 / (L * sum_k' gamma(m,k')),
// identical across k, making sum_k eta(m,k)*gamma(m,k) = 1/L exactly.
Mat uniform_power_control(const Mat& gamma, int l_antennas);

// Second-order statistics of the effective precoded downlink channel
// d_{kk'}[n]. The symbol index enters only through the UE's Jakes
// autocorrelation rho, so the n-independent factors are stored and the
// per-symbol moments are evaluated on demand:
//   mean(k,k',n)            = rho_k[n]   * mean_factor(k,k')
//   variance(k,k')          = varsigma(k,k')              (independent of n)
//   pseudo_variance(k,k',n) = rho_k[n]^2 * pseudo_factor(k,k')
// kappa[k] is the variance of the UE's downlink channel estimate.
struct ChannelMoments {
  Mat mean_factor;    // K x K; includes the 0/1 uplink pilot inner product
  Mat varsigma;       // K x K
  Mat pseudo_factor;  // K x K
  std::vector<double> kappa;  // K

  double mu(int k, int kp, double rho) const { return rho * mean_factor(k, kp); }
  double pseudo(int k, int kp, double rho) const { return rho * rho * pseudo_factor(k, kp); }
};

ChannelMoments downlink_channel_moments(const Mat& beta, const EstimationStats& stats,
                                        int l_antennas, const PilotBook& pilots, int tau_dp,
                                        double e_dp);

// Effective downlink SINR of UE k at a symbol with Jakes autocorrelation
// rho, when the UE decodes with its downlink channel estimate.
double sinr_downlink_training(const ChannelMoments& m, int k, double rho, double e_d);

// Same, when the UE decodes using only the channel statistics. Differs from
// the trained SINR by the removal of kappa from numerator and denominator.
double sinr_statistical_csi(const ChannelMoments& m, int k, double rho, double e_d);

// log2(1 + sinr); sinr must be nonnegative.
double se_per_symbol(double sinr);

// Jakes autocorrelation precomputed per (UE, symbol); reused across all
// deployment realizations since it depends only on configuration.
Mat make_rho_table(const std::vector<double>& velocities, double f_c, double t_s,
                   int n_symbols);

// Frame-average SE. `data_se` holds the per-symbol SE over the data phase
// only (tau_dd entries); the average divides by the full frame length.
double average_se_downlink_training(std::span<const double> data_se, int tau_up, int tau_dp,
                                    int tau_dd);
// Statistical-CSI frames carry no downlink pilots; the frame is
// tau_up + tau_dd symbols and the data phase starts right after the uplink
// pilots.
double average_se_statistical_csi(std::span<const double> data_se, int tau_up, int tau_dd);

double sum_se(std::span<const double> per_ue_average);

enum class CfScheme { kDownlinkTraining, kStatisticalCsi };

// Per-UE frame-average SE for one scheme. rho_table must cover symbols up to
// the end of the data phase.
std::vector<double> per_ue_average_se(const ChannelMoments& m, const Mat& rho_table,
                                      CfScheme scheme, int tau_up, int tau_dp, int tau_dd,
                                      double e_d);

// Grid point maximizing `evaluate`; ties break to the smaller duration.
std::pair<int, double> optimal_tau_dd(const std::function<double(int)>& evaluate,
                                      std::span<const int> grid);

}  // namespace cfmimo

#endif
