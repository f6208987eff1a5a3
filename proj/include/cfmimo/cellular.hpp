#ifndef CFMIMO_CELLULAR_HPP
#define CFMIMO_CELLULAR_HPP

#include <vector>

#include "cfmimo/matrix.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

// Multi-cell statistics under pilot reuse one: the i-th UE of every cell
// shares the same uplink (and downlink) pilot, so contamination is
// inter-cell only. UEs are indexed globally as u = cell * ues_per_cell + i.
struct CellularStats {
  int cells = 0;
  int ues_per_cell = 0;
  int bs_antennas = 0;
  Mat beta;                    // [cells x K]: beta(j, u) between BS j and UE u
  Mat gamma;                   // [cells x K]: estimate variance at BS j of UE u's channel
  std::vector<double> eta;     // per UE, power coefficient at its serving BS
  std::vector<double> kappa;   // per UE, downlink-estimate variance
  std::vector<int> serving;    // per UE
};

// MMSE estimate variances with the contamination sum over the same-index
// UEs of all cells.
Mat cellular_estimation_stats(const Mat& beta, int ues_per_cell, int tau_up, double e_up);

// Uniform full-power split at each BS over its own UEs:
// eta(j,i) = 1 / (M_c * sum_i' gamma(j, (j,i'))), making
// sum_i eta*gamma = 1/M_c exactly.
std::vector<double> cellular_uniform_power(const Mat& gamma, int ues_per_cell,
                                           int bs_antennas);

std::vector<double> cellular_kappa(const Mat& beta, const Mat& gamma,
                                   const std::vector<double>& eta, int ues_per_cell,
                                   int bs_antennas, int tau_dp, double e_dp);

CellularStats build_cellular_stats(const Deployment& dep, int tau_up, int tau_dp);

// n-independent pieces of the per-UE SINR, evaluated once per deployment.
struct CellularSinrTerms {
  std::vector<double> gain2;    // squared coherent beamforming gain
  std::vector<double> interf;   // total non-coherent interference power
  std::vector<double> cross2;   // coherent inter-cell contamination, squared
  std::vector<double> kappa;
};

CellularSinrTerms cellular_sinr_terms(const CellularStats& s);

double cellular_sinr_downlink_training(const CellularSinrTerms& t, int ue, double rho,
                                       double e_d);
double cellular_sinr_statistical_csi(const CellularSinrTerms& t, int ue, double rho,
                                     double e_d);

enum class CellScheme { kDownlinkTraining, kStatisticalCsi };

std::vector<double> cellular_per_ue_average_se(const CellularSinrTerms& t,
                                               const Mat& rho_table, CellScheme scheme,
                                               int tau_up, int tau_dp, int tau_dd,
                                               double e_d);

}  // namespace cfmimo

#endif
