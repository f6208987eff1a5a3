#ifndef CFMIMO_MONTECARLO_HPP
#define CFMIMO_MONTECARLO_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfmimo/cellfree.hpp"
#include "cfmimo/cellular.hpp"
#include "cfmimo/matrix.hpp"
#include "cfmimo/pilots.hpp"
#include "cfmimo/rng.hpp"
#include "cfmimo/scenario.hpp"

namespace cfmimo {

// ---------------------------------------------------------------------------
// Streaming accumulators

// Mean and standard error of a real-valued sequence.
struct TermStat {
  double sum = 0.0, sum_sq = 0.0;
  long n = 0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return n > 0 ? sum / n : 0.0; }
  double std_error() const;
};

// First/second moments of a complex sequence: mean, E|x|^2 (with standard
// error via E|x|^4), and the pseudo-moment E{x^2}.
struct ComplexStat {
  std::complex<double> sum{0.0, 0.0};
  std::complex<double> sum_sq{0.0, 0.0};  // sum of x^2
  double sum_abs2 = 0.0, sum_abs4 = 0.0;
  double sum_re2 = 0.0, sum_im2 = 0.0;  // for std errors of the mean
  long n = 0;

  void add(std::complex<double> v);
  std::complex<double> mean() const { return n > 0 ? sum / static_cast<double>(n) : 0.0; }
  std::complex<double> pseudo() const { return n > 0 ? sum_sq / static_cast<double>(n) : 0.0; }
  double abs2() const { return n > 0 ? sum_abs2 / n : 0.0; }
  double abs2_std_error() const;
  double mean_re_std_error() const;
  double mean_im_std_error() const;
};

// One validated quantity: a closed form next to its empirical estimate.
struct OracleTerm {
  std::string name;
  double closed_form = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;

  double z_score() const;
  double rel_error() const;
  bool within_std_errors(double n_se) const { return std::abs(z_score()) <= n_se; }
};

// ---------------------------------------------------------------------------
// Single-realization building blocks (also used directly by unit tests)

// Channel vectors at the reference instant plus the uplink MMSE estimates.
// Layout: entry (ap, ue) occupies l_ant consecutive elements at
// (ap * k_ues + ue) * l_ant.
struct ChannelRealization {
  int m_aps = 0, k_ues = 0, l_ant = 0;
  std::vector<cxd> g0;
  std::vector<cxd> ghat;

  std::span<const cxd> g0_at(int m, int k) const;
  std::span<const cxd> ghat_at(int m, int k) const;
  std::span<cxd> g0_at(int m, int k);
  std::span<cxd> ghat_at(int m, int k);
};

struct McNoise {
  bool uplink = true;
  bool downlink = true;
};

// i.i.d. CN(0, beta(m,k)) channel vectors at the reference instant.
ChannelRealization draw_channels(const Deployment& dep, Rng& channel_rng);

// Materializes the despread uplink pilot observation with fresh noise and
// applies the per-link MMSE scaling, filling realization.ghat.
void simulate_uplink_estimation(ChannelRealization& r, const PilotBook& pilots,
                                const EstimationStats& stats, int tau_up, double e_up,
                                Rng& noise_rng, bool noise_on = true);

// Effective precoded downlink channel d(k, k') at the reference instant;
// K x K row-major.
std::vector<cxd> effective_downlink_channel(const ChannelRealization& r, const Mat& eta);

// Ages the reference-instant effective channel with a fresh innovation draw:
// d_n = rho * d0 + rho_bar * z. Returns {d_n, z} (both K x K); the diagonal
// of z is the per-UE innovation term of the decomposition.
struct AgedChannel {
  std::vector<cxd> d;
  std::vector<cxd> z;
};
AgedChannel age_effective_channel(const ChannelRealization& r, const Mat& eta,
                                  const std::vector<cxd>& d0,
                                  std::span<const double> rho_per_ue, const Deployment& dep,
                                  Rng& innovation_rng);

// Per-UE downlink channel estimates from beamformed pilots with fresh
// receiver noise (affine MMSE rule).
std::vector<cxd> simulate_downlink_training(const std::vector<cxd>& d0,
                                            const PilotBook& pilots,
                                            const ChannelMoments& moments, int tau_dp,
                                            double e_dp, Rng& noise_rng,
                                            bool noise_on = true);

// ---------------------------------------------------------------------------
// Ensemble oracle for the cell-free closed forms

struct CellFreeOracleReport {
  std::vector<int> symbols;  // requested symbol indices
  int k_ues = 0;

  // Index helpers: d and z entries for a symbol index position `ni`.
  std::vector<ComplexStat> d;        // [ni][k][k'] effective channel
  std::vector<TermStat> z_abs2;      // [ni][k]      |innovation|^2
  std::vector<ComplexStat> dhat;     // [k]          downlink channel estimate
  std::vector<TermStat> dtilde_abs2; // [k]          |estimation error|^2
  // Decomposition cross-moments (should all be ~0): per k, Re/Im of
  // E{dhat conj(dtilde)}, E{dhat conj(z[n0])}, E{dtilde conj(z[n0])}.
  std::vector<ComplexStat> cross_hat_tilde, cross_hat_z, cross_tilde_z;
  // Uplink estimate diagnostics, per (m,k) flattened: ||ghat||^2 (expect
  // L*gamma) and ghat^H (g0 - ghat) (expect 0).
  std::vector<TermStat> ghat_energy;
  std::vector<ComplexStat> ghat_err_corr;
  // Per (k,k'): mean over antennas/APs of ghat_mk ghat*_mk' (copilot
  // cross-covariance; nonzero exactly for shared uplink pilots).
  std::vector<ComplexStat> ghat_cross;

  long draws = 0;

  const ComplexStat& d_stat(int ni, int k, int kp) const {
    return d[(static_cast<size_t>(ni) * k_ues + k) * k_ues + kp];
  }
  const TermStat& z_stat(int ni, int k) const { return z_abs2[static_cast<size_t>(ni) * k_ues + k]; }
};

CellFreeOracleReport run_cellfree_oracle(const Deployment& dep, const PilotBook& pilots,
                                         const EstimationStats& stats,
                                         const ChannelMoments& moments,
                                         std::span<const int> symbols, const Mat& rho_table,
                                         long draws, uint64_t seed, McNoise noise = {});

// Closed-form-vs-estimate term table for the second-moment quantities the
// SINR expressions are assembled from.
std::vector<OracleTerm> cellfree_oracle_terms(const CellFreeOracleReport& rep,
                                              const ChannelMoments& moments,
                                              const Mat& rho_table);

// SINR assembled purely from the empirical expectation terms.
double oracle_sinr_downlink_training(const CellFreeOracleReport& rep, int k, int ni,
                                     double rho, double e_d);
double oracle_sinr_statistical_csi(const CellFreeOracleReport& rep, int k, int ni,
                                   double e_d);

// ---------------------------------------------------------------------------
// Ensemble oracle for the cellular closed forms

struct CellularOracleReport {
  std::vector<int> symbols;
  int k_ues = 0;
  std::vector<ComplexStat> d;         // [ni][u][u']
  std::vector<TermStat> z_abs2;       // [ni][u]
  std::vector<ComplexStat> dhat;      // [u]
  std::vector<TermStat> dtilde_abs2;  // [u]
  long draws = 0;

  const ComplexStat& d_stat(int ni, int u, int up) const {
    return d[(static_cast<size_t>(ni) * k_ues + u) * k_ues + up];
  }
  const TermStat& z_stat(int ni, int u) const { return z_abs2[static_cast<size_t>(ni) * k_ues + u]; }
};

CellularOracleReport run_cellular_oracle(const Deployment& dep, const CellularStats& stats,
                                         int tau_up, int tau_dp,
                                         std::span<const int> symbols, const Mat& rho_table,
                                         long draws, uint64_t seed, McNoise noise = {});

std::vector<OracleTerm> cellular_oracle_terms(const CellularOracleReport& rep,
                                              const CellularStats& stats,
                                              const Mat& rho_table);

double cellular_oracle_sinr_downlink_training(const CellularOracleReport& rep, int u, int ni,
                                              double rho, double e_d);
double cellular_oracle_sinr_statistical_csi(const CellularOracleReport& rep, int u, int ni,
                                            double e_d);

// ---------------------------------------------------------------------------
// Gaussianity of the effective downlink channel

// Histogram KL divergence between the sampled effective-channel coefficients
// and moment-matched Gaussians, for the real and imaginary parts of the
// desired coefficient d_kk[0] and the cross coefficient d_kk'[0] toward each
// UE's nearest copilot. Each field is the KL averaged over all UEs.
struct GaussianityPoint {
  int m_aps = 0, l_ant = 0;
  double kl_re_own = 0.0, kl_im_own = 0.0;
  double kl_re_cross = 0.0, kl_im_cross = 0.0;
};

// Samples the effective channel coefficients for each (M, L) pair (total
// antennas M*L should be held fixed across pairs for a fair comparison) and
// returns the averaged KL distances. Shadowing is disabled and pilots are
// assigned round-robin by UE index so that only the antenna split differs
// between compared configurations.
std::vector<GaussianityPoint> gaussianity_study(const ScenarioConfig& base,
                                                std::span<const std::pair<int, int>> ml_pairs,
                                                long draws, int bins, uint64_t seed);

}  // namespace cfmimo

#endif
