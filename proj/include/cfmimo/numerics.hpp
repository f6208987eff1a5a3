#ifndef CFMIMO_NUMERICS_HPP
#define CFMIMO_NUMERICS_HPP

#include <span>
#include <stdexcept>
#include <vector>

namespace cfmimo {

inline constexpr double kSpeedOfLight = 2.998e8;  // m/s

// Thrown when a statistical estimator is asked to run on too few samples.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bessel function of the first kind, order zero. Piecewise evaluation:
// power series for |x| < 12, Hankel asymptotic expansion beyond. Absolute
// error below 1e-9 over |x| <= 1e4.
double bessel_j0(double x);

// Jakes autocorrelation between the channel at lag 0 and at symbol n for a
// UE moving at speed v (m/s), carrier f_c (Hz), symbol duration t_s (s).
// Returns exactly 1 when n == 0 or v == 0.
double jakes_rho(double v, double f_c, double t_s, long n);

// sqrt(1 - rho^2), the weight of the aging innovation term.
double rho_bar(double rho);

// Standard normal CDF.
double normal_cdf(double z);

// q-quantile with linear interpolation between order statistics
// (h = q*(n-1) convention). q = 0.1 gives the "90%-likely" value.
double percentile(std::span<const double> values, double q);

// Sample set with a fixed binning grid for histogram-based estimators.
struct EmpiricalDistribution {
  std::vector<double> samples;
  int bin_count = 100;
  double lo = 0.0, hi = 1.0;

  EmpiricalDistribution(std::vector<double> s, int bins, double lo_, double hi_);

  // Support set to sample mean +/- 5 sample standard deviations (half-width
  // falls back to 1 when the samples are degenerate).
  static EmpiricalDistribution from_samples(std::vector<double> s, int bins = 100);

  double sample_mean() const;
  double sample_variance() const;  // population convention
};

// KL divergence (nats) between the histogram of `p` and a Gaussian reference
// discretized on the same bins. Out-of-support mass (sample and Gaussian) is
// folded into the edge bins; both histograms get additive smoothing 1e-12 and
// are renormalized, which keeps the estimate nonnegative. Requires at least
// 1000 samples.
double kl_divergence(const EmpiricalDistribution& p, double gaussian_mean,
                     double gaussian_var);

}  // namespace cfmimo

#endif
