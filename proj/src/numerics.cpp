#include "cfmimo/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cfmimo {

namespace {

// Power series sum_k (-1)^k (x^2/4)^k / (k!)^2 with compensated summation.
// Terms peak near k = x/2, so iterate past the hump before testing for
// convergence.
double j0_series(double ax) {
  const double q = 0.25 * ax * ax;
  double term = 1.0, sum = 1.0, comp = 0.0;
  const int hump = static_cast<int>(ax);
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<double>(k) * static_cast<double>(k));
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    if (std::fabs(term) < 1e-18 && k > hump) break;
  }
  return sum;
}

// Hankel expansion J0(x) = sqrt(2/(pi x)) (cos(w) P(x) + sin(w) Q(x)),
// w = x - pi/4. Terms c_k / x^k with c_k = c_{k-1} (2k-1)^2 / (8k) are added
// while they keep shrinking; truncating at the smallest term leaves an error
// of order e^{-2x}, far below 1e-9 for x >= 12.
double j0_asymptotic(double ax) {
  const double inv = 1.0 / ax;
  double p = 1.0, q = 0.0;
  double ck = 1.0, xpow = 1.0, prev = 1.0;
  for (int k = 1; k <= 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    ck *= odd * odd / (8.0 * k);
    xpow *= inv;
    const double r = ck * xpow;
    if (r >= prev) break;  // asymptotic tail started diverging
    if (k % 2 == 1) {
      q += (((k - 1) / 2) % 2 == 0) ? r : -r;
    } else {
      p += ((k / 2) % 2 == 1) ? -r : r;
    }
    prev = r;
    if (r < 1e-19) break;
  }
  const double w = ax - 0.25 * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * ax)) * (std::cos(w) * p + std::sin(w) * q);
}

}  // namespace

double bessel_j0(double x) {
  if (!std::isfinite(x)) throw std::domain_error("bessel_j0: non-finite argument");
  const double ax = std::fabs(x);
  return ax < 12.0 ? j0_series(ax) : j0_asymptotic(ax);
}

double jakes_rho(double v, double f_c, double t_s, long n) {
  if (!(v >= 0.0)) throw std::domain_error("jakes_rho: negative or non-finite velocity");
  if (!(f_c > 0.0)) throw std::domain_error("jakes_rho: carrier frequency must be positive");
  if (!(t_s > 0.0)) throw std::domain_error("jakes_rho: symbol duration must be positive");
  if (n < 0) throw std::domain_error("jakes_rho: negative symbol index");
  if (n == 0 || v == 0.0) return 1.0;
  const double arg =
      2.0 * std::numbers::pi * v * f_c * static_cast<double>(n) * t_s / kSpeedOfLight;
  return bessel_j0(arg);
}

double rho_bar(double rho) {
  if (!(std::fabs(rho) <= 1.0)) throw std::domain_error("rho_bar: |rho| must be <= 1");
  return std::sqrt(1.0 - rho * rho);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw std::domain_error("percentile: empty value list");
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("percentile: q outside [0,1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<size_t>(h);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> s, int bins, double lo_,
                                             double hi_)
    : samples(std::move(s)), bin_count(bins), lo(lo_), hi(hi_) {
  if (bin_count < 2) throw std::invalid_argument("EmpiricalDistribution: bin_count must be >= 2");
  if (!(hi > lo)) throw std::invalid_argument("EmpiricalDistribution: support must have hi > lo");
  for (double v : samples) {
    if (!std::isfinite(v)) throw std::invalid_argument("EmpiricalDistribution: non-finite sample");
  }
}

EmpiricalDistribution EmpiricalDistribution::from_samples(std::vector<double> s, int bins) {
  if (s.empty()) throw std::invalid_argument("EmpiricalDistribution: no samples");
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  double var = 0.0;
  for (double v : s) var += (v - mean) * (v - mean);
  var /= static_cast<double>(s.size());
  double half = 5.0 * std::sqrt(var);
  if (!(half > 0.0)) half = 1.0;  // degenerate sample set
  return {std::move(s), bins, mean - half, mean + half};
}

double EmpiricalDistribution::sample_mean() const {
  double m = 0.0;
  for (double v : samples) m += v;
  return m / static_cast<double>(samples.size());
}

double EmpiricalDistribution::sample_variance() const {
  const double m = sample_mean();
  double var = 0.0;
  for (double v : samples) var += (v - m) * (v - m);
  return var / static_cast<double>(samples.size());
}

double kl_divergence(const EmpiricalDistribution& p, double gaussian_mean,
                     double gaussian_var) {
  if (!(gaussian_var > 0.0)) throw std::domain_error("kl_divergence: reference variance must be positive");
  if (p.samples.size() < 1000) {
    throw InsufficientDataError("kl_divergence: need at least 1000 samples");
  }
  const int b = p.bin_count;
  const double width = (p.hi - p.lo) / b;
  const double sigma = std::sqrt(gaussian_var);

  std::vector<double> pm(b, 0.0);
  for (double v : p.samples) {
    int idx = static_cast<int>((v - p.lo) / width);
    idx = std::clamp(idx, 0, b - 1);  // fold out-of-support samples into edge bins
    pm[idx] += 1.0;
  }
  const double n = static_cast<double>(p.samples.size());
  for (double& v : pm) v /= n;

  // Gaussian mass per bin, tails folded into the edge bins so both
  // histograms are proper distributions over the same cells.
  std::vector<double> qm(b, 0.0);
  double cdf_prev = 0.0;  // from -inf
  for (int i = 0; i < b; ++i) {
    const double upper = p.lo + (i + 1) * width;
    const double cdf = (i == b - 1) ? 1.0 : normal_cdf((upper - gaussian_mean) / sigma);
    qm[i] = cdf - cdf_prev;
    cdf_prev = cdf;
  }

  constexpr double eps = 1e-12;
  double psum = 0.0, qsum = 0.0;
  for (int i = 0; i < b; ++i) {
    pm[i] += eps;
    qm[i] += eps;
    psum += pm[i];
    qsum += qm[i];
  }
  double kl = 0.0;
  for (int i = 0; i < b; ++i) {
    const double pi = pm[i] / psum;
    const double qi = qm[i] / qsum;
    kl += pi * std::log(pi / qi);
  }
  return kl;
}

}  // namespace cfmimo
