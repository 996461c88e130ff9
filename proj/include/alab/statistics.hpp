#ifndef ALAB_STATISTICS_HPP
#define ALAB_STATISTICS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace alab {

/// Monte Carlo mean with standard error (sample sd / sqrt(n)).
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  double s = 0.0;  // fractional exponent, 0 when not applicable
  std::size_t singular_retries = 0;
};

Estimate estimate_from_samples(std::span<const double> samples, double s = 0.0);

/// Exponential fit y ~ C exp(-rate * x) obtained by least squares on log y.
struct DecayFit {
  double rate = 0.0;
  double log_prefactor = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  std::size_t points_used = 0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
};

// Weighted least squares; equal weights when `weights` is empty. slope_stderr
// is scaled by max(1, reduced chi^2) so a misfit widens the error bar.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> weights = {});

/// Fits log(mean) against distance. Weights use the delta method,
/// sd(log mean) = stderr / mean. Points with mean < noise_floor * stderr are
/// dropped; all-zero stderrs give an unweighted fit. Needs >= 3 points.
DecayFit fit_exponential(std::span<const double> distances, std::span<const double> means,
                         std::span<const double> stderrs, double noise_floor = 10.0);

// Kolmogorov-Smirnov distance between the sample and the Exp(1) law.
double ks_distance_exponential(std::span<const double> sample);

// Asymptotic Kolmogorov p-value with the Stephens small-sample correction.
double ks_p_value(double distance, std::size_t n);

}  // namespace alab

#endif  // ALAB_STATISTICS_HPP
