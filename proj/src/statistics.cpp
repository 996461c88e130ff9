#include "alab/statistics.hpp"

#include "alab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace alab {

Estimate estimate_from_samples(std::span<const double> samples, double s) {
  Estimate e;
  e.n = samples.size();
  e.s = s;
  if (e.n == 0) return e;
  // Two-pass sums in index order: the result depends only on the sample order.
  double sum = 0.0;
  for (double v : samples) sum += v;
  e.mean = sum / static_cast<double>(e.n);
  if (e.n > 1) {
    double sq = 0.0;
    for (double v : samples) sq += (v - e.mean) * (v - e.mean);
    e.std_error = std::sqrt(sq / static_cast<double>(e.n - 1) / static_cast<double>(e.n));
  }
  return e;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y, std::span<const double> weights) {
  const std::size_t n = x.size();
  if (y.size() != n || (!weights.empty() && weights.size() != n)) {
    throw InvalidArgument("linear_fit: size mismatch");
  }
  if (n < 2) throw InsufficientDataError("linear_fit needs at least 2 points");
  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sw += w(i);
    sx += w(i) * x[i];
    sy += w(i) * y[i];
  }
  const double xm = sx / sw;
  const double ym = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w(i) * (x[i] - xm) * (x[i] - xm);
    sxy += w(i) * (x[i] - xm) * (y[i] - ym);
    syy += w(i) * (y[i] - ym) * (y[i] - ym);
  }
  if (!(sxx > 0.0)) throw InsufficientDataError("linear_fit: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    chi2 += w(i) * r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - chi2 / syy : 1.0;
  if (n > 2) {
    const double reduced = chi2 / static_cast<double>(n - 2);
    // With unit weights the absolute scale of the errors is unknown, so the
    // residual variance is used directly.
    const double scale = weights.empty() ? reduced : std::max(1.0, reduced);
    fit.slope_stderr = std::sqrt(scale / sxx);
  }
  return fit;
}

DecayFit fit_exponential(std::span<const double> distances, std::span<const double> means,
                         std::span<const double> stderrs, double noise_floor) {
  if (distances.size() != means.size() || stderrs.size() != means.size()) {
    throw InvalidArgument("fit_exponential: size mismatch");
  }
  std::vector<double> x, y, sd;
  for (std::size_t i = 0; i < means.size(); ++i) {
    if (!(means[i] > 0.0) || !std::isfinite(means[i])) continue;
    if (means[i] < noise_floor * stderrs[i]) continue;
    x.push_back(distances[i]);
    y.push_back(std::log(means[i]));
    sd.push_back(stderrs[i] / means[i]);
  }
  if (x.size() < 3) {
    throw InsufficientDataError("exponential fit needs >= 3 points above the noise floor, got " +
                                std::to_string(x.size()));
  }
  const bool weighted = std::all_of(sd.begin(), sd.end(), [](double v) { return v > 0.0; });
  std::vector<double> weights;
  if (weighted) {
    for (double v : sd) weights.push_back(1.0 / (v * v));
  }
  const LinearFit lf = linear_fit(x, y, weights);
  DecayFit fit;
  fit.rate = -lf.slope;
  fit.log_prefactor = lf.intercept;
  fit.r_squared = lf.r_squared;
  fit.slope_stderr = lf.slope_stderr;
  fit.points_used = x.size();
  return fit;
}

double ks_distance_exponential(std::span<const double> sample) {
  if (sample.empty()) throw InsufficientDataError("KS distance of an empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = sorted[i] > 0.0 ? -std::expm1(-sorted[i]) : 0.0;
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n));
  }
  return d;
}

double ks_p_value(double distance, std::size_t n) {
  if (n == 0) throw InsufficientDataError("KS p-value with n = 0");
  const double rn = std::sqrt(static_cast<double>(n));
  const double t = (rn + 0.12 + 0.11 / rn) * distance;
  if (t < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace alab
