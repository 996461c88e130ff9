#include "alab/error.hpp"
#include "alab/statistics.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace alab;
using namespace alab::testing;

TEST_CASE("estimate uses the sample standard deviation over sqrt n") {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const Estimate e = estimate_from_samples(x, 0.5);
  CHECK(e.mean == doctest::Approx(2.5));
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(e.n == 4);
  CHECK(e.s == 0.5);
}

TEST_CASE("linear fit recovers an exact line") {
  const std::vector<double> x{0, 1, 2, 3, 4};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 - 0.5 * v);
  const LinearFit f = linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(-0.5));
  CHECK(f.intercept == doctest::Approx(3.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(f.slope_stderr == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("exponential fit recovers the rate and drops noisy points") {
  std::vector<double> d, m, s;
  for (int r = 0; r < 8; ++r) {
    d.push_back(r);
    m.push_back(2.0 * std::exp(-0.7 * r));
    s.push_back(0.01 * m.back());
  }
  // A point buried in noise must not enter the fit.
  d.push_back(8);
  m.push_back(1e-3);
  s.push_back(1e-3);
  const DecayFit f = fit_exponential(d, m, s);
  CHECK(f.rate == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(f.log_prefactor == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(f.points_used == 8);
  const std::vector<double> d2{0, 1}, m2{1.0, 0.5}, s2{0.0, 0.0};
  CHECK_THROWS_AS(fit_exponential(d2, m2, s2), InsufficientDataError);
}

TEST_CASE("KS distance and p-value") {
  // Exact quantiles of Exp(1) sit at distance 1/(2n).
  const int n = 1000;
  std::vector<double> q;
  for (int i = 0; i < n; ++i) q.push_back(-std::log(1.0 - (i + 0.5) / n));
  CHECK(ks_distance_exponential(q) == doctest::Approx(0.5 / n).epsilon(1e-9));
  CHECK(ks_p_value(0.0, 100) == 1.0);
  // At corrected statistic t = 1 the Kolmogorov survival function is 0.2699996716735.
  const double rn = std::sqrt(100.0);
  CHECK(ks_p_value(1.0 / (rn + 0.12 + 0.11 / rn), 100) == doctest::Approx(0.2699996716735).epsilon(1e-9));
  CHECK(ks_p_value(0.5, 100) < 1e-12);
  CHECK(ks_p_value(0.05, 100) > ks_p_value(0.1, 100));
}

TEST_CASE("KS test accepts Exp(1) samples and rejects constants") {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> sample;
  for (int i = 0; i < 5000; ++i) sample.push_back(e(rng()));
  CHECK(ks_p_value(ks_distance_exponential(sample), sample.size()) > 0.001);
  const std::vector<double> ones(500, 1.0);
  CHECK(ks_p_value(ks_distance_exponential(ones), ones.size()) < 1e-10);
}
