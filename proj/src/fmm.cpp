#include "alab/fmm.hpp"

#include "alab/error.hpp"
#include "alab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace alab {

namespace {

void check_exponent(double s) {
  if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("fractional exponent s must lie in (0, 1)");
}

// Solves for column y of the resolvent, redrawing the field on a singular
// real shift. Returns the solver's column and the number of redraws.
struct ColumnSample {
  Eigen::VectorXcd column;
  Hamiltonian hamiltonian;
  int retries = 0;
};

ColumnSample column_with_retries(const Box& box, const Distribution& dist, double lambda, ComplexEnergy z,
                                 SiteIndex y, const SeedSpec& seed) {
  for (int attempt = 0; attempt < kMaxSingularRetries; ++attempt) {
    Hamiltonian h = sample_hamiltonian(box, dist, lambda, retry_seed(seed, attempt));
    try {
      Eigen::VectorXcd col = ShiftedSolver(h, z).column(y);
      return ColumnSample{std::move(col), std::move(h), attempt};
    } catch (const SingularShiftError&) {
      continue;
    }
  }
  throw SingularShiftError("realization " + std::to_string(seed.realization_index) + " hit a singular shift " +
                           std::to_string(kMaxSingularRetries) + " times");
}

Site axis_site(const Site& origin, int r) {
  Site y = origin;
  y(0) += r;
  return y;
}

double covariance(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n < 2) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double c = 0.0;
  for (std::size_t i = 0; i < n; ++i) c += (a[i] - ma) * (b[i] - mb);
  return c / static_cast<double>(n - 1);
}

}  // namespace

Hamiltonian sample_hamiltonian(const Box& box, const Distribution& dist, double lambda, const SeedSpec& seed) {
  return assemble(box, sample_field(box, dist, seed), lambda);
}

Estimate fractional_moment(const Box& box, const Distribution& dist, double lambda, double s, ComplexEnergy z,
                           const Site& x, const Site& y, std::size_t n, std::uint64_t seed, std::size_t workers) {
  require_density(dist, "fractional_moment");
  check_exponent(s);
  const SiteIndex ix = box.index_of(x);
  const SiteIndex iy = box.index_of(y);
  struct Sample {
    double value;
    int retries;
  };
  const auto samples = map_indices(n, workers, [&](std::size_t i) {
    const ColumnSample c = column_with_retries(box, dist, lambda, z, iy, SeedSpec{seed, i});
    return Sample{std::pow(std::abs(c.column(ix)), s), c.retries};
  });
  std::vector<double> values;
  values.reserve(n);
  std::size_t retries = 0;
  for (const auto& smp : samples) {
    values.push_back(smp.value);
    retries += static_cast<std::size_t>(smp.retries);
  }
  Estimate e = estimate_from_samples(values, s);
  e.singular_retries = retries;
  return e;
}

DecayProfile decay_profile(const Box& box, const Distribution& dist, double lambda, double s, ComplexEnergy z,
                           const Site& x0, const std::vector<int>& distances, std::size_t n, std::uint64_t seed,
                           std::size_t workers) {
  require_density(dist, "decay_profile");
  check_exponent(s);
  if (distances.empty()) throw InvalidArgument("decay_profile: no distances given");
  const SiteIndex i0 = box.index_of(x0);
  std::vector<SiteIndex> targets;
  for (int r : distances) {
    const Site y = axis_site(x0, r);
    if (!box.contains(y)) throw InvalidArgument("decay_profile: distance " + std::to_string(r) + " leaves the box");
    targets.push_back(box.index_of(y));
  }
  struct Sample {
    std::vector<double> values;
    int retries;
  };
  const auto samples = map_indices(n, workers, [&](std::size_t i) {
    const ColumnSample c = column_with_retries(box, dist, lambda, z, i0, SeedSpec{seed, i});
    Sample smp{{}, c.retries};
    smp.values.reserve(targets.size());
    for (SiteIndex t : targets) smp.values.push_back(std::pow(std::abs(c.column(t)), s));
    return smp;
  });

  DecayProfile profile;
  profile.distances = distances;
  profile.s = s;
  std::size_t retries = 0;
  for (const auto& smp : samples) retries += static_cast<std::size_t>(smp.retries);
  std::vector<double> column(n);
  std::vector<double> xs, means, errs;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) column[i] = samples[i].values[k];
    Estimate e = estimate_from_samples(column, s);
    e.singular_retries = retries;
    profile.estimates.push_back(e);
    xs.push_back(distances[k]);
    means.push_back(e.mean);
    errs.push_back(e.std_error);
  }
  profile.fit = fit_exponential(xs, means, errs);
  return profile;
}

VolumeCheck volume_stability(int dimension, int half_side, const Distribution& dist, double lambda, double s,
                             ComplexEnergy z, const Site& x, const Site& y, std::size_t n, std::uint64_t seed,
                             std::size_t workers) {
  VolumeCheck check;
  check.at_l = fractional_moment(Box(dimension, half_side), dist, lambda, s, z, x, y, n, seed, workers);
  check.at_2l = fractional_moment(Box(dimension, 2 * half_side), dist, lambda, s, z, x, y, n, seed, workers);
  const double joint = std::hypot(check.at_l.std_error, check.at_2l.std_error);
  check.stable = std::abs(check.at_l.mean - check.at_2l.mean) < joint ||
                 check.at_l.mean == check.at_2l.mean;
  return check;
}

double one_site_moment(const Distribution& dist, double s, Complex w) {
  require_density(dist, "one_site_moment");
  check_exponent(s);
  const std::vector<double> cuts = density_breakpoints(dist);
  std::vector<double> singular = cuts;
  singular.push_back(w.real());
  QuadratureOptions opts;
  opts.singularity_exponent = s;
  const SupportInterval supp = support(dist);
  auto f = [&](double v) { return density_eval(dist, v) * std::pow(std::abs(Complex(v) - w), -s); };
  return integrate(f, supp.lo, supp.hi, singular, 1e-12, opts).value;
}

double apriori_constant(const Distribution& dist, double s) {
  const SupportInterval supp = support(dist);
  const int grid = 64;
  const double step = (supp.hi - supp.lo) / grid;
  double best_w = supp.lo;
  double best = -1.0;
  for (int k = 0; k <= grid; ++k) {
    const double w = supp.lo + k * step;
    const double v = one_site_moment(dist, s, w);
    if (v > best) {
      best = v;
      best_w = w;
    }
  }
  // Golden-section refinement around the best grid point.
  double a = std::max(supp.lo, best_w - step);
  double b = std::min(supp.hi, best_w + step);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = one_site_moment(dist, s, c);
  double fd = one_site_moment(dist, s, d);
  for (int it = 0; it < 60 && (b - a) > 1e-10 * (1.0 + std::abs(b)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = one_site_moment(dist, s, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = one_site_moment(dist, s, d);
    }
  }
  return std::max({best, fc, fd});
}

double decoupling_ratio(const Distribution& dist, double s, Complex eta, Complex beta) {
  require_density(dist, "decoupling_ratio");
  check_exponent(s);
  const SupportInterval supp = support(dist);
  std::vector<double> singular = density_breakpoints(dist);
  singular.push_back(beta.real());
  singular.push_back(eta.real());
  QuadratureOptions opts;
  opts.singularity_exponent = s;
  auto num = [&](double v) { return density_eval(dist, v) * std::pow(std::abs(Complex(v) - beta), -s); };
  auto den = [&](double v) {
    return density_eval(dist, v) * std::pow(std::abs(Complex(v) - eta), s) *
           std::pow(std::abs(Complex(v) - beta), -s);
  };
  const double numerator = integrate(num, supp.lo, supp.hi, singular, 1e-12, opts).value;
  const double denominator = integrate(den, supp.lo, supp.hi, singular, 1e-12, opts).value;
  return numerator / denominator;
}

std::vector<Complex> default_decoupling_axis() {
  return {Complex(0.0, 0.0),   Complex(0.5, 0.0),  Complex(1.0, 0.0),
          Complex(-10.0, 0.0), Complex(10.0, 0.0), Complex(0.0, 10.0),
          Complex(0.0, -10.0), Complex(0.5, 0.5),  Complex(7.0, 7.0)};
}

std::vector<std::pair<Complex, Complex>> product_grid(const std::vector<Complex>& axis) {
  std::vector<std::pair<Complex, Complex>> grid;
  for (const Complex& eta : axis) {
    for (const Complex& beta : axis) grid.emplace_back(eta, beta);
  }
  return grid;
}

RatioBound decoupling_scan(const Distribution& dist, double s, const std::vector<std::pair<Complex, Complex>>& grid) {
  RatioBound out;
  out.grid = grid;
  for (const auto& [eta, beta] : grid) {
    const double r = decoupling_ratio(dist, s, eta, beta);
    out.ratios.push_back(r);
    if (!std::isfinite(r) || !(r > 0.0)) out.all_finite = false;
    out.max_ratio = std::max(out.max_ratio, r);
  }
  return out;
}

std::vector<SecondMomentRow> second_moment_audit(const Box& box, const Distribution& dist, double lambda, double s,
                                                 const std::vector<ComplexEnergy>& energies, const Site& x,
                                                 const Site& y, std::size_t n, std::uint64_t seed,
                                                 std::size_t workers) {
  require_density(dist, "second_moment_audit");
  check_exponent(s);
  const SiteIndex ix = box.index_of(x);
  const SiteIndex iy = box.index_of(y);
  std::vector<SecondMomentRow> rows;
  for (const ComplexEnergy& z : energies) {
    if (!(z.eps > 0.0)) throw InvalidArgument("second_moment_audit needs eps > 0");
    const auto samples = map_indices(n, workers, [&](std::size_t i) {
      const Hamiltonian h = sample_hamiltonian(box, dist, lambda, SeedSpec{seed, i});
      const double g = std::abs(ShiftedSolver(h, z).column(iy)(ix));
      return std::pair<double, double>{g * g, std::pow(g, s)};
    });
    std::vector<double> sq(n), fr(n);
    for (std::size_t i = 0; i < n; ++i) {
      sq[i] = samples[i].first;
      fr[i] = samples[i].second;
    }
    SecondMomentRow row;
    row.z = z;
    row.second = estimate_from_samples(sq, 2.0);
    row.fractional = estimate_from_samples(fr, s);
    row.lhs = z.eps * row.second.mean;
    row.lhs_stderr = z.eps * row.second.std_error;
    row.ratio = row.lhs / row.fractional.mean;
    // Delta method for a ratio of correlated means.
    const double m2 = row.second.mean;
    const double ms = row.fractional.mean;
    const double var2 = row.second.std_error * row.second.std_error;
    const double vars = row.fractional.std_error * row.fractional.std_error;
    const double cov = covariance(sq, fr) / static_cast<double>(n);
    const double rel = var2 / (m2 * m2) + vars / (ms * ms) - 2.0 * cov / (m2 * ms);
    row.ratio_stderr = std::abs(row.ratio) * std::sqrt(std::max(rel, 0.0));
    rows.push_back(row);
  }
  return rows;
}

DepletedAudit depleted_vs_full_audit(const Box& box, const Distribution& dist, double lambda, double s,
                                     int inner_half_side, ComplexEnergy z, const Site& y, std::size_t n,
                                     std::uint64_t seed, std::size_t workers) {
  require_density(dist, "depleted_vs_full_audit");
  check_exponent(s);
  const int ring = inner_half_side + 2;
  if (inner_half_side < 0 || ring > box.half_side()) {
    throw InvalidArgument("depleted_vs_full_audit needs 0 <= inner_L and inner_L + 2 <= box half-side");
  }
  if (sup_norm(y) < ring) throw InvalidArgument("depleted_vs_full_audit: y must lie outside the depleted cube");
  const SiteIndex iy = box.index_of(y);
  const SiteIndex iv = box.index_of(axis_site(Site::Zero(box.dimension()), ring));
  const std::vector<SiteIndex> sphere = box.sphere_sup(ring);

  struct Sample {
    double depleted;
    double full;
    double sum;
  };
  const auto samples = map_indices(n, workers, [&](std::size_t i) {
    const Hamiltonian h = sample_hamiltonian(box, dist, lambda, SeedSpec{seed, i});
    const DepletedPair split = deplete(h, inner_half_side + 1);
    const Eigen::VectorXcd g = ShiftedSolver(h, z).column(iy);
    const Eigen::VectorXcd gd = ShiftedSolver(split.depleted, z).column(iy);
    double sum = 0.0;
    for (SiteIndex u : sphere) sum += std::pow(std::abs(g(u)), s);
    return Sample{std::pow(std::abs(gd(iv)), s), std::pow(std::abs(g(iv)), s), sum};
  });
  std::vector<double> a(n), b(n), c(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = samples[i].depleted;
    b[i] = samples[i].full;
    c[i] = samples[i].sum;
  }
  DepletedAudit audit;
  audit.depleted = estimate_from_samples(a, s);
  audit.full = estimate_from_samples(b, s);
  audit.boundary_sum = estimate_from_samples(c, s);
  audit.implied_constant = std::max(0.0, (audit.depleted.mean - audit.full.mean) / audit.boundary_sum.mean);
  return audit;
}

}  // namespace alab
