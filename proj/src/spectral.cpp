#include "alab/spectral.hpp"

#include "alab/error.hpp"
#include "alab/fmm.hpp"
#include "alab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace alab {

namespace {

// Half-open index ranges [first, last) of eigenvalue clusters.
std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters(const Eigen::VectorXd& values) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  const Eigen::Index n = values.size();
  Eigen::Index first = 0;
  for (Eigen::Index k = 1; k <= n; ++k) {
    if (k == n || values(k) - values(k - 1) > kDegeneracyTolerance * std::max(1.0, std::abs(values(k)))) {
      out.emplace_back(first, k);
      first = k;
    }
  }
  return out;
}

void check_site(const EigenSystem& es, SiteIndex i) {
  if (i < 0 || i >= es.values.size()) throw InvalidArgument("site index outside the eigensystem");
}

}  // namespace

double SpectralMeasureElement::mass() const {
  double m = 0.0;
  for (const auto& atom : atoms) m += atom.second;
  return m;
}

SpectralMeasureElement spectral_measure_element(const EigenSystem& es, SiteIndex x, SiteIndex y) {
  check_site(es, x);
  check_site(es, y);
  SpectralMeasureElement mu{x, y, {}};
  mu.atoms.reserve(static_cast<std::size_t>(es.values.size()));
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    mu.atoms.emplace_back(es.values(k), es.vectors(x, k) * es.vectors(y, k));
  }
  return mu;
}

double total_variation(const SpectralMeasureElement& mu, const Interval& interval) {
  Eigen::VectorXd values(static_cast<Eigen::Index>(mu.atoms.size()));
  for (std::size_t k = 0; k < mu.atoms.size(); ++k) values(static_cast<Eigen::Index>(k)) = mu.atoms[k].first;
  double tv = 0.0;
  for (const auto& [first, last] : clusters(values)) {
    double w = 0.0;
    bool inside = false;
    for (Eigen::Index k = first; k < last; ++k) {
      w += mu.atoms[static_cast<std::size_t>(k)].second;
      inside = inside || interval.contains(values(k));
    }
    if (inside) tv += std::abs(w);
  }
  return tv;
}

CorrelatorValue correlator(const EigenSystem& es, SiteIndex x, SiteIndex y, const Interval& interval, double r) {
  if (!(r > 0.0 && r <= 2.0)) throw InvalidArgument("correlator exponent r must lie in (0, 2]");
  check_site(es, x);
  check_site(es, y);
  CorrelatorValue out{x, y, interval, r, 0.0, 0};
  for (const auto& [first, last] : clusters(es.values)) {
    bool inside = false;
    for (Eigen::Index k = first; k < last; ++k) inside = inside || interval.contains(es.values(k));
    if (!inside) continue;
    if (last - first == 1) {
      out.value += std::pow(std::abs(es.vectors(x, first)), 2.0 - r) * std::pow(std::abs(es.vectors(y, first)), r);
      continue;
    }
    ++out.degenerate_clusters;
    double a = 0.0, b = 0.0;
    for (Eigen::Index k = first; k < last; ++k) {
      a += es.vectors(x, k) * es.vectors(x, k);
      b += es.vectors(x, k) * es.vectors(y, k);
    }
    if (a > 0.0) out.value += std::pow(a, 1.0 - r) * std::pow(std::abs(b), r);
  }
  return out;
}

CorrelatorValue correlator(const Hamiltonian& h, const Site& x, const Site& y, const Interval& interval, double r) {
  return correlator(eig_sym(h), h.box.index_of(x), h.box.index_of(y), interval, r);
}

InterpolationCheck interpolation_from_samples(std::span<const double> q1, std::span<const double> qs, double s) {
  if (!(s > 0.0 && s < 2.0)) throw InvalidArgument("interpolation exponent s must lie in (0, 2)");
  if (q1.size() != qs.size() || q1.empty()) throw InvalidArgument("interpolation samples: size mismatch or empty");
  InterpolationCheck c;
  c.q1 = estimate_from_samples(q1, 1.0);
  c.qs = estimate_from_samples(qs, s);
  const double theta = 1.0 / (2.0 - s);
  c.lhs = c.q1.mean;
  c.rhs = std::pow(c.qs.mean, theta);
  // Delta method for the power of the mean.
  const double rhs_err = c.qs.mean > 0.0 ? theta * c.rhs / c.qs.mean * c.qs.std_error : 0.0;
  c.margin = c.rhs - c.lhs + 3.0 * std::hypot(c.q1.std_error, rhs_err);
  c.passed = c.margin >= 0.0;
  return c;
}

InterpolationCheck correlator_interpolation_check(const Box& box, const Distribution& dist, double lambda,
                                                  const Site& x, const Site& y, const Interval& interval, double s,
                                                  std::size_t n, std::uint64_t seed, std::size_t workers) {
  const SiteIndex ix = box.index_of(x);
  const SiteIndex iy = box.index_of(y);
  const auto samples = map_indices(n, workers, [&](std::size_t i) {
    const EigenSystem es = eig_sym(sample_hamiltonian(box, dist, lambda, SeedSpec{seed, i}));
    return std::pair<double, double>{correlator(es, ix, iy, interval, 1.0).value,
                                     correlator(es, ix, iy, interval, s).value};
  });
  std::vector<double> q1, qs;
  for (const auto& [a, b] : samples) {
    q1.push_back(a);
    qs.push_back(b);
  }
  return interpolation_from_samples(q1, qs, s);
}

CorrelatorProfile correlator_profile(const Box& box, const Distribution& dist, double lambda,
                                     const Interval& interval, const Site& x0, const std::vector<int>& distances,
                                     std::size_t n, std::uint64_t seed, std::size_t workers) {
  const SiteIndex i0 = box.index_of(x0);
  std::vector<SiteIndex> targets;
  for (int r : distances) {
    Site y = x0;
    y(0) += r;
    targets.push_back(box.index_of(y));
  }
  const auto samples = map_indices(n, workers, [&](std::size_t i) {
    const EigenSystem es = eig_sym(sample_hamiltonian(box, dist, lambda, SeedSpec{seed, i}));
    std::vector<double> q;
    for (SiteIndex t : targets) q.push_back(correlator(es, i0, t, interval, 1.0).value);
    return q;
  });
  CorrelatorProfile profile;
  profile.distances = distances;
  std::vector<double> column(n), xs, means, errs;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) column[i] = samples[i][k];
    profile.estimates.push_back(estimate_from_samples(column, 1.0));
    xs.push_back(distances[k]);
    means.push_back(profile.estimates.back().mean);
    errs.push_back(profile.estimates.back().std_error);
  }
  profile.fit = fit_exponential(xs, means, errs);
  return profile;
}

std::vector<SupportScanRow> spectrum_support_scan(int dimension, const Distribution& dist, double lambda,
                                                  const std::vector<int>& half_sides, std::size_t n,
                                                  std::uint64_t seed, std::size_t workers) {
  validate(dist);
  if (n == 0) throw InvalidArgument("spectrum_support_scan needs n >= 1");
  const SupportInterval supp = support(dist);
  std::vector<SupportScanRow> rows;
  for (int L : half_sides) {
    const Box box(dimension, L);
    const auto extremes = map_indices(n, workers, [&](std::size_t i) {
      const Eigen::VectorXd ev = eigenvalues(sample_hamiltonian(box, dist, lambda, SeedSpec{seed, i}));
      return std::pair<double, double>{ev.minCoeff(), ev.maxCoeff()};
    });
    SupportScanRow row;
    row.half_side = L;
    row.predicted_lo = -2.0 * dimension + lambda * supp.lo;
    row.predicted_hi = 2.0 * dimension + lambda * supp.hi;
    row.min_eig = extremes.front().first;
    row.max_eig = extremes.front().second;
    for (const auto& [lo, hi] : extremes) {
      row.min_eig = std::min(row.min_eig, lo);
      row.max_eig = std::max(row.max_eig, hi);
    }
    row.all_inside = row.min_eig >= row.predicted_lo && row.max_eig <= row.predicted_hi;
    rows.push_back(row);
  }
  return rows;
}

IdsCurve ids_estimate(int dimension, const Distribution& dist, double lambda, int half_side, std::size_t n,
                      const std::vector<double>& energy_grid, std::uint64_t seed, std::size_t workers) {
  validate(dist);
  if (n == 0) throw InvalidArgument("ids_estimate needs n >= 1");
  const Box box(dimension, half_side);
  const auto counts = map_indices(n, workers, [&](std::size_t i) {
    Eigen::VectorXd ev = eigenvalues(sample_hamiltonian(box, dist, lambda, SeedSpec{seed, i}));
    std::sort(ev.begin(), ev.end());
    std::vector<std::size_t> c;
    c.reserve(energy_grid.size());
    for (double e : energy_grid) c.push_back(static_cast<std::size_t>(std::upper_bound(ev.begin(), ev.end(), e) - ev.begin()));
    return c;
  });
  IdsCurve curve;
  curve.energies = energy_grid;
  const double norm = static_cast<double>(n) * static_cast<double>(box.size());
  for (std::size_t k = 0; k < energy_grid.size(); ++k) {
    std::size_t total = 0;
    for (const auto& c : counts) total += c[k];
    curve.values.push_back(static_cast<double>(total) / norm);
  }
  return curve;
}

std::vector<TailProbe> lifshitz_tail(int dimension, const Distribution& dist, double lambda, double beta,
                                     const std::vector<int>& half_sides, std::size_t n, std::uint64_t seed,
                                     std::size_t workers) {
  validate(dist);
  if (!(beta > 0.0)) throw InvalidArgument("lifshitz_tail needs beta > 0");
  if (n == 0) throw InvalidArgument("lifshitz_tail needs n >= 1");
  const Distribution based = shift(dist, -support(dist).lo);
  std::vector<TailProbe> probes;
  for (int L : half_sides) {
    if (L < 1) throw InvalidArgument("lifshitz_tail needs half-sides >= 1");
    const Box box(dimension, L);
    TailProbe p;
    p.half_side = L;
    p.beta = beta;
    p.threshold = -2.0 * dimension + std::pow(static_cast<double>(L), -beta);
    p.n = n;
    const auto hits = map_indices(n, workers, [&](std::size_t i) {
      const Eigen::VectorXd ev = eigenvalues(sample_hamiltonian(box, based, lambda, SeedSpec{seed, i}));
      return ev.minCoeff() <= p.threshold ? 1 : 0;
    });
    for (int h : hits) p.successes += static_cast<std::size_t>(h);
    const double nn = static_cast<double>(n);
    if (p.successes == 0) {
      p.probability = 3.0 / nn;
      p.upper_bound = true;
    } else {
      p.probability = static_cast<double>(p.successes) / nn;
    }
    p.std_error = std::sqrt(p.probability * (1.0 - p.probability) / nn);
    probes.push_back(p);
  }
  return probes;
}

LinearFit lifshitz_fit(const std::vector<TailProbe>& probes, int dimension) {
  std::vector<double> x, y;
  for (const auto& p : probes) {
    if (!(p.probability > 0.0)) continue;
    x.push_back(std::pow(static_cast<double>(p.half_side), p.beta * dimension / 2.0));
    y.push_back(std::log(p.probability));
  }
  return linear_fit(x, y);
}

LevelStatistics level_statistics_from_levels(const std::vector<Eigen::VectorXd>& levels, LevelWindow window,
                                             double significance) {
  if (levels.empty()) throw InsufficientDataError("level statistics: no realizations");
  if (!(window.lo_fraction >= 0.0 && window.lo_fraction < window.hi_fraction && window.hi_fraction <= 1.0)) {
    throw InvalidArgument("level window fractions must satisfy 0 <= lo < hi <= 1");
  }
  std::vector<double> pool;
  for (const auto& ev : levels) pool.insert(pool.end(), ev.begin(), ev.end());
  std::sort(pool.begin(), pool.end());
  const double realizations = static_cast<double>(levels.size());
  const double per_realization = static_cast<double>(pool.size()) / realizations;

  std::vector<double> spacings;
  for (const auto& ev : levels) {
    std::vector<double> sorted(ev.begin(), ev.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> unfolded;
    unfolded.reserve(sorted.size());
    for (double e : sorted) {
      // Mid-rank for ties, so identical spectra unfold to a regular lattice.
      const auto lower = std::lower_bound(pool.begin(), pool.end(), e) - pool.begin();
      const auto upper = std::upper_bound(pool.begin(), pool.end(), e) - pool.begin();
      unfolded.push_back(0.5 * static_cast<double>(lower + upper) / realizations);
    }
    auto in_window = [&](double u) {
      const double f = u / per_realization;
      return f >= window.lo_fraction && f <= window.hi_fraction;
    };
    for (std::size_t k = 0; k + 1 < unfolded.size(); ++k) {
      if (in_window(unfolded[k]) && in_window(unfolded[k + 1])) spacings.push_back(unfolded[k + 1] - unfolded[k]);
    }
  }
  if (spacings.size() < kMinSpacings) {
    throw InsufficientDataError("too few levels in window: " + std::to_string(spacings.size()) + " spacings");
  }
  double mean = 0.0;
  for (double sp : spacings) mean += sp;
  mean /= static_cast<double>(spacings.size());
  if (!(mean > 0.0)) throw InsufficientDataError("level statistics: all spacings vanish");
  for (double& sp : spacings) sp /= mean;

  LevelStatistics out;
  out.significance = significance;
  out.ks_distance = ks_distance_exponential(spacings);
  out.p_value = ks_p_value(out.ks_distance, spacings.size());
  out.rejects_poisson = out.p_value < significance;
  out.spacings = std::move(spacings);
  return out;
}

LevelStatistics level_statistics(int dimension, const Distribution& dist, double lambda, int half_side,
                                 std::size_t n, LevelWindow window, std::uint64_t seed, double significance,
                                 std::size_t workers) {
  validate(dist);
  const Box box(dimension, half_side);
  const auto levels = map_indices(n, workers, [&](std::size_t i) {
    return Eigen::VectorXd(eigenvalues(sample_hamiltonian(box, dist, lambda, SeedSpec{seed, i})));
  });
  return level_statistics_from_levels(levels, window, significance);
}

}  // namespace alab
