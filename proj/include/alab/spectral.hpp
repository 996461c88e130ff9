#ifndef ALAB_SPECTRAL_HPP
#define ALAB_SPECTRAL_HPP

#include "alab/disorder.hpp"
#include "alab/numerics.hpp"
#include "alab/operator.hpp"
#include "alab/statistics.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace alab {

// Open energy interval (lo, hi).
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double e) const { return e > lo && e < hi; }
  static Interval whole() { return {}; }
};

// Relative gap below which neighbouring eigenvalues are treated as one cluster.
inline constexpr double kDegeneracyTolerance = 1e-10;

/// Atoms (E_k, psi_k(x) psi_k(y)) of the spectral measure mu_{x,y}.
struct SpectralMeasureElement {
  SiteIndex x = 0;
  SiteIndex y = 0;
  std::vector<std::pair<double, double>> atoms;

  double mass() const;  // mu_{x,y}(R); equals delta_{xy}
};

SpectralMeasureElement spectral_measure_element(const EigenSystem& es, SiteIndex x, SiteIndex y);

// |mu_{x,y}|(I). Atoms of a degenerate cluster are summed before taking the
// modulus, so the result does not depend on the basis inside the cluster.
double total_variation(const SpectralMeasureElement& mu, const Interval& interval);

struct CorrelatorValue {
  SiteIndex x = 0;
  SiteIndex y = 0;
  Interval interval;
  double r = 0.0;
  double value = 0.0;
  std::size_t degenerate_clusters = 0;  // clusters merged because of (near) degeneracy
};

/// Q(x, y; I, r) = sum_{E in I} |psi_E(x)|^{2-r} |psi_E(y)|^r.
///
/// A degenerate cluster with projection P contributes a^{1-r} |b|^r, where
/// a = <e_x, P e_x> and b = <e_y, P e_x>. This is the term of the single
/// eigenvector P e_x / |P e_x| and does not depend on the basis of the cluster.
CorrelatorValue correlator(const EigenSystem& es, SiteIndex x, SiteIndex y, const Interval& interval, double r);
CorrelatorValue correlator(const Hamiltonian& h, const Site& x, const Site& y, const Interval& interval, double r);

/// E Q(I, 1) <= (E Q(I, s))^{1/(2-s)} from n realizations.
struct InterpolationCheck {
  Estimate q1;
  Estimate qs;
  double lhs = 0.0;  // E Q(I, 1)
  double rhs = 0.0;  // (E Q(I, s))^{1/(2-s)}
  double margin = 0.0;  // rhs - lhs + 3 joint stderr
  bool passed = false;
};

InterpolationCheck interpolation_from_samples(std::span<const double> q1, std::span<const double> qs, double s);
InterpolationCheck correlator_interpolation_check(const Box& box, const Distribution& dist, double lambda,
                                                  const Site& x, const Site& y, const Interval& interval, double s,
                                                  std::size_t n, std::uint64_t seed, std::size_t workers = 1);

/// E Q(x0, x0 + r e_1; I, 1) against r with an exponential fit.
struct CorrelatorProfile {
  std::vector<int> distances;
  std::vector<Estimate> estimates;
  DecayFit fit;
};

CorrelatorProfile correlator_profile(const Box& box, const Distribution& dist, double lambda,
                                     const Interval& interval, const Site& x0, const std::vector<int>& distances,
                                     std::size_t n, std::uint64_t seed, std::size_t workers = 1);

struct SupportScanRow {
  int half_side = 0;
  double min_eig = 0.0;  // over all realizations
  double max_eig = 0.0;
  double predicted_lo = 0.0;  // -2d + lambda min supp
  double predicted_hi = 0.0;  // 2d + lambda max supp
  bool all_inside = true;
};

std::vector<SupportScanRow> spectrum_support_scan(int dimension, const Distribution& dist, double lambda,
                                                  const std::vector<int>& half_sides, std::size_t n,
                                                  std::uint64_t seed, std::size_t workers = 1);

struct IdsCurve {
  std::vector<double> energies;
  std::vector<double> values;  // states per site with eigenvalue <= E
};

IdsCurve ids_estimate(int dimension, const Distribution& dist, double lambda, int half_side, std::size_t n,
                      const std::vector<double>& energy_grid, std::uint64_t seed, std::size_t workers = 1);

/// P(min spectrum of the box <= -2d + L^{-beta}), with the single-site law
/// shifted so that its support starts at 0. Zero successes are reported as
/// the 95% upper bound 3/n with `upper_bound` set.
struct TailProbe {
  int half_side = 0;
  double beta = 0.0;
  double threshold = 0.0;
  std::size_t successes = 0;
  std::size_t n = 0;
  double probability = 0.0;
  double std_error = 0.0;
  bool upper_bound = false;
};

std::vector<TailProbe> lifshitz_tail(int dimension, const Distribution& dist, double lambda, double beta,
                                     const std::vector<int>& half_sides, std::size_t n, std::uint64_t seed,
                                     std::size_t workers = 1);

// Fit of log P against L^{beta d / 2}.
LinearFit lifshitz_fit(const std::vector<TailProbe>& probes, int dimension);

/// Window in units of the pooled integrated density of states.
struct LevelWindow {
  double lo_fraction = 0.4;
  double hi_fraction = 0.6;
};

struct LevelStatistics {
  std::vector<double> spacings;  // unfolded, normalized to mean 1
  double ks_distance = 0.0;
  double p_value = 0.0;
  double significance = 0.01;
  bool rejects_poisson = false;
};

// Minimum number of spacings for a KS test.
inline constexpr std::size_t kMinSpacings = 50;

/// Unfolds each realization's levels with the pooled ensemble IDS,
/// N(E) = (number of pooled levels <= E) / (number of realizations), keeps
/// spacings between consecutive levels in the window and tests them against
/// Exp(1).
LevelStatistics level_statistics_from_levels(const std::vector<Eigen::VectorXd>& levels, LevelWindow window,
                                             double significance = 0.01);
LevelStatistics level_statistics(int dimension, const Distribution& dist, double lambda, int half_side,
                                 std::size_t n, LevelWindow window, std::uint64_t seed, double significance = 0.01,
                                 std::size_t workers = 1);

}  // namespace alab

#endif  // ALAB_SPECTRAL_HPP
