#ifndef ALAB_FMM_HPP
#define ALAB_FMM_HPP

#include "alab/disorder.hpp"
#include "alab/greens.hpp"
#include "alab/numerics.hpp"
#include "alab/statistics.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace alab {

// Singular-shift retries allowed per realization at eps = 0.
inline constexpr int kMaxSingularRetries = 10;

Hamiltonian sample_hamiltonian(const Box& box, const Distribution& dist, double lambda, const SeedSpec& seed);

/// Monte Carlo estimate of E|G(x, y; z)|^s over n independent fields.
Estimate fractional_moment(const Box& box, const Distribution& dist, double lambda, double s, ComplexEnergy z,
                           const Site& x, const Site& y, std::size_t n, std::uint64_t seed,
                           std::size_t workers = 1);

/// E|G(x0, x0 + r e_1; z)|^s for each r and the exponential fit. The fitted
/// rate is the decay rate of the s-th moment; green_rate() divides by s to
/// express it per power of |G|.
struct DecayProfile {
  std::vector<int> distances;
  std::vector<Estimate> estimates;
  DecayFit fit;
  double s = 0.0;

  double green_rate() const { return fit.rate / s; }
};

DecayProfile decay_profile(const Box& box, const Distribution& dist, double lambda, double s, ComplexEnergy z,
                           const Site& x0, const std::vector<int>& distances, std::size_t n, std::uint64_t seed,
                           std::size_t workers = 1);

/// Compares estimates in boxes of half-side L and 2L; stable when they differ
/// by less than one joint standard error.
struct VolumeCheck {
  Estimate at_l;
  Estimate at_2l;
  bool stable = false;
};

VolumeCheck volume_stability(int dimension, int half_side, const Distribution& dist, double lambda, double s,
                             ComplexEnergy z, const Site& x, const Site& y, std::size_t n, std::uint64_t seed,
                             std::size_t workers = 1);

// int rho(v) |v - w|^{-s} dv.
double one_site_moment(const Distribution& dist, double s, Complex w);

// sup over w of one_site_moment: the constant C_1 with E|G(x,x)|^s <= C_1 / lambda^s.
double apriori_constant(const Distribution& dist, double s);

/// int rho(v)|v - beta|^{-s} dv / int rho(v)|v - eta|^s |v - beta|^{-s} dv.
double decoupling_ratio(const Distribution& dist, double s, Complex eta, Complex beta);

struct RatioBound {
  std::vector<std::pair<Complex, Complex>> grid;  // (eta, beta)
  std::vector<double> ratios;
  double max_ratio = 0.0;
  bool all_finite = true;
};

// Nine points with modulus <= 10; their product gives the default 81-point grid.
std::vector<Complex> default_decoupling_axis();
std::vector<std::pair<Complex, Complex>> product_grid(const std::vector<Complex>& axis);

RatioBound decoupling_scan(const Distribution& dist, double s, const std::vector<std::pair<Complex, Complex>>& grid);

/// |Im z| E|G|^2 against E|G|^s, from the same realizations.
struct SecondMomentRow {
  ComplexEnergy z;
  Estimate second;      // E|G|^2
  Estimate fractional;  // E|G|^s
  double lhs = 0.0;     // eps * E|G|^2
  double lhs_stderr = 0.0;
  double ratio = 0.0;
  double ratio_stderr = 0.0;
};

std::vector<SecondMomentRow> second_moment_audit(const Box& box, const Distribution& dist, double lambda, double s,
                                                 const std::vector<ComplexEnergy>& energies, const Site& x,
                                                 const Site& y, std::size_t n, std::uint64_t seed,
                                                 std::size_t workers = 1);

/// Depleted versus full Green function at v' = (inner_L + 2) e_1:
///   E|G^(L+1)(v', y)|^s <= E|G(v', y)|^s + C sum_{|u'|_inf = L+2} E|G(u', y)|^s.
/// implied_constant is the smallest C >= 0 for which the sample satisfies it.
struct DepletedAudit {
  Estimate depleted;
  Estimate full;
  Estimate boundary_sum;
  double implied_constant = 0.0;
};

DepletedAudit depleted_vs_full_audit(const Box& box, const Distribution& dist, double lambda, double s,
                                     int inner_half_side, ComplexEnergy z, const Site& y, std::size_t n,
                                     std::uint64_t seed, std::size_t workers = 1);

}  // namespace alab

#endif  // ALAB_FMM_HPP
