#ifndef ALAB_DISORDER_HPP
#define ALAB_DISORDER_HPP

#include "alab/lattice.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

namespace alab {

struct UniformDensity {
  double a = 0.0;
  double b = 1.0;
};

// Density value values[i] on [breakpoints[i], breakpoints[i+1]); normalized
// to unit mass at construction.
struct PiecewiseConstantDensity {
  std::vector<double> breakpoints;
  std::vector<double> values;
};

// Atom a with probability 1-p, atom b with probability p.
struct BernoulliAtoms {
  double a = 0.0;
  double b = 1.0;
  double p = 0.5;
};

using Distribution = std::variant<UniformDensity, PiecewiseConstantDensity, BernoulliAtoms>;

struct SupportInterval {
  double lo;
  double hi;
};

Distribution make_uniform(double a, double b);
Distribution make_piecewise(std::vector<double> breakpoints, std::vector<double> values);
Distribution make_bernoulli(double a, double b, double p);

// Throws InvalidArgument when the parameters break the type invariants.
void validate(const Distribution& dist);

bool has_density(const Distribution& dist);
// Throws NoDensityError naming `context` for atomic distributions.
void require_density(const Distribution& dist, const char* context);

// Pushforward under v -> lambda * v.
Distribution rescale(const Distribution& dist, double lambda);
// Pushforward under v -> v + offset.
Distribution shift(const Distribution& dist, double offset);

double density_eval(const Distribution& dist, double v);
double density_sup(const Distribution& dist);
double cdf(const Distribution& dist, double v);
SupportInterval support(const Distribution& dist);
// Points where the density jumps (useful as quadrature breakpoints).
std::vector<double> density_breakpoints(const Distribution& dist);

// Inverse-CDF transform of a uniform variate u in (0, 1).
double quantile(const Distribution& dist, double u);

double mean(const Distribution& dist);

/// Seed of one realization. Every random number in a realization is derived
/// from (master_seed, realization_index) alone, so results do not depend on
/// execution order or worker count.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t realization_index = 0;
};

// SplitMix64 output function (Steele, Lea, Flood 2014).
std::uint64_t mix64(std::uint64_t x);

/// Keyed hash used for all per-site draws:
///   k1 = mix64(master_seed)
///   k2 = mix64(k1 ^ mix64(realization_index + 0x9e3779b97f4a7c15))
///   bits(site) = mix64(k2 ^ mix64(site_index + 0xd1b54a32d192ed03))
/// The draw is ((bits >> 11) + 0.5) * 2^-53, which lies strictly in (0, 1).
/// This derivation is stable across versions; changing it changes outputs.
double keyed_uniform(const SeedSpec& seed, std::uint64_t stream_index);

// Seed for the attempt-th replacement of a realization (singular-shift retries).
SeedSpec retry_seed(const SeedSpec& seed, int attempt);

// Sequential generator for auxiliary randomness (random matrices, test vectors).
std::mt19937_64 realization_engine(const SeedSpec& seed);

struct DisorderField {
  Box box;
  Eigen::VectorXd values;
  SeedSpec seed;
};

DisorderField sample_field(const Box& box, const Distribution& dist, const SeedSpec& seed);

}  // namespace alab

#endif  // ALAB_DISORDER_HPP
