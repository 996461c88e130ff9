#include "alab/disorder.hpp"

#include "alab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <type_traits>

namespace alab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void normalize(PiecewiseConstantDensity& d) {
  double mass = 0.0;
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    mass += d.values[i] * (d.breakpoints[i + 1] - d.breakpoints[i]);
  }
  for (double& v : d.values) v /= mass;
}

}  // namespace

void validate(const Distribution& dist) {
  std::visit(Overloaded{
                 [](const UniformDensity& u) {
                   if (!(u.a < u.b) || !std::isfinite(u.a) || !std::isfinite(u.b)) {
                     throw InvalidArgument("uniform density needs finite a < b");
                   }
                 },
                 [](const PiecewiseConstantDensity& p) {
                   if (p.breakpoints.size() < 2 || p.values.size() + 1 != p.breakpoints.size()) {
                     throw InvalidArgument("piecewise density needs n+1 breakpoints for n values");
                   }
                   for (std::size_t i = 0; i + 1 < p.breakpoints.size(); ++i) {
                     if (!(p.breakpoints[i] < p.breakpoints[i + 1])) {
                       throw InvalidArgument("piecewise density breakpoints must increase");
                     }
                   }
                   double mass = 0.0;
                   for (std::size_t i = 0; i < p.values.size(); ++i) {
                     if (!(p.values[i] >= 0.0) || !std::isfinite(p.values[i])) {
                       throw InvalidArgument("piecewise density values must be finite and >= 0");
                     }
                     mass += p.values[i] * (p.breakpoints[i + 1] - p.breakpoints[i]);
                   }
                   if (!(mass > 0.0)) throw InvalidArgument("piecewise density has zero mass");
                 },
                 [](const BernoulliAtoms& b) {
                   if (!(b.p > 0.0 && b.p < 1.0)) throw InvalidArgument("bernoulli needs 0 < p < 1");
                   if (b.a == b.b) throw InvalidArgument("bernoulli atoms must differ");
                 },
             },
             dist);
}

Distribution make_uniform(double a, double b) {
  Distribution d = UniformDensity{a, b};
  validate(d);
  return d;
}

Distribution make_piecewise(std::vector<double> breakpoints, std::vector<double> values) {
  PiecewiseConstantDensity p{std::move(breakpoints), std::move(values)};
  validate(p);
  normalize(p);
  return p;
}

Distribution make_bernoulli(double a, double b, double p) {
  Distribution d = BernoulliAtoms{a, b, p};
  validate(d);
  return d;
}

bool has_density(const Distribution& dist) {
  return !std::holds_alternative<BernoulliAtoms>(dist);
}

void require_density(const Distribution& dist, const char* context) {
  if (!has_density(dist)) {
    throw NoDensityError(std::string(context) +
                         " requires a bounded density; Bernoulli atoms are rejected");
  }
}

Distribution rescale(const Distribution& dist, double lambda) {
  if (!(lambda > 0.0)) throw InvalidArgument("rescale: lambda must be > 0");
  return std::visit(
      Overloaded{
          [&](const UniformDensity& u) -> Distribution { return UniformDensity{lambda * u.a, lambda * u.b}; },
          [&](const PiecewiseConstantDensity& p) -> Distribution {
            PiecewiseConstantDensity out = p;
            for (double& x : out.breakpoints) x *= lambda;
            for (double& v : out.values) v /= lambda;
            return out;
          },
          [&](const BernoulliAtoms& b) -> Distribution { return BernoulliAtoms{lambda * b.a, lambda * b.b, b.p}; },
      },
      dist);
}

Distribution shift(const Distribution& dist, double offset) {
  return std::visit(
      Overloaded{
          [&](const UniformDensity& u) -> Distribution { return UniformDensity{u.a + offset, u.b + offset}; },
          [&](const PiecewiseConstantDensity& p) -> Distribution {
            PiecewiseConstantDensity out = p;
            for (double& x : out.breakpoints) x += offset;
            return out;
          },
          [&](const BernoulliAtoms& b) -> Distribution { return BernoulliAtoms{b.a + offset, b.b + offset, b.p}; },
      },
      dist);
}

double density_eval(const Distribution& dist, double v) {
  require_density(dist, "density_eval");
  if (const auto* u = std::get_if<UniformDensity>(&dist)) {
    return (v >= u->a && v <= u->b) ? 1.0 / (u->b - u->a) : 0.0;
  }
  const auto& p = std::get<PiecewiseConstantDensity>(dist);
  if (v < p.breakpoints.front() || v > p.breakpoints.back()) return 0.0;
  auto it = std::upper_bound(p.breakpoints.begin(), p.breakpoints.end(), v);
  auto i = static_cast<std::size_t>(std::distance(p.breakpoints.begin(), it));
  i = std::clamp<std::size_t>(i, 1, p.values.size()) - 1;
  return p.values[i];
}

double density_sup(const Distribution& dist) {
  require_density(dist, "density_sup");
  if (const auto* u = std::get_if<UniformDensity>(&dist)) return 1.0 / (u->b - u->a);
  const auto& p = std::get<PiecewiseConstantDensity>(dist);
  return *std::max_element(p.values.begin(), p.values.end());
}

double cdf(const Distribution& dist, double v) {
  return std::visit(Overloaded{
                        [&](const UniformDensity& u) {
                          return std::clamp((v - u.a) / (u.b - u.a), 0.0, 1.0);
                        },
                        [&](const PiecewiseConstantDensity& p) {
                          double acc = 0.0;
                          for (std::size_t i = 0; i < p.values.size(); ++i) {
                            const double lo = p.breakpoints[i];
                            const double hi = p.breakpoints[i + 1];
                            if (v <= lo) break;
                            acc += p.values[i] * (std::min(v, hi) - lo);
                          }
                          return std::clamp(acc, 0.0, 1.0);
                        },
                        [&](const BernoulliAtoms& b) {
                          const double lo = std::min(b.a, b.b);
                          const double hi = std::max(b.a, b.b);
                          const double p_lo = b.a < b.b ? 1.0 - b.p : b.p;
                          if (v < lo) return 0.0;
                          if (v < hi) return p_lo;
                          return 1.0;
                        },
                    },
                    dist);
}

SupportInterval support(const Distribution& dist) {
  return std::visit(Overloaded{
                        [](const UniformDensity& u) { return SupportInterval{u.a, u.b}; },
                        [](const PiecewiseConstantDensity& p) {
                          // Closed hull of the set where the density is positive.
                          std::size_t first = 0;
                          while (first < p.values.size() && p.values[first] == 0.0) ++first;
                          std::size_t last = p.values.size();
                          while (last > first && p.values[last - 1] == 0.0) --last;
                          return SupportInterval{p.breakpoints[first], p.breakpoints[last]};
                        },
                        [](const BernoulliAtoms& b) {
                          return SupportInterval{std::min(b.a, b.b), std::max(b.a, b.b)};
                        },
                    },
                    dist);
}

std::vector<double> density_breakpoints(const Distribution& dist) {
  return std::visit(Overloaded{
                        [](const UniformDensity& u) { return std::vector<double>{u.a, u.b}; },
                        [](const PiecewiseConstantDensity& p) { return p.breakpoints; },
                        [](const BernoulliAtoms& b) { return std::vector<double>{b.a, b.b}; },
                    },
                    dist);
}

double quantile(const Distribution& dist, double u) {
  return std::visit(Overloaded{
                        [&](const UniformDensity& d) { return d.a + (d.b - d.a) * u; },
                        [&](const PiecewiseConstantDensity& p) {
                          double acc = 0.0;
                          for (std::size_t i = 0; i < p.values.size(); ++i) {
                            const double width = p.breakpoints[i + 1] - p.breakpoints[i];
                            const double mass = p.values[i] * width;
                            if (mass > 0.0 && u <= acc + mass) {
                              return p.breakpoints[i] + (u - acc) / p.values[i];
                            }
                            acc += mass;
                          }
                          return support(p).hi;
                        },
                        [&](const BernoulliAtoms& b) {
                          if (b.a < b.b) return u <= 1.0 - b.p ? b.a : b.b;
                          return u <= b.p ? b.b : b.a;
                        },
                    },
                    dist);
}

double mean(const Distribution& dist) {
  return std::visit(Overloaded{
                        [](const UniformDensity& u) { return 0.5 * (u.a + u.b); },
                        [](const PiecewiseConstantDensity& p) {
                          double m = 0.0;
                          for (std::size_t i = 0; i < p.values.size(); ++i) {
                            const double lo = p.breakpoints[i];
                            const double hi = p.breakpoints[i + 1];
                            m += p.values[i] * 0.5 * (hi * hi - lo * lo);
                          }
                          return m;
                        },
                        [](const BernoulliAtoms& b) { return (1.0 - b.p) * b.a + b.p * b.b; },
                    },
                    dist);
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t realization_key(const SeedSpec& seed) {
  const std::uint64_t k1 = mix64(seed.master_seed);
  return mix64(k1 ^ mix64(seed.realization_index + 0x9e3779b97f4a7c15ULL));
}

}  // namespace

double keyed_uniform(const SeedSpec& seed, std::uint64_t stream_index) {
  const std::uint64_t bits = mix64(realization_key(seed) ^ mix64(stream_index + 0xd1b54a32d192ed03ULL));
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

SeedSpec retry_seed(const SeedSpec& seed, int attempt) {
  if (attempt == 0) return seed;
  return SeedSpec{mix64(seed.master_seed ^ mix64(0xa0761d6478bd642fULL * static_cast<std::uint64_t>(attempt))),
                  seed.realization_index};
}

std::mt19937_64 realization_engine(const SeedSpec& seed) {
  return std::mt19937_64(realization_key(seed));
}

DisorderField sample_field(const Box& box, const Distribution& dist, const SeedSpec& seed) {
  validate(dist);
  DisorderField field{box, Eigen::VectorXd(box.size()), seed};
  for (SiteIndex i = 0; i < box.size(); ++i) {
    field.values(i) = quantile(dist, keyed_uniform(seed, static_cast<std::uint64_t>(i)));
  }
  return field;
}

}  // namespace alab
