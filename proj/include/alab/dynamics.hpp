#ifndef ALAB_DYNAMICS_HPP
#define ALAB_DYNAMICS_HPP

#include "alab/disorder.hpp"
#include "alab/numerics.hpp"
#include "alab/operator.hpp"
#include "alab/spectral.hpp"
#include "alab/statistics.hpp"

#include <cstdint>
#include <vector>

namespace alab {

// n log-spaced times in [t_min, t_max].
std::vector<double> log_time_grid(double t_min = 0.1, double t_max = 1e3, std::size_t points = 512);
// n uniformly spaced times in [0, t_max], endpoints included.
std::vector<double> uniform_time_grid(double t_max, std::size_t points);
// Inserts the midpoint (geometric for positive neighbours) between each pair of grid times.
std::vector<double> refine_grid(const std::vector<double>& grid);

/// <e_j, e^{-ith} chi_I(h) e_k> on a time grid, by eigenexpansion.
struct EvolutionKernel {
  SiteIndex j = 0;
  SiteIndex k = 0;
  Interval interval;
  std::vector<double> times;
  std::vector<Complex> values;
  double sup_abs = 0.0;
};

EvolutionKernel evolve_kernel(const EigenSystem& es, const Interval& interval, SiteIndex j, SiteIndex k,
                              const std::vector<double>& times);

// e^{-ith} chi_I(h) psi at one time.
Eigen::VectorXcd evolve_state(const EigenSystem& es, const Interval& interval, const Eigen::VectorXd& psi, double t);

/// Ensemble mean of sup_t |<e_x0, e^{-ith} chi_I(h) e_y>| for y = x0 + r e_1.
/// `grid_excess` is the largest relative amount by which the sup over the
/// refined grid exceeds the sup over the given grid, over all distances.
struct DynlocProfile {
  std::vector<int> distances;
  std::vector<Estimate> estimates;
  std::vector<Estimate> refined_estimates;
  DecayFit fit;
  double grid_excess = 0.0;
  bool grid_adequate = false;  // grid_excess < 1%
};

DynlocProfile dynloc_profile(const Box& box, const Distribution& dist, double lambda, const Interval& interval,
                             const Site& x0, const std::vector<int>& distances, const std::vector<double>& times,
                             std::size_t n, std::uint64_t seed, std::size_t workers = 1);

/// || |X|^p e^{-ith} chi_I(h) psi || per time, |X| the graph norm of the site.
struct MomentTrace {
  double p = 1.0;
  std::vector<double> times;
  std::vector<double> values;
};

// Throws InvalidArgument when psi has support closer than `margin` sites to
// the outside of the box; a negative margin means half_side / 2.
void require_margin(const Box& box, const Eigen::VectorXd& psi, int margin);

MomentTrace position_moment(const EigenSystem& es, const Box& box, const Interval& interval,
                            const Eigen::VectorXd& psi, double p, const std::vector<double>& times, int margin = -1);

MomentTrace mean_position_moment(const Box& box, const Distribution& dist, double lambda, const Interval& interval,
                                 const Site& start, double p, const std::vector<double>& times, std::size_t n,
                                 std::uint64_t seed, std::size_t workers = 1, int margin = -1);

/// Max over [T/2, T] against max over [0, T/2].
struct Saturation {
  double early_max = 0.0;
  double late_max = 0.0;
  double relative_change = 0.0;  // |late - early| / early
};

Saturation saturation(const MomentTrace& trace);

/// (1/T) int_0^T || chi_{|x| >= R} e^{-ith} chi_I(h) psi ||^2 dt for each R.
/// The time average is taken in closed form from the eigenexpansion.
std::vector<double> rage_average(const EigenSystem& es, const Box& box, const Interval& interval,
                                 const Eigen::VectorXd& psi, const std::vector<int>& radii, double t_max,
                                 int margin = -1);

std::vector<Estimate> mean_rage_average(const Box& box, const Distribution& dist, double lambda,
                                        const Interval& interval, const Site& start, const std::vector<int>& radii,
                                        double t_max, std::size_t n, std::uint64_t seed, std::size_t workers = 1,
                                        int margin = -1);

}  // namespace alab

#endif  // ALAB_DYNAMICS_HPP
