#include "alab/dynamics.hpp"

#include "alab/error.hpp"
#include "alab/fmm.hpp"
#include "alab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace alab {

namespace {

// Mask of eigenvalues inside the interval.
Eigen::VectorXd window_mask(const EigenSystem& es, const Interval& interval) {
  Eigen::VectorXd m(es.values.size());
  for (Eigen::Index k = 0; k < m.size(); ++k) m(k) = interval.contains(es.values(k)) ? 1.0 : 0.0;
  return m;
}

// Phases e^{-i t E_m} as a (times x eigenvalues) matrix.
Eigen::MatrixXcd phase_matrix(const EigenSystem& es, const std::vector<double>& times) {
  Eigen::MatrixXcd ph(static_cast<Eigen::Index>(times.size()), es.values.size());
  for (Eigen::Index a = 0; a < ph.rows(); ++a) {
    for (Eigen::Index m = 0; m < ph.cols(); ++m) {
      ph(a, m) = std::polar(1.0, -times[static_cast<std::size_t>(a)] * es.values(m));
    }
  }
  return ph;
}

Eigen::VectorXd graph_norms(const Box& box) {
  Eigen::VectorXd r(box.size());
  for (SiteIndex i = 0; i < box.size(); ++i) r(i) = graph_norm(box.site_of(i));
  return r;
}

void check_state(const EigenSystem& es, const Eigen::VectorXd& psi) {
  if (psi.size() != es.values.size()) throw InvalidArgument("state length does not match the Hamiltonian");
}

std::vector<Estimate> column_estimates(const std::vector<std::vector<double>>& rows, std::size_t width, double s) {
  std::vector<Estimate> out;
  std::vector<double> column(rows.size());
  for (std::size_t k = 0; k < width; ++k) {
    for (std::size_t i = 0; i < rows.size(); ++i) column[i] = rows[i][k];
    out.push_back(estimate_from_samples(column, s));
  }
  return out;
}

}  // namespace

std::vector<double> log_time_grid(double t_min, double t_max, std::size_t points) {
  if (!(t_min > 0.0 && t_max > t_min) || points < 2) throw InvalidArgument("log_time_grid needs 0 < t_min < t_max and >= 2 points");
  std::vector<double> grid(points);
  const double a = std::log(t_min);
  const double b = std::log(t_max);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  grid.front() = t_min;
  grid.back() = t_max;
  return grid;
}

std::vector<double> uniform_time_grid(double t_max, std::size_t points) {
  if (!(t_max > 0.0) || points < 2) throw InvalidArgument("uniform_time_grid needs t_max > 0 and >= 2 points");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) grid[i] = t_max * static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

std::vector<double> refine_grid(const std::vector<double>& grid) {
  std::vector<double> out;
  if (grid.empty()) return out;
  out.reserve(2 * grid.size() - 1);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    out.push_back(grid[i]);
    const double a = grid[i];
    const double b = grid[i + 1];
    out.push_back(a > 0.0 && b > 0.0 ? std::sqrt(a * b) : 0.5 * (a + b));
  }
  out.push_back(grid.back());
  return out;
}

EvolutionKernel evolve_kernel(const EigenSystem& es, const Interval& interval, SiteIndex j, SiteIndex k,
                              const std::vector<double>& times) {
  const Eigen::Index n = es.values.size();
  if (j < 0 || j >= n || k < 0 || k >= n) throw InvalidArgument("evolve_kernel: site index outside the box");
  EvolutionKernel out{j, k, interval, times, {}, 0.0};
  const Eigen::VectorXd w =
      (es.vectors.row(j).transpose().array() * es.vectors.row(k).transpose().array() * window_mask(es, interval).array())
          .matrix();
  const Eigen::VectorXcd values = phase_matrix(es, times) * w.cast<Complex>();
  out.values.assign(values.begin(), values.end());
  for (const Complex& v : out.values) out.sup_abs = std::max(out.sup_abs, std::abs(v));
  return out;
}

Eigen::VectorXcd evolve_state(const EigenSystem& es, const Interval& interval, const Eigen::VectorXd& psi, double t) {
  check_state(es, psi);
  const Eigen::VectorXd c = (es.vectors.transpose() * psi).cwiseProduct(window_mask(es, interval));
  Eigen::VectorXcd phased(c.size());
  for (Eigen::Index m = 0; m < c.size(); ++m) phased(m) = std::polar(1.0, -t * es.values(m)) * c(m);
  return es.vectors.cast<Complex>() * phased;
}

DynlocProfile dynloc_profile(const Box& box, const Distribution& dist, double lambda, const Interval& interval,
                             const Site& x0, const std::vector<int>& distances, const std::vector<double>& times,
                             std::size_t n, std::uint64_t seed, std::size_t workers) {
  if (times.empty()) throw InvalidArgument("dynloc_profile: empty time grid");
  const SiteIndex i0 = box.index_of(x0);
  std::vector<SiteIndex> targets;
  for (int r : distances) {
    Site y = x0;
    y(0) += r;
    targets.push_back(box.index_of(y));
  }
  const std::vector<double> fine = refine_grid(times);
  struct Sample {
    std::vector<double> coarse;
    std::vector<double> refined;
  };
  const auto samples = map_indices(n, workers, [&](std::size_t i) {
    const EigenSystem es = eig_sym(sample_hamiltonian(box, dist, lambda, SeedSpec{seed, i}));
    const Eigen::MatrixXcd phases = phase_matrix(es, fine);
    const Eigen::VectorXd mask = window_mask(es, interval);
    Sample smp;
    for (SiteIndex t : targets) {
      const Eigen::VectorXd w =
          (es.vectors.row(i0).transpose().array() * es.vectors.row(t).transpose().array() * mask.array()).matrix();
      const Eigen::VectorXd mod = (phases * w.cast<Complex>()).cwiseAbs();
      // Even rows of the refined grid are the original grid.
      double coarse = 0.0;
      for (Eigen::Index a = 0; a < mod.size(); a += 2) coarse = std::max(coarse, mod(a));
      smp.coarse.push_back(coarse);
      smp.refined.push_back(mod.maxCoeff());
    }
    return smp;
  });

  std::vector<std::vector<double>> coarse_rows, fine_rows;
  for (const auto& smp : samples) {
    coarse_rows.push_back(smp.coarse);
    fine_rows.push_back(smp.refined);
  }
  DynlocProfile profile;
  profile.distances = distances;
  profile.estimates = column_estimates(coarse_rows, targets.size(), 1.0);
  profile.refined_estimates = column_estimates(fine_rows, targets.size(), 1.0);
  std::vector<double> xs, means, errs;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double c = profile.estimates[k].mean;
    const double f = profile.refined_estimates[k].mean;
    if (c > 0.0) profile.grid_excess = std::max(profile.grid_excess, (f - c) / c);
    xs.push_back(distances[k]);
    means.push_back(c);
    errs.push_back(profile.estimates[k].std_error);
  }
  profile.grid_adequate = profile.grid_excess < 0.01;
  profile.fit = fit_exponential(xs, means, errs);
  return profile;
}

void require_margin(const Box& box, const Eigen::VectorXd& psi, int margin) {
  if (psi.size() != box.size()) throw InvalidArgument("state length does not match the box");
  const int need = margin < 0 ? box.half_side() / 2 : margin;
  for (SiteIndex i = 0; i < box.size(); ++i) {
    if (psi(i) == 0.0) continue;
    const int dist = box.distance_to_outside(box.site_of(i));
    if (dist < need) {
      throw InvalidArgument("initial state is supported " + std::to_string(dist) +
                            " sites from the boundary; at least " + std::to_string(need) + " required");
    }
  }
}

MomentTrace position_moment(const EigenSystem& es, const Box& box, const Interval& interval,
                            const Eigen::VectorXd& psi, double p, const std::vector<double>& times, int margin) {
  check_state(es, psi);
  require_margin(box, psi, margin);
  if (!(p > 0.0)) throw InvalidArgument("moment order p must be positive");
  const Eigen::VectorXd c = (es.vectors.transpose() * psi).cwiseProduct(window_mask(es, interval));
  // Columns are the states at each time.
  Eigen::MatrixXcd coeff = phase_matrix(es, times).transpose();
  for (Eigen::Index m = 0; m < coeff.rows(); ++m) coeff.row(m) *= c(m);
  const Eigen::MatrixXcd states = es.vectors.cast<Complex>() * coeff;
  const Eigen::VectorXd weight = graph_norms(box).array().pow(p).matrix();
  MomentTrace trace{p, times, {}};
  trace.values.reserve(times.size());
  for (Eigen::Index a = 0; a < states.cols(); ++a) {
    trace.values.push_back(std::sqrt((weight.array().square() * states.col(a).cwiseAbs2().array()).sum()));
  }
  return trace;
}

MomentTrace mean_position_moment(const Box& box, const Distribution& dist, double lambda, const Interval& interval,
                                 const Site& start, double p, const std::vector<double>& times, std::size_t n,
                                 std::uint64_t seed, std::size_t workers, int margin) {
  if (n == 0) throw InvalidArgument("mean_position_moment needs n >= 1");
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(box.size());
  psi(box.index_of(start)) = 1.0;
  require_margin(box, psi, margin);
  const auto traces = map_indices(n, workers, [&](std::size_t i) {
    const EigenSystem es = eig_sym(sample_hamiltonian(box, dist, lambda, SeedSpec{seed, i}));
    return position_moment(es, box, interval, psi, p, times, margin).values;
  });
  MomentTrace mean{p, times, std::vector<double>(times.size(), 0.0)};
  for (const auto& t : traces) {
    for (std::size_t a = 0; a < times.size(); ++a) mean.values[a] += t[a];
  }
  for (double& v : mean.values) v /= static_cast<double>(n);
  return mean;
}

Saturation saturation(const MomentTrace& trace) {
  if (trace.times.empty()) throw InsufficientDataError("saturation of an empty trace");
  const double half = 0.5 * trace.times.back();
  Saturation s;
  bool early = false, late = false;
  for (std::size_t a = 0; a < trace.times.size(); ++a) {
    if (trace.times[a] <= half) {
      s.early_max = std::max(s.early_max, trace.values[a]);
      early = true;
    }
    if (trace.times[a] >= half) {
      s.late_max = std::max(s.late_max, trace.values[a]);
      late = true;
    }
  }
  if (!early || !late) throw InsufficientDataError("saturation needs grid points on both halves of [0, T]");
  s.relative_change = s.early_max > 0.0 ? std::abs(s.late_max - s.early_max) / s.early_max
                                        : (s.late_max > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return s;
}

std::vector<double> rage_average(const EigenSystem& es, const Box& box, const Interval& interval,
                                 const Eigen::VectorXd& psi, const std::vector<int>& radii, double t_max, int margin) {
  check_state(es, psi);
  require_margin(box, psi, margin);
  if (!(t_max > 0.0)) throw InvalidArgument("rage_average needs T > 0");
  const Eigen::VectorXd c = (es.vectors.transpose() * psi).cwiseProduct(window_mask(es, interval));
  const Eigen::Index n = c.size();
  // (1/T) int_0^T e^{-it(E_m - E_l)} dt has real part sin(T d) / (T d).
  Eigen::MatrixXd kernel(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index l = 0; l < n; ++l) {
      const double x = t_max * (es.values(m) - es.values(l));
      kernel(m, l) = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
    }
  }
  const Eigen::VectorXd norms = graph_norms(box);
  // Rows scaled by the expansion coefficients: a(x, m) = psi_m(x) c_m.
  const Eigen::MatrixXd a = es.vectors * c.asDiagonal();
  std::vector<double> out;
  for (int r : radii) {
    double acc = 0.0;
    for (SiteIndex x = 0; x < box.size(); ++x) {
      if (norms(x) < r) continue;
      const Eigen::RowVectorXd ax = a.row(x);
      acc += ax * kernel * ax.transpose();
    }
    out.push_back(std::clamp(acc, 0.0, 1.0));
  }
  return out;
}

std::vector<Estimate> mean_rage_average(const Box& box, const Distribution& dist, double lambda,
                                        const Interval& interval, const Site& start, const std::vector<int>& radii,
                                        double t_max, std::size_t n, std::uint64_t seed, std::size_t workers,
                                        int margin) {
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(box.size());
  psi(box.index_of(start)) = 1.0;
  require_margin(box, psi, margin);
  const auto rows = map_indices(n, workers, [&](std::size_t i) {
    const EigenSystem es = eig_sym(sample_hamiltonian(box, dist, lambda, SeedSpec{seed, i}));
    return rage_average(es, box, interval, psi, radii, t_max, margin);
  });
  return column_estimates(rows, radii.size(), 2.0);
}

}  // namespace alab
