#include "alab/rankone.hpp"

#include "alab/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace alab {

double krylov_sigma_min(const Eigen::MatrixXd& h0, const Eigen::VectorXd& phi) {
  const Eigen::Index n = h0.rows();
  const double scale = std::max(Eigen::JacobiSVD<Eigen::MatrixXd>(h0).singularValues()(0), 1e-300);
  const Eigen::MatrixXd a = h0 / scale;
  Eigen::MatrixXd k(n, n);
  Eigen::VectorXd col = phi;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double norm = col.norm();
    if (norm == 0.0) return 0.0;
    k.col(j) = col / norm;
    col = a * k.col(j);
  }
  return Eigen::JacobiSVD<Eigen::MatrixXd>(k).singularValues()(n - 1);
}

RankOneInstance make_instance(Eigen::MatrixXd h0, Eigen::VectorXd phi, Eigen::VectorXd chi, CyclicityPolicy policy) {
  const Eigen::Index n = h0.rows();
  if (n < 1 || h0.cols() != n) throw InvalidArgument("h0 must be a nonempty square matrix");
  if (phi.size() != n || chi.size() != n) throw InvalidArgument("phi and chi must match the size of h0");
  if ((h0 - h0.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, h0.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("h0 is not symmetric");
  }
  const double norm = phi.norm();
  if (!(norm > 0.0)) throw InvalidArgument("phi must be nonzero");
  RankOneInstance inst{std::move(h0), phi / norm, std::move(chi), 0.0, false};
  inst.krylov_sigma_min = krylov_sigma_min(inst.h0, inst.phi);
  if (inst.krylov_sigma_min < kCyclicityThreshold) {
    if (policy == CyclicityPolicy::reject) {
      throw CyclicityError("phi is not cyclic for h0: Krylov sigma_min = " + std::to_string(inst.krylov_sigma_min));
    }
    inst.weakly_cyclic = true;
  }
  return inst;
}

Eigen::MatrixXd random_symmetric(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = g(rng);
  }
  return 0.5 * (m + m.transpose());
}

Eigen::VectorXd random_unit_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  do {
    for (Eigen::Index i = 0; i < n; ++i) v(i) = g(rng);
  } while (v.norm() == 0.0);
  return v.normalized();
}

RankOneInstance random_instance(Eigen::Index n, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Eigen::MatrixXd h0 = random_symmetric(n, rng);
    Eigen::VectorXd phi = random_unit_vector(n, rng);
    Eigen::VectorXd chi = random_unit_vector(n, rng);
    if (krylov_sigma_min(h0, phi) >= kCyclicityThreshold) return make_instance(h0, phi, chi);
  }
  throw CyclicityError("no cyclic random instance in 100 draws");
}

Eigen::MatrixXd perturbed(const RankOneInstance& inst, double v) {
  return inst.h0 + v * inst.phi * inst.phi.transpose();
}

Eigen::MatrixXd compression(const RankOneInstance& inst) {
  const Eigen::Index n = inst.h0.rows();
  // The Householder Q of phi has phi (up to sign) as its first column.
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(inst.phi).householderQ();
  const Eigen::MatrixXd b = q.rightCols(n - 1);
  return b.transpose() * inst.h0 * b;
}

EigenFlow eigenflow(const RankOneInstance& inst, const std::vector<double>& v_grid) {
  const Eigen::Index n = inst.h0.rows();
  EigenFlow flow;
  flow.v_grid = v_grid;
  flow.energies.resize(static_cast<Eigen::Index>(v_grid.size()), n);
  for (std::size_t i = 0; i < v_grid.size(); ++i) {
    flow.energies.row(static_cast<Eigen::Index>(i)) = eigenvalues(perturbed(inst, v_grid[i])).transpose();
  }
  flow.limits = n > 1 ? eigenvalues(compression(inst)) : Eigen::VectorXd();
  return flow;
}

IntertwineReport intertwine_check(const RankOneInstance& inst, double v) {
  IntertwineReport r;
  r.v = v;
  r.at_v = eigenvalues(perturbed(inst, v));
  r.at_infinity = inst.h0.rows() > 1 ? eigenvalues(compression(inst)) : Eigen::VectorXd();
  r.slack = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < r.at_infinity.size(); ++k) {
    r.slack = std::min(r.slack, r.at_infinity(k) - r.at_v(k));
    r.slack = std::min(r.slack, r.at_v(k + 1) - r.at_infinity(k));
  }
  r.passed = r.slack > 0.0;
  r.flagged = inst.weakly_cyclic || r.slack < kDegenerateGap;
  return r;
}

namespace {

double eigenvalue_at(const RankOneInstance& inst, double v, Eigen::Index k) {
  return eigenvalues(perturbed(inst, v))(k);
}

}  // namespace

DerivativeCheck derivative_check(const RankOneInstance& inst, double v, Eigen::Index k) {
  const Eigen::Index n = inst.h0.rows();
  if (k < 0 || k >= n) throw InvalidArgument("eigenvalue index out of range");
  const EigenSystem es = eig_sym(perturbed(inst, v));
  const double gap_below = k > 0 ? es.values(k) - es.values(k - 1) : std::numeric_limits<double>::infinity();
  const double gap_above = k + 1 < n ? es.values(k + 1) - es.values(k) : std::numeric_limits<double>::infinity();
  if (std::min(gap_below, gap_above) < kDegenerateGap) {
    throw DegenerateEigenvalueError("E_" + std::to_string(k) + "(v) is degenerate within 1e-8");
  }
  const double h = 1e-4;
  auto central = [&](double step) {
    return (eigenvalue_at(inst, v + step, k) - eigenvalue_at(inst, v - step, k)) / (2.0 * step);
  };
  DerivativeCheck d;
  d.numeric = (4.0 * central(0.5 * h) - central(h)) / 3.0;
  const double overlap = es.vectors.col(k).dot(inst.phi);
  d.overlap = overlap * overlap;
  d.difference = std::abs(d.numeric - d.overlap);
  return d;
}

double rank_one_correlator(const RankOneInstance& inst, double v, const Interval& interval, double s) {
  const EigenSystem es = eig_sym(perturbed(inst, v));
  double q = 0.0;
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    if (!interval.contains(es.values(k))) continue;
    q += std::pow(std::abs(es.vectors.col(k).dot(inst.phi)), 2.0 - s) *
         std::pow(std::abs(es.vectors.col(k).dot(inst.chi)), s);
  }
  return q;
}

IdentityCheck correlator_identity_check(const RankOneInstance& inst, const Interval& interval, double s, double tol) {
  if (!(s > 0.0 && s < 1.0)) throw InvalidArgument("s must lie in (0, 1)");
  if (!(std::isfinite(interval.lo) && std::isfinite(interval.hi) && interval.lo < interval.hi)) {
    throw InvalidArgument("the interval must be open and bounded");
  }
  const EigenSystem base = eig_sym(inst.h0);
  const Eigen::VectorXd phi_c = base.vectors.transpose() * inst.phi;
  const Eigen::VectorXd chi_c = base.vectors.transpose() * inst.chi;
  auto green = [&](double e) {
    double g = 0.0;
    for (Eigen::Index j = 0; j < base.values.size(); ++j) g += phi_c(j) * chi_c(j) / (base.values(j) - e);
    return g;
  };

  QuadratureOptions opts;
  opts.singularity_exponent = s;
  opts.rel_tol = tol;

  // Right side: eigenvalues of h0 inside I are integrable singularities.
  std::vector<double> poles;
  for (Eigen::Index j = 0; j < base.values.size(); ++j) {
    if (interval.contains(base.values(j))) poles.push_back(base.values(j));
  }
  const QuadratureResult rhs = integrate([&](double e) { return std::pow(std::abs(green(e)), s); }, interval.lo,
                                         interval.hi, poles, tol, opts);

  // Left side: Q_v jumps where an eigenvalue crosses an endpoint of I, that is
  // at v = -1 / <phi, (h0 - a)^{-1} phi>.
  auto phi_green = [&](double e) {
    double g = 0.0;
    for (Eigen::Index j = 0; j < base.values.size(); ++j) g += phi_c(j) * phi_c(j) / (base.values(j) - e);
    return g;
  };
  std::vector<double> breaks{0.0};
  double reach = 1.0 + 2.0 * base.values.cwiseAbs().maxCoeff();
  for (double a : {interval.lo, interval.hi}) {
    const double f = phi_green(a);
    if (std::isfinite(f) && f != 0.0) {
      breaks.push_back(-1.0 / f);
      reach = std::max(reach, 2.0 * std::abs(-1.0 / f));
    }
  }
  auto integrand = [&](double v) {
    if (v == 0.0) return 0.0;
    return rank_one_correlator(inst, v, interval, s) * std::pow(std::abs(v), -s);
  };
  const QuadratureResult middle = integrate(integrand, -reach, reach, breaks, tol, opts);
  // Tails through v = +-1/t; the integrand decays like v^{-2-s}.
  auto tail = [&](double sign) {
    const std::vector<double> at_zero{0.0};
    return integrate(
        [&](double t) {
          if (t == 0.0) return 0.0;
          return integrand(sign / t) / (t * t);
        },
        0.0, 1.0 / reach, at_zero, tol, opts);
  };
  const QuadratureResult upper = tail(1.0);
  const QuadratureResult lower = tail(-1.0);

  IdentityCheck c;
  c.lhs = middle.value + upper.value + lower.value;
  c.lhs_error = middle.error_estimate + upper.error_estimate + lower.error_estimate;
  c.rhs = rhs.value;
  c.rhs_error = rhs.error_estimate;
  const double scale = std::max(std::abs(c.lhs), std::abs(c.rhs));
  c.relative_gap = scale > 0.0 ? std::abs(c.lhs - c.rhs) / scale : 0.0;
  return c;
}

}  // namespace alab
