#include "alab/greens.hpp"

#include "alab/error.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace alab {

GreensValue green(const Hamiltonian& h, const Site& x, const Site& y, ComplexEnergy z) {
  const SiteIndex ix = h.box.index_of(x);
  const Eigen::VectorXcd col = green_column(h, y, z);
  return GreensValue{x, y, z, col(ix)};
}

Eigen::VectorXcd green_column(const Hamiltonian& h, const Site& y, ComplexEnergy z) {
  return ShiftedSolver(h, z).column(h.box.index_of(y));
}

namespace {

Eigen::Matrix2cd restricted_resolvent(const Hamiltonian& h, SiteIndex ix, SiteIndex iy, ComplexEnergy z) {
  const ShiftedSolver solver(h, z);
  const Eigen::VectorXcd cx = solver.column(ix);
  const Eigen::VectorXcd cy = solver.column(iy);
  Eigen::Matrix2cd p;
  p << cx(ix), cy(ix), cx(iy), cy(iy);
  return p;
}

}  // namespace

KreinBlock krein_block(const Hamiltonian& h, const Site& x, const Site& y, ComplexEnergy z) {
  const SiteIndex ix = h.box.index_of(x);
  const SiteIndex iy = h.box.index_of(y);
  if (ix == iy) throw InvalidArgument("krein_block: x and y must differ");

  KreinBlock out;
  out.direct = restricted_resolvent(h, ix, iy, z);

  const Hamiltonian hat = with_potential_at(with_potential_at(h, ix, 0.0), iy, 0.0);
  out.a = restricted_resolvent(hat, ix, iy, z).inverse();

  Eigen::Matrix2cd diag = Eigen::Matrix2cd::Zero();
  diag(0, 0) = h.potential(ix);
  diag(1, 1) = h.potential(iy);
  out.reconstructed = (out.a + diag).inverse();
  out.max_difference = (out.direct - out.reconstructed).cwiseAbs().maxCoeff();
  return out;
}

Eigen::Matrix2cd imaginary_part(const Eigen::Matrix2cd& a) {
  return (a - a.adjoint()) / Complex(0.0, 2.0);
}

Complex rank_one_parameter(const Hamiltonian& h, const Site& x, ComplexEnergy z) {
  const SiteIndex ix = h.box.index_of(x);
  const Complex g = ShiftedSolver(h, z).column(ix)(ix);
  return 1.0 / g - h.potential(ix);
}

Complex expansion_residual(const Hamiltonian& h, const Site& x, const Site& y, ComplexEnergy z) {
  const SiteIndex ix = h.box.index_of(x);
  const SiteIndex iy = h.box.index_of(y);
  // G is complex symmetric, so G(x, u) = G(u, x) comes from one column.
  const Eigen::VectorXcd col = ShiftedSolver(h, z).column(ix);
  Complex acc = (h.potential(iy) - z.z()) * col(iy);
  for (SiteIndex u : h.box.neighbor_indices(iy)) acc -= col(u);
  return acc;
}

std::vector<SiteIndex> default_identity_columns(const Box& box, int inner_half_side) {
  std::vector<SiteIndex> cols;
  Site origin = Site::Zero(box.dimension());
  cols.push_back(box.index_of(origin));
  for (int r : {inner_half_side + 1, inner_half_side + 2, box.half_side()}) {
    if (r < 0 || r > box.half_side()) continue;
    Site s = origin;
    s(0) = r;
    const SiteIndex i = box.index_of(s);
    if (std::find(cols.begin(), cols.end(), i) == cols.end()) cols.push_back(i);
  }
  return cols;
}

GeometricIdentityReport geometric_identity(const Hamiltonian& h, int inner_half_side, ComplexEnergy z,
                                           const std::vector<SiteIndex>& columns) {
  GeometricIdentityReport report;
  report.columns = columns;
  const ShiftedSolver full(h, z);
  const SiteIndex origin = h.box.index_of(Site::Zero(h.box.dimension()));

  if (inner_half_side >= h.box.half_side()) {
    // No boundary inside the box: T^(L) = 0 and the identity reads G = G^(L).
    const ShiftedSolver depleted(h, z);
    for (SiteIndex y : columns) {
      report.residual = std::max(report.residual, (full.column(y) - depleted.column(y)).cwiseAbs().maxCoeff());
    }
    return report;
  }

  const DepletedPair inner = deplete(h, inner_half_side);
  const bool outer_split = inner_half_side + 1 < h.box.half_side();
  const ShiftedSolver g_inner(inner.depleted, z);

  const Eigen::SparseMatrix<Complex, Eigen::RowMajor> t_inner = inner.hopping.cast<Complex>();
  std::optional<DepletedPair> outer;
  std::optional<ShiftedSolver> g_outer_solver;
  Eigen::SparseMatrix<Complex, Eigen::RowMajor> t_outer;
  if (outer_split) {
    outer.emplace(deplete(h, inner_half_side + 1));
    g_outer_solver.emplace(outer->depleted, z);
    t_outer = outer->hopping.cast<Complex>();
  }

  for (SiteIndex y : columns) {
    const Eigen::VectorXcd g = full.column(y);
    const Eigen::VectorXcd gl = g_inner.column(y);
    // Without a boundary at L+1 the outer depletion is the identity split.
    const Eigen::VectorXcd gl1 = outer_split ? g_outer_solver->column(y) : g;
    const Eigen::VectorXcd second = g_inner.solve(t_inner * gl1);
    Eigen::VectorXcd third;
    if (outer_split) {
      third = g_inner.solve(t_inner * full.solve(t_outer * gl1));
    } else {
      third = Eigen::VectorXcd::Zero(h.size());
    }
    const Eigen::VectorXcd rhs = gl - second + third;
    report.residual = std::max(report.residual, (g - rhs).cwiseAbs().maxCoeff());
    if (sup_norm(h.box.site_of(y)) >= inner_half_side + 2) {
      report.far_leading_terms = std::max(report.far_leading_terms, std::abs(gl(origin) - second(origin)));
    }
  }
  return report;
}

double geometric_identity_residual(const Hamiltonian& h, int inner_half_side, ComplexEnergy z) {
  return geometric_identity(h, inner_half_side, z, default_identity_columns(h.box, inner_half_side)).residual;
}

double min_eigenvalue(const Hamiltonian& h) { return eigenvalues(h).minCoeff(); }

DecayFit ct_decay(const Hamiltonian& h, double E, const Site& x0, DecayRange range) {
  // Gershgorin bound first; fall back to the exact minimum.
  double lower = h.potential.minCoeff() - 2.0 * h.box.dimension();
  if (!(E < lower - 1e-6)) {
    lower = min_eigenvalue(h);
    if (!(E < lower - 1e-6)) {
      throw InvalidArgument("ct_decay: E = " + std::to_string(E) + " is not below the spectrum (min " +
                            std::to_string(lower) + ")");
    }
  }
  const int L = h.box.half_side();
  const auto r_lo = static_cast<int>(std::ceil(range.lo_fraction * L));
  const auto r_hi = static_cast<int>(std::floor(range.hi_fraction * L));
  const Eigen::VectorXcd col = green_column(h, x0, ComplexEnergy{E, 0.0});
  std::vector<double> r, logg;
  for (int d = r_lo; d <= r_hi; ++d) {
    Site y = x0;
    y(0) += d;
    if (!h.box.contains(y)) break;
    r.push_back(d);
    logg.push_back(std::log(std::abs(col(h.box.index_of(y)))));
  }
  if (r.size() < 3) throw InsufficientDataError("ct_decay: fewer than 3 distances inside the box");
  const LinearFit lf = linear_fit(r, logg);
  return DecayFit{-lf.slope, lf.intercept, lf.r_squared, lf.slope_stderr, r.size()};
}

}  // namespace alab
