#ifndef ALAB_OPERATOR_HPP
#define ALAB_OPERATOR_HPP

#include "alab/disorder.hpp"
#include "alab/error.hpp"
#include "alab/lattice.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <string>

namespace alab {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Finite-volume Anderson Hamiltonian h_0 + lambda V on a box.
///
/// Off-diagonal entries are -1 on box edges, the diagonal is lambda * omega_n.
/// No 2d shift is applied, so the free spectrum is [-2d, 2d].
struct Hamiltonian {
  Box box;
  double lambda = 0.0;
  Eigen::VectorXd potential;  // lambda * omega, per site
  SparseMatrix matrix;

  SiteIndex size() const { return box.size(); }
  Eigen::MatrixXd dense() const;
  // Upper bound on the operator norm (max row l1 norm).
  double norm_bound() const;
};

Hamiltonian assemble(const Box& box, const DisorderField& field, double lambda);
Hamiltonian assemble(const Box& box, const Eigen::VectorXd& omega, double lambda);
Hamiltonian free_laplacian(const Box& box);

// Same hopping, diagonal entry at `site` replaced by `value` (lambda*omega units).
Hamiltonian with_potential_at(const Hamiltonian& h, SiteIndex site, double value);

/// h = depleted + hopping, where `depleted` has every matrix element between
/// the inner cube and its complement removed and `hopping` holds exactly those
/// elements (-1 on each boundary pair).
struct DepletedPair {
  int inner_half_side = 0;
  Hamiltonian depleted;
  SparseMatrix hopping;
};

DepletedPair deplete(const Hamiltonian& h, int inner_half_side);

/// Sparse matrix-vector product, real or complex vectors alike.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> apply(const Hamiltonian& h,
                                                                 const Eigen::MatrixBase<Derived>& u) {
  if (u.size() != h.size()) {
    throw InvalidArgument("apply: vector length " + std::to_string(u.size()) + " != box size " +
                          std::to_string(h.size()));
  }
  return h.matrix.template cast<typename Derived::Scalar>() * u.derived();
}

// One "row col value" line per stored entry, 0-based site indices.
void write_coordinate_list(std::ostream& out, const Hamiltonian& h);

}  // namespace alab

#endif  // ALAB_OPERATOR_HPP
