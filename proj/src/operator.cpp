#include "alab/operator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <vector>

namespace alab {

namespace {

SparseMatrix build_matrix(const Box& box, const Eigen::VectorXd& diagonal) {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(box.size()) * static_cast<std::size_t>(2 * box.dimension() + 1));
  for (SiteIndex i = 0; i < box.size(); ++i) {
    entries.emplace_back(i, i, diagonal(i));
    for (SiteIndex j : box.neighbor_indices(i)) entries.emplace_back(i, j, -1.0);
  }
  SparseMatrix m(box.size(), box.size());
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();
  return m;
}

}  // namespace

Eigen::MatrixXd Hamiltonian::dense() const {
  if (size() > 4096) throw InvalidArgument("dense conversion limited to 4096 sites");
  return Eigen::MatrixXd(matrix);
}

double Hamiltonian::norm_bound() const {
  double best = 0.0;
  for (Eigen::Index r = 0; r < matrix.outerSize(); ++r) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(matrix, r); it; ++it) row += std::abs(it.value());
    best = std::max(best, row);
  }
  return best;
}

Hamiltonian assemble(const Box& box, const Eigen::VectorXd& omega, double lambda) {
  if (omega.size() != box.size()) {
    throw InvalidArgument("assemble: field has " + std::to_string(omega.size()) + " values, box has " +
                          std::to_string(box.size()) + " sites");
  }
  if (!(lambda >= 0.0)) throw InvalidArgument("assemble: lambda must be >= 0");
  Eigen::VectorXd potential = lambda * omega;
  SparseMatrix m = build_matrix(box, potential);
  return Hamiltonian{box, lambda, std::move(potential), std::move(m)};
}

Hamiltonian assemble(const Box& box, const DisorderField& field, double lambda) {
  if (!(field.box == box)) throw InvalidArgument("assemble: field defined on a different box");
  return assemble(box, field.values, lambda);
}

Hamiltonian free_laplacian(const Box& box) {
  return assemble(box, Eigen::VectorXd::Zero(box.size()), 0.0);
}

Hamiltonian with_potential_at(const Hamiltonian& h, SiteIndex site, double value) {
  if (site < 0 || site >= h.size()) throw InvalidArgument("with_potential_at: site out of range");
  Hamiltonian out = h;
  out.potential(site) = value;
  out.matrix.coeffRef(site, site) = value;
  return out;
}

DepletedPair deplete(const Hamiltonian& h, int inner_half_side) {
  const BoundaryPairSet gamma = boundary_pairs(h.box, inner_half_side);
  std::vector<Eigen::Triplet<double>> hop;
  hop.reserve(gamma.pairs.size());
  for (const auto& [u, w] : gamma.pairs) hop.emplace_back(u, w, -1.0);
  SparseMatrix hopping(h.size(), h.size());
  hopping.setFromTriplets(hop.begin(), hop.end());
  hopping.makeCompressed();

  Hamiltonian depleted = h;
  depleted.matrix = h.matrix - hopping;
  depleted.matrix.prune(0.0);
  depleted.matrix.makeCompressed();
  return DepletedPair{inner_half_side, std::move(depleted), std::move(hopping)};
}

void write_coordinate_list(std::ostream& out, const Hamiltonian& h) {
  char buf[96];
  for (Eigen::Index r = 0; r < h.matrix.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(h.matrix, r); it; ++it) {
      std::snprintf(buf, sizeof buf, "%lld %lld %.17g\n", static_cast<long long>(it.row()),
                    static_cast<long long>(it.col()), it.value());
      out << buf;
    }
  }
}

}  // namespace alab
