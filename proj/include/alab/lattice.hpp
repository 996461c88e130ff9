#ifndef ALAB_LATTICE_HPP
#define ALAB_LATTICE_HPP

#include <Eigen/Core>

#include <cstdint>
#include <initializer_list>
#include <utility>
#include <vector>

namespace alab {

// A lattice point of Z^d in lattice units.
using Site = Eigen::VectorXi;
using SiteIndex = Eigen::Index;

Site make_site(std::initializer_list<int> coords);

// Graph (l1) distance on Z^d.
int graph_distance(const Site& a, const Site& b);
int graph_norm(const Site& a);
int sup_norm(const Site& a);

/// The cube [-L, L]^d in Z^d with a fixed row-major indexing.
///
/// Site n = (n_0, ..., n_{d-1}) has index
///   sum_j (n_j + L) * (2L+1)^(d-1-j),
/// i.e. the last axis varies fastest. The ordering is part of the output
/// format (CSV columns and Hamiltonian exports) and must not change.
class Box {
 public:
  Box(int dimension, int half_side);

  int dimension() const { return dimension_; }
  int half_side() const { return half_side_; }
  int side() const { return 2 * half_side_ + 1; }
  SiteIndex size() const { return size_; }

  bool contains(const Site& n) const;
  SiteIndex index_of(const Site& n) const;
  Site site_of(SiteIndex index) const;

  // Neighbors inside the box (Dirichlet truncation of the lattice graph).
  std::vector<Site> neighbors(const Site& n) const;
  std::vector<SiteIndex> neighbor_indices(SiteIndex index) const;

  // Sites at l-infinity distance exactly r from the origin.
  std::vector<SiteIndex> sphere_sup(int r) const;

  // Distance from n to the complement of the box, in lattice steps.
  int distance_to_outside(const Site& n) const;

  bool operator==(const Box& other) const {
    return dimension_ == other.dimension_ && half_side_ == other.half_side_;
  }

 private:
  void check_site(const Site& n) const;

  int dimension_;
  int half_side_;
  SiteIndex size_;
  std::vector<SiteIndex> strides_;
};

Box build_box(int dimension, int half_side);

/// Ordered pairs (u, u') with |u - u'| = 1 and exactly one of them in the
/// inner cube [-inner_L, inner_L]^d. Both orientations are stored.
struct BoundaryPairSet {
  int inner_half_side = 0;
  std::vector<std::pair<SiteIndex, SiteIndex>> pairs;

  std::size_t size() const { return pairs.size(); }
};

BoundaryPairSet boundary_pairs(const Box& outer, int inner_half_side);

}  // namespace alab

#endif  // ALAB_LATTICE_HPP
