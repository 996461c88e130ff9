#include "alab/lattice.hpp"

#include "alab/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace alab {

Site make_site(std::initializer_list<int> coords) {
  Site n(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index j = 0;
  for (int c : coords) n(j++) = c;
  return n;
}

int graph_distance(const Site& a, const Site& b) {
  if (a.size() != b.size()) throw InvalidArgument("graph_distance: dimension mismatch");
  return (a - b).cwiseAbs().sum();
}

int graph_norm(const Site& a) { return a.cwiseAbs().sum(); }

int sup_norm(const Site& a) { return a.size() == 0 ? 0 : a.cwiseAbs().maxCoeff(); }

Box::Box(int dimension, int half_side) : dimension_(dimension), half_side_(half_side) {
  if (dimension < 1) throw InvalidArgument("box dimension must be >= 1");
  if (half_side < 0) throw InvalidArgument("box half-side must be >= 0");
  strides_.assign(static_cast<std::size_t>(dimension), 1);
  SiteIndex total = 1;
  for (int j = dimension - 1; j >= 0; --j) {
    strides_[static_cast<std::size_t>(j)] = total;
    total *= side();
  }
  size_ = total;
}

bool Box::contains(const Site& n) const {
  return n.size() == dimension_ && sup_norm(n) <= half_side_;
}

void Box::check_site(const Site& n) const {
  if (n.size() != dimension_) {
    throw InvalidArgument("site has dimension " + std::to_string(n.size()) +
                          ", box has " + std::to_string(dimension_));
  }
  if (sup_norm(n) > half_side_) throw InvalidArgument("site outside the box");
}

SiteIndex Box::index_of(const Site& n) const {
  check_site(n);
  SiteIndex index = 0;
  for (int j = 0; j < dimension_; ++j) {
    index += static_cast<SiteIndex>(n(j) + half_side_) * strides_[static_cast<std::size_t>(j)];
  }
  return index;
}

Site Box::site_of(SiteIndex index) const {
  if (index < 0 || index >= size_) throw InvalidArgument("site index out of range");
  Site n(dimension_);
  for (int j = 0; j < dimension_; ++j) {
    const SiteIndex stride = strides_[static_cast<std::size_t>(j)];
    n(j) = static_cast<int>(index / stride) - half_side_;
    index %= stride;
  }
  return n;
}

std::vector<Site> Box::neighbors(const Site& n) const {
  check_site(n);
  std::vector<Site> out;
  out.reserve(static_cast<std::size_t>(2 * dimension_));
  for (int j = 0; j < dimension_; ++j) {
    for (int step : {-1, 1}) {
      Site m = n;
      m(j) += step;
      if (std::abs(m(j)) <= half_side_) out.push_back(std::move(m));
    }
  }
  return out;
}

std::vector<SiteIndex> Box::neighbor_indices(SiteIndex index) const {
  if (index < 0 || index >= size_) throw InvalidArgument("site index out of range");
  std::vector<SiteIndex> out;
  out.reserve(static_cast<std::size_t>(2 * dimension_));
  SiteIndex rest = index;
  for (int j = 0; j < dimension_; ++j) {
    const SiteIndex stride = strides_[static_cast<std::size_t>(j)];
    const auto coord = static_cast<int>(rest / stride);
    rest %= stride;
    if (coord > 0) out.push_back(index - stride);
    if (coord < side() - 1) out.push_back(index + stride);
  }
  return out;
}

std::vector<SiteIndex> Box::sphere_sup(int r) const {
  std::vector<SiteIndex> out;
  if (r < 0 || r > half_side_) return out;
  for (SiteIndex i = 0; i < size_; ++i) {
    if (sup_norm(site_of(i)) == r) out.push_back(i);
  }
  return out;
}

int Box::distance_to_outside(const Site& n) const {
  check_site(n);
  return half_side_ + 1 - sup_norm(n);
}

Box build_box(int dimension, int half_side) { return Box(dimension, half_side); }

BoundaryPairSet boundary_pairs(const Box& outer, int inner_half_side) {
  if (inner_half_side < 0) throw InvalidArgument("inner half-side must be >= 0");
  if (inner_half_side >= outer.half_side()) {
    throw InvalidArgument("inner half-side " + std::to_string(inner_half_side) +
                          " must be smaller than outer half-side " +
                          std::to_string(outer.half_side()));
  }
  BoundaryPairSet set;
  set.inner_half_side = inner_half_side;
  for (SiteIndex u = 0; u < outer.size(); ++u) {
    const bool u_inside = sup_norm(outer.site_of(u)) <= inner_half_side;
    for (SiteIndex w : outer.neighbor_indices(u)) {
      const bool w_inside = sup_norm(outer.site_of(w)) <= inner_half_side;
      if (u_inside != w_inside) set.pairs.emplace_back(u, w);
    }
  }
  return set;
}

}  // namespace alab
