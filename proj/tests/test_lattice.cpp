#include "alab/error.hpp"
#include "alab/lattice.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace alab;
using namespace alab::testing;

TEST_CASE("box size and row-major layout") {
  const Box b(2, 1);
  CHECK(b.size() == 9);
  CHECK(b.side() == 3);
  CHECK(b.index_of(make_site({-1, -1})) == 0);
  CHECK(b.index_of(make_site({-1, 0})) == 1);
  CHECK(b.index_of(make_site({0, -1})) == 3);
  CHECK(b.index_of(make_site({1, 1})) == 8);
  CHECK(Box(3, 2).size() == 125);
  CHECK(Box(1, 0).size() == 1);
}

TEST_CASE("index round trip on random boxes") {
  for (int trial = 0; trial < 200; ++trial) {
    const Box b(uniform_int(1, 3), uniform_int(0, 4));
    const Site s = random_site(b);
    CHECK(b.site_of(b.index_of(s)) == s);
    const SiteIndex i = uniform_int(0, static_cast<int>(b.size()) - 1);
    CHECK(b.index_of(b.site_of(i)) == i);
  }
}

TEST_CASE("neighbours stay inside and are symmetric") {
  for (int trial = 0; trial < 100; ++trial) {
    const Box b(uniform_int(1, 3), uniform_int(0, 3));
    const SiteIndex i = uniform_int(0, static_cast<int>(b.size()) - 1);
    for (SiteIndex j : b.neighbor_indices(i)) {
      CHECK(graph_distance(b.site_of(i), b.site_of(j)) == 1);
      const auto back = b.neighbor_indices(j);
      CHECK(std::find(back.begin(), back.end(), i) != back.end());
    }
  }
  const Box b(2, 3);
  CHECK(b.neighbors(make_site({0, 0})).size() == 4);
  CHECK(b.neighbors(make_site({3, 3})).size() == 2);
  CHECK(b.neighbors(make_site({3, 0})).size() == 3);
}

TEST_CASE("sup-norm spheres") {
  for (int d = 1; d <= 3; ++d) {
    const Box b(d, 4);
    CHECK(b.sphere_sup(0).size() == 1);
    for (int r = 1; r <= 4; ++r) {
      const auto count = static_cast<std::size_t>(std::pow(2 * r + 1, d) - std::pow(2 * r - 1, d));
      const auto sphere = b.sphere_sup(r);
      CHECK(sphere.size() == count);
      for (SiteIndex i : sphere) CHECK(sup_norm(b.site_of(i)) == r);
    }
  }
}

TEST_CASE("norms and distances") {
  CHECK(graph_norm(make_site({3, -4})) == 7);
  CHECK(sup_norm(make_site({3, -4})) == 4);
  CHECK(graph_distance(make_site({1, 2}), make_site({-1, 0})) == 4);
  const Box b(2, 5);
  CHECK(b.distance_to_outside(make_site({0, 0})) == 6);
  CHECK(b.distance_to_outside(make_site({5, -2})) == 1);
}

TEST_CASE("boundary pairs cross the inner cube") {
  for (int d = 1; d <= 3; ++d) {
    const Box b(d, 3);
    for (int inner = 0; inner < 3; ++inner) {
      const BoundaryPairSet set = boundary_pairs(b, inner);
      // Each face of the inner cube has (2 inner + 1)^(d-1) outgoing edges; both orientations stored.
      const auto edges = static_cast<std::size_t>(2 * d * std::pow(2 * inner + 1, d - 1));
      CHECK(set.size() == 2 * edges);
      for (const auto& [u, v] : set.pairs) {
        const int nu = sup_norm(b.site_of(u));
        const int nv = sup_norm(b.site_of(v));
        CHECK(graph_distance(b.site_of(u), b.site_of(v)) == 1);
        CHECK(std::min(nu, nv) <= inner);
        CHECK(std::max(nu, nv) == inner + 1);
      }
    }
  }
}

TEST_CASE("invalid boxes and sites throw") {
  CHECK_THROWS_AS(Box(0, 2), InvalidArgument);
  CHECK_THROWS_AS(Box(1, -1), InvalidArgument);
  const Box b(2, 2);
  CHECK_FALSE(b.contains(make_site({3, 0})));
  CHECK_THROWS_AS(b.index_of(make_site({3, 0})), InvalidArgument);
  CHECK_THROWS_AS(b.index_of(make_site({0})), InvalidArgument);
  CHECK_THROWS_AS(boundary_pairs(b, 2), InvalidArgument);
  CHECK_THROWS_AS(boundary_pairs(b, -1), InvalidArgument);
}
