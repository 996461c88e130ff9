#include "alab/disorder.hpp"
#include "alab/greens.hpp"
#include "alab/operator.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace alab;
using namespace alab::testing;

namespace {

Hamiltonian random_hamiltonian(int d, int L, double lambda, std::uint64_t index) {
  const Box box(d, L);
  return assemble(box, sample_field(box, make_uniform(0.0, 1.0), SeedSpec{99, index}), lambda);
}

Eigen::MatrixXcd dense_resolvent(const Hamiltonian& h, ComplexEnergy z) {
  const Eigen::Index n = h.size();
  return (h.dense().cast<Complex>() - z.z() * Eigen::MatrixXcd::Identity(n, n)).inverse();
}

}  // namespace

TEST_CASE("green matches a dense inverse and is symmetric") {
  for (int trial = 0; trial < 10; ++trial) {
    const int d = uniform_int(1, 2);
    const Hamiltonian h = random_hamiltonian(d, 3, uniform_real(0.5, 4.0), trial);
    const ComplexEnergy z{uniform_real(-3.0, 3.0), uniform_real(0.01, 1.0)};
    const Eigen::MatrixXcd inv = dense_resolvent(h, z);
    const Site x = random_site(h.box);
    const Site y = random_site(h.box);
    const Complex g = green(h, x, y, z).value;
    CHECK(std::abs(g - inv(h.box.index_of(x), h.box.index_of(y))) < 1e-12);
    CHECK(std::abs(g - green(h, y, x, z).value) < 1e-12);
    CHECK(std::abs(g) <= 1.0 / z.eps + 1e-12);
    const Eigen::VectorXcd col = green_column(h, y, z);
    CHECK((col - inv.col(h.box.index_of(y))).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("Krein block reconstructs the two-site restriction") {
  for (int trial = 0; trial < 20; ++trial) {
    const Hamiltonian h = random_hamiltonian(2, 3, 2.0, 100 + trial);
    const ComplexEnergy z{uniform_real(-2.0, 2.0), 0.1};
    Site x = random_site(h.box);
    Site y = random_site(h.box);
    while (y == x) y = random_site(h.box);
    const KreinBlock kb = krein_block(h, x, y, z);
    CHECK(kb.max_difference < 1e-10);
    const Eigen::MatrixXcd inv = dense_resolvent(h, z);
    CHECK(std::abs(kb.direct(0, 1) - inv(h.box.index_of(x), h.box.index_of(y))) < 1e-12);
    // Im A is negative definite.
    const Eigen::Vector2d im = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd>(imaginary_part(kb.a)).eigenvalues();
    CHECK(im.maxCoeff() < 0.0);
    // A does not see the potential at x and y.
    const Hamiltonian moved = with_potential_at(with_potential_at(h, h.box.index_of(x), 5.0), h.box.index_of(y), -3.0);
    CHECK((krein_block(moved, x, y, z).a - kb.a).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("rank-one parameter does not depend on the local potential") {
  const Hamiltonian h = random_hamiltonian(1, 6, 3.0, 7);
  const Site x = make_site({2});
  const ComplexEnergy z{0.3, 0.05};
  const Complex a = rank_one_parameter(h, x, z);
  for (double w : {-4.0, 0.0, 2.5, 10.0}) {
    const Hamiltonian g = with_potential_at(h, h.box.index_of(x), w);
    CHECK(std::abs(rank_one_parameter(g, x, z) - a) < 1e-10);
    CHECK(std::abs(green(g, x, x, z).value - 1.0 / (a + w)) < 1e-10);
  }
}

TEST_CASE("resolvent satisfies the nearest-neighbour expansion") {
  const Hamiltonian h = random_hamiltonian(2, 3, 1.5, 11);
  const ComplexEnergy z{0.5, 0.2};
  for (int trial = 0; trial < 30; ++trial) {
    const Site x = random_site(h.box);
    const Site y = random_site(h.box);
    const Complex r = expansion_residual(h, x, y, z);
    CHECK(std::abs(r - (x == y ? 1.0 : 0.0)) < 1e-10);
  }
}

TEST_CASE("geometric resolvent identity") {
  for (int d = 1; d <= 2; ++d) {
    const Hamiltonian h = random_hamiltonian(d, 6, 2.0, 20 + d);
    for (int inner : {1, 3}) {
      const GeometricIdentityReport r =
          geometric_identity(h, inner, ComplexEnergy{0.2, 0.1}, default_identity_columns(h.box, inner));
      CHECK(r.residual < 1e-10);
      CHECK(r.far_leading_terms < 1e-12);
      CHECK(geometric_identity_residual(h, inner, ComplexEnergy{-1.0, 0.5}) < 1e-10);
    }
  }
}

TEST_CASE("free Green function below the spectrum decays at the Combes-Thomas rate") {
  const Hamiltonian h = free_laplacian(Box(1, 40));
  const DecayFit fit = ct_decay(h, -3.0, make_site({0}));
  CHECK(fit.rate == doctest::Approx(std::acosh(1.5)).epsilon(1e-6));
  CHECK(min_eigenvalue(h) == doctest::Approx(-2.0 * std::cos(std::numbers::pi / 82.0)).epsilon(1e-12));
}
