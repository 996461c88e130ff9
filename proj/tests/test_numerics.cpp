#include "alab/disorder.hpp"
#include "alab/error.hpp"
#include "alab/numerics.hpp"
#include "alab/operator.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace alab;
using namespace alab::testing;

TEST_CASE("free chain eigenvalues match the closed form") {
  const int n = 41;
  const Eigen::VectorXd ev = eigenvalues(free_laplacian(Box(1, 20)));
  for (int k = 1; k <= n; ++k) {
    CHECK(ev(k - 1) == doctest::Approx(-2.0 * std::cos(k * std::numbers::pi / (n + 1))).epsilon(1e-12));
  }
}

TEST_CASE("eigensystems are orthonormal and reconstruct the matrix") {
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = uniform_int(1, 12);
    const Eigen::MatrixXd m = random_symmetric_matrix(n);
    const EigenSystem es = eig_sym(m);
    CHECK((es.vectors.transpose() * es.vectors - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((es.vectors * es.values.asDiagonal() * es.vectors.transpose() - m).cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index k = 1; k < n; ++k) CHECK(es.values(k) >= es.values(k - 1));
    for (Eigen::Index k = 0; k < n; ++k) {
      Eigen::Index arg;
      es.vectors.col(k).cwiseAbs().maxCoeff(&arg);
      CHECK(es.vectors(arg, k) > 0.0);
    }
  }
}

TEST_CASE("one-dimensional path agrees with the dense solver") {
  const Box box(1, 30);
  const Hamiltonian h = assemble(box, sample_field(box, make_uniform(0.0, 1.0), SeedSpec{4, 0}), 2.0);
  const Eigen::VectorXd fast = eigenvalues(h);
  const Eigen::VectorXd dense = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h.dense()).eigenvalues();
  CHECK((fast - dense).cwiseAbs().maxCoeff() < 1e-12);
  const EigenSystem es = eig_sym(h);
  CHECK((es.values - dense).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("asymmetric input is rejected") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(eig_sym(m), InvalidArgument);
}

TEST_CASE("shifted solves meet the residual contract on both paths") {
  for (int L : {3, 80}) {
    const Box box(1, L);
    const Hamiltonian h = assemble(box, sample_field(box, make_uniform(0.0, 1.0), SeedSpec{8, 0}), 3.0);
    const ComplexEnergy z{0.7, 1e-3};
    const ShiftedSolver solver(h, z);
    const Eigen::VectorXcd b = Eigen::VectorXcd::Random(box.size());
    const Eigen::VectorXcd x = solver.solve(b);
    const Eigen::MatrixXcd a = h.dense().cast<Complex>() - z.z() * Eigen::MatrixXcd::Identity(box.size(), box.size());
    CHECK((a * x - b).norm() <= 1e-10 * b.norm());
    // Independent dense inverse as oracle.
    const Eigen::MatrixXcd inv = a.inverse();
    CHECK((solver.column(2) - inv.col(2)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("real shift on an eigenvalue is singular") {
  const Hamiltonian h = free_laplacian(Box(1, 2));
  const double e = eigenvalues(h)(1);
  CHECK_THROWS_AS(ShiftedSolver(h, ComplexEnergy{e, 0.0}).column(0), SingularShiftError);
  // The resolvent norm bound holds off the axis.
  const Eigen::VectorXcd col = ShiftedSolver(h, ComplexEnergy{e, 0.5}).column(0);
  CHECK(col.cwiseAbs().maxCoeff() <= 2.0 + 1e-12);
}

TEST_CASE("quadrature of power singularities") {
  const std::vector<double> none;
  const std::vector<double> at0{0.0};
  QuadratureOptions opts;
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, none, 1e-13).value ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, at0, 1e-12, opts).value ==
        doctest::Approx(2.0).epsilon(1e-11));
  CHECK(integrate([](double x) { return 1.0 / std::sqrt(std::abs(x)); }, -1.0, 1.0, at0, 1e-12, opts).value ==
        doctest::Approx(4.0).epsilon(1e-11));
  opts.singularity_exponent = 0.75;
  CHECK(integrate([](double x) { return std::pow(x, -0.75); }, 0.0, 1.0, at0, 1e-11, opts).value ==
        doctest::Approx(4.0).epsilon(1e-9));
  // Jump inside the interval declared as a split point.
  const std::vector<double> jump{0.3};
  CHECK(integrate([](double x) { return x < 0.3 ? 1.0 : 2.0; }, 0.0, 1.0, jump, 1e-12).value ==
        doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("quadrature failures are reported") {
  const std::vector<double> none;
  QuadratureOptions opts;
  opts.max_subdivisions = 20;
  CHECK_THROWS_AS(integrate([](double x) { return 1.0 / x; }, 1e-300, 1.0, none, 1e-12, opts), QuadratureError);
  CHECK_THROWS_AS(integrate([](double x) { return x; }, 0.0, INFINITY, none, 1e-12), InvalidArgument);
}
