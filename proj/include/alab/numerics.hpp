#ifndef ALAB_NUMERICS_HPP
#define ALAB_NUMERICS_HPP

#include "alab/operator.hpp"

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace alab {

using Complex = std::complex<double>;

// Smallest allowed distance of a real shift from the spectrum.
inline constexpr double kSingularShiftTolerance = 1e-8;

/// z = E + i eps with eps >= 0.
struct ComplexEnergy {
  double E = 0.0;
  double eps = 0.0;

  Complex z() const { return {E, eps}; }
};

/// Eigenvalues ascending; eigenvectors as orthonormal columns in the same
/// order. Each eigenvector is normalized so that its largest-magnitude
/// component (first one on ties) is positive, which makes output deterministic.
struct EigenSystem {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;

  Eigen::Index size() const { return values.size(); }
};

EigenSystem eig_sym(const Eigen::MatrixXd& m);
// Uses the tridiagonal path for d = 1 boxes.
EigenSystem eig_sym(const Hamiltonian& h);
Eigen::VectorXd eigenvalues(const Hamiltonian& h);
Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& m);

/// Factorization of (H - z) reusable across right-hand sides.
///
/// Small systems use dense partial-pivot LU, larger ones sparse LU. Every solve
/// is checked against the residual contract |(H - z)x - b| <= 1e-10 |b|, with
/// up to three steps of iterative refinement before giving up.
class ShiftedSolver {
 public:
  ShiftedSolver(const Hamiltonian& h, ComplexEnergy z);
  ~ShiftedSolver();
  ShiftedSolver(ShiftedSolver&&) noexcept;
  ShiftedSolver& operator=(ShiftedSolver&&) noexcept;

  Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const;
  // Column y of (H - z)^{-1}.
  Eigen::VectorXcd column(SiteIndex y) const;

  ComplexEnergy energy() const { return z_; }
  Eigen::Index size() const { return n_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  ComplexEnergy z_;
  Eigen::Index n_;
};

Eigen::VectorXcd solve_shifted(const Hamiltonian& h, ComplexEnergy z, const Eigen::VectorXcd& b);

struct QuadratureOptions {
  int max_subdivisions = 5000;
  // Pieces adjacent to a singular point are mapped by v = p + (q - p) t^m with
  // m = 1 / (1 - singularity_exponent), which cancels |v - p|^{-exponent}.
  double singularity_exponent = 0.5;
  double rel_tol = 0.0;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
};

/// Adaptive Gauss-Kronrod (7/15) integration with global error control on a
/// finite interval. `singular_points` are split points; integrable power-law
/// singularities there are removed by the substitution above. Throws
/// QuadratureError when the error target is not met within max_subdivisions.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> singular_points, double tol,
                           const QuadratureOptions& options = {});

double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> singular_points, double tol,
                           const QuadratureOptions& options = {});

}  // namespace alab

#endif  // ALAB_NUMERICS_HPP
