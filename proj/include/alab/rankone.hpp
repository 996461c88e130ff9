#ifndef ALAB_RANKONE_HPP
#define ALAB_RANKONE_HPP

#include "alab/numerics.hpp"
#include "alab/spectral.hpp"

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace alab {

// Smallest singular value of the Krylov matrix of h0 / ||h0|| accepted as cyclic.
inline constexpr double kCyclicityThreshold = 1e-8;
// Eigenvalue gap below which E_k(v) counts as degenerate.
inline constexpr double kDegenerateGap = 1e-8;

enum class CyclicityPolicy {
  reject,  // throw CyclicityError below the threshold
  flag,    // keep the instance and mark it weakly cyclic
};

/// h_v = h0 + v <phi, .> phi with phi normalized.
struct RankOneInstance {
  Eigen::MatrixXd h0;
  Eigen::VectorXd phi;
  Eigen::VectorXd chi;
  double krylov_sigma_min = 0.0;
  bool weakly_cyclic = false;
};

// Smallest singular value of [phi, A phi, ..., A^{N-1} phi] with A = h0 / ||h0||_2
// and each column normalized.
double krylov_sigma_min(const Eigen::MatrixXd& h0, const Eigen::VectorXd& phi);

RankOneInstance make_instance(Eigen::MatrixXd h0, Eigen::VectorXd phi, Eigen::VectorXd chi,
                              CyclicityPolicy policy = CyclicityPolicy::reject);

// Gaussian entries, symmetrized.
Eigen::MatrixXd random_symmetric(Eigen::Index n, std::mt19937_64& rng);
Eigen::VectorXd random_unit_vector(Eigen::Index n, std::mt19937_64& rng);
// Random cyclic instance; redraws until the cyclicity threshold is met.
RankOneInstance random_instance(Eigen::Index n, std::mt19937_64& rng);

Eigen::MatrixXd perturbed(const RankOneInstance& inst, double v);

// Compression of h0 to the orthogonal complement of phi, in an orthonormal basis of it.
Eigen::MatrixXd compression(const RankOneInstance& inst);

struct EigenFlow {
  std::vector<double> v_grid;
  Eigen::MatrixXd energies;  // row i: ascending eigenvalues at v_grid[i]
  Eigen::VectorXd limits;    // eigenvalues of the compression, E_1(inf) < ... < E_{N-1}(inf)
};

EigenFlow eigenflow(const RankOneInstance& inst, const std::vector<double>& v_grid);

/// E_1(v) < E_1(inf) < E_2(v) < ... < E_{N-1}(inf) < E_N(v). `slack` is the
/// smallest gap in that chain; `flagged` marks weak cyclicity or a slack
/// below the degeneracy gap.
struct IntertwineReport {
  double v = 0.0;
  Eigen::VectorXd at_v;
  Eigen::VectorXd at_infinity;
  double slack = 0.0;
  bool passed = false;
  bool flagged = false;
};

IntertwineReport intertwine_check(const RankOneInstance& inst, double v);

/// Richardson-extrapolated central difference of E_k(v) (step 1e-4) against
/// |<psi_k(v), phi>|^2. Throws DegenerateEigenvalueError when E_k(v) is within
/// 1e-8 of a neighbour.
struct DerivativeCheck {
  double numeric = 0.0;
  double overlap = 0.0;
  double difference = 0.0;
};

DerivativeCheck derivative_check(const RankOneInstance& inst, double v, Eigen::Index k);

// Q_v(phi, chi; I, s) = sum_{E_k(v) in I} |<psi_k, phi>|^{2-s} |<psi_k, chi>|^s.
double rank_one_correlator(const RankOneInstance& inst, double v, const Interval& interval, double s);

/// int_R Q_v(phi, chi; I, s) |v|^{-s} dv against int_I |<phi, (h0 - E)^{-1} chi>|^s dE.
struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double lhs_error = 0.0;
  double rhs_error = 0.0;
  double relative_gap = 0.0;
};

IdentityCheck correlator_identity_check(const RankOneInstance& inst, const Interval& interval, double s,
                                        double tol = 1e-11);

}  // namespace alab

#endif  // ALAB_RANKONE_HPP
