#ifndef ALAB_GREENS_HPP
#define ALAB_GREENS_HPP

#include "alab/numerics.hpp"
#include "alab/operator.hpp"
#include "alab/statistics.hpp"

#include <Eigen/Core>

#include <vector>

namespace alab {

struct GreensValue {
  Site x;
  Site y;
  ComplexEnergy z;
  Complex value;
};

// G(x, y; z) = <e_x, (H - z)^{-1} e_y>.
GreensValue green(const Hamiltonian& h, const Site& x, const Site& y, ComplexEnergy z);
// The column G(., y; z), indexed by box site index.
Eigen::VectorXcd green_column(const Hamiltonian& h, const Site& y, ComplexEnergy z);

/// Restriction of the resolvent to span{e_x, e_y}, computed directly and
/// through the Krein formula (A + diag(lambda omega_x, lambda omega_y))^{-1},
/// where A is the inverse of the same restriction with omega_x = omega_y = 0.
struct KreinBlock {
  Eigen::Matrix2cd direct;
  Eigen::Matrix2cd reconstructed;
  Eigen::Matrix2cd a;
  double max_difference = 0.0;
};

KreinBlock krein_block(const Hamiltonian& h, const Site& x, const Site& y, ComplexEnergy z);

// (1 / 2i)(A - A^*) as a Hermitian 2x2 matrix.
Eigen::Matrix2cd imaginary_part(const Eigen::Matrix2cd& a);

// a in G(x, x; z) = 1 / (a + lambda omega_x); independent of omega_x.
Complex rank_one_parameter(const Hamiltonian& h, const Site& x, ComplexEnergy z);

// -sum_{|u-y|=1} G(x, u; z) + (lambda omega_y - z) G(x, y; z), zero for x != y.
Complex expansion_residual(const Hamiltonian& h, const Site& x, const Site& y, ComplexEnergy z);

/// Check of G = G^(L) - G^(L) T^(L) G^(L+1) + G^(L) T^(L) G T^(L+1) G^(L+1).
///
/// The residual is the max entrywise difference over all rows of the declared
/// columns. `far_leading_terms` is the largest |(G^(L) - G^(L) T^(L) G^(L+1))(0, y)|
/// over declared columns y with sup-norm >= inner_L + 2 (zero up to rounding).
struct GeometricIdentityReport {
  double residual = 0.0;
  double far_leading_terms = 0.0;
  std::vector<SiteIndex> columns;
};

// Default columns: the origin, the axis sites at sup-norm inner_L + 1 and
// inner_L + 2 (when inside the box), and the axis site on the outer face.
std::vector<SiteIndex> default_identity_columns(const Box& box, int inner_half_side);

GeometricIdentityReport geometric_identity(const Hamiltonian& h, int inner_half_side, ComplexEnergy z,
                                           const std::vector<SiteIndex>& columns);
double geometric_identity_residual(const Hamiltonian& h, int inner_half_side, ComplexEnergy z);

struct DecayRange {
  double lo_fraction = 0.25;
  double hi_fraction = 0.75;
};

/// Fit of log|G(x0, x0 + r e_1; E)| against r for a real energy below the
/// spectrum, over r in [lo_fraction * L, hi_fraction * L].
DecayFit ct_decay(const Hamiltonian& h, double E, const Site& x0, DecayRange range = {});

// Smallest eigenvalue of h (exact for up to 4096 sites).
double min_eigenvalue(const Hamiltonian& h);

}  // namespace alab

#endif  // ALAB_GREENS_HPP
