#include "alab/numerics.hpp"

#include "alab/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

namespace alab {

namespace {

constexpr Eigen::Index kDenseSolveLimit = 128;

void normalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    Eigen::Index arg = 0;
    vectors.col(k).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, k) < 0.0) vectors.col(k) *= -1.0;
  }
}

void check_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("eig_sym: matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw InvalidArgument("eig_sym: matrix not symmetric (max asymmetry " + std::to_string(asym) + ")");
  }
}

bool is_path(const Hamiltonian& h) { return h.box.dimension() == 1; }

}  // namespace

EigenSystem eig_sym(const Eigen::MatrixXd& m) {
  check_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericError("eig_sym: eigensolver did not converge");
  EigenSystem es{solver.eigenvalues(), solver.eigenvectors()};
  normalize_signs(es.vectors);
  return es;
}

EigenSystem eig_sym(const Hamiltonian& h) {
  if (!is_path(h)) return eig_sym(h.dense());
  const Eigen::Index n = h.size();
  Eigen::VectorXd sub = Eigen::VectorXd::Constant(std::max<Eigen::Index>(n - 1, 0), -1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(h.potential, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericError("eig_sym: tridiagonal solver did not converge");
  EigenSystem es{solver.eigenvalues(), solver.eigenvectors()};
  normalize_signs(es.vectors);
  return es;
}

Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& m) {
  check_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("eigenvalues: eigensolver did not converge");
  return solver.eigenvalues();
}

Eigen::VectorXd eigenvalues(const Hamiltonian& h) {
  if (!is_path(h)) return eigenvalues(h.dense());
  const Eigen::Index n = h.size();
  Eigen::VectorXd sub = Eigen::VectorXd::Constant(std::max<Eigen::Index>(n - 1, 0), -1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(h.potential, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("eigenvalues: tridiagonal solver did not converge");
  return solver.eigenvalues();
}

// ---------------------------------------------------------------------------

struct ShiftedSolver::Impl {
  using ComplexSparse = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;

  ComplexSparse shifted;
  Eigen::PartialPivLU<Eigen::MatrixXcd> dense_lu;
  Eigen::SparseLU<ComplexSparse, Eigen::COLAMDOrdering<int>> sparse_lu;
  bool dense = false;

  Eigen::VectorXcd raw_solve(const Eigen::VectorXcd& b) const {
    if (dense) return dense_lu.solve(b);
    return sparse_lu.solve(b);
  }
};

ShiftedSolver::ShiftedSolver(const Hamiltonian& h, ComplexEnergy z)
    : impl_(std::make_unique<Impl>()), z_(z), n_(h.size()) {
  if (!(z.eps >= 0.0) || !std::isfinite(z.E) || !std::isfinite(z.eps)) {
    throw InvalidArgument("shifted solve needs finite E and eps >= 0");
  }
  impl_->shifted = h.matrix.cast<Complex>();
  for (Eigen::Index i = 0; i < n_; ++i) impl_->shifted.coeffRef(i, i) -= z.z();
  impl_->shifted.makeCompressed();
  impl_->dense = n_ <= kDenseSolveLimit;
  if (impl_->dense) {
    impl_->dense_lu.compute(Eigen::MatrixXcd(impl_->shifted));
  } else {
    impl_->sparse_lu.analyzePattern(impl_->shifted);
    impl_->sparse_lu.factorize(impl_->shifted);
    if (impl_->sparse_lu.info() != Eigen::Success) {
      if (z.eps == 0.0) throw SingularShiftError("real shift E = " + std::to_string(z.E) + " is singular");
      throw NumericError("sparse LU factorization failed: " + impl_->sparse_lu.lastErrorMessage());
    }
  }
}

ShiftedSolver::~ShiftedSolver() = default;
ShiftedSolver::ShiftedSolver(ShiftedSolver&&) noexcept = default;
ShiftedSolver& ShiftedSolver::operator=(ShiftedSolver&&) noexcept = default;

Eigen::VectorXcd ShiftedSolver::solve(const Eigen::VectorXcd& b) const {
  if (b.size() != n_) throw InvalidArgument("solve_shifted: right-hand side has wrong length");
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Eigen::VectorXcd::Zero(n_);
  Eigen::VectorXcd x = impl_->raw_solve(b);
  const bool finite = x.allFinite();
  // 1 / dist(E, spectrum) = |(H - E)^{-1}| >= |x| / |b|.
  if (z_.eps == 0.0 && (!finite || x.norm() * kSingularShiftTolerance > bnorm)) {
    throw SingularShiftError("real shift E = " + std::to_string(z_.E) + " lies within " +
                             std::to_string(kSingularShiftTolerance) + " of the spectrum");
  }
  if (!finite) throw NumericError("shifted solve produced non-finite values");
  for (int step = 0; step < 4; ++step) {
    const Eigen::VectorXcd residual = b - impl_->shifted * x;
    if (residual.norm() <= 1e-10 * bnorm) return x;
    if (step == 3) break;
    x += impl_->raw_solve(residual);
  }
  throw NumericError("shifted solve missed the residual contract at E = " + std::to_string(z_.E) +
                     ", eps = " + std::to_string(z_.eps));
}

Eigen::VectorXcd ShiftedSolver::column(SiteIndex y) const {
  if (y < 0 || y >= n_) throw InvalidArgument("column index out of range");
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n_);
  e(y) = 1.0;
  return solve(e);
}

Eigen::VectorXcd solve_shifted(const Hamiltonian& h, ComplexEnergy z, const Eigen::VectorXcd& b) {
  return ShiftedSolver(h, z).solve(b);
}

// ---------------------------------------------------------------------------
// Quadrature

namespace {

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  std::size_t piece;
  double lo;
  double hi;
  double value;
  double error;

  bool operator<(const Segment& other) const { return error < other.error; }
};

void gauss_kronrod(const std::function<double(double)>& g, Segment& seg) {
  const double center = 0.5 * (seg.lo + seg.hi);
  const double half = 0.5 * (seg.hi - seg.lo);
  const double fc = g(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  std::array<double, 7> f1{};
  std::array<double, 7> f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[static_cast<std::size_t>(j)];
    const double a = g(center - dx);
    const double b = g(center + dx);
    f1[static_cast<std::size_t>(j)] = a;
    f2[static_cast<std::size_t>(j)] = b;
    resk += kWgk[static_cast<std::size_t>(j)] * (a + b);
    resabs += kWgk[static_cast<std::size_t>(j)] * (std::abs(a) + std::abs(b));
    if (j % 2 == 1) resg += kWg[static_cast<std::size_t>(j / 2)] * (a + b);
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (std::size_t j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  }
  resasc *= std::abs(half);
  resabs *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  seg.value = resk * half;
  seg.error = err;
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> singular_points, double tol,
                           const QuadratureOptions& options) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidArgument("integrate: interval must be finite");
  if (!(tol > 0.0)) throw InvalidArgument("integrate: tol must be > 0");
  if (a == b) return {};
  if (a > b) {
    QuadratureResult r = integrate(f, b, a, singular_points, tol, options);
    r.value = -r.value;
    return r;
  }
  const double s = options.singularity_exponent;
  if (!(s >= 0.0 && s < 1.0)) throw InvalidArgument("integrate: singularity exponent must be in [0, 1)");
  const double power = 1.0 / (1.0 - s);

  std::vector<double> singular;
  for (double p : singular_points) {
    if (p >= a && p <= b) singular.push_back(p);
  }
  std::sort(singular.begin(), singular.end());
  singular.erase(std::unique(singular.begin(), singular.end()), singular.end());
  auto is_singular = [&](double p) { return std::binary_search(singular.begin(), singular.end(), p); };

  std::vector<double> cuts{a, b};
  for (double p : singular) {
    if (p > a && p < b) cuts.push_back(p);
  }
  std::sort(cuts.begin(), cuts.end());

  // Every piece is integrated over its own parameter range [lo, hi].
  std::vector<std::function<double(double)>> pieces;
  std::vector<std::pair<double, double>> ranges;
  auto add_piece = [&](double p, double q, bool left_singular, bool right_singular) {
    if (left_singular && power != 1.0) {
      const double width = q - p;
      pieces.emplace_back([&f, p, width, power](double t) {
        const double tm1 = std::pow(t, power - 1.0);
        return f(p + width * tm1 * t) * power * width * tm1;
      });
      ranges.emplace_back(0.0, 1.0);
    } else if (right_singular && power != 1.0) {
      const double width = q - p;
      pieces.emplace_back([&f, q, width, power](double t) {
        const double tm1 = std::pow(t, power - 1.0);
        return f(q - width * tm1 * t) * power * width * tm1;
      });
      ranges.emplace_back(0.0, 1.0);
    } else {
      pieces.emplace_back([&f](double v) { return f(v); });
      ranges.emplace_back(p, q);
    }
  };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double p = cuts[i];
    const double q = cuts[i + 1];
    const bool ls = is_singular(p);
    const bool rs = is_singular(q);
    if (ls && rs) {
      const double mid = 0.5 * (p + q);
      add_piece(p, mid, true, false);
      add_piece(mid, q, false, true);
    } else {
      add_piece(p, q, ls, rs);
    }
  }

  std::priority_queue<Segment> queue;
  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    Segment seg{i, ranges[i].first, ranges[i].second, 0.0, 0.0};
    gauss_kronrod(pieces[i], seg);
    total += seg.value;
    total_error += seg.error;
    queue.push(seg);
  }

  int subdivisions = 0;
  auto target = [&] { return std::max(tol, options.rel_tol * std::abs(total)); };
  while (total_error > target()) {
    if (queue.empty()) break;
    if (subdivisions >= options.max_subdivisions) {
      throw QuadratureError("quadrature did not converge after " + std::to_string(subdivisions) +
                            " subdivisions (estimate " + std::to_string(total) + ", error " +
                            std::to_string(total_error) + ")");
    }
    Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi) || (worst.hi - worst.lo) < 1e-14 * (1.0 + std::abs(mid))) {
      // Too narrow to split further; value and error stay in the totals.
      if (queue.empty()) break;
      continue;
    }
    Segment left{worst.piece, worst.lo, mid, 0.0, 0.0};
    Segment right{worst.piece, mid, worst.hi, 0.0, 0.0};
    gauss_kronrod(pieces[worst.piece], left);
    gauss_kronrod(pieces[worst.piece], right);
    ++subdivisions;
    queue.push(left);
    queue.push(right);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
  }
  if (!std::isfinite(total)) throw QuadratureError("quadrature produced a non-finite value");
  if (total_error > target()) {
    throw QuadratureError("quadrature stalled with error " + std::to_string(total_error) + " above target " +
                          std::to_string(target()));
  }
  return {total, total_error, subdivisions};
}

double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> singular_points, double tol,
                           const QuadratureOptions& options) {
  return integrate(f, a, b, singular_points, tol, options).value;
}

}  // namespace alab
