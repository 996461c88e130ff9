#ifndef ALAB_TESTS_SUPPORT_HPP
#define ALAB_TESTS_SUPPORT_HPP

#include "alab/lattice.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace alab::testing {

// Fixed-seed generator for property tests.
inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(20240531);
  return engine;
}

inline int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }
inline double uniform_real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline Site random_site(const Box& box) {
  Site s(box.dimension());
  for (int i = 0; i < box.dimension(); ++i) s(i) = uniform_int(-box.half_side(), box.half_side());
  return s;
}

inline Eigen::MatrixXd random_symmetric_matrix(Eigen::Index n) {
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = uniform_real(-1.0, 1.0);
  }
  return 0.5 * (m + m.transpose());
}

inline Site axis(int d, int r) {
  Site s = Site::Zero(d);
  s(0) = r;
  return s;
}

}  // namespace alab::testing

#endif  // ALAB_TESTS_SUPPORT_HPP
