#include "alab/dynamics.hpp"
#include "alab/error.hpp"
#include "alab/fmm.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace alab;
using namespace alab::testing;

namespace {

const Distribution kUniform = make_uniform(0.0, 1.0);

Eigen::VectorXd delta(const Box& box, const Site& x) {
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(box.size());
  psi(box.index_of(x)) = 1.0;
  return psi;
}

EigenSystem random_system(const Box& box, double lambda, std::uint64_t index) {
  return eig_sym(sample_hamiltonian(box, kUniform, lambda, SeedSpec{31, index}));
}

}  // namespace

TEST_CASE("time grids") {
  const auto g = log_time_grid();
  CHECK(g.size() == 512);
  CHECK(g.front() == doctest::Approx(0.1));
  CHECK(g.back() == doctest::Approx(1e3));
  for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] / g[k - 1] == doctest::Approx(g[1] / g[0]));
  const auto u = uniform_time_grid(2.0, 5);
  CHECK(u == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
  const auto r = refine_grid(g);
  CHECK(r.size() == 2 * g.size() - 1);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(r[2 * k] == g[k]);
  CHECK(r[1] == doctest::Approx(std::sqrt(g[0] * g[1])));
  CHECK_THROWS_AS(log_time_grid(0.0, 1.0, 10), InvalidArgument);
}

TEST_CASE("one site evolves by a phase") {
  const Box box(1, 0);
  const EigenSystem es = eig_sym(assemble(box, Eigen::VectorXd::Constant(1, 0.7), 2.0));
  const EvolutionKernel k = evolve_kernel(es, Interval::whole(), 0, 0, {0.0, 1.0, 3.0});
  for (std::size_t a = 0; a < k.times.size(); ++a) {
    CHECK(std::abs(k.values[a] - std::polar(1.0, -1.4 * k.times[a])) < 1e-14);
  }
  CHECK(k.sup_abs == doctest::Approx(1.0));
  CHECK(evolve_kernel(es, Interval{2.0, 3.0}, 0, 0, {1.0}).sup_abs == 0.0);
}

TEST_CASE("evolution is unitary, symmetric and starts at the spectral projection") {
  for (int trial = 0; trial < 10; ++trial) {
    const Box box(uniform_int(1, 2), 3);
    const EigenSystem es = random_system(box, uniform_real(0.0, 4.0), trial);
    const Eigen::VectorXd psi = Eigen::VectorXd::Random(box.size()).normalized();
    const double t = uniform_real(0.0, 50.0);
    CHECK(evolve_state(es, Interval::whole(), psi, t).norm() == doctest::Approx(1.0).epsilon(1e-9));
    const Interval I{-1.0, 1.5};
    const Eigen::MatrixXd p = es.vectors *
                              Eigen::VectorXd(es.values.unaryExpr([&](double e) { return I.contains(e) ? 1.0 : 0.0; }))
                                  .asDiagonal() *
                              es.vectors.transpose();
    CHECK((evolve_state(es, I, psi, 0.0) - (p * psi).cast<Complex>()).cwiseAbs().maxCoeff() < 1e-12);
    // The projected state keeps its norm and energy.
    const Eigen::VectorXcd a = evolve_state(es, I, psi, t);
    CHECK(a.norm() == doctest::Approx((p * psi).norm()).epsilon(1e-9));
    const Eigen::MatrixXd h = es.vectors * es.values.asDiagonal() * es.vectors.transpose();
    const double e0 = (p * psi).dot(h * (p * psi));
    CHECK(std::real(a.dot(h.cast<Complex>() * a)) == doctest::Approx(e0).epsilon(1e-9));
    const SiteIndex j = uniform_int(0, static_cast<int>(box.size()) - 1);
    const SiteIndex k = uniform_int(0, static_cast<int>(box.size()) - 1);
    const auto kjk = evolve_kernel(es, I, j, k, {t});
    const auto kkj = evolve_kernel(es, I, k, j, {t});
    CHECK(std::abs(kjk.values[0] - kkj.values[0]) < 1e-12);
  }
}

TEST_CASE("position moments") {
  const Box box(1, 60);
  const EigenSystem free_es = eig_sym(free_laplacian(box));
  const Eigen::VectorXd psi = delta(box, make_site({0}));
  const std::vector<double> times{0.0, 2.0, 5.0, 10.0};
  const MomentTrace free_trace = position_moment(free_es, box, Interval::whole(), psi, 1.0, times);
  CHECK(free_trace.values[0] == doctest::Approx(0.0).epsilon(1e-12));
  // Ballistic spreading on the free line: || |X| e^{-ith} delta_0 || = sqrt(2) t.
  for (std::size_t a = 1; a < times.size(); ++a) {
    CHECK(free_trace.values[a] == doctest::Approx(std::sqrt(2.0) * times[a]).epsilon(1e-8));
  }
  // An eigenstate of the position operator stays put when h is diagonal.
  const Box small(1, 6);
  const EigenSystem diag = eig_sym(Eigen::MatrixXd(Eigen::VectorXd::LinSpaced(small.size(), 0.0, 1.0).asDiagonal()));
  const MomentTrace still = position_moment(diag, small, Interval::whole(), delta(small, make_site({2})), 2.0, times, 2);
  for (double v : still.values) CHECK(v == doctest::Approx(4.0));
  CHECK_THROWS_AS(position_moment(free_es, box, Interval::whole(), delta(box, make_site({50})), 1.0, times),
                  InvalidArgument);
}

TEST_CASE("localized moments saturate") {
  const Box box(1, 20);
  const auto times = uniform_time_grid(200.0, 201);
  const MomentTrace m =
      mean_position_moment(box, kUniform, 8.0, Interval::whole(), make_site({0}), 1.0, times, 20, 3, 4);
  const Saturation s = saturation(m);
  CHECK(s.relative_change < 0.1);
  CHECK(s.late_max < 2.0);
}

TEST_CASE("RAGE average matches a brute-force time average") {
  const Box box(1, 6);
  const EigenSystem es = random_system(box, 1.0, 3);
  const Eigen::VectorXd psi = delta(box, make_site({0}));
  const Interval I{-1.5, 2.5};
  const std::vector<int> radii{1, 2, 3};
  const double T = 20.0;
  const auto closed = rage_average(es, box, I, psi, radii, T);
  const int steps = 20000;
  for (std::size_t q = 0; q < radii.size(); ++q) {
    double acc = 0.0;
    for (int a = 0; a <= steps; ++a) {
      const double t = T * a / steps;
      const Eigen::VectorXcd st = evolve_state(es, I, psi, t);
      double w = 0.0;
      for (SiteIndex x = 0; x < box.size(); ++x) {
        if (graph_norm(box.site_of(x)) >= radii[q]) w += std::norm(st(x));
      }
      acc += (a == 0 || a == steps ? 0.5 : 1.0) * w;
    }
    CHECK(closed[q] == doctest::Approx(acc / steps).epsilon(1e-6));
    CHECK(closed[q] >= 0.0);
    CHECK(closed[q] <= 1.0);
  }
  CHECK(closed[0] >= closed[1]);
  CHECK(closed[1] >= closed[2]);
}

TEST_CASE("RAGE escape mass separates free and localized motion") {
  const Box box(1, 200);
  const auto free_mass =
      rage_average(eig_sym(free_laplacian(box)), box, Interval::whole(), delta(box, make_site({0})), {10}, 1e3);
  CHECK(free_mass[0] > 0.8);
  const auto loc = mean_rage_average(Box(1, 30), kUniform, 8.0, Interval::whole(), make_site({0}), {10}, 1e3, 20, 2, 4);
  CHECK(loc[0].mean < 0.02);
}

TEST_CASE("dynamical localization profile") {
  std::vector<int> distances{0, 1, 2, 3, 4, 5, 6};
  const DynlocProfile p = dynloc_profile(Box(1, 10), kUniform, 8.0, Interval::whole(), make_site({0}), distances,
                                         log_time_grid(0.1, 100.0, 128), 100, 8, 4);
  CHECK(p.fit.rate > 0.3);
  CHECK(p.estimates.front().mean > 0.98);
  for (std::size_t k = 0; k < distances.size(); ++k) {
    CHECK(p.refined_estimates[k].mean >= p.estimates[k].mean - 1e-15);
  }
  CHECK(p.grid_excess >= 0.0);
}
