#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracle/dense_oracle.hpp"
#include "oracle/lp_builder.hpp"
#include "oracle/simplex_oracle.hpp"
#include "pdhglp/standard_form.hpp"

using namespace pdhglp;
using test_oracle::DenseMatrix;

namespace {

StandardFormLp make_standard(index_t m, index_t n, std::vector<Triplet> t,
                             std::vector<double> b, std::vector<double> c) {
  StandardFormLp lp;
  lp.constraint_matrix = CsrMatrix::from_triplets(m, n, t);
  lp.rhs = std::move(b);
  lp.objective = std::move(c);
  lp.validate();
  return lp;
}

/// min x s.t. x = 1, x >= 0 with saddle point (1, 1).
StandardFormLp tiny_standard() {
  return make_standard(1, 1, {{0, 0, 1.0}}, {1.0}, {1.0});
}

GeneralFormLp as_general(const StandardFormLp& lp) {
  GeneralFormLp g;
  g.inequality_matrix = CsrMatrix::zero(0, lp.num_variables());
  g.equality_matrix = lp.constraint_matrix;
  g.equality_rhs = lp.rhs;
  g.objective = lp.objective;
  g.lower.assign(static_cast<std::size_t>(lp.num_variables()), 0.0);
  g.upper.assign(static_cast<std::size_t>(lp.num_variables()), kInf);
  g.validate();
  return g;
}

}  // namespace

TEST_CASE("kkt_error_standard") {
  const StandardFormLp lp = tiny_standard();
  SECTION("zero at the optimal pair") {
    REQUIRE(kkt_error_standard(lp, std::vector<double>{1.0},
                               std::vector<double>{1.0}) == 0.0);
  }
  SECTION("the origin scores exactly 1") {
    REQUIRE(kkt_error_standard(lp, std::vector<double>{0.0},
                               std::vector<double>{0.0}) == 1.0);
  }
  SECTION("random points match a dense oracle") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    const StandardFormLp wide = make_standard(
        2, 3, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 1, -1.0}, {1, 2, 0.5}},
        {1.0, 0.5}, {1.0, -1.0, 2.0});
    const DenseMatrix a = DenseMatrix::from_csr(wide.constraint_matrix);
    for (int t = 0; t < 40; ++t) {
      std::vector<double> x(3), y(2);
      for (double& v : x) v = dist(rng);
      for (double& v : y) v = dist(rng);
      double sum = 0.0;
      const std::vector<double> ax = a.matvec(x);
      for (int i = 0; i < 2; ++i) {
        sum += (ax[i] - wide.rhs[i]) * (ax[i] - wide.rhs[i]);
      }
      for (double v : x) sum += std::max(-v, 0.0) * std::max(-v, 0.0);
      const std::vector<double> aty = a.matvec_transpose(y);
      for (int j = 0; j < 3; ++j) {
        const double r = std::max(aty[j] - wide.objective[j], 0.0);
        sum += r * r;
      }
      double gap = 0.0;
      for (int j = 0; j < 3; ++j) gap += wide.objective[j] * x[j];
      for (int i = 0; i < 2; ++i) gap -= wide.rhs[i] * y[i];
      gap = std::max(gap, 0.0);
      sum += gap * gap;
      REQUIRE(kkt_error_standard(wide, x, y) ==
              Catch::Approx(std::sqrt(sum)).margin(1e-13));
    }
  }
}

TEST_CASE("spectral_norm") {
  REQUIRE(spectral_norm(CsrMatrix::identity(4)) == Catch::Approx(1.0).margin(1e-9));
  const CsrMatrix diag = CsrMatrix::from_triplets(
      2, 2, std::vector<Triplet>{{0, 0, 3.0}, {1, 1, 1.0}});
  REQUIRE(spectral_norm(diag) == Catch::Approx(3.0).margin(1e-8));

  std::mt19937 rng(17);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int t = 0; t < 20; ++t) {
    const index_t m = 2 + static_cast<index_t>(rng() % 5);
    const index_t n = 2 + static_cast<index_t>(rng() % 5);
    std::vector<Triplet> triples;
    for (index_t r = 0; r < m; ++r) {
      for (index_t c = 0; c < n; ++c) {
        if (rng() % 3 != 0) triples.push_back({r, c, dist(rng)});
      }
    }
    if (triples.empty()) triples.push_back({0, 0, 1.0});
    const CsrMatrix a = CsrMatrix::from_triplets(m, n, triples);
    const double expected = test_oracle::dense_spectral_norm(DenseMatrix::from_csr(a));
    REQUIRE(spectral_norm(a, 1e-14, 100000) ==
            Catch::Approx(expected).margin(1e-8 * std::max(1.0, expected)));
  }
}

TEST_CASE("already-optimal start produces an immediate restart chain at KKT 0") {
  const StandardFormLp lp = tiny_standard();
  StandardPdhgOptions options;
  options.step_size = 0.4;
  options.restart_decay = 0.5;
  options.convergence_tol = -1.0;  // disabled: observe the chain itself
  options.iteration_limit = 10;
  const StandardPdhgTrace trace =
      restarted_pdhg_standard(lp, options, {{1.0}, {1.0}});
  REQUIRE(trace.total_iterations == 10);
  REQUIRE(trace.epochs.size() >= 10);
  for (const StandardEpoch& e : trace.epochs) {
    REQUIRE(e.start_kkt == 0.0);
    REQUIRE(e.length <= 1);
  }
}

TEST_CASE("per-epoch KKT decays geometrically on the tiny instance") {
  const StandardFormLp lp = tiny_standard();
  StandardPdhgOptions options;
  options.step_size = 0.4;  // <= 1/(2 ||A||) = 0.5
  options.restart_decay = 0.5;
  options.convergence_tol = 1e-12;
  options.iteration_limit = 100000;
  const StandardPdhgTrace trace = restarted_pdhg_standard(lp, options);
  REQUIRE(trace.converged);
  REQUIRE(trace.epochs.size() >= 3);
  for (std::size_t e = 1; e < trace.epochs.size(); ++e) {
    REQUIRE(trace.epochs[e].start_kkt <=
            0.5 * trace.epochs[e - 1].start_kkt * (1.0 + 1e-12));
  }
}

TEST_CASE("theorem properties hold on small fixtures") {
  std::vector<StandardFormLp> fixtures;
  fixtures.push_back(tiny_standard());
  fixtures.push_back(make_standard(1, 2, {{0, 0, 1.0}, {0, 1, 1.0}}, {1.0},
                                   {1.0, 2.0}));
  fixtures.push_back(make_standard(
      2, 2, {{0, 0, 1.0}, {1, 1, 1.0}}, {1.0, 2.0}, {1.0, 1.0}));
  fixtures.push_back(make_standard(
      2, 3, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 1, 1.0}, {1, 2, 1.0}}, {1.0, 1.0},
      {1.0, 1.0, 1.0}));
  fixtures.push_back(make_standard(
      3, 5,
      {{0, 0, 1.0}, {0, 2, 1.0}, {0, 3, 0.5}, {1, 1, 1.0}, {1, 2, -1.0},
       {2, 3, 1.0}, {2, 4, 1.0}},
      {2.0, 0.5, 1.5}, {1.0, 2.0, 0.5, 1.0, 3.0}));

  for (std::size_t f = 0; f < fixtures.size(); ++f) {
    CAPTURE(f);
    const StandardFormLp& lp = fixtures[f];
    const double norm_a = spectral_norm(lp.constraint_matrix, 1e-12, 100000);
    const double s = 0.9 / (2.0 * norm_a);  // within the theorem's range

    // z* from the simplex oracle (independent of the iteration under test)
    const auto oracle = test_oracle::simplex_solve(as_general(lp));
    REQUIRE(oracle.status == test_oracle::SimplexStatus::kOptimal);
    const std::vector<double>& x_star = oracle.primal;
    const std::vector<double>& y_star = oracle.duals;
    REQUIRE(kkt_error_standard(lp, x_star, y_star) <= 1e-7);

    StandardPdhgOptions options;
    options.step_size = s;
    options.restart_decay = 0.5;
    options.convergence_tol = 1e-10;
    options.iteration_limit = 400000;
    options.record_iterates = true;
    const StandardPdhgTrace trace = restarted_pdhg_standard(lp, options);
    REQUIRE(trace.converged);
    REQUIRE_FALSE(trace.numerical_failure);

    // Theorem (iii): KKT(z^{n,0}) <= beta^n KKT(z^{0,0})
    const double kkt0 = trace.epochs.front().start_kkt;
    double bound = kkt0;
    for (std::size_t e = 1; e < trace.epochs.size(); ++e) {
      bound *= options.restart_decay;
      REQUIRE(trace.epochs[e].start_kkt <= bound * (1.0 + 1e-10));
    }

    // Theorem (ii): restart lengths bounded and not growing across epochs
    std::int64_t max_length = 0;
    for (const StandardEpoch& e : trace.epochs) {
      max_length = std::max(max_length, e.length);
    }
    REQUIRE(max_length < options.iteration_limit);
    if (trace.epochs.size() >= 4) {
      // the later half never needs more iterations than twice the overall max
      // of the first half (boundedness, not monotonicity, is the claim)
      std::int64_t first_half_max = 0;
      const std::size_t half = trace.epochs.size() / 2;
      for (std::size_t e = 0; e < half; ++e) {
        first_half_max = std::max(first_half_max, trace.epochs[e].length);
      }
      for (std::size_t e = half; e < trace.epochs.size(); ++e) {
        REQUIRE(trace.epochs[e].length <= std::max<std::int64_t>(first_half_max * 2, 8));
      }
    }

    // Theorem (i): ||z^{n,k}||_2 <= sqrt(2) ||z^{0,0} - z*||_Ps + ||z*||_2
    double dx0_sq = 0.0;
    for (double v : x_star) dx0_sq += v * v;
    double dy0_sq = 0.0;
    for (double v : y_star) dy0_sq += v * v;
    std::vector<double> neg_x(x_star.size()), neg_y(y_star.size());
    for (std::size_t i = 0; i < x_star.size(); ++i) neg_x[i] = -x_star[i];
    for (std::size_t i = 0; i < y_star.size(); ++i) neg_y[i] = -y_star[i];
    const double start_dist_ps_sq = p_s_norm_squared(lp, s, neg_x, neg_y);
    const double radius =
        std::sqrt(2.0) * std::sqrt(std::max(start_dist_ps_sq, 0.0)) +
        std::sqrt(dx0_sq + dy0_sq);
    for (const StandardEpoch& epoch : trace.epochs) {
      for (const PrimalDualPoint& z : epoch.iterates) {
        const double norm_z =
            std::sqrt(squared_norm(z.primal) + squared_norm(z.dual));
        REQUIRE(norm_z <= radius * (1.0 + 1e-9) + 1e-9);
      }
    }

    // Nonexpansiveness: ||z - z*||_Ps nonincreasing within each epoch
    for (const StandardEpoch& epoch : trace.epochs) {
      double previous = kInf;
      bool first = true;
      std::vector<double> dx(x_star.size()), dy(y_star.size());
      // distance of the epoch start first
      for (std::size_t i = 0; i < dx.size(); ++i) {
        dx[i] = epoch.start.primal[i] - x_star[i];
      }
      for (std::size_t i = 0; i < dy.size(); ++i) {
        dy[i] = epoch.start.dual[i] - y_star[i];
      }
      previous = p_s_norm_squared(lp, s, dx, dy);
      first = false;
      for (const PrimalDualPoint& z : epoch.iterates) {
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = z.primal[i] - x_star[i];
        for (std::size_t i = 0; i < dy.size(); ++i) dy[i] = z.dual[i] - y_star[i];
        const double current = p_s_norm_squared(lp, s, dx, dy);
        if (!first) {
          REQUIRE(std::sqrt(std::max(current, 0.0)) <=
                  std::sqrt(std::max(previous, 0.0)) + 1e-9);
        }
        previous = current;
      }
    }
  }
}
