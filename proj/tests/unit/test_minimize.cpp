#include <cmath>
#include <random>

#include "doctest.h"
#include "l1rom/minimize.hpp"
#include "support/oracles.hpp"

using namespace l1rom;
using namespace l1rom::minimize;
using l1rom::testing::random_matrix;
using l1rom::testing::random_vector;

namespace {

DenseVector vec(std::initializer_list<double> xs) {
  DenseVector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

DenseMatrix ones(Index n) { return DenseMatrix::Ones(n, 1); }

}  // namespace

TEST_SUITE("qr_least_squares") {
  TEST_CASE("identity system is solved exactly with the residual sign convention") {
    const auto rep = qr_least_squares(DenseMatrix::Identity(2, 2), vec({1, 2}));
    CHECK(rep.solution(0) == doctest::Approx(-1.0));
    CHECK(rep.solution(1) == doctest::Approx(-2.0));
    CHECK(rep.objective == doctest::Approx(0.0));
  }

  TEST_CASE("single column gives the mean") {
    const auto rep = qr_least_squares(ones(2), vec({-1, -3}));
    CHECK(rep.solution(0) == doctest::Approx(2.0));
  }

  TEST_CASE("random 10x3 matches the normal-equations oracle") {
    std::mt19937_64 rng(1234);
    const DenseMatrix a = random_matrix(rng, 10, 3);
    const DenseVector b = random_vector(rng, 10);
    const DenseVector z = qr_least_squares(a, b).solution;
    const DenseVector oracle = l1rom::testing::normal_equations_oracle(a, b);
    CHECK((z - oracle).norm() / oracle.norm() < 1e-9);
  }

  TEST_CASE("rank deficient matrix is reported") {
    DenseMatrix a(3, 2);
    a << 1, 2, 2, 4, 3, 6;
    CHECK_THROWS_AS(qr_least_squares(a, vec({1, 1, 1})), RankDeficient);
  }

  TEST_CASE("dimension mismatch is reported") {
    CHECK_THROWS_AS(qr_least_squares(DenseMatrix::Identity(3, 2), vec({1, 2})), DimensionMismatch);
    CHECK_THROWS_AS(qr_least_squares(DenseMatrix::Identity(2, 3), vec({1, 2})), DimensionMismatch);
  }

  TEST_CASE("optimality certificate holds on seeded instances") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
      const Index rows = 5 + static_cast<Index>(rng() % 46);
      const Index cols = 1 + static_cast<Index>(rng() % 5);
      const DenseMatrix a = random_matrix(rng, rows, cols);
      const DenseVector b = random_vector(rng, rows);
      const DenseVector z = qr_least_squares(a, b).solution;
      const double lhs = (a.transpose() * (a * z + b)).cwiseAbs().maxCoeff();
      CHECK(lhs < 1e-8 * a.cwiseAbs().maxCoeff() * b.norm());
      // normal equations to relative 1e-10
      const DenseVector ata_z = a.transpose() * a * z;
      const DenseVector atb = -(a.transpose() * b);
      CHECK((ata_z - atb).norm() <= 1e-10 * std::max(1.0, atb.norm()));
    }
  }
}

TEST_SUITE("l1_lp") {
  TEST_CASE("scalar fit is the median") {
    const auto rep = l1_lp(ones(3), vec({-1, -2, -10}));
    CHECK(rep.solution(0) == doctest::Approx(2.0));
    CHECK(rep.objective == doctest::Approx(9.0));
    CHECK(rep.converged);
  }

  TEST_CASE("square identity interpolates") {
    const auto rep = l1_lp(DenseMatrix::Identity(2, 2), vec({3, -4}));
    CHECK(rep.solution(0) == doctest::Approx(-3.0));
    CHECK(rep.solution(1) == doctest::Approx(4.0));
    CHECK(rep.objective == doctest::Approx(0.0));
  }

  TEST_CASE("objective equals the L1 norm of the returned residual") {
    std::mt19937_64 rng(5);
    const DenseMatrix a = random_matrix(rng, 30, 4);
    const DenseVector b = random_vector(rng, 30);
    const auto rep = l1_lp(a, b);
    CHECK(std::abs(rep.objective - (a * rep.solution + b).lpNorm<1>()) < 1e-9);
  }

  TEST_CASE("matches brute-force vertex enumeration") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
      const Index rows = 6 + static_cast<Index>(rng() % 10);
      const Index cols = 1 + static_cast<Index>(rng() % 3);
      const DenseMatrix a = random_matrix(rng, rows, cols);
      const DenseVector b = random_vector(rng, rows);
      const double oracle = l1rom::testing::l1_bruteforce(a, b);
      CHECK(l1_lp(a, b).objective == doctest::Approx(oracle).epsilon(1e-10));
    }
  }

  TEST_CASE("subgradient certificate from the multipliers") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
      const Index rows = 5 + static_cast<Index>(rng() % 46);
      const Index cols = 1 + static_cast<Index>(rng() % 5);
      const DenseMatrix a = random_matrix(rng, rows, cols);
      const DenseVector b = random_vector(rng, rows);
      const auto rep = l1_lp(a, b);
      REQUIRE(rep.multipliers.has_value());
      const DenseVector& g = *rep.multipliers;
      const DenseVector r = a * rep.solution + b;
      for (Index i = 0; i < rows; ++i) {
        CHECK(std::abs(g(i)) <= 1.0 + 1e-9);
        if (std::abs(r(i)) > 1e-9) CHECK(g(i) == doctest::Approx(r(i) > 0 ? 1.0 : -1.0));
      }
      CHECK((a.transpose() * g).cwiseAbs().maxCoeff() < 1e-6);
    }
  }

  TEST_CASE("median property for every odd n up to 11") {
    std::mt19937_64 rng(3);
    for (Index n = 1; n <= 11; n += 2) {
      for (int trial = 0; trial < 25; ++trial) {
        const DenseVector b = random_vector(rng, n);
        std::vector<double> targets(static_cast<std::size_t>(n));
        for (Index i = 0; i < n; ++i) targets[static_cast<std::size_t>(i)] = -b(i);
        const double median = l1rom::testing::sorted_median(targets);
        CHECK(l1_lp(ones(n), b).solution(0) == doctest::Approx(median).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("degenerate data with many zero residuals terminates") {
    // Columns share long constant stretches, so many rows are exactly fit at once.
    DenseMatrix a = DenseMatrix::Zero(40, 3);
    DenseVector b = DenseVector::Zero(40);
    for (Index i = 0; i < 40; ++i) {
      a(i, 0) = i < 10 ? 1.0 : 0.0;
      a(i, 1) = i < 20 ? 1.0 : 0.0;
      a(i, 2) = i < 30 ? 1.0 : 0.0;
      b(i) = i < 15 ? -1.0 : 0.0;
    }
    const auto rep = l1_lp(a, b);
    CHECK(rep.converged);
    CHECK(rep.objective == doctest::Approx(l1rom::testing::l1_bruteforce(a, b)));
  }
}

TEST_SUITE("l1_irls") {
  TEST_CASE("median instance") {
    const auto rep = l1_irls(ones(3), vec({-1, -2, -10}), vec({0}));
    CHECK(std::abs(rep.solution(0) - 2.0) < 1e-6);
    CHECK(rep.converged);
  }

  TEST_CASE("zero-residual fixed point") {
    std::mt19937_64 rng(8);
    const DenseMatrix a = random_matrix(rng, 12, 3);
    const DenseVector zstar = vec({0.5, -1.0, 2.0});
    const DenseVector b = -(a * zstar);
    const auto rep = l1_irls(a, b, DenseVector::Zero(3));
    CHECK(rep.converged);
    CHECK((rep.solution - zstar).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(rep.objective < 1e-10);
  }

  TEST_CASE("seeded 50x5 instance agrees with the LP backend") {
    std::mt19937_64 rng(2024);
    const DenseMatrix a = random_matrix(rng, 50, 5);
    const DenseVector b = random_vector(rng, 50);
    const double lp = l1_lp(a, b).objective;
    const double irls = l1_irls(a, b, DenseVector::Zero(5)).objective;
    CHECK(std::abs(irls - lp) / lp < 1e-6);
  }

  TEST_CASE("iterations never increase the L1 objective on linear residuals") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const Index rows = 5 + static_cast<Index>(rng() % 46);
      const Index cols = 1 + static_cast<Index>(rng() % 5);
      const DenseMatrix a = random_matrix(rng, rows, cols);
      const DenseVector b = random_vector(rng, rows);
      const auto rep = l1_irls(a, b, DenseVector::Zero(cols));
      const auto& h = rep.residual_norm_history;
      for (std::size_t k = 1; k < h.size(); ++k) CHECK(h[k] <= h[k - 1] + 1e-12 * (1.0 + h[k - 1]));
    }
  }

  TEST_CASE("backend agreement on 100 seeded instances") {
    std::mt19937_64 rng(100);
    for (int trial = 0; trial < 100; ++trial) {
      const Index rows = 5 + static_cast<Index>(rng() % 46);
      const Index cols = 1 + static_cast<Index>(rng() % 5);
      const DenseMatrix a = random_matrix(rng, rows, cols);
      const DenseVector b = random_vector(rng, rows);
      const double lp = l1_lp(a, b).objective;
      const double irls = l1_irls(a, b, DenseVector::Zero(cols)).objective;
      CHECK(std::abs(lp - irls) <= 1e-6 * (1.0 + lp));
    }
  }
}

namespace {

NonlinearResidual circle_residual() {
  NonlinearResidual res;
  res.dim_in = 2;
  res.dim_out = 2;
  res.eval = [](const DenseVector& z) { return vec({z(0) * z(0) - 1.0, z(1)}); };
  res.jacobian = [](const DenseVector& z) {
    DenseMatrix j(2, 2);
    j << 2.0 * z(0), 0.0, 0.0, 1.0;
    return SparseMatrix(j.sparseView());
  };
  return res;
}

NonlinearResidual shifted_scalar(std::vector<double> shifts) {
  NonlinearResidual res;
  res.dim_in = 1;
  res.dim_out = static_cast<Index>(shifts.size());
  res.eval = [shifts](const DenseVector& z) {
    DenseVector r(static_cast<Index>(shifts.size()));
    for (std::size_t i = 0; i < shifts.size(); ++i) r(static_cast<Index>(i)) = z(0) - shifts[i];
    return r;
  };
  res.jacobian = [n = shifts.size()](const DenseVector&) {
    return SparseMatrix(DenseMatrix::Ones(static_cast<Index>(n), 1).sparseView());
  };
  return res;
}

}  // namespace

TEST_SUITE("gauss_newton_l2") {
  TEST_CASE("linear residual converges in one step to the QR answer") {
    std::mt19937_64 rng(4);
    const DenseMatrix a = random_matrix(rng, 15, 3);
    const DenseVector b = random_vector(rng, 15);
    const auto rep = gauss_newton_l2(linear_residual(a, b), DenseMatrix::Identity(3, 3),
                                     DenseVector::Zero(3));
    CHECK(rep.converged);
    CHECK(rep.iterations == 1);
    CHECK((rep.solution - qr_least_squares(a, b).solution).norm() < 1e-10);
  }

  TEST_CASE("root of (z1^2 - 1, z2)") {
    const auto rep = gauss_newton_l2(circle_residual(), DenseMatrix::Identity(2, 2), vec({2, 1}));
    CHECK(rep.converged);
    CHECK(std::abs(std::abs(rep.solution(0)) - 1.0) < 1e-8);
    CHECK(std::abs(rep.solution(1)) < 1e-8);
    CHECK(rep.objective < 1e-14);
  }

  TEST_CASE("objective history is monotone under damping") {
    const auto rep = gauss_newton_l2(circle_residual(), DenseMatrix::Identity(2, 2), vec({0.05, 3}));
    const auto& h = rep.residual_norm_history;
    for (std::size_t k = 1; k < h.size(); ++k) CHECK(h[k] <= h[k - 1] * (1.0 + 1e-12));
  }

  TEST_CASE("dictionary composition: residual evaluated at D z") {
    // r(u) = u - y with y in span(D).
    DenseMatrix d(3, 2);
    d << 1, 0, 1, 1, 0, 1;
    const DenseVector y = d * vec({2.0, -1.0});
    const auto rep = gauss_newton_l2(linear_residual(DenseMatrix::Identity(3, 3), -y), d,
                                     DenseVector::Zero(2));
    CHECK((rep.solution - vec({2.0, -1.0})).norm() < 1e-10);
  }

  TEST_CASE("bad inputs") {
    CHECK_THROWS_AS(gauss_newton_l2(circle_residual(), DenseMatrix::Identity(2, 2), vec({1, 1}), 0.0),
                    ConfigInvalid);
    CHECK_THROWS_AS(gauss_newton_l2(circle_residual(), DenseMatrix::Identity(2, 2), vec({1})),
                    DimensionMismatch);
  }
}

TEST_SUITE("l1_gn_lp") {
  TEST_CASE("linear residual reproduces l1_lp") {
    std::mt19937_64 rng(6);
    const DenseMatrix a = random_matrix(rng, 20, 3);
    const DenseVector b = random_vector(rng, 20);
    const auto rep = l1_gn_lp(linear_residual(a, b), DenseMatrix::Identity(3, 3), DenseVector::Zero(3));
    const auto lp = l1_lp(a, b);
    CHECK(rep.converged);
    CHECK((rep.solution - lp.solution).norm() < 1e-10);
  }

  TEST_CASE("median via the nonlinear path") {
    const auto rep = l1_gn_lp(shifted_scalar({1, 2, 10}), DenseMatrix::Identity(1, 1), vec({7}));
    CHECK(rep.solution(0) == doctest::Approx(2.0));
  }
}

TEST_SUITE("l1_gn_irls") {
  TEST_CASE("linear residual agrees with the LP objective") {
    std::mt19937_64 rng(12);
    const DenseMatrix a = random_matrix(rng, 30, 3);
    const DenseVector b = random_vector(rng, 30);
    const auto rep = l1_gn_irls(linear_residual(a, b), DenseMatrix::Identity(3, 3), DenseVector::Zero(3));
    const double lp = l1_lp(a, b).objective;
    CHECK(std::abs(rep.objective - lp) / lp < 1e-6);
  }

  TEST_CASE("zero initial residual returns z0") {
    const DenseVector z0 = vec({1.0, 0.0});
    const auto rep = l1_gn_irls(circle_residual(), DenseMatrix::Identity(2, 2), z0);
    CHECK(rep.converged);
    CHECK(rep.solution == z0);
  }
}

TEST_SUITE("huber_irls") {
  TEST_CASE("threshold above every residual reduces to Gauss-Newton L2") {
    std::mt19937_64 rng(13);
    const DenseMatrix a = random_matrix(rng, 25, 3);
    const DenseVector b = random_vector(rng, 25);
    Options opts;
    opts.huber_eps2 = 2.0;  // M >= 2 max|r| at every iterate
    const auto huber = huber_irls(linear_residual(a, b), DenseMatrix::Identity(3, 3), DenseVector::Zero(3),
                                  1e-8, opts);
    const auto gn = gauss_newton_l2(linear_residual(a, b), DenseMatrix::Identity(3, 3), DenseVector::Zero(3));
    CHECK((huber.solution - gn.solution).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("small threshold approaches the L1 median") {
    const auto rep = huber_irls(shifted_scalar({1, 2, 10}), DenseMatrix::Identity(1, 1), vec({0}));
    CHECK(std::abs(rep.solution(0) - 2.0) < 1e-4);
  }

  TEST_CASE("huber function is C1 and quadratic inside the threshold") {
    const double m = 0.3;
    CHECK(huber_phi(0.2, m) == doctest::Approx(0.04));
    CHECK(huber_phi(-1.0, m) == doctest::Approx(m * (2.0 - m)));
    const double h = 1e-7;
    const double left = (huber_phi(m, m) - huber_phi(m - h, m)) / h;
    const double right = (huber_phi(m + h, m) - huber_phi(m, m)) / h;
    CHECK(left == doctest::Approx(right).epsilon(1e-5));
    CHECK(huber_threshold(vec({0.5, -3.0}), 1e-6) == doctest::Approx(3e-6));
    CHECK(huber_threshold(vec({0.5}), 1e-6) == doctest::Approx(1e-6));
  }
}

TEST_SUITE("add_regularization") {
  TEST_CASE("eta = 0 leaves the system untouched") {
    const DenseMatrix a = DenseMatrix::Identity(3, 2);
    const DenseVector b = vec({1, 2, 3});
    const auto [sa, sb] = add_regularization(a, b, 0.0, 2);
    CHECK(sa == a);
    CHECK(sb == b);
  }

  TEST_CASE("ridge on a scalar") {
    const auto [sa, sb] = add_regularization(DenseMatrix::Identity(1, 1), vec({-1}), 1.0, 2);
    CHECK(qr_least_squares(sa, sb).solution(0) == doctest::Approx(0.5));
  }

  TEST_CASE("a dominant penalty shrinks the solution") {
    std::mt19937_64 rng(21);
    const DenseMatrix a = random_matrix(rng, 20, 3);
    const DenseVector b = random_vector(rng, 20);
    const DenseVector free = qr_least_squares(a, b).solution;
    const auto [sa, sb] = add_regularization(a, b, 1e3, 2);
    CHECK(qr_least_squares(sa, sb).solution.norm() < 1e-2 * free.norm());
    const auto [la, lb] = add_regularization(a, b, 1e3, 1);
    CHECK(l1_lp(la, lb).solution.norm() < 1e-2 * l1_lp(a, b).solution.norm() + 1e-300);
  }

  TEST_CASE("nonlinear stacking matches the linear stacking") {
    std::mt19937_64 rng(22);
    const DenseMatrix a = random_matrix(rng, 10, 2);
    const DenseVector b = random_vector(rng, 10);
    const auto [res, d] = add_regularization(linear_residual(a, b), DenseMatrix::Identity(2, 2), 0.7);
    const auto [sa, sb] = add_regularization(a, b, 0.7, 2);
    const auto gn = gauss_newton_l2(res, d, DenseVector::Zero(2));
    CHECK((gn.solution - qr_least_squares(sa, sb).solution).norm() < 1e-10);
  }

  TEST_CASE("invalid arguments") {
    CHECK_THROWS_AS(add_regularization(DenseMatrix::Identity(1, 1), vec({1}), -1.0, 2), ConfigInvalid);
    CHECK_THROWS_AS(add_regularization(DenseMatrix::Identity(1, 1), vec({1}), 1.0, 3), ConfigInvalid);
  }
}

TEST_CASE("functional validation and parsing") {
  CHECK_NOTHROW(Functional::l1_lp().validate());
  Functional bad = Functional::l2();
  bad.backend = Backend::LP;
  CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
  bad = Functional::huber();
  bad.eta = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigInvalid);
  CHECK(parse_functional("l1irls").name() == "l1irls");
  CHECK_THROWS_AS(parse_functional("l3"), ConfigInvalid);
}
