#include "oracles.hpp"

#include "sparseseg/lasso_admm.hpp"

#include <doctest.h>

#include <cstring>
#include <random>

using namespace sparseseg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

oracle::Matrix to_rows(const MatrixXd& m) {
  oracle::Matrix out(static_cast<std::size_t>(m.rows()),
                     std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

std::vector<double> to_vec(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

VectorXd random_block(int n2, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.0, 255.0);
  VectorXd f(n2);
  for (auto& v : f) v = d(rng);
  return f;
}

bool bitwise_equal(const VectorXd& a, const VectorXd& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("soft_threshold") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-0.2, 0.5) == 0.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  for (double x : {-7.5, -1e-9, 0.0, 2.25, 1e6}) CHECK(soft_threshold(x, 0.0) == x);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> xs(-100.0, 100.0);
  std::uniform_real_distribution<double> ks(0.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = xs(rng);
    const double k = ks(rng);
    const double s = soft_threshold(x, k);
    CHECK(std::abs(s) == doctest::Approx(std::max(std::abs(x) - k, 0.0)));
    if (s != 0.0) CHECK((s > 0) == (x > 0));
  }
}

TEST_CASE("StackedSystem is (I | P')") {
  const ScaledBasis p = scale_basis(build_basis(4, 3), 0.5);
  const StackedSystem sys(p);
  const MatrixXd g = sys.dense();
  REQUIRE(g.rows() == 16);
  REQUIRE(g.cols() == 19);
  CHECK(g.leftCols(16) == MatrixXd::Identity(16, 16));
  CHECK(g.rightCols(3) == p.columns());

  std::mt19937_64 rng(3);
  const VectorXd y = random_block(19, rng);
  const VectorXd r = random_block(16, rng);
  CHECK((sys.apply(y) - g * y).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((sys.apply_transpose(r) - g.transpose() * r).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("solver with an empty basis divides by 1 + rho") {
  for (double rho : {1.0, 0.25, 3.0}) {
    const SolverState state(StackedSystem(MatrixXd(9, 0)), rho);
    std::mt19937_64 rng(11);
    const VectorXd w = random_block(9, rng);
    CHECK((state.solve(w) - w / (1.0 + rho)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("N=2, K=1, rho=1 solve matches an explicit 5x5 inverse") {
  const ScaledBasis p = scale_basis(build_basis(2, 1), 1.0);
  const SolverState state = precompute_solver(p, 1.0);

  const MatrixXd g = StackedSystem(p).dense();
  MatrixXd a = g.transpose() * g;
  a.diagonal().array() += 1.0;
  const oracle::Matrix inv = oracle::inverse(to_rows(a));
  REQUIRE(inv.size() == 5);

  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    const VectorXd rhs = random_block(5, rng);
    const std::vector<double> expected = oracle::multiply(inv, to_vec(rhs));
    const VectorXd got = state.solve(rhs);
    for (int i = 0; i < 5; ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TEST_CASE("structured and dense solve paths agree") {
  std::mt19937_64 rng(21);
  for (auto [n, k, q, rho] : {std::tuple{4, 3, 1.0, 1.0}, std::tuple{8, 10, 0.01, 1.0},
                              std::tuple{16, 10, 0.01, 1.0}, std::tuple{8, 5, 2.0, 0.3}}) {
    const ScaledBasis p = scale_basis(build_basis(n, k), q);
    const SolverState fast = precompute_solver(p, rho, SolvePath::Structured);
    const SolverState dense = precompute_solver(p, rho, SolvePath::Dense);
    const StackedSystem& sys = fast.system();
    for (int t = 0; t < 5; ++t) {
      const VectorXd rhs = random_block(static_cast<int>(sys.unknowns()), rng);
      const VectorXd a = fast.solve(rhs);
      const VectorXd b = dense.solve(rhs);
      CHECK((a - b).norm() / b.norm() <= 1e-8);

      // Solving against (G^T G + rho I) w gives w back.
      const VectorXd w = rhs;
      const VectorXd aw = sys.apply_transpose(sys.apply(w)) + rho * w;
      CHECK((fast.solve(aw) - w).norm() / w.norm() <= 1e-8);
      CHECK((dense.solve(aw) - w).norm() / w.norm() <= 1e-8);
    }
  }
}

TEST_CASE("rho must be positive") {
  const ScaledBasis p = scale_basis(build_basis(2, 1), 1.0);
  CHECK_THROWS_AS(precompute_solver(p, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(precompute_solver(p, -2.0), std::invalid_argument);
}

TEST_CASE("solve_lasso returns zero when lambda dominates G^T f") {
  const ScaledBasis p = scale_basis(build_basis(4, 3), 0.01);
  const SolverState state = precompute_solver(p, 1.0);
  std::mt19937_64 rng(8);
  const VectorXd f = random_block(16, rng);
  const double top = state.system().apply_transpose(f).cwiseAbs().maxCoeff();
  for (double lambda : {top, 2.0 * top}) {
    const Decomposition d = solve_lasso(f, state, lambda, 100);
    CHECK(d.alpha.isZero(0.0));
    CHECK(d.sparse.isZero(0.0));
    CHECK(kkt_residual(d, state.system(), f, lambda) == 0.0);
  }
}

TEST_CASE("solve_lasso with G = I is elementwise soft thresholding") {
  const SolverState state(StackedSystem(MatrixXd(16, 0)), 1.0);
  std::mt19937_64 rng(9);
  const VectorXd f = random_block(16, rng);
  const double lambda = 40.0;
  const Decomposition d = solve_lasso(f, state, lambda, 200);
  for (int i = 0; i < 16; ++i) CHECK(d.sparse[i] == doctest::Approx(soft_threshold(f[i], lambda)));
  CHECK(d.alpha.size() == 0);
  CHECK(d.smooth.isZero(0.0));
}

TEST_CASE("solve_lasso reaches the coordinate-descent optimum on a 4x4, K=3 instance") {
  std::mt19937_64 rng(1234);
  const ScaledBasis p = scale_basis(build_basis(4, 3), 1.0);
  const SolverState state = precompute_solver(p, 1.0);
  const VectorXd f = random_block(16, rng);
  const double lambda = 0.1 * f.cwiseAbs().maxCoeff();

  const Decomposition d = solve_lasso(f, state, lambda, 2000);
  const oracle::Matrix g = to_rows(state.system().dense());
  const std::vector<double> best = oracle::coordinate_descent_lasso(g, to_vec(f), lambda);
  const double oracle_obj = oracle::lasso_objective(g, to_vec(f), best, lambda);
  const double admm_obj = lasso_objective(state.system(), f, d.stacked(), lambda);
  CHECK(std::abs(admm_obj - oracle_obj) / std::max(1.0, oracle_obj) <= 1e-6);
  CHECK(kkt_residual(d, state.system(), f, lambda) <= 1e-3 * lambda);
  CHECK(d.iterations_run == 2000);
  CHECK(d.primal_residual < 1e-6);
}

TEST_CASE("oracle equivalence on random small instances") {
  std::mt19937_64 rng(20241);
  std::uniform_int_distribution<int> side(0, 1);
  std::uniform_int_distribution<int> bases(1, 4);
  for (int t = 0; t < 50; ++t) {
    const int n = side(rng) == 0 ? 2 : 4;
    const int k = bases(rng);
    const ScaledBasis p = scale_basis(build_basis(n, k), 1.0);
    const SolverState state = precompute_solver(p, 1.0);
    const VectorXd f = random_block(n * n, rng);
    const double lambda = 0.1 * f.cwiseAbs().maxCoeff();

    const Decomposition d = solve_lasso(f, state, lambda, 2000);
    const oracle::Matrix g = to_rows(state.system().dense());
    const double oracle_obj = oracle::lasso_objective(
        g, to_vec(f), oracle::coordinate_descent_lasso(g, to_vec(f), lambda), lambda);
    const double admm_obj = lasso_objective(state.system(), f, d.stacked(), lambda);
    INFO("instance " << t << " n=" << n << " k=" << k);
    CHECK(std::abs(admm_obj - oracle_obj) / std::max(1.0, oracle_obj) <= 1e-6);
    CHECK(kkt_residual(d, state.system(), f, lambda) <= 1e-3 * lambda);
  }
}

TEST_CASE("decomposition reconstructs the block") {
  std::mt19937_64 rng(2);
  const ScaledBasis p = scale_basis(build_basis(8, 10), 0.01);
  const SolverState state = precompute_solver(p, 1.0);
  const VectorXd f = random_block(64, rng);
  const Decomposition d = solve_lasso(f, state, 5.0, 100);
  const VectorXd fit_residual = f - state.system().apply(d.stacked());
  CHECK((d.smooth + d.sparse + fit_residual - f).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((d.smooth - p.columns() * d.alpha).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("one solver state serves many blocks bit-identically") {
  const ScaledBasis p = scale_basis(build_basis(8, 10), 0.01);
  const SolverState shared = precompute_solver(p, 1.0);
  std::mt19937_64 rng(77);
  for (int t = 0; t < 100; ++t) {
    const VectorXd f = random_block(64, rng);
    const Decomposition a = solve_lasso(f, shared, 3.0, 20);
    const Decomposition b = solve_lasso(f, precompute_solver(p, 1.0), 3.0, 20);
    CHECK(bitwise_equal(a.alpha, b.alpha));
    CHECK(bitwise_equal(a.sparse, b.sparse));
  }
}

TEST_CASE("adding a constant only moves the DC coefficient") {
  std::mt19937_64 rng(31);
  const ScaledBasis p = scale_basis(build_basis(4, 3), 1.0);
  const SolverState state = precompute_solver(p, 1.0);
  const VectorXd f = random_block(16, rng);
  const double lambda = 20.0;
  const double c = 37.0;

  const Decomposition base = solve_lasso(f, state, lambda, 5000);
  const Decomposition shifted =
      solve_lasso((f.array() + c).matrix(), state, lambda, 5000);
  CHECK((base.sparse - shifted.sparse).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((base.alpha.tail(2) - shifted.alpha.tail(2)).cwiseAbs().maxCoeff() <= 1e-6);
  // The DC column of a 4x4 orthonormal basis is 1/4, so c = (alpha shift) / 4.
  CHECK(shifted.alpha[0] - base.alpha[0] == doctest::Approx(4.0 * c).epsilon(1e-8));
}

TEST_CASE("kkt_residual evaluates the optimality violation") {
  const ScaledBasis p = scale_basis(build_basis(4, 3), 1.0);
  const StackedSystem sys(p);
  std::mt19937_64 rng(4);
  const VectorXd f = random_block(16, rng);
  const double top = sys.apply_transpose(f).cwiseAbs().maxCoeff();

  Decomposition zero;
  zero.sparse = VectorXd::Zero(16);
  zero.alpha = VectorXd::Zero(3);
  CHECK(kkt_residual(zero, sys, f, top) == 0.0);
  CHECK(kkt_residual(zero, sys, f, 0.5 * top) == doctest::Approx(0.5 * top));

  Decomposition wrong = zero;
  wrong.alpha = VectorXd::Zero(2);
  CHECK_THROWS_AS(kkt_residual(wrong, sys, f, 1.0), std::invalid_argument);
}

TEST_CASE("solve_lasso validates its inputs") {
  const SolverState state = precompute_solver(scale_basis(build_basis(4, 3), 1.0), 1.0);
  VectorXd f = VectorXd::Constant(16, 10.0);
  CHECK_THROWS_AS(solve_lasso(VectorXd::Zero(15), state, 1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(solve_lasso(f, state, -1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(solve_lasso(f, state, 1.0, 0), std::invalid_argument);
  f[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solve_lasso(f, state, 1.0, 10), std::invalid_argument);
  f[3] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(solve_lasso(f, state, 1.0, 10), std::invalid_argument);
}

TEST_CASE("lambda rule") {
  VectorXd f(3);
  f << 10.0, -200.0, 50.0;
  CHECK(LambdaRule::relative(0.1).resolve(f) == doctest::Approx(20.0));
  CHECK(LambdaRule::absolute(4.5).resolve(f) == 4.5);
  CHECK(LambdaRule::relative(0.1).resolve(VectorXd::Zero(3)) == 0.0);
}
