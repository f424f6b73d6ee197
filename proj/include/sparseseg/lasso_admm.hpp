#pragma once

#include "sparseseg/dct_basis.hpp"

#include <Eigen/Dense>

#include <optional>

namespace sparseseg {

/// G = (I | P'), the dictionary that maps the stacked unknown y = [s; alpha]
/// to a vectorized block. Only P' is stored; G is applied implicitly.
class StackedSystem {
 public:
  explicit StackedSystem(const ScaledBasis& basis);
  /// `scaled_columns` is P' directly; it may have zero columns.
  explicit StackedSystem(Eigen::MatrixXd scaled_columns);

  Eigen::Index pixels() const { return scaled_.rows(); }
  Eigen::Index bases() const { return scaled_.cols(); }
  Eigen::Index unknowns() const { return scaled_.rows() + scaled_.cols(); }
  const Eigen::MatrixXd& scaled_basis() const { return scaled_; }

  /// G * y
  Eigen::VectorXd apply(const Eigen::VectorXd& y) const;
  /// G^T * r
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& r) const;
  /// Materialized G. Only meant for small systems.
  Eigen::MatrixXd dense() const;

 private:
  Eigen::MatrixXd scaled_;
};

enum class SolvePath {
  /// Matrix-inversion-lemma reduction to a K x K system.
  Structured,
  /// Cholesky factorization of the full (N^2+K) x (N^2+K) matrix.
  Dense,
};

/// Data-independent solve operator for (G^T G + rho I), shared by every
/// block that uses the same basis. Immutable after construction.
class SolverState {
 public:
  SolverState(StackedSystem system, double rho, SolvePath path = SolvePath::Structured);

  const StackedSystem& system() const { return system_; }
  double rho() const { return rho_; }
  SolvePath path() const { return path_; }

  /// Returns (G^T G + rho I)^{-1} * rhs.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  Eigen::VectorXd structured_solve(const Eigen::VectorXd& rhs) const;

  StackedSystem system_;
  double rho_;
  SolvePath path_;
  // Structured: Cholesky of (rho + 1) I_K + P'^T P'.
  Eigen::LLT<Eigen::MatrixXd> core_;
  // Dense: Cholesky of G^T G + rho I.
  Eigen::LLT<Eigen::MatrixXd> full_;
};

struct Decomposition {
  Eigen::VectorXd alpha;   // K smooth coefficients (w.r.t. P')
  Eigen::VectorXd sparse;  // N^2 sparse layer s
  Eigen::VectorXd smooth;  // P' * alpha
  int iterations_run = 0;
  double primal_residual = 0.0;  // ||y - z||_2 at exit

  /// The stacked iterate [s; alpha].
  Eigen::VectorXd stacked() const;
};

inline double soft_threshold(double x, double kappa) {
  if (x > kappa) return x - kappa;
  if (x < -kappa) return x + kappa;
  return 0.0;
}

SolverState precompute_solver(const ScaledBasis& basis, double rho,
                              SolvePath path = SolvePath::Structured);

/// Minimizes 0.5 * ||f - G y||^2 + lambda * ||y||_1 with a fixed number of
/// ADMM steps started from y = z = u = 0:
///
///   y <- (G^T G + rho I)^{-1} (G^T f + rho (z - u))
///   z <- S_{lambda/rho}(y + u)
///   u <- u + y - z
///
/// The returned decomposition is built from z, which carries exact zeros.
Decomposition solve_lasso(const Eigen::VectorXd& f, const SolverState& state,
                          double lambda, int iterations);

/// Largest violation of the LASSO optimality conditions at the stacked
/// iterate of `decomp`.
double kkt_residual(const Decomposition& decomp, const StackedSystem& system,
                    const Eigen::VectorXd& f, double lambda);

/// 0.5 * ||f - G y||^2 + lambda * ||y||_1
double lasso_objective(const StackedSystem& system, const Eigen::VectorXd& f,
                       const Eigen::VectorXd& y, double lambda);

/// How lambda is chosen for a block: either a fixed value, or `value`
/// times the largest absolute pixel of the block.
struct LambdaRule {
  enum class Kind { Relative, Absolute };
  Kind kind = Kind::Relative;
  double value = 0.02;

  static LambdaRule relative(double factor) { return {Kind::Relative, factor}; }
  static LambdaRule absolute(double lambda) { return {Kind::Absolute, lambda}; }

  double resolve(const Eigen::VectorXd& f) const;
};

}  // namespace sparseseg
