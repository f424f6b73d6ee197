#include "sparseseg/lasso_admm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sparseseg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

StackedSystem::StackedSystem(const ScaledBasis& basis) : scaled_(basis.columns()) {}

StackedSystem::StackedSystem(MatrixXd scaled_columns) : scaled_(std::move(scaled_columns)) {
  if (scaled_.rows() == 0) {
    throw std::invalid_argument("StackedSystem: basis must have at least one row");
  }
}

VectorXd StackedSystem::apply(const VectorXd& y) const {
  const Eigen::Index n2 = pixels();
  VectorXd out = y.head(n2);
  if (bases() > 0) out.noalias() += scaled_ * y.tail(bases());
  return out;
}

VectorXd StackedSystem::apply_transpose(const VectorXd& r) const {
  VectorXd out(unknowns());
  out.head(pixels()) = r;
  if (bases() > 0) out.tail(bases()).noalias() = scaled_.transpose() * r;
  return out;
}

MatrixXd StackedSystem::dense() const {
  MatrixXd g(pixels(), unknowns());
  g.leftCols(pixels()).setIdentity();
  g.rightCols(bases()) = scaled_;
  return g;
}

SolverState::SolverState(StackedSystem system, double rho, SolvePath path)
    : system_(std::move(system)), rho_(rho), path_(path) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("precompute_solver: rho must be a positive finite number");
  }
  const MatrixXd& p = system_.scaled_basis();
  if (path_ == SolvePath::Structured) {
    // (rho I + G^T G)^{-1} = (I - G^T (rho I + G G^T)^{-1} G) / rho, and
    // G G^T = I + P' P'^T, whose shifted inverse reduces to the K x K core.
    if (system_.bases() > 0) {
      MatrixXd core = p.transpose() * p;
      core.diagonal().array() += rho_ + 1.0;
      core_.compute(core);
    }
  } else {
    const MatrixXd g = system_.dense();
    MatrixXd a = g.transpose() * g;
    a.diagonal().array() += rho_;
    full_.compute(a);
  }
}

VectorXd SolverState::solve(const VectorXd& rhs) const {
  if (rhs.size() != system_.unknowns()) {
    throw std::invalid_argument("SolverState::solve: right-hand side has wrong length");
  }
  if (path_ == SolvePath::Dense) return full_.solve(rhs);

  // One refinement step recovers the digits lost to cancellation in r - G^T w.
  VectorXd y = structured_solve(rhs);
  const VectorXd residual = rhs - system_.apply_transpose(system_.apply(y)) - rho_ * y;
  y += structured_solve(residual);
  return y;
}

VectorXd SolverState::structured_solve(const VectorXd& rhs) const {
  const MatrixXd& p = system_.scaled_basis();
  VectorXd w = system_.apply(rhs);
  if (system_.bases() > 0) {
    const VectorXd coeff = core_.solve(p.transpose() * w);
    w.noalias() -= p * coeff;
  }
  w /= (rho_ + 1.0);
  VectorXd y = rhs - system_.apply_transpose(w);
  y /= rho_;
  return y;
}

VectorXd Decomposition::stacked() const {
  VectorXd y(sparse.size() + alpha.size());
  y << sparse, alpha;
  return y;
}

SolverState precompute_solver(const ScaledBasis& basis, double rho, SolvePath path) {
  return SolverState(StackedSystem(basis), rho, path);
}

Decomposition solve_lasso(const VectorXd& f, const SolverState& state, double lambda,
                          int iterations) {
  const StackedSystem& system = state.system();
  if (f.size() != system.pixels()) {
    throw std::invalid_argument("solve_lasso: block has " + std::to_string(f.size()) +
                                " values, expected " + std::to_string(system.pixels()));
  }
  if (!f.allFinite()) throw std::invalid_argument("solve_lasso: non-finite input value");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("solve_lasso: lambda must be finite and nonnegative");
  }
  if (iterations < 1) throw std::invalid_argument("solve_lasso: iterations must be >= 1");

  const double rho = state.rho();
  const double kappa = lambda / rho;
  const VectorXd gtf = system.apply_transpose(f);
  const Eigen::Index m = system.unknowns();

  VectorXd y = VectorXd::Zero(m);
  VectorXd z = VectorXd::Zero(m);
  VectorXd u = VectorXd::Zero(m);
  for (int it = 0; it < iterations; ++it) {
    y = state.solve(gtf + rho * (z - u));
    for (Eigen::Index i = 0; i < m; ++i) z[i] = soft_threshold(y[i] + u[i], kappa);
    u += y - z;
  }

  Decomposition out;
  const Eigen::Index n2 = system.pixels();
  out.sparse = z.head(n2);
  out.alpha = z.tail(system.bases());
  out.smooth = system.bases() > 0 ? VectorXd(system.scaled_basis() * out.alpha)
                                  : VectorXd::Zero(n2);
  out.iterations_run = iterations;
  out.primal_residual = (y - z).norm();
  return out;
}

double kkt_residual(const Decomposition& decomp, const StackedSystem& system,
                    const VectorXd& f, double lambda) {
  if (f.size() != system.pixels() || decomp.sparse.size() != system.pixels() ||
      decomp.alpha.size() != system.bases()) {
    throw std::invalid_argument("kkt_residual: dimension mismatch");
  }
  const VectorXd z = decomp.stacked();
  const VectorXd grad = system.apply_transpose(f - system.apply(z));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    double violation;
    if (z[i] != 0.0) {
      violation = std::abs(grad[i] - lambda * (z[i] > 0.0 ? 1.0 : -1.0));
    } else {
      violation = std::max(0.0, std::abs(grad[i]) - lambda);
    }
    worst = std::max(worst, violation);
  }
  return worst;
}

double lasso_objective(const StackedSystem& system, const VectorXd& f, const VectorXd& y,
                       double lambda) {
  if (f.size() != system.pixels() || y.size() != system.unknowns()) {
    throw std::invalid_argument("lasso_objective: dimension mismatch");
  }
  return 0.5 * (f - system.apply(y)).squaredNorm() + lambda * y.lpNorm<1>();
}

double LambdaRule::resolve(const VectorXd& f) const {
  if (kind == Kind::Absolute) return value;
  return f.size() == 0 ? 0.0 : value * f.cwiseAbs().maxCoeff();
}

}  // namespace sparseseg
