#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace sparseseg {

/// A (u, v) frequency index of the 2D DCT. u is the frequency along block
/// rows (x), v the frequency along block columns (y).
struct FrequencyPair {
  int u = 0;
  int v = 0;

  friend bool operator==(const FrequencyPair&, const FrequencyPair&) = default;
};

/// Returns the first `k` frequency pairs of an n x n DCT in zig-zag order.
///
/// Pairs are enumerated by antidiagonal d = u + v. Odd antidiagonals run
/// with v descending from d to 0, even ones with v ascending from 0 to d, so
/// the sequence starts (0,0), (0,1), (1,0), (2,0), (1,1), (0,2), ...
/// Throws std::invalid_argument unless 1 <= k <= n*n.
std::vector<FrequencyPair> zigzag_order(int k, int n);

/// Unbounded variant: requires only k >= 1.
std::vector<FrequencyPair> zigzag_order(int k);

/// Orthonormal 2D DCT-II basis restricted to the first K zig-zag frequencies.
///
/// Column j holds P_{u_j,v_j}(x, y) vectorized as i = x * n + y, where x is
/// the row inside the block and y the column. With beta_0 = sqrt(1/n) and
/// beta_w = sqrt(2/n), the columns are orthonormal.
class BasisMatrix {
 public:
  BasisMatrix(int n, int k);

  int n() const { return n_; }
  int k() const { return k_; }
  const Eigen::MatrixXd& columns() const { return columns_; }
  const std::vector<FrequencyPair>& ordering() const { return ordering_; }

 private:
  int n_;
  int k_;
  std::vector<FrequencyPair> ordering_;
  Eigen::MatrixXd columns_;
};

/// The basis with every entry multiplied by 1/q, which moves the trade-off
/// weight of the coefficient penalty into the dictionary.
class ScaledBasis {
 public:
  ScaledBasis(const BasisMatrix& basis, double q);

  int n() const { return n_; }
  int k() const { return static_cast<int>(columns_.cols()); }
  double q() const { return q_; }
  const Eigen::MatrixXd& columns() const { return columns_; }
  const std::vector<FrequencyPair>& ordering() const { return ordering_; }

 private:
  int n_;
  double q_;
  std::vector<FrequencyPair> ordering_;
  Eigen::MatrixXd columns_;
};

BasisMatrix build_basis(int n, int k);
ScaledBasis scale_basis(const BasisMatrix& basis, double q);

/// Plain-text dump: one line per pixel index, K space-separated values with
/// 17 significant digits.
std::string format_basis(const Eigen::MatrixXd& columns);

}  // namespace sparseseg
