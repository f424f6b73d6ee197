#include "sparseseg/dct_basis.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace sparseseg {

namespace {

// Pairs outside the n x n square are skipped, which only matters once the
// prefix reaches antidiagonal n.
std::vector<FrequencyPair> enumerate_zigzag(int k, int n) {
  std::vector<FrequencyPair> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int d = 0; static_cast<int>(out.size()) < k; ++d) {
    for (int step = 0; step <= d && static_cast<int>(out.size()) < k; ++step) {
      const int v = (d % 2 == 1) ? d - step : step;
      const int u = d - v;
      if (u < n && v < n) out.push_back({u, v});
    }
  }
  return out;
}

}  // namespace

std::vector<FrequencyPair> zigzag_order(int k) {
  if (k < 1) throw std::invalid_argument("zigzag_order: k must be >= 1");
  return enumerate_zigzag(k, std::numeric_limits<int>::max());
}

std::vector<FrequencyPair> zigzag_order(int k, int n) {
  if (n < 1) throw std::invalid_argument("zigzag_order: n must be >= 1");
  if (k < 1 || k > n * n) {
    throw std::invalid_argument("zigzag_order: k must lie in [1, n*n]");
  }
  return enumerate_zigzag(k, n);
}

namespace {

double beta(int w, int n) {
  return std::sqrt((w == 0 ? 1.0 : 2.0) / static_cast<double>(n));
}

}  // namespace

BasisMatrix::BasisMatrix(int n, int k) : n_(n), k_(k) {
  if (n < 1) throw std::invalid_argument("build_basis: n must be >= 1");
  if (k < 1 || k > n * n) {
    throw std::invalid_argument("build_basis: k must lie in [1, n*n]");
  }
  ordering_ = zigzag_order(k, n);
  columns_.resize(static_cast<Eigen::Index>(n) * n, k);

  std::vector<double> row_cos(static_cast<std::size_t>(n));
  std::vector<double> col_cos(static_cast<std::size_t>(n));
  const double pi = std::numbers::pi;
  for (int j = 0; j < k; ++j) {
    const auto [u, v] = ordering_[static_cast<std::size_t>(j)];
    for (int t = 0; t < n; ++t) {
      row_cos[t] = beta(u, n) * std::cos((2 * t + 1) * pi * u / (2.0 * n));
      col_cos[t] = beta(v, n) * std::cos((2 * t + 1) * pi * v / (2.0 * n));
    }
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) {
        columns_(static_cast<Eigen::Index>(x) * n + y, j) = row_cos[x] * col_cos[y];
      }
    }
  }
}

ScaledBasis::ScaledBasis(const BasisMatrix& basis, double q)
    : n_(basis.n()), q_(q), ordering_(basis.ordering()) {
  if (!(q > 0.0) || !std::isfinite(q)) {
    throw std::invalid_argument("scale_basis: q must be a positive finite number");
  }
  const double inv_q = 1.0 / q;
  columns_ = basis.columns() * inv_q;
}

BasisMatrix build_basis(int n, int k) { return BasisMatrix(n, k); }

ScaledBasis scale_basis(const BasisMatrix& basis, double q) {
  return ScaledBasis(basis, q);
}

std::string format_basis(const Eigen::MatrixXd& columns) {
  std::string out;
  char buf[32];
  for (Eigen::Index i = 0; i < columns.rows(); ++i) {
    for (Eigen::Index j = 0; j < columns.cols(); ++j) {
      if (j > 0) out.push_back(' ');
      std::snprintf(buf, sizeof(buf), "%.17g", columns(i, j));
      out += buf;
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace sparseseg
