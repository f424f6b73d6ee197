#pragma once

#include "sparseseg/dct_basis.hpp"
#include "sparseseg/image_io.hpp"
#include "sparseseg/lasso_admm.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace sparseseg {

/// Segmentation parameters. Defaults are the published ones (N = 64,
/// K = 10, q = 1/100, eps2 = 10, eps3 = 3, rho = 1, 100 iterations); eps1
/// and the lambda rule are this library's choices.
struct SegmenterConfig {
  int n = 64;
  int k = 10;
  double q = 0.01;
  double eps1 = 10.0;  // per-pixel background threshold
  double eps2 = 10.0;  // flat-block neighbour colour tolerance
  double eps3 = 3.0;   // least-squares max-error threshold
  LambdaRule lambda_rule = LambdaRule::relative(0.02);
  double rho = 1.0;
  int iterations = 100;
  /// Worker threads for the first pass; 0 picks the hardware concurrency.
  int threads = 0;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

/// One N x N block, vectorized i = x * N + y (x = row, y = column).
struct Block {
  Eigen::VectorXd pixels;
  int block_row = 0;
  int block_col = 0;
};

enum class BlockPath { Flat, LeastSquares, Sparse };

const char* to_string(BlockPath path);

struct BlockResult {
  /// N*N bits in block vectorization order, true = foreground. Empty for a
  /// flat block until resolve_flat_blocks runs.
  std::vector<std::uint8_t> mask;
  BlockPath path = BlockPath::Flat;
  std::optional<double> background_color;
  /// Constant value of a flat block.
  double flat_value = 0.0;
  /// Per-pixel smooth model and |sparse layer|, block vectorization order.
  Eigen::VectorXd smooth;
  Eigen::VectorXd sparse;
};

struct LeastSquaresFit {
  Eigen::VectorXd alpha;
  double max_abs_error = 0.0;
};

/// Row-major grid of per-block results.
struct BlockGrid {
  int block_size = 0;
  int rows = 0;
  int cols = 0;
  std::vector<BlockResult> blocks;

  BlockResult& at(int r, int c) { return blocks[static_cast<std::size_t>(r) * cols + c]; }
  const BlockResult& at(int r, int c) const {
    return blocks[static_cast<std::size_t>(r) * cols + c];
  }
};

struct PathCounts {
  int flat = 0;
  int least_squares = 0;
  int sparse = 0;
};

/// Everything a whole-image run produces. The layers are only filled when
/// requested and have the original image size.
struct ImageSegmentation {
  Mask mask;
  BlockGrid grid;
  PathCounts counts;
  GrayImage smooth_layer;
  GrayImage sparse_layer;
};

bool is_flat(const Block& block);

/// Orthonormal projection: alpha = P^T f and the largest absolute residual.
LeastSquaresFit least_squares_fit(const Block& block, const BasisMatrix& basis);

Decomposition sparse_decompose(const Block& block, const SolverState& state,
                               const SegmenterConfig& config);

/// Pixel i is background iff |f_i - smooth_i| < eps1.
std::vector<std::uint8_t> classify_pixels(const Block& block, const Eigen::VectorXd& smooth,
                                          double eps1);

/// Steps one to three for a single block. A flat block comes back with an
/// empty mask; `resolve_flat_blocks` decides it once its neighbours are known.
BlockResult segment_block(const Block& block, const SolverState& state,
                          const BasisMatrix& basis, const SegmenterConfig& config);

/// Raster-order pass over flat blocks. A flat block is background when an
/// already resolved 8-neighbour has a background colour within eps2 of its
/// value, or when it has no resolved neighbour at all; otherwise it is
/// foreground. Background flat blocks expose their value as background
/// colour to later blocks of the same pass.
void resolve_flat_blocks(BlockGrid& grid, double eps2);

/// Whole-image segmentation: edge-replicating padding to multiples of N, a
/// (parallel) pass over non-flat blocks, the flat-block pass, then cropping.
ImageSegmentation segment(const GrayImage& image, const SegmenterConfig& config,
                          bool keep_layers = false);

Mask segment_image(const GrayImage& image, const SegmenterConfig& config);

}  // namespace sparseseg
