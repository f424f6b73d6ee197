#include "sparseseg/block_segmenter.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace sparseseg {

using Eigen::VectorXd;

void SegmenterConfig::validate() const {
  auto bad = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (n < 1) bad("block size must be >= 1");
  if (k < 1) bad("basis count must be >= 1");
  if (static_cast<long long>(k) > static_cast<long long>(n) * n) {
    bad("basis count must not exceed block_size^2");
  }
  if (!(q > 0.0) || !std::isfinite(q)) bad("q must be positive");
  if (!(eps1 >= 0.0) || !std::isfinite(eps1)) bad("eps1 must be >= 0");
  if (!(eps2 >= 0.0) || !std::isfinite(eps2)) bad("eps2 must be >= 0");
  if (!(eps3 >= 0.0) || !std::isfinite(eps3)) bad("eps3 must be >= 0");
  if (!(lambda_rule.value >= 0.0) || !std::isfinite(lambda_rule.value)) {
    bad("lambda must be >= 0");
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) bad("rho must be positive");
  if (iterations < 1) bad("iterations must be >= 1");
  if (threads < 0) bad("threads must be >= 0");
}

const char* to_string(BlockPath path) {
  switch (path) {
    case BlockPath::Flat: return "flat";
    case BlockPath::LeastSquares: return "least-squares";
    case BlockPath::Sparse: return "sparse";
  }
  return "?";
}

bool is_flat(const Block& block) {
  if (block.pixels.size() == 0) return true;
  return block.pixels.maxCoeff() - block.pixels.minCoeff() == 0.0;
}

LeastSquaresFit least_squares_fit(const Block& block, const BasisMatrix& basis) {
  const auto& p = basis.columns();
  if (block.pixels.size() != p.rows()) {
    throw std::invalid_argument("least_squares_fit: block does not match basis size");
  }
  LeastSquaresFit fit;
  fit.alpha = p.transpose() * block.pixels;
  fit.max_abs_error = (block.pixels - p * fit.alpha).cwiseAbs().maxCoeff();
  return fit;
}

Decomposition sparse_decompose(const Block& block, const SolverState& state,
                               const SegmenterConfig& config) {
  const double lambda = config.lambda_rule.resolve(block.pixels);
  return solve_lasso(block.pixels, state, lambda, config.iterations);
}

std::vector<std::uint8_t> classify_pixels(const Block& block, const VectorXd& smooth,
                                          double eps1) {
  if (smooth.size() != block.pixels.size()) {
    throw std::invalid_argument("classify_pixels: length mismatch");
  }
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(smooth.size()));
  for (Eigen::Index i = 0; i < smooth.size(); ++i) {
    mask[static_cast<std::size_t>(i)] = std::abs(block.pixels[i] - smooth[i]) < eps1 ? 0 : 1;
  }
  return mask;
}

namespace {

std::optional<double> mean_of_background(const Block& block,
                                         const std::vector<std::uint8_t>& mask) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) {
      sum += block.pixels[static_cast<Eigen::Index>(i)];
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

// Steps one and two. Returns false when the block needs the sparse path.
bool try_fast_paths(const Block& block, const BasisMatrix& basis,
                    const SegmenterConfig& config, BlockResult& out) {
  if (is_flat(block)) {
    out.path = BlockPath::Flat;
    out.flat_value = block.pixels.size() > 0 ? block.pixels[0] : 0.0;
    out.mask.clear();
    out.background_color.reset();
    return true;
  }
  LeastSquaresFit fit = least_squares_fit(block, basis);
  if (fit.max_abs_error < config.eps3) {
    out.path = BlockPath::LeastSquares;
    out.mask.assign(static_cast<std::size_t>(block.pixels.size()), 0);
    out.background_color = block.pixels.mean();
    out.smooth = basis.columns() * fit.alpha;
    out.sparse = VectorXd::Zero(block.pixels.size());
    return true;
  }
  return false;
}

void run_sparse_path(const Block& block, const SolverState& state,
                     const SegmenterConfig& config, BlockResult& out) {
  Decomposition d = sparse_decompose(block, state, config);
  out.path = BlockPath::Sparse;
  out.mask = classify_pixels(block, d.smooth, config.eps1);
  out.background_color = mean_of_background(block, out.mask);
  out.smooth = std::move(d.smooth);
  out.sparse = d.sparse.cwiseAbs();
}

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                 : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

Block extract_block(const GrayImage& padded, int n, int block_row, int block_col) {
  Block block;
  block.block_row = block_row;
  block.block_col = block_col;
  block.pixels.resize(static_cast<Eigen::Index>(n) * n);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      block.pixels[static_cast<Eigen::Index>(x) * n + y] =
          padded.at(block_row * n + x, block_col * n + y);
    }
  }
  return block;
}

GrayImage pad_to_multiple(const GrayImage& image, int n) {
  const int padded_w = (image.width() + n - 1) / n * n;
  const int padded_h = (image.height() + n - 1) / n * n;
  if (padded_w == image.width() && padded_h == image.height()) return image;
  GrayImage padded(padded_w, padded_h);
  for (int r = 0; r < padded_h; ++r) {
    const int src_r = std::min(r, image.height() - 1);
    for (int c = 0; c < padded_w; ++c) {
      padded.at(r, c) = image.at(src_r, std::min(c, image.width() - 1));
    }
  }
  return padded;
}

}  // namespace

BlockResult segment_block(const Block& block, const SolverState& state,
                          const BasisMatrix& basis, const SegmenterConfig& config) {
  BlockResult result;
  if (!try_fast_paths(block, basis, config, result)) {
    run_sparse_path(block, state, config, result);
  }
  return result;
}

void resolve_flat_blocks(BlockGrid& grid, double eps2) {
  std::vector<std::uint8_t> resolved(grid.blocks.size(), 0);
  for (std::size_t i = 0; i < grid.blocks.size(); ++i) {
    resolved[i] = grid.blocks[i].path != BlockPath::Flat;
  }

  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      BlockResult& block = grid.at(r, c);
      if (block.path != BlockPath::Flat) continue;

      bool any_resolved = false;
      bool matched = false;
      for (int dr = -1; dr <= 1 && !matched; ++dr) {
        for (int dc = -1; dc <= 1 && !matched; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int nr = r + dr;
          const int nc = c + dc;
          if (nr < 0 || nc < 0 || nr >= grid.rows || nc >= grid.cols) continue;
          if (!resolved[static_cast<std::size_t>(nr) * grid.cols + nc]) continue;
          any_resolved = true;
          const auto& color = grid.at(nr, nc).background_color;
          matched = color && std::abs(*color - block.flat_value) < eps2;
        }
      }

      const bool background = matched || !any_resolved;
      block.mask.assign(static_cast<std::size_t>(grid.block_size) * grid.block_size,
                        background ? 0 : 1);
      block.background_color = background ? std::optional<double>(block.flat_value) : std::nullopt;
      resolved[static_cast<std::size_t>(r) * grid.cols + c] = 1;
    }
  }
}

ImageSegmentation segment(const GrayImage& image, const SegmenterConfig& config,
                          bool keep_layers) {
  config.validate();
  if (image.width() <= 0 || image.height() <= 0) {
    throw std::invalid_argument("segment_image: image has a zero dimension");
  }
  for (double v : image.data()) {
    if (!std::isfinite(v) || v < 0.0 || v > 255.0) {
      throw std::invalid_argument("segment_image: pixel values must be finite and in [0, 255]");
    }
  }

  const int n = config.n;
  const GrayImage padded = pad_to_multiple(image, n);
  const BasisMatrix basis(n, config.k);

  ImageSegmentation out;
  BlockGrid& grid = out.grid;
  grid.block_size = n;
  grid.rows = padded.height() / n;
  grid.cols = padded.width() / n;
  grid.blocks.resize(static_cast<std::size_t>(grid.rows) * grid.cols);

  // Pass 1a: flat and least-squares checks. Pass 1b: sparse decomposition
  // for the rest, with the solver built only if some block needs it.
  std::vector<std::uint8_t> needs_sparse(grid.blocks.size(), 0);
  parallel_for(grid.blocks.size(), config.threads, [&](std::size_t i) {
    const Block block = extract_block(padded, n, static_cast<int>(i) / grid.cols,
                                      static_cast<int>(i) % grid.cols);
    needs_sparse[i] = !try_fast_paths(block, basis, config, grid.blocks[i]);
  });

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < needs_sparse.size(); ++i) {
    if (needs_sparse[i]) pending.push_back(i);
  }
  if (!pending.empty()) {
    const SolverState state = precompute_solver(scale_basis(basis, config.q), config.rho);
    parallel_for(pending.size(), config.threads, [&](std::size_t j) {
      const std::size_t i = pending[j];
      const Block block = extract_block(padded, n, static_cast<int>(i) / grid.cols,
                                        static_cast<int>(i) % grid.cols);
      run_sparse_path(block, state, config, grid.blocks[i]);
    });
  }

  resolve_flat_blocks(grid, config.eps2);

  out.mask = Mask(image.width(), image.height());
  if (keep_layers) {
    out.smooth_layer = GrayImage(image.width(), image.height());
    out.sparse_layer = GrayImage(image.width(), image.height());
  }
  for (int br = 0; br < grid.rows; ++br) {
    for (int bc = 0; bc < grid.cols; ++bc) {
      const BlockResult& b = grid.at(br, bc);
      switch (b.path) {
        case BlockPath::Flat: ++out.counts.flat; break;
        case BlockPath::LeastSquares: ++out.counts.least_squares; break;
        case BlockPath::Sparse: ++out.counts.sparse; break;
      }
      const int x_end = std::min(n, image.height() - br * n);
      const int y_end = std::min(n, image.width() - bc * n);
      for (int x = 0; x < x_end; ++x) {
        for (int y = 0; y < y_end; ++y) {
          const std::size_t i = static_cast<std::size_t>(x) * n + y;
          const int row = br * n + x;
          const int col = bc * n + y;
          out.mask.set(row, col, b.mask[i] != 0);
          if (keep_layers) {
            const bool flat = b.path == BlockPath::Flat;
            out.smooth_layer.at(row, col) =
                flat ? b.flat_value : b.smooth[static_cast<Eigen::Index>(i)];
            out.sparse_layer.at(row, col) =
                flat ? 0.0 : b.sparse[static_cast<Eigen::Index>(i)];
          }
        }
      }
    }
  }

  if (!keep_layers) {
    for (auto& b : grid.blocks) {
      b.smooth.resize(0);
      b.sparse.resize(0);
    }
  }
  return out;
}

Mask segment_image(const GrayImage& image, const SegmenterConfig& config) {
  return segment(image, config).mask;
}

}  // namespace sparseseg
