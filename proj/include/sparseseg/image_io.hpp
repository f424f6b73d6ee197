#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparseseg {

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class WriteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major luminance image with real values in [0, 255].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  GrayImage(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  double& at(int row, int col) { return data_[index(row, col)]; }
  double at(int row, int col) const { return data_[index(row, col)]; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Binary per-pixel mask, true = foreground.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, bool fill = false);

  int width() const { return width_; }
  int height() const { return height_; }

  bool at(int row, int col) const { return bits_[index(row, col)] != 0; }
  void set(int row, int col, bool fg) { bits_[index(row, col)] = fg ? 1 : 0; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::size_t count() const;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// BT.601 luma.
inline double luminance(double r, double g, double b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

/// Reads PGM (P2/P5) or 8-bit PNG. Color is converted with `luminance`.
GrayImage load_image(const std::filesystem::path& path);

/// Writes a binary PGM with foreground = 255 and background = 0.
void save_mask(const std::filesystem::path& path, const Mask& mask);

/// Reads any image `load_image` accepts; values above 127 are foreground.
Mask load_mask(const std::filesystem::path& path);

/// Writes a P5 PGM, rounding and clamping each value to [0, 255].
void save_pgm(const std::filesystem::path& path, const GrayImage& image);

/// Writes an 8-bit PNG. `channels` is 1 (gray) or 3 (RGB); `pixels` is
/// row-major and interleaved.
void save_png(const std::filesystem::path& path, int width, int height, int channels,
              const std::vector<std::uint8_t>& pixels);

}  // namespace sparseseg
