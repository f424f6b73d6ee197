#include "sparseseg/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

namespace sparseseg {

namespace fs = std::filesystem;

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill) {
  if (width < 0 || height < 0) throw std::invalid_argument("GrayImage: negative dimension");
}

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0) throw std::invalid_argument("GrayImage: negative dimension");
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("GrayImage: data length does not match dimensions");
  }
}

Mask::Mask(int width, int height, bool fill)
    : width_(width), height_(height),
      bits_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill ? 1 : 0) {
  if (width < 0 || height < 0) throw std::invalid_argument("Mask: negative dimension");
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

namespace {

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw NotFoundError("no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class PnmCursor {
 public:
  PnmCursor(const std::vector<std::uint8_t>& bytes, const fs::path& path)
      : bytes_(bytes), path_(path) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) fail("expected an integer");
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L) fail("integer out of range");
      ++pos_;
    }
    return value;
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(path_.string() + ": malformed PGM (" + what + ")");
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  const fs::path& path_;
  std::size_t pos_ = 2;
};

GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
  const bool binary = bytes[1] == '5';
  PnmCursor cur(bytes, path);
  const long width = cur.read_int();
  const long height = cur.read_int();
  const long maxval = cur.read_int();
  if (width <= 0 || height <= 0) cur.fail("zero dimension");
  if (maxval <= 0) cur.fail("maxval must be positive");
  if (maxval > 255) throw FormatError(path.string() + ": only 8-bit PGM is supported");

  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<double> data(count);
  const double scale = 255.0 / static_cast<double>(maxval);
  auto store = [&](std::size_t i, long raw) {
    if (raw > maxval) cur.fail("sample exceeds maxval");
    data[i] = maxval == 255 ? static_cast<double>(raw) : raw * scale;
  };

  if (binary) {
    // Exactly one whitespace byte separates the header from the raster.
    if (cur.pos() >= bytes.size() || !std::isspace(bytes[cur.pos()])) {
      cur.fail("missing raster separator");
    }
    cur.advance(1);
    if (bytes.size() - cur.pos() < count) cur.fail("truncated raster");
    for (std::size_t i = 0; i < count; ++i) store(i, bytes[cur.pos() + i]);
  } else {
    for (std::size_t i = 0; i < count; ++i) store(i, cur.read_int());
  }
  return GrayImage(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

GrayImage decode_png(const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw FormatError(path.string() + ": " + image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw FormatError(path.string() + ": only 8-bit PNG is supported");
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const bool alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  if (color) {
    image.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  } else {
    image.format = alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY;
  }
  const int channels = static_cast<int>(PNG_IMAGE_PIXEL_CHANNELS(image.format));
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw FormatError(path.string() + ": " + msg);
  }

  const int width = static_cast<int>(image.width);
  const int height = static_cast<int>(image.height);
  std::vector<double> data(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::uint8_t* px = buffer.data() + i * channels;
    data[i] = color ? luminance(px[0], px[1], px[2]) : static_cast<double>(px[0]);
  }
  return GrayImage(width, height, std::move(data));
}

void write_all(const fs::path& path, const std::string& header,
               const std::vector<std::uint8_t>& payload) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw WriteError("cannot open for writing: " + path.string());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
  out.flush();
  if (!out) throw WriteError("write failed: " + path.string());
}

std::string pgm_header(int width, int height) {
  return "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
}

}  // namespace

GrayImage load_image(const fs::path& path) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) {
    return decode_pgm(bytes, path);
  }
  static constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(std::begin(kPngSignature), std::end(kPngSignature),
                                      bytes.begin())) {
    return decode_png(path);
  }
  throw FormatError(path.string() + ": unsupported image format (expected PGM or PNG)");
}

void save_mask(const fs::path& path, const Mask& mask) {
  std::vector<std::uint8_t> payload(mask.bits().size());
  std::transform(mask.bits().begin(), mask.bits().end(), payload.begin(),
                 [](std::uint8_t b) { return b ? std::uint8_t{255} : std::uint8_t{0}; });
  write_all(path, pgm_header(mask.width(), mask.height()), payload);
}

Mask load_mask(const fs::path& path) {
  const GrayImage image = load_image(path);
  Mask mask(image.width(), image.height());
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) mask.set(r, c, image.at(r, c) > 127.0);
  }
  return mask;
}

void save_pgm(const fs::path& path, const GrayImage& image) {
  std::vector<std::uint8_t> payload(image.data().size());
  std::transform(image.data().begin(), image.data().end(), payload.begin(), [](double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
  });
  write_all(path, pgm_header(image.width(), image.height()), payload);
}

void save_png(const fs::path& path, int width, int height, int channels,
              const std::vector<std::uint8_t>& pixels) {
  if (channels != 1 && channels != 3) throw std::invalid_argument("save_png: channels must be 1 or 3");
  if (pixels.size() != static_cast<std::size_t>(width) * height * channels) {
    throw std::invalid_argument("save_png: pixel buffer does not match dimensions");
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    throw WriteError(path.string() + ": " + image.message);
  }
}

}  // namespace sparseseg
