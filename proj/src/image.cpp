#include "pnp/image.hpp"

#include <algorithm>
#include <cmath>

namespace pnp {

Image::Image(int width, int height, double fill)
    : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("Image: extents must be positive");
  }
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("Image: extents must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("Image: data length does not match width*height");
  }
}

bool Image::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Kernel::Kernel(int width, int height, std::vector<double> taps)
    : Kernel(width, height, std::move(taps), width / 2, height / 2) {
  if (width % 2 == 0 || height % 2 == 0) {
    throw std::invalid_argument("Kernel: even extents need an explicit anchor");
  }
}

Kernel::Kernel(int width, int height, std::vector<double> taps, int anchor_x, int anchor_y)
    : width_(width), height_(height), anchor_x_(anchor_x), anchor_y_(anchor_y), taps_(std::move(taps)) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("Kernel: extents must be positive");
  }
  if (taps_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("Kernel: tap count does not match width*height");
  }
  if (anchor_x < 0 || anchor_x >= width || anchor_y < 0 || anchor_y >= height) {
    throw std::invalid_argument("Kernel: anchor outside tap grid");
  }
  for (double t : taps_) {
    if (!std::isfinite(t)) throw std::invalid_argument("Kernel: non-finite tap");
  }
}

Kernel Kernel::reversed() const {
  std::vector<double> rev(taps_.size());
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      rev[static_cast<std::size_t>(height_ - 1 - y) * width_ + (width_ - 1 - x)] = tap(x, y);
    }
  }
  return Kernel(width_, height_, std::move(rev), width_ - 1 - anchor_x_, height_ - 1 - anchor_y_);
}

void require_same_dims(const Image& a, const Image& b, const std::string& context) {
  if (!a.same_dims(b)) {
    throw std::invalid_argument(context + ": dimension mismatch (" + std::to_string(a.width()) + "x" +
                                std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                                std::to_string(b.height()) + ")");
  }
}

Image operator+(const Image& a, const Image& b) {
  require_same_dims(a, b, "operator+");
  Image out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Image operator-(const Image& a, const Image& b) {
  require_same_dims(a, b, "operator-");
  Image out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Image operator*(double s, const Image& a) {
  Image out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return out;
}

double dot(const Image& a, const Image& b) {
  require_same_dims(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double l2_norm(const Image& a) { return std::sqrt(dot(a, a)); }

double linf_norm(const Image& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

double l2_diff(const Image& a, const Image& b) {
  require_same_dims(a, b, "l2_diff");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

Image clamp01(const Image& a) {
  Image out(a.width(), a.height());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::clamp(a[i], 0.0, 1.0);
  return out;
}

Image downsample(const Image& img, int factor) {
  if (factor < 1) throw std::invalid_argument("downsample: factor must be >= 1");
  if (img.width() % factor != 0 || img.height() % factor != 0) {
    throw std::invalid_argument("downsample: extents not divisible by factor");
  }
  if (factor == 1) return img;
  Image out(img.width() / factor, img.height() / factor);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      out(x, y) = img(x * factor, y * factor);
    }
  }
  return out;
}

Image upsample(const Image& img, int factor) {
  if (factor < 1) throw std::invalid_argument("upsample: factor must be >= 1");
  if (factor == 1) return img;
  Image out(img.width() * factor, img.height() * factor, 0.0);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      out(x * factor, y * factor) = img(x, y);
    }
  }
  return out;
}

Image embed_wrapped(const Kernel& k, int width, int height) {
  if (k.width() > width || k.height() > height) {
    throw std::invalid_argument("embed_wrapped: kernel larger than grid");
  }
  Image out(width, height, 0.0);
  for (int ty = 0; ty < k.height(); ++ty) {
    for (int tx = 0; tx < k.width(); ++tx) {
      const int gx = ((tx - k.anchor_x()) % width + width) % width;
      const int gy = ((ty - k.anchor_y()) % height + height) % height;
      out(gx, gy) += k.tap(tx, ty);
    }
  }
  return out;
}

}  // namespace pnp
