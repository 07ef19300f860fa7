#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnp {

/// Grayscale image with double samples, row-major, nominal range [0,1].
/// The nominal range is only enforced where an operation says so (clamp01);
/// intermediate results may leave it.
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_dims(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  bool all_finite() const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Convolution kernel. Odd extents default to a centered anchor; even extents
/// require an explicit anchor. Taps are row-major like Image.
class Kernel {
 public:
  Kernel(int width, int height, std::vector<double> taps);
  Kernel(int width, int height, std::vector<double> taps, int anchor_x, int anchor_y);

  int width() const { return width_; }
  int height() const { return height_; }
  int anchor_x() const { return anchor_x_; }
  int anchor_y() const { return anchor_y_; }
  double tap(int x, int y) const { return taps_[static_cast<std::size_t>(y) * width_ + x]; }
  const std::vector<double>& taps() const { return taps_; }

  /// Time-reversed kernel; convolution with it is the adjoint of convolution
  /// with *this.
  Kernel reversed() const;

 private:
  int width_;
  int height_;
  int anchor_x_;
  int anchor_y_;
  std::vector<double> taps_;
};

// Elementwise arithmetic. Dimension mismatches throw.
Image operator+(const Image& a, const Image& b);
Image operator-(const Image& a, const Image& b);
Image operator*(double s, const Image& a);

double dot(const Image& a, const Image& b);
double l2_norm(const Image& a);
double linf_norm(const Image& a);
double l2_diff(const Image& a, const Image& b);

Image clamp01(const Image& a);

/// Keep samples at indices congruent 0 mod factor on both axes (the matrix S).
/// Extents must be divisible by factor.
Image downsample(const Image& img, int factor);

/// Insert factor-1 zeros between samples on both axes (the matrix S^T).
Image upsample(const Image& img, int factor);

/// Kernel wrapped onto a width x height grid with its anchor at the origin,
/// so that an FFT of the result is the kernel's transfer function.
Image embed_wrapped(const Kernel& k, int width, int height);

void require_same_dims(const Image& a, const Image& b, const std::string& context);

}  // namespace pnp
