#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "oracle.hpp"
#include "pnp/fft.hpp"
#include "pnp/image.hpp"
#include "pnp/image_io.hpp"
#include "pnp/metrics.hpp"
#include "pnp/random.hpp"

using pnp::Image;
using pnp::Kernel;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("circ_conv with delta kernel is the identity") {
  const Image img = oracle::random_image(7, 5, 11);
  const Image out = pnp::circ_conv(img, Kernel(1, 1, {1.0}));
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(out[i] == doctest::Approx(img[i]).epsilon(1e-14));
}

TEST_CASE("circ_conv preserves constants under an averaging kernel") {
  const Image img(6, 6, 0.37);
  const Kernel avg(3, 3, std::vector<double>(9, 1.0 / 9.0));
  const Image out = pnp::circ_conv(img, avg);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(out[i] == doctest::Approx(0.37).epsilon(1e-13));
}

TEST_CASE("circ_conv matches the direct circular sum") {
  const Image img = oracle::random_image(4, 4, 3);
  const Kernel k = oracle::random_kernel(3, 4, false);
  const Image fft_path = pnp::circ_conv(img, k);
  const Image direct = oracle::direct_circ_conv(img, k);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(std::abs(fft_path[i] - direct[i]) <= 1e-12);
}

TEST_CASE("circ_conv FFT path equals the direct sum on all extents up to 16") {
  for (int w = 1; w <= 16; ++w) {
    for (int h = 1; h <= 16; ++h) {
      const int kw = std::min(w - (w % 2 == 0 ? 1 : 0), 3);
      const int kh = std::min(h - (h % 2 == 0 ? 1 : 0), 3);
      const Image img = oracle::random_image(w, h, 1000 + 17 * w + h);
      Kernel k(1, 1, {1.0});
      if (kw >= 1 && kh >= 1) {
        std::vector<double> taps(static_cast<std::size_t>(kw) * kh);
        for (std::size_t i = 0; i < taps.size(); ++i) taps[i] = pnp::uniform01(w * 31 + h, i) - 0.5;
        k = Kernel(kw, kh, std::move(taps));
      }
      const Image a = pnp::circ_conv(img, k);
      const Image b = oracle::direct_circ_conv(img, k);
      double worst = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
      CAPTURE(w);
      CAPTURE(h);
      CHECK(worst <= 1e-12);
    }
  }
}

TEST_CASE("circ_conv is linear") {
  const Image x = oracle::random_image(9, 6, 21);
  const Image y = oracle::random_image(9, 6, 22);
  const Kernel k = oracle::random_kernel(3, 23, false);
  const double a = 1.7, b = -0.4;
  const Image lhs = pnp::circ_conv(a * x + b * y, k);
  const Image rhs = a * pnp::circ_conv(x, k) + b * pnp::circ_conv(y, k);
  for (std::size_t i = 0; i < lhs.size(); ++i) CHECK(std::abs(lhs[i] - rhs[i]) <= 1e-10);
}

TEST_CASE("circ_conv adjoint is convolution with the reversed kernel") {
  const Image x = oracle::random_image(8, 8, 31);
  const Image y = oracle::random_image(8, 8, 32);
  const Kernel k = oracle::random_kernel(5, 33, false);
  const double lhs = pnp::dot(pnp::circ_conv(x, k), y);
  const double rhs = pnp::dot(x, pnp::circ_conv(y, k.reversed()));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("circ_conv rejects kernels larger than the image") {
  const Image img = oracle::random_image(4, 4, 41);
  const Kernel k = oracle::random_kernel(5, 42);
  CHECK_THROWS_AS(pnp::circ_conv(img, k), std::invalid_argument);
}

TEST_CASE("resampling: factor 1 is the identity") {
  const Image img = oracle::random_image(6, 4, 51);
  const Image d = pnp::downsample(img, 1);
  const Image u = pnp::upsample(img, 1);
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(d[i] == img[i]);
    CHECK(u[i] == img[i]);
  }
}

TEST_CASE("downsample(upsample(x)) recovers x exactly") {
  const Image img = oracle::random_image(5, 7, 52);
  for (int k : {2, 3}) {
    const Image round = pnp::downsample(pnp::upsample(img, k), k);
    for (std::size_t i = 0; i < img.size(); ++i) CHECK(round[i] == img[i]);
  }
}

TEST_CASE("downsample/upsample are adjoint") {
  const int k = 2;
  const Image x = oracle::random_image(8, 6, 53);
  const Image y = oracle::random_image(4, 3, 54);
  const double lhs = pnp::dot(pnp::downsample(x, k), y);
  const double rhs = pnp::dot(x, pnp::upsample(y, k));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("downsample rejects non-divisible extents") {
  CHECK_THROWS_AS(pnp::downsample(Image(5, 4, 0.0), 2), std::invalid_argument);
}

TEST_CASE("psnr basics") {
  const Image a = oracle::random_image(6, 6, 61);
  CHECK(pnp::psnr(a, a) == std::numeric_limits<double>::infinity());

  // Uniform per-pixel error 0.1 gives MSE 0.01, i.e. 20 dB.
  Image b = a;
  for (std::size_t i = 0; i < b.size(); ++i) b[i] += 0.1;
  CHECK(pnp::psnr(a, b) == doctest::Approx(20.0).epsilon(1e-12));

  const Image c = oracle::random_image(6, 6, 62);
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mse += (a[i] - c[i]) * (a[i] - c[i]);
  mse /= static_cast<double>(a.size());
  CHECK(pnp::psnr(a, c) == doctest::Approx(10.0 * std::log10(1.0 / mse)).epsilon(1e-12));

  CHECK_THROWS_AS(pnp::psnr(a, Image(5, 6, 0.0)), std::invalid_argument);
}

TEST_CASE("gaussian noise: zero std, statistics, determinism") {
  const Image img(512, 512, 0.5);
  CHECK(pnp::add_gaussian_noise(img, 0.0, 9)[100] == img[100]);

  const double target = 5.0 / 255.0;
  const Image noisy = pnp::add_gaussian_noise(img, target, 9);
  double mean = 0.0;
  for (std::size_t i = 0; i < noisy.size(); ++i) mean += noisy[i] - img[i];
  mean /= static_cast<double>(noisy.size());
  double var = 0.0;
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    const double d = noisy[i] - img[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(noisy.size() - 1);
  CHECK(std::sqrt(var) == doctest::Approx(target).epsilon(0.03));

  const Image again = pnp::add_gaussian_noise(img, target, 9);
  CHECK(again.data() == noisy.data());
  const Image other = pnp::add_gaussian_noise(img, target, 10);
  CHECK(other.data() != noisy.data());

  CHECK_THROWS_AS(pnp::add_gaussian_noise(img, -0.1, 9), std::invalid_argument);
}

TEST_CASE("PFM round-trip is lossless to float precision") {
  const Image img = oracle::random_image(13, 9, 71);
  const auto path = temp_file("pnp_io_roundtrip.pfm");
  pnp::write_image(img, path.string());
  const Image back = pnp::read_image(path.string());
  REQUIRE(back.same_dims(img));
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(std::abs(back[i] - img[i]) <= 1e-6);
  std::filesystem::remove(path);
}

TEST_CASE("PGM endpoints and quantization bound") {
  const auto path = temp_file("pnp_io_endpoints.pgm");
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n2 1\n255\n";
    const unsigned char bytes[2] = {255, 0};
    out.write(reinterpret_cast<const char*>(bytes), 2);
  }
  const Image img = pnp::read_image(path.string());
  CHECK(img[0] == 1.0);
  CHECK(img[1] == 0.0);

  const Image rnd = oracle::random_image(16, 16, 72);
  pnp::write_image(rnd, path.string());
  const Image back = pnp::read_image(path.string());
  for (std::size_t i = 0; i < rnd.size(); ++i) {
    CHECK(std::abs(back[i] - rnd[i]) <= 1.0 / (2.0 * 255.0) + 1e-12);
  }
  std::filesystem::remove(path);
}

TEST_CASE("image readers reject malformed files") {
  const auto path = temp_file("pnp_io_bad.pgm");
  {
    std::ofstream out(path, std::ios::binary);
    out << "P6\n2 2\n255\n";
  }
  CHECK_THROWS_AS(pnp::read_pgm(path.string()), std::runtime_error);
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n4 4\n255\n";
    out << "xy";  // only 2 of 16 payload bytes
  }
  CHECK_THROWS_AS(pnp::read_pgm(path.string()), std::runtime_error);
  {
    std::ofstream out(path, std::ios::binary);
    out << "Pf\n2 2\n1.0\n";  // big-endian scale unsupported
  }
  CHECK_THROWS_AS(pnp::read_pfm(path.string()), std::runtime_error);
  CHECK_THROWS_AS(pnp::read_image("/nonexistent/nowhere.pgm"), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("kernel validation") {
  CHECK_THROWS_AS(Kernel(2, 2, std::vector<double>(4, 0.25)), std::invalid_argument);
  CHECK_NOTHROW(Kernel(2, 2, std::vector<double>(4, 0.25), 0, 0));
  CHECK_THROWS_AS(Kernel(3, 3, std::vector<double>(9, std::numeric_limits<double>::quiet_NaN())),
                  std::invalid_argument);
  CHECK_THROWS_AS(Kernel(3, 3, std::vector<double>(7, 0.0)), std::invalid_argument);
}
