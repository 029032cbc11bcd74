#include <doctest.h>

#include <cmath>

#include "keratix/core/error.hpp"
#include "keratix/core/image.hpp"
#include "keratix/core/random.hpp"

using namespace keratix;

namespace {

ImageTensor random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  ImageTensor img(h, w);
  for (double& v : img.values()) v = uniform01(rng);
  return img;
}

}  // namespace

TEST_CASE("prepare_image keeps constant fields constant") {
  ImageTensor img(448, 448);
  for (std::size_t y = 0; y < 448; ++y)
    for (std::size_t x = 0; x < 448; ++x) {
      img.at(y, x, 0) = 0.3;
      img.at(y, x, 1) = 0.6;
      img.at(y, x, 2) = 0.9;
    }
  const auto out = prepare_image(img, 224);
  REQUIRE(out.height() == 224);
  REQUIRE(out.width() == 224);
  for (std::size_t y = 0; y < 224; y += 17)
    for (std::size_t x = 0; x < 224; x += 13) {
      CHECK(out.at(y, x, 0) == doctest::Approx(0.3).epsilon(1e-12));
      CHECK(out.at(y, x, 2) == doctest::Approx(0.9).epsilon(1e-12));
    }
}

TEST_CASE("prepare_image is the identity at the target size") {
  const auto img = random_image(24, 24, 1);
  CHECK(prepare_image(img, 24) == img);
}

TEST_CASE("prepare_image averages a 2x2 image to one pixel") {
  ImageTensor img(2, 2);
  const double a = 0.1, b = 0.2, c = 0.4, d = 0.8;
  for (std::size_t ch = 0; ch < 3; ++ch) {
    img.at(0, 0, ch) = a;
    img.at(0, 1, ch) = b;
    img.at(1, 0, ch) = c;
    img.at(1, 1, ch) = d;
  }
  const auto out = prepare_image(img, 1);
  CHECK(out.at(0, 0, 1) == doctest::Approx((a + b + c + d) / 4).epsilon(1e-12));
}

TEST_CASE("prepare_image rejects non-positive sizes") {
  CHECK_THROWS_AS(prepare_image(random_image(4, 4, 2), 0), ArgumentError);
  CHECK_THROWS_AS(prepare_image(random_image(4, 4, 2), -3), ArgumentError);
}

TEST_CASE("augment with the identity configuration is the identity") {
  const auto img = random_image(16, 16, 3);
  Rng rng = make_rng(4);
  CHECK(augment(img, rng, AugmentConfig::identity()) == img);
}

TEST_CASE("augment is deterministic for a given generator state") {
  const auto img = random_image(16, 16, 5);
  Rng a = make_rng(6);
  Rng b = make_rng(6);
  const AugmentConfig cfg;
  const auto x = augment(img, a, cfg);
  const auto y = augment(img, b, cfg);
  CHECK(x == y);
  CHECK(x.height() == img.height());
  CHECK(x.width() == img.width());
}

TEST_CASE("gaussian kernel matches the explicit formula") {
  for (double sigma : {0.1, 0.5, 1.0, 2.0}) {
    const auto k = gaussian_kernel(5, sigma);
    REQUIRE(k.size() == 25);
    double total = 0.0;
    std::vector<double> expect(25);
    for (int y = -2; y <= 2; ++y)
      for (int x = -2; x <= 2; ++x) total += expect[static_cast<std::size_t>((y + 2) * 5 + x + 2)] =
                                                  std::exp(-(x * x + y * y) / (2 * sigma * sigma));
    for (std::size_t i = 0; i < 25; ++i) CHECK(k[i] == doctest::Approx(expect[i] / total).epsilon(1e-12));
  }
}

TEST_CASE("narrow blur of an impulse keeps its mass at the centre") {
  ImageTensor img(9, 9);
  for (std::size_t ch = 0; ch < 3; ++ch) img.at(4, 4, ch) = 1.0;
  const auto out = gaussian_blur(img, 5, 0.1);
  double sum = 0.0;
  for (std::size_t y = 0; y < 9; ++y)
    for (std::size_t x = 0; x < 9; ++x) sum += out.at(y, x, 0);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(out.at(4, 4, 0) > 0.999);
}

TEST_CASE("z-score normalization uses the ImageNet statistics") {
  ImageTensor img(1, 1);
  img.at(0, 0, 0) = 0.485;
  img.at(0, 0, 1) = 0.456;
  img.at(0, 0, 2) = 0.406;
  auto out = normalize_zscore(img);
  for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(out.at(0, 0, c)) < 1e-12);
  img.at(0, 0, 0) = 0.714;
  out = normalize_zscore(img);
  CHECK(out.at(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(out.at(0, 0, 1)) < 1e-12);
}

TEST_CASE("z-score normalization is affine") {
  const auto a = random_image(4, 4, 7);
  const auto b = random_image(4, 4, 8);
  ImageTensor sum(4, 4);
  for (std::size_t i = 0; i < sum.size(); ++i) sum.values()[i] = a.values()[i] + b.values()[i];
  const auto na = normalize_zscore(a);
  const auto nb = normalize_zscore(b);
  const auto n0 = normalize_zscore(ImageTensor(4, 4));
  const auto ns = normalize_zscore(sum);
  for (std::size_t i = 0; i < sum.size(); ++i)
    CHECK(na.values()[i] + nb.values()[i] - n0.values()[i] == doctest::Approx(ns.values()[i]).epsilon(1e-12));
}

TEST_CASE("rotation by zero and flips") {
  const auto img = random_image(8, 6, 9);
  CHECK(rotate(img, 0.0) == img);
  CHECK(flip_horizontal(flip_horizontal(img)) == img);
  CHECK(flip_vertical(flip_vertical(img)) == img);
  CHECK(flip_vertical(img).at(0, 2, 1) == img.at(7, 2, 1));
}

TEST_CASE("colour jitter with neutral factors is the identity") {
  const auto img = random_image(5, 5, 10);
  const auto b = adjust_brightness(img, 1.0);
  const auto h = adjust_hue(img, 0.0);
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(b.values()[i] == doctest::Approx(img.values()[i]).epsilon(1e-12));
    CHECK(h.values()[i] == doctest::Approx(img.values()[i]).epsilon(1e-9));
  }
}
