#include "keratix/core/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "keratix/core/error.hpp"
#include "keratix/core/random.hpp"

namespace keratix {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Reflect an index into [0, n) without repeating the edge sample.
long reflect_index(long i, long n) {
  if (n == 1) return 0;
  const long period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

double reflect_coord(double x, double n) {
  if (n <= 1.0) return 0.0;
  const double period = 2.0 * (n - 1.0);
  x = std::fmod(x, period);
  if (x < 0) x += period;
  return x <= n - 1.0 ? x : period - x;
}

void bilinear_sample(const ImageTensor& img, double sy, double sx, double* out) {
  const long h = static_cast<long>(img.height());
  const long w = static_cast<long>(img.width());
  sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
  sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
  const long y0 = static_cast<long>(std::floor(sy));
  const long x0 = static_cast<long>(std::floor(sx));
  const long y1 = std::min(y0 + 1, h - 1);
  const long x1 = std::min(x0 + 1, w - 1);
  const double fy = sy - y0;
  const double fx = sx - x0;
  for (std::size_t c = 0; c < 3; ++c) {
    const double top = img.at(y0, x0, c) * (1 - fx) + img.at(y0, x1, c) * fx;
    const double bot = img.at(y1, x0, c) * (1 - fx) + img.at(y1, x1, c) * fx;
    out[c] = top * (1 - fy) + bot * fy;
  }
}

double luminance(const ImageTensor& img, std::size_t y, std::size_t x) {
  return 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
}

}  // namespace

ImageTensor prepare_image(const ImageTensor& image, int target_size) {
  if (target_size <= 0) throw ArgumentError("target size must be positive");
  if (image.height() == 0 || image.width() == 0) throw ArgumentError("empty image");
  const auto target = static_cast<std::size_t>(target_size);
  if (image.height() == target && image.width() == target) return image;
  ImageTensor out(target, target);
  const double scale_y = static_cast<double>(image.height()) / target;
  const double scale_x = static_cast<double>(image.width()) / target;
  for (std::size_t y = 0; y < target; ++y) {
    const double sy = (y + 0.5) * scale_y - 0.5;
    for (std::size_t x = 0; x < target; ++x) {
      const double sx = (x + 0.5) * scale_x - 0.5;
      bilinear_sample(image, sy, sx, &out.at(y, x, 0));
    }
  }
  return out;
}

ImageTensor flip_horizontal(const ImageTensor& image) {
  ImageTensor out(image.height(), image.width());
  const std::size_t w = image.width();
  for (std::size_t y = 0; y < image.height(); ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = image.at(y, w - 1 - x, c);
  return out;
}

ImageTensor flip_vertical(const ImageTensor& image) {
  ImageTensor out(image.height(), image.width());
  const std::size_t h = image.height();
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < image.width(); ++x)
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = image.at(h - 1 - y, x, c);
  return out;
}

AugmentConfig AugmentConfig::identity() {
  AugmentConfig cfg;
  cfg.max_rotation_deg = 0.0;
  cfg.vertical_flip_p = 0.0;
  cfg.blur_p = 0.0;
  cfg.color_p = 0.0;
  cfg.brightness = 0.0;
  cfg.contrast = 0.0;
  cfg.saturation = 0.0;
  cfg.hue = 0.0;
  return cfg;
}

ImageTensor rotate(const ImageTensor& image, double degrees) {
  if (degrees == 0.0) return image;
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double h = static_cast<double>(image.height());
  const double w = static_cast<double>(image.width());
  const double cy = (h - 1) / 2.0;
  const double cx = (w - 1) / 2.0;
  ImageTensor out(image.height(), image.width());
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      // Inverse rotation of the output coordinate.
      const double dy = y - cy;
      const double dx = x - cx;
      const double sx = cs * dx + sn * dy + cx;
      const double sy = -sn * dx + cs * dy + cy;
      bilinear_sample(image, reflect_coord(sy, h), reflect_coord(sx, w), &out.at(y, x, 0));
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  if (size <= 0 || size % 2 == 0) throw ArgumentError("blur kernel size must be odd and positive");
  if (!(sigma > 0.0)) throw ArgumentError("blur sigma must be positive");
  const int half = size / 2;
  std::vector<double> k1(size);
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - half;
    k1[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k1[i];
  }
  for (double& v : k1) v /= sum;
  std::vector<double> k2(static_cast<std::size_t>(size) * size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) k2[i * size + j] = k1[i] * k1[j];
  return k2;
}

ImageTensor gaussian_blur(const ImageTensor& image, int kernel_size, double sigma) {
  const auto kernel = gaussian_kernel(kernel_size, sigma);
  const int half = kernel_size / 2;
  const long h = static_cast<long>(image.height());
  const long w = static_cast<long>(image.width());
  ImageTensor out(image.height(), image.width());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      double acc[3] = {0, 0, 0};
      for (int i = -half; i <= half; ++i) {
        const long sy = reflect_index(y + i, h);
        for (int j = -half; j <= half; ++j) {
          const long sx = reflect_index(x + j, w);
          const double k = kernel[(i + half) * kernel_size + (j + half)];
          for (std::size_t c = 0; c < 3; ++c) acc[c] += k * image.at(sy, sx, c);
        }
      }
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = acc[c];
    }
  }
  return out;
}

ImageTensor adjust_brightness(const ImageTensor& image, double factor) {
  ImageTensor out = image;
  for (double& v : out.values()) v = clamp01(v * factor);
  return out;
}

ImageTensor adjust_contrast(const ImageTensor& image, double factor) {
  double mean = 0.0;
  for (std::size_t y = 0; y < image.height(); ++y)
    for (std::size_t x = 0; x < image.width(); ++x) mean += luminance(image, y, x);
  mean /= static_cast<double>(image.height() * image.width());
  ImageTensor out = image;
  for (double& v : out.values()) v = clamp01(mean + factor * (v - mean));
  return out;
}

ImageTensor adjust_saturation(const ImageTensor& image, double factor) {
  ImageTensor out = image;
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      const double gray = luminance(image, y, x);
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = clamp01(gray + factor * (image.at(y, x, c) - gray));
    }
  }
  return out;
}

ImageTensor adjust_hue(const ImageTensor& image, double shift) {
  ImageTensor out = image;
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      const double r = image.at(y, x, 0);
      const double g = image.at(y, x, 1);
      const double b = image.at(y, x, 2);
      const double mx = std::max({r, g, b});
      const double mn = std::min({r, g, b});
      const double delta = mx - mn;
      double hue = 0.0;
      if (delta > 0) {
        if (mx == r) {
          hue = std::fmod((g - b) / delta, 6.0);
        } else if (mx == g) {
          hue = (b - r) / delta + 2.0;
        } else {
          hue = (r - g) / delta + 4.0;
        }
        hue /= 6.0;
      }
      const double sat = mx > 0 ? delta / mx : 0.0;
      const double val = mx;
      hue = std::fmod(hue + shift, 1.0);
      if (hue < 0) hue += 1.0;
      // HSV -> RGB
      const double h6 = hue * 6.0;
      const int sector = static_cast<int>(std::floor(h6)) % 6;
      const double frac = h6 - std::floor(h6);
      const double p = val * (1 - sat);
      const double q = val * (1 - sat * frac);
      const double t = val * (1 - sat * (1 - frac));
      double rgb[3];
      switch (sector) {
        case 0: rgb[0] = val, rgb[1] = t, rgb[2] = p; break;
        case 1: rgb[0] = q, rgb[1] = val, rgb[2] = p; break;
        case 2: rgb[0] = p, rgb[1] = val, rgb[2] = t; break;
        case 3: rgb[0] = p, rgb[1] = q, rgb[2] = val; break;
        case 4: rgb[0] = t, rgb[1] = p, rgb[2] = val; break;
        default: rgb[0] = val, rgb[1] = p, rgb[2] = q; break;
      }
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = clamp01(rgb[c]);
    }
  }
  return out;
}

ImageTensor augment(const ImageTensor& image, Rng& rng, const AugmentConfig& config) {
  ImageTensor out = image;
  if (config.max_rotation_deg > 0.0) {
    out = rotate(out, uniform(rng, -config.max_rotation_deg, config.max_rotation_deg));
  }
  if (config.vertical_flip_p > 0.0 && bernoulli(rng, config.vertical_flip_p)) {
    out = flip_vertical(out);
  }
  if (config.blur_p > 0.0 && bernoulli(rng, config.blur_p)) {
    out = gaussian_blur(out, config.blur_kernel, uniform(rng, config.blur_sigma_min, config.blur_sigma_max));
  }
  if (config.color_p > 0.0 && bernoulli(rng, config.color_p)) {
    if (config.brightness > 0.0) {
      out = adjust_brightness(out, uniform(rng, 1.0 - config.brightness, 1.0 + config.brightness));
    }
    if (config.contrast > 0.0) {
      out = adjust_contrast(out, uniform(rng, 1.0 - config.contrast, 1.0 + config.contrast));
    }
    if (config.saturation > 0.0) {
      out = adjust_saturation(out, uniform(rng, 1.0 - config.saturation, 1.0 + config.saturation));
    }
    if (config.hue > 0.0) {
      out = adjust_hue(out, uniform(rng, -config.hue, config.hue));
    }
  }
  return out;
}

ImageTensor normalize_zscore(const ImageTensor& image) {
  ImageTensor out = image;
  for (std::size_t y = 0; y < image.height(); ++y)
    for (std::size_t x = 0; x < image.width(); ++x)
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = (image.at(y, x, c) - kImageNetMean[c]) / kImageNetStd[c];
  return out;
}

}  // namespace keratix
