#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "keratix/core/types.hpp"

namespace keratix {

// Bilinear resample to target x target (half-pixel centres, edge clamp).
// A same-size input is returned unchanged.
ImageTensor prepare_image(const ImageTensor& image, int target_size);

ImageTensor flip_horizontal(const ImageTensor& image);
ImageTensor flip_vertical(const ImageTensor& image);

struct AugmentConfig {
  double max_rotation_deg = 20.0;
  double vertical_flip_p = 0.5;
  double blur_p = 0.5;
  int blur_kernel = 5;
  double blur_sigma_min = 0.1;
  double blur_sigma_max = 2.0;
  double color_p = 1.0;
  double brightness = 0.2;
  double contrast = 0.2;
  double saturation = 0.2;
  double hue = 0.05;

  // Every probability and range zero.
  static AugmentConfig identity();
};

// Rotation about the centre, bilinear with reflection padding.
ImageTensor rotate(const ImageTensor& image, double degrees);

// Normalized size x size Gaussian kernel, row-major.
std::vector<double> gaussian_kernel(int size, double sigma);
ImageTensor gaussian_blur(const ImageTensor& image, int kernel_size, double sigma);

ImageTensor adjust_brightness(const ImageTensor& image, double factor);
ImageTensor adjust_contrast(const ImageTensor& image, double factor);
ImageTensor adjust_saturation(const ImageTensor& image, double factor);
ImageTensor adjust_hue(const ImageTensor& image, double shift);

// Random rotation, vertical flip, blur and colour jitter, in that order.
// The generator is the only source of randomness.
ImageTensor augment(const ImageTensor& image, std::mt19937_64& rng, const AugmentConfig& config);

inline constexpr std::array<double, 3> kImageNetMean{0.485, 0.456, 0.406};
inline constexpr std::array<double, 3> kImageNetStd{0.229, 0.224, 0.225};

ImageTensor normalize_zscore(const ImageTensor& image);

}  // namespace keratix
