#pragma once

#include <cstddef>
#include <vector>

#include "keratix/core/types.hpp"
#include "keratix/model/network.hpp"

namespace keratix::model {

struct SaliencyMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;  // row-major, in [0, 1]

  double at(std::size_t y, std::size_t x) const { return values[y * width + x]; }
};

// Vanilla input-gradient saliency of one output score (inference mode).
// The gradient is taken with respect to the case's original image, through
// resizing and normalization; each pixel keeps the largest absolute channel
// gradient and the map is divided by its maximum (all zero when the gradient
// vanishes). Feature-vector payloads raise UnsupportedModeError.
SaliencyMap saliency_map(const Model& model, const Case& image_case, std::size_t output_index);

// Saliency of a task score; for single-task models `task` must be the
// model's task.
SaliencyMap saliency_map(const Model& model, const Case& image_case, Task task);

}  // namespace keratix::model
