#include "keratix/model/saliency.hpp"

#include <algorithm>
#include <cmath>

#include "keratix/core/error.hpp"
#include "keratix/core/image.hpp"

namespace keratix::model {

namespace {

// Adjoint of prepare_image: spreads a target-size gradient back onto the
// source pixels with the same bilinear weights.
ImageTensor resize_adjoint(const ImageTensor& grad, std::size_t src_h, std::size_t src_w) {
  const std::size_t target = grad.height();
  if (src_h == target && src_w == target) return grad;
  ImageTensor out(src_h, src_w);
  const long h = static_cast<long>(src_h);
  const long w = static_cast<long>(src_w);
  const double scale_y = static_cast<double>(src_h) / target;
  const double scale_x = static_cast<double>(src_w) / target;
  for (std::size_t y = 0; y < target; ++y) {
    const double sy = std::clamp((y + 0.5) * scale_y - 0.5, 0.0, static_cast<double>(h - 1));
    const long y0 = static_cast<long>(std::floor(sy));
    const long y1 = std::min(y0 + 1, h - 1);
    const double fy = sy - y0;
    for (std::size_t x = 0; x < target; ++x) {
      const double sx = std::clamp((x + 0.5) * scale_x - 0.5, 0.0, static_cast<double>(w - 1));
      const long x0 = static_cast<long>(std::floor(sx));
      const long x1 = std::min(x0 + 1, w - 1);
      const double fx = sx - x0;
      for (std::size_t c = 0; c < 3; ++c) {
        const double g = grad.at(y, x, c);
        out.at(y0, x0, c) += g * (1 - fy) * (1 - fx);
        out.at(y0, x1, c) += g * (1 - fy) * fx;
        out.at(y1, x0, c) += g * fy * (1 - fx);
        out.at(y1, x1, c) += g * fy * fx;
      }
    }
  }
  return out;
}

}  // namespace

SaliencyMap saliency_map(const Model& model, const Case& image_case, std::size_t output_index) {
  const auto* img = std::get_if<ImageTensor>(&image_case.payload);
  if (img == nullptr) throw UnsupportedModeError("saliency needs an image payload, case '" + image_case.case_id + "'");
  if (model.config.trunk != TrunkKind::tiny_conv) throw UnsupportedModeError("saliency needs an image model");
  const std::size_t width = model.config.output_width();
  if (output_index >= width) throw ArgumentError("saliency output index out of range");

  const std::size_t size = model.config.image_size;
  const ImageTensor input = normalize_zscore(prepare_image(*img, static_cast<int>(size)));
  const ForwardCache cache = forward(model, input.values(), 1, Mode::inference);

  std::vector<double> dlogits(width, 0.0);
  const double p = cache.outputs[output_index];
  if (model.config.softmax_output()) {
    for (std::size_t j = 0; j < width; ++j) dlogits[j] = p * ((j == output_index ? 1.0 : 0.0) - cache.outputs[j]);
  } else {
    dlogits[output_index] = p * (1.0 - p);
  }
  std::vector<double> param_grad(model.num_params(), 0.0);
  ImageTensor grad(size, size);
  backward(model, cache, dlogits, param_grad, grad.values());

  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x)
      for (std::size_t c = 0; c < 3; ++c) grad.at(y, x, c) /= kImageNetStd[c];
  const ImageTensor src_grad = resize_adjoint(grad, img->height(), img->width());

  SaliencyMap map;
  map.height = img->height();
  map.width = img->width();
  map.values.assign(map.height * map.width, 0.0);
  double peak = 0.0;
  for (std::size_t y = 0; y < map.height; ++y) {
    for (std::size_t x = 0; x < map.width; ++x) {
      double v = 0.0;
      for (std::size_t c = 0; c < 3; ++c) v = std::max(v, std::abs(src_grad.at(y, x, c)));
      map.values[y * map.width + x] = v;
      peak = std::max(peak, v);
    }
  }
  if (peak > 0.0) {
    for (double& v : map.values) v /= peak;
  }
  return map;
}

SaliencyMap saliency_map(const Model& model, const Case& image_case, Task task) {
  switch (model.config.variant) {
    case Variant::multitask_v1:
    case Variant::multitask_v2:
      return saliency_map(model, image_case, static_cast<std::size_t>(task));
    case Variant::single_task:
      if (task != model.config.task) throw ArgumentError("single-task model does not score " + std::string(task_name(task)));
      return saliency_map(model, image_case, std::size_t{0});
    default:
      throw ArgumentError("model has no infection score");
  }
}

}  // namespace keratix::model
