#include "keratix/model/network.hpp"

#include <algorithm>
#include <cmath>

#include "keratix/core/error.hpp"
#include "keratix/simd/kernels.hpp"

namespace keratix::model {

namespace {

constexpr std::size_t kPatch = 27;  // 3x3 window x 3 channels

std::size_t pooled_size(std::size_t s) { return (s - 1) / 2 + 1; }

void add_block(Model& m, std::string name, std::size_t rows, std::size_t cols, bool trunk) {
  ParamBlock b{std::move(name), m.params.size(), rows, cols, trunk};
  m.params.resize(m.params.size() + b.size(), 0.0);
  m.layout.push_back(std::move(b));
}

std::string head_block(Task t, const char* suffix) {
  return "head." + std::string(task_name(t)) + "." + suffix;
}

// 3x3 zero-padded patches of one S x S x 3 image, one row of 27 per pixel.
void im2col(const double* image, std::size_t s, std::vector<double>& patches) {
  patches.assign(s * s * kPatch, 0.0);
  for (std::size_t y = 0; y < s; ++y) {
    for (std::size_t x = 0; x < s; ++x) {
      double* row = &patches[(y * s + x) * kPatch];
      for (int dy = -1; dy <= 1; ++dy) {
        const long yy = static_cast<long>(y) + dy;
        if (yy < 0 || yy >= static_cast<long>(s)) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          const long xx = static_cast<long>(x) + dx;
          if (xx < 0 || xx >= static_cast<long>(s)) continue;
          const double* px = image + (yy * static_cast<long>(s) + xx) * 3;
          double* dst = row + ((dy + 1) * 3 + (dx + 1)) * 3;
          dst[0] = px[0];
          dst[1] = px[1];
          dst[2] = px[2];
        }
      }
    }
  }
}

void col2im_add(const std::vector<double>& patch_grad, std::size_t s, double* image_grad) {
  for (std::size_t y = 0; y < s; ++y) {
    for (std::size_t x = 0; x < s; ++x) {
      const double* row = &patch_grad[(y * s + x) * kPatch];
      for (int dy = -1; dy <= 1; ++dy) {
        const long yy = static_cast<long>(y) + dy;
        if (yy < 0 || yy >= static_cast<long>(s)) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          const long xx = static_cast<long>(x) + dx;
          if (xx < 0 || xx >= static_cast<long>(s)) continue;
          double* px = image_grad + (yy * static_cast<long>(s) + xx) * 3;
          const double* src = row + ((dy + 1) * 3 + (dx + 1)) * 3;
          px[0] += src[0];
          px[1] += src[1];
          px[2] += src[2];
        }
      }
    }
  }
}

// Weight of each activation pixel in (3x3/2 average pool -> global mean).
std::vector<double> pool_coverage(std::size_t s) {
  const std::size_t p = pooled_size(s);
  std::vector<double> cov(s * s, 0.0);
  const double w = 1.0 / (9.0 * static_cast<double>(p * p));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      for (int u = -1; u <= 1; ++u) {
        const long y = 2 * static_cast<long>(i) + u;
        if (y < 0 || y >= static_cast<long>(s)) continue;
        for (int v = -1; v <= 1; ++v) {
          const long x = 2 * static_cast<long>(j) + v;
          if (x < 0 || x >= static_cast<long>(s)) continue;
          cov[y * s + x] += w;
        }
      }
    }
  }
  return cov;
}

void conv_trunk_forward(const Model& m, ForwardCache& cache) {
  const std::size_t s = m.config.image_size;
  const std::size_t h = m.config.hidden;
  const std::size_t p = pooled_size(s);
  const auto w = m.values("trunk.conv.W");
  const auto bias = m.values("trunk.conv.b");
  cache.conv_act.assign(cache.n * s * s * h, 0.0);
  std::vector<double> patches;
  std::vector<double> pooled(p * p * h);
  for (std::size_t b = 0; b < cache.n; ++b) {
    im2col(&cache.input[b * s * s * 3], s, patches);
    double* act = &cache.conv_act[b * s * s * h];
    for (std::size_t pos = 0; pos < s * s; ++pos) {
      const std::span<const double> patch(&patches[pos * kPatch], kPatch);
      for (std::size_t c = 0; c < h; ++c) {
        act[pos * h + c] = std::tanh(bias[c] + simd::dot(w.subspan(c * kPatch, kPatch), patch));
      }
    }
    // 3x3 average pool, stride 2, zero padding 1 (divisor 9).
    std::fill(pooled.begin(), pooled.end(), 0.0);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        double* cell = &pooled[(i * p + j) * h];
        for (int u = -1; u <= 1; ++u) {
          const long y = 2 * static_cast<long>(i) + u;
          if (y < 0 || y >= static_cast<long>(s)) continue;
          for (int v = -1; v <= 1; ++v) {
            const long x = 2 * static_cast<long>(j) + v;
            if (x < 0 || x >= static_cast<long>(s)) continue;
            const double* src = &act[(y * s + x) * h];
            for (std::size_t c = 0; c < h; ++c) cell[c] += src[c];
          }
        }
        for (std::size_t c = 0; c < h; ++c) cell[c] /= 9.0;
      }
    }
    double* out = &cache.trunk_out[b * h];
    for (std::size_t cell = 0; cell < p * p; ++cell)
      for (std::size_t c = 0; c < h; ++c) out[c] += pooled[cell * h + c];
    for (std::size_t c = 0; c < h; ++c) out[c] /= static_cast<double>(p * p);
  }
}

void conv_trunk_backward(const Model& m, const ForwardCache& cache, std::span<const double> trunk_grad,
                         std::span<double> param_grad, std::span<double> input_grad, bool freeze_trunk) {
  const std::size_t s = m.config.image_size;
  const std::size_t h = m.config.hidden;
  const auto& wb = m.block("trunk.conv.W");
  const auto& bb = m.block("trunk.conv.b");
  const auto w = m.values("trunk.conv.W");
  const auto coverage = pool_coverage(s);
  std::vector<double> patches;
  std::vector<double> patch_grad;
  std::vector<double> dpre(h);
  for (std::size_t b = 0; b < cache.n; ++b) {
    im2col(&cache.input[b * s * s * 3], s, patches);
    if (!input_grad.empty()) patch_grad.assign(s * s * kPatch, 0.0);
    const double* act = &cache.conv_act[b * s * s * h];
    const double* g = &trunk_grad[b * h];
    for (std::size_t pos = 0; pos < s * s; ++pos) {
      for (std::size_t c = 0; c < h; ++c) {
        const double a = act[pos * h + c];
        dpre[c] = g[c] * coverage[pos] * (1.0 - a * a);
      }
      const std::span<const double> patch(&patches[pos * kPatch], kPatch);
      for (std::size_t c = 0; c < h; ++c) {
        if (dpre[c] == 0.0) continue;
        if (!freeze_trunk) {
          simd::axpy(dpre[c], patch, param_grad.subspan(wb.offset + c * kPatch, kPatch));
          param_grad[bb.offset + c] += dpre[c];
        }
        if (!input_grad.empty()) {
          simd::axpy(dpre[c], w.subspan(c * kPatch, kPatch), std::span<double>(&patch_grad[pos * kPatch], kPatch));
        }
      }
    }
    if (!input_grad.empty()) col2im_add(patch_grad, s, &input_grad[b * s * s * 3]);
  }
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Model Model::create(const ModelConfig& config) {
  config.validate();
  Model m;
  m.config = config;
  const std::size_t h = config.hidden;
  if (config.trunk == TrunkKind::linear) {
    add_block(m, "trunk.W", h, config.input_dim, true);
    add_block(m, "trunk.b", 1, h, true);
  } else {
    add_block(m, "trunk.conv.W", h, kPatch, true);
    add_block(m, "trunk.conv.b", 1, h, true);
  }
  if (config.use_batchnorm) {
    add_block(m, "bn.gamma", 1, h, false);
    add_block(m, "bn.beta", 1, h, false);
  }
  if (config.variant == Variant::multitask_v1) {
    for (Task t : kAllTasks) {
      add_block(m, head_block(t, "W"), 1, h, false);
      add_block(m, head_block(t, "b"), 1, 1, false);
    }
  } else {
    add_block(m, "head.W", config.output_width(), h, false);
    add_block(m, "head.b", 1, config.output_width(), false);
  }
  m.running_mean.assign(h, 0.0);
  m.running_var.assign(h, 1.0);
  return m;
}

void Model::initialize(std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x1417);
  // Biases share the fan-in of the weight block that precedes them.
  std::size_t fan_in = 1;
  for (const ParamBlock& b : layout) {
    auto v = std::span<double>(params).subspan(b.offset, b.size());
    if (b.name == "bn.gamma") {
      std::fill(v.begin(), v.end(), 1.0);
      continue;
    }
    if (b.name == "bn.beta") {
      std::fill(v.begin(), v.end(), 0.0);
      continue;
    }
    const bool is_weight = b.name.ends_with(".W") || b.name == "trunk.W";
    if (is_weight) fan_in = b.cols;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& x : v) x = uniform(rng, -bound, bound);
  }
  std::fill(running_mean.begin(), running_mean.end(), 0.0);
  std::fill(running_var.begin(), running_var.end(), 1.0);
}

const ParamBlock& Model::block(std::string_view name) const {
  for (const ParamBlock& b : layout) {
    if (b.name == name) return b;
  }
  throw ArgumentError("no parameter block '" + std::string(name) + "'");
}

std::span<double> Model::values(std::string_view name) {
  const ParamBlock& b = block(name);
  return std::span<double>(params).subspan(b.offset, b.size());
}

std::span<const double> Model::values(std::string_view name) const {
  const ParamBlock& b = block(name);
  return std::span<const double>(params).subspan(b.offset, b.size());
}

std::size_t Model::input_width() const {
  return config.trunk == TrunkKind::linear ? config.input_dim : config.image_size * config.image_size * 3;
}

ForwardCache forward(const Model& model, std::span<const double> input, std::size_t n, Mode mode, Rng* dropout_rng) {
  const ModelConfig& cfg = model.config;
  const std::size_t width_in = model.input_width();
  const std::size_t h = cfg.hidden;
  const std::size_t width = cfg.output_width();
  if (n == 0) throw ArgumentError("forward on an empty batch");
  if (input.size() != n * width_in) {
    throw ArgumentError("input shape mismatch: expected " + std::to_string(n) + " x " + std::to_string(width_in) +
                        " values, got " + std::to_string(input.size()));
  }

  ForwardCache cache;
  cache.mode = mode;
  cache.n = n;
  cache.input.assign(input.begin(), input.end());
  cache.trunk_out.assign(n * h, 0.0);

  if (cfg.trunk == TrunkKind::linear) {
    const auto w = model.values("trunk.W");
    const auto bias = model.values("trunk.b");
    for (std::size_t b = 0; b < n; ++b) {
      const auto x = input.subspan(b * width_in, width_in);
      for (std::size_t j = 0; j < h; ++j) cache.trunk_out[b * h + j] = bias[j] + simd::dot(w.subspan(j * width_in, width_in), x);
    }
  } else {
    conv_trunk_forward(model, cache);
  }

  std::vector<double> normalized = cache.trunk_out;
  if (cfg.use_batchnorm) {
    const auto gamma = model.values("bn.gamma");
    const auto beta = model.values("bn.beta");
    cache.xhat.assign(n * h, 0.0);
    if (mode == Mode::train) {
      cache.batch_mean.assign(h, 0.0);
      cache.batch_var.assign(h, 0.0);
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t j = 0; j < h; ++j) cache.batch_mean[j] += cache.trunk_out[b * h + j];
      for (double& mu : cache.batch_mean) mu /= static_cast<double>(n);
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t j = 0; j < h; ++j) {
          const double d = cache.trunk_out[b * h + j] - cache.batch_mean[j];
          cache.batch_var[j] += d * d;
        }
      }
      for (double& var : cache.batch_var) var /= static_cast<double>(n);
    }
    for (std::size_t j = 0; j < h; ++j) {
      const double mean = mode == Mode::train ? cache.batch_mean[j] : model.running_mean[j];
      const double var = mode == Mode::train ? cache.batch_var[j] : model.running_var[j];
      const double inv_std = 1.0 / std::sqrt(var + kBatchNormEps);
      for (std::size_t b = 0; b < n; ++b) {
        const double xh = (cache.trunk_out[b * h + j] - mean) * inv_std;
        cache.xhat[b * h + j] = xh;
        normalized[b * h + j] = gamma[j] * xh + beta[j];
      }
    }
  }

  cache.features = std::move(normalized);
  if (mode == Mode::train && cfg.dropout_p > 0.0) {
    if (dropout_rng == nullptr) throw ArgumentError("train-mode dropout needs a generator");
    const double keep = 1.0 - cfg.dropout_p;
    cache.dropout_mask.resize(n * h);
    for (std::size_t i = 0; i < n * h; ++i) {
      cache.dropout_mask[i] = bernoulli(*dropout_rng, keep) ? 1.0 / keep : 0.0;
      cache.features[i] *= cache.dropout_mask[i];
    }
  }

  cache.logits.assign(n * width, 0.0);
  if (cfg.variant == Variant::multitask_v1) {
    for (std::size_t t = 0; t < kNumTasks; ++t) {
      const auto w = model.values(head_block(kAllTasks[t], "W"));
      const double bias = model.values(head_block(kAllTasks[t], "b"))[0];
      for (std::size_t b = 0; b < n; ++b) {
        cache.logits[b * width + t] = bias + simd::dot(w, std::span<const double>(&cache.features[b * h], h));
      }
    }
  } else {
    const auto w = model.values("head.W");
    const auto bias = model.values("head.b");
    for (std::size_t b = 0; b < n; ++b) {
      const std::span<const double> feat(&cache.features[b * h], h);
      for (std::size_t o = 0; o < width; ++o) cache.logits[b * width + o] = bias[o] + simd::dot(w.subspan(o * h, h), feat);
    }
  }

  cache.outputs.resize(n * width);
  if (cfg.softmax_output()) {
    for (std::size_t b = 0; b < n; ++b) {
      const double* z = &cache.logits[b * width];
      double* p = &cache.outputs[b * width];
      const double mx = *std::max_element(z, z + width);
      double sum = 0.0;
      for (std::size_t o = 0; o < width; ++o) {
        p[o] = std::exp(z[o] - mx);
        sum += p[o];
      }
      for (std::size_t o = 0; o < width; ++o) p[o] /= sum;
    }
  } else {
    for (std::size_t i = 0; i < n * width; ++i) cache.outputs[i] = sigmoid(cache.logits[i]);
  }
  return cache;
}

void backward(const Model& model, const ForwardCache& cache, std::span<const double> logit_grad,
              std::span<double> param_grad, std::span<double> input_grad, bool freeze_trunk) {
  const ModelConfig& cfg = model.config;
  const std::size_t n = cache.n;
  const std::size_t h = cfg.hidden;
  const std::size_t width = cfg.output_width();
  const std::size_t width_in = model.input_width();
  if (logit_grad.size() != n * width) throw ArgumentError("logit gradient shape mismatch");
  if (param_grad.size() != model.num_params()) throw ArgumentError("parameter gradient shape mismatch");
  if (!input_grad.empty() && input_grad.size() != n * width_in) throw ArgumentError("input gradient shape mismatch");

  std::vector<double> feat_grad(n * h, 0.0);
  auto head_backward = [&](const ParamBlock& wb, const ParamBlock& bb, std::size_t rows, std::size_t first_out) {
    const auto w = std::span<const double>(model.params).subspan(wb.offset, wb.size());
    for (std::size_t b = 0; b < n; ++b) {
      const std::span<const double> feat(&cache.features[b * h], h);
      const std::span<double> dfeat(&feat_grad[b * h], h);
      for (std::size_t o = 0; o < rows; ++o) {
        const double g = logit_grad[b * width + first_out + o];
        simd::axpy(g, feat, param_grad.subspan(wb.offset + o * h, h));
        param_grad[bb.offset + o] += g;
        simd::axpy(g, w.subspan(o * h, h), dfeat);
      }
    }
  };
  if (cfg.variant == Variant::multitask_v1) {
    for (std::size_t t = 0; t < kNumTasks; ++t) {
      head_backward(model.block(head_block(kAllTasks[t], "W")), model.block(head_block(kAllTasks[t], "b")), 1, t);
    }
  } else {
    head_backward(model.block("head.W"), model.block("head.b"), width, 0);
  }

  if (!cache.dropout_mask.empty()) {
    for (std::size_t i = 0; i < n * h; ++i) feat_grad[i] *= cache.dropout_mask[i];
  }

  std::vector<double> trunk_grad(n * h, 0.0);
  if (cfg.use_batchnorm) {
    const auto gamma = model.values("bn.gamma");
    const auto& gb = model.block("bn.gamma");
    const auto& bb = model.block("bn.beta");
    for (std::size_t j = 0; j < h; ++j) {
      double sum_dy = 0.0;
      double sum_dy_xhat = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        sum_dy += feat_grad[b * h + j];
        sum_dy_xhat += feat_grad[b * h + j] * cache.xhat[b * h + j];
      }
      param_grad[gb.offset + j] += sum_dy_xhat;
      param_grad[bb.offset + j] += sum_dy;
      if (cache.mode == Mode::train) {
        const double inv_std = 1.0 / std::sqrt(cache.batch_var[j] + kBatchNormEps);
        const double nn = static_cast<double>(n);
        // dxhat = dy * gamma; dx = inv_std / n * (n dxhat - sum dxhat - xhat sum(dxhat xhat))
        for (std::size_t b = 0; b < n; ++b) {
          const double dxhat = feat_grad[b * h + j] * gamma[j];
          trunk_grad[b * h + j] =
              inv_std / nn * (nn * dxhat - gamma[j] * sum_dy - cache.xhat[b * h + j] * gamma[j] * sum_dy_xhat);
        }
      } else {
        const double scale = gamma[j] / std::sqrt(model.running_var[j] + kBatchNormEps);
        for (std::size_t b = 0; b < n; ++b) trunk_grad[b * h + j] = feat_grad[b * h + j] * scale;
      }
    }
  } else {
    trunk_grad = feat_grad;
  }

  if (freeze_trunk && input_grad.empty()) return;

  if (cfg.trunk == TrunkKind::linear) {
    const auto& wb = model.block("trunk.W");
    const auto& bb = model.block("trunk.b");
    const auto w = model.values("trunk.W");
    for (std::size_t b = 0; b < n; ++b) {
      const std::span<const double> x(&cache.input[b * width_in], width_in);
      for (std::size_t j = 0; j < h; ++j) {
        const double g = trunk_grad[b * h + j];
        if (!freeze_trunk) {
          simd::axpy(g, x, param_grad.subspan(wb.offset + j * width_in, width_in));
          param_grad[bb.offset + j] += g;
        }
        if (!input_grad.empty()) simd::axpy(g, w.subspan(j * width_in, width_in), input_grad.subspan(b * width_in, width_in));
      }
    }
  } else {
    conv_trunk_backward(model, cache, trunk_grad, param_grad, input_grad, freeze_trunk);
  }
}

void update_running_stats(Model& model, const ForwardCache& cache) {
  if (!model.config.use_batchnorm || cache.mode != Mode::train) return;
  const double nn = static_cast<double>(cache.n);
  const double correction = cache.n > 1 ? nn / (nn - 1.0) : 1.0;
  for (std::size_t j = 0; j < model.config.hidden; ++j) {
    model.running_mean[j] = (1.0 - kBatchNormMomentum) * model.running_mean[j] + kBatchNormMomentum * cache.batch_mean[j];
    model.running_var[j] =
        (1.0 - kBatchNormMomentum) * model.running_var[j] + kBatchNormMomentum * cache.batch_var[j] * correction;
  }
}

}  // namespace keratix::model
