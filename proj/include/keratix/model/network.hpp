#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "keratix/core/random.hpp"
#include "keratix/model/config.hpp"

namespace keratix::model {

// A named slice of the flat parameter vector, row-major rows x cols.
struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool trunk = false;

  std::size_t size() const { return rows * cols; }
};

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

// Network:
//   linear trunk:    x (input_dim) -> W x + b (hidden)
//   tiny conv trunk: image -> 3x3 conv (hidden channels, zero pad) -> tanh
//                    -> 3x3 average pool, stride 2, pad 1 -> global mean
//   then batch norm (optional) -> dropout (training only) -> head(s)
//   with sigmoid outputs, or softmax for the age head.
// Multitask V1 has three parallel width-1 heads; V2 one width-3 head.
struct Model {
  ModelConfig config;
  std::vector<ParamBlock> layout;
  std::vector<double> params;
  std::vector<double> running_mean;
  std::vector<double> running_var;

  // All parameters zero, running statistics (0, 1).
  static Model create(const ModelConfig& config);

  // Weights and biases U(-1/sqrt(fan_in), 1/sqrt(fan_in)); batch-norm scale 1
  // and shift 0.
  void initialize(std::uint64_t seed);

  const ParamBlock& block(std::string_view name) const;
  std::span<double> values(std::string_view name);
  std::span<const double> values(std::string_view name) const;

  std::size_t input_width() const;
  std::size_t num_params() const { return params.size(); }
};

enum class Mode { train, inference };

// Intermediate values of one forward pass, consumed by backward.
struct ForwardCache {
  Mode mode = Mode::inference;
  std::size_t n = 0;
  std::vector<double> input;        // n x input_width
  std::vector<double> conv_act;     // n x S x S x hidden, after tanh (conv trunk)
  std::vector<double> trunk_out;    // n x hidden
  std::vector<double> batch_mean;   // hidden (train mode)
  std::vector<double> batch_var;    // hidden, biased (train mode)
  std::vector<double> xhat;         // n x hidden
  std::vector<double> dropout_mask; // n x hidden, 0 or 1/(1-p); empty when unused
  std::vector<double> features;     // n x hidden, head input
  std::vector<double> logits;       // n x width
  std::vector<double> outputs;      // n x width
};

// `input` is n rows of input_width values (feature vectors, or normalized
// HWC images for the conv trunk). In train mode, dropout draws from
// `dropout_rng` (required when dropout_p > 0) and batch statistics are used.
ForwardCache forward(const Model& model, std::span<const double> input, std::size_t n, Mode mode,
                     Rng* dropout_rng = nullptr);

// Accumulates d loss / d params into param_grad (size num_params) given
// d loss / d logits. Trunk entries are left untouched when freeze_trunk.
// When input_grad is non-empty it receives d loss / d input.
void backward(const Model& model, const ForwardCache& cache, std::span<const double> logit_grad,
              std::span<double> param_grad, std::span<double> input_grad = {}, bool freeze_trunk = false);

// Exponential moving average of the batch statistics of a train-mode pass
// (running variance uses the unbiased batch variance).
void update_running_stats(Model& model, const ForwardCache& cache);

}  // namespace keratix::model
