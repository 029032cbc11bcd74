#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "keratix/core/image.hpp"
#include "keratix/core/types.hpp"
#include "keratix/model/losses.hpp"
#include "keratix/model/network.hpp"
#include "keratix/splitter.hpp"

namespace keratix::model {

struct TrainConfig {
  int epochs = 200;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  double weight_decay = 1e-8;
  int freeze_epochs = 10;
  int early_stop_patience = 20;
  std::uint64_t seed = 0;
  bool augment_images = true;
  AugmentConfig augment;

  void validate() const;
};

struct ObjectiveOptions {
  bool clinical_loss = true;
  std::array<double, 3> hospital_weights = {0.0, 0.0, 0.0};  // all zero: derive from kDefaultPrices
  double mix_class = 0.8;
  double mix_hospital = 0.2;
};

// Loss for the model's head with class weights taken from `train_cases`:
// multitask heads use the clinical loss (or plain weighted BCE when
// disabled), single-task and sex heads weighted BCE, the age head weighted
// cross-entropy.
Objective make_objective(const ModelConfig& config, std::span<const Case> train_cases,
                         const ObjectiveOptions& options);

// Target row of a case for the model's head: width bits, or one age class.
std::vector<std::uint8_t> case_targets(const ModelConfig& config, const Case& c);

// Network input of a case: the feature vector, or the image resized to the
// model's input size and z-score normalized.
std::vector<double> case_input(const ModelConfig& config, const Case& c);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> grad;
};

// Exact gradient of the objective for one train-mode pass. The dropout mask
// is drawn from `dropout_seed`, so repeated calls see the same mask.
LossAndGradient gradients(const Model& model, std::span<const double> input, std::size_t n,
                          std::span<const std::uint8_t> targets, const Objective& objective,
                          std::uint64_t dropout_seed, bool freeze_trunk = false);

// Loss of a train-mode pass with the same dropout mask as `gradients`.
double train_mode_loss(const Model& model, std::span<const double> input, std::size_t n,
                       std::span<const std::uint8_t> targets, const Objective& objective,
                       std::uint64_t dropout_seed);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  bool frozen = false;
};

struct TrainResult {
  Model model;  // parameters of the best validation epoch
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double initial_val_loss = 0.0;
  Objective objective;
};

// Mini-batch Adam on the train cases; the trunk is frozen for the first
// freeze_epochs epochs; training stops after early_stop_patience epochs
// without a validation improvement.
TrainResult train_cases(std::span<const Case> train, std::span<const Case> validation, const ModelConfig& config,
                        const TrainConfig& train_config, const ObjectiveOptions& options);

// Trains on the train role of `round`, validating on its validation role.
TrainResult train(const DatasetManifest& manifest, const FoldAssignment& assignment, int round,
                  const ModelConfig& config, const TrainConfig& train_config, const ObjectiveOptions& options);

// Inference-mode outputs (n x width) for the cases.
std::vector<double> predict_outputs(const Model& model, std::span<const Case> cases);

// One record per case in the round (all cases when `role_filter` is empty,
// otherwise those with that role). Scores the model does not produce stay 0
// (infection scores) or empty (sex, age).
std::vector<PredictionRecord> predict(const Model& model, const DatasetManifest& manifest,
                                      const FoldAssignment& assignment, int round,
                                      std::optional<SplitRole> role_filter = std::nullopt);

// `epoch,train_loss,val_loss,frozen` rows.
void write_training_log(std::span<const EpochLog> log, const std::filesystem::path& path);

}  // namespace keratix::model
