#include "keratix/model/trainer.hpp"

#include <fstream>
#include <limits>
#include <numeric>

#include "keratix/core/error.hpp"
#include "keratix/core/log.hpp"
#include "keratix/core/manifest.hpp"
#include "keratix/model/adam.hpp"

namespace keratix::model {

namespace {

constexpr std::size_t kPredictChunk = 256;

// Inputs and targets of a fixed case list, computed once.
struct Prepared {
  std::vector<double> inputs;  // n x width_in (images: resized, not normalized)
  std::vector<std::uint8_t> targets;
  std::size_t n = 0;
  std::size_t target_width = 0;
};

std::vector<double> resized_image(const ModelConfig& config, const Case& c) {
  const auto* img = std::get_if<ImageTensor>(&c.payload);
  if (img == nullptr) throw UnsupportedModeError("case '" + c.case_id + "': conv trunk needs an image payload");
  const ImageTensor prepared = prepare_image(*img, static_cast<int>(config.image_size));
  return {prepared.values().begin(), prepared.values().end()};
}

Prepared prepare(const ModelConfig& config, std::span<const Case> cases, bool normalize) {
  Prepared p;
  p.n = cases.size();
  for (const Case& c : cases) {
    const auto input = normalize ? case_input(config, c)
                                 : (config.trunk == TrunkKind::linear ? case_input(config, c) : resized_image(config, c));
    p.inputs.insert(p.inputs.end(), input.begin(), input.end());
    const auto t = case_targets(config, c);
    p.target_width = t.size();
    p.targets.insert(p.targets.end(), t.begin(), t.end());
  }
  return p;
}

ImageTensor as_image(std::span<const double> values, std::size_t size) {
  ImageTensor img(size, size);
  std::copy(values.begin(), values.end(), img.values().begin());
  return img;
}

double inference_loss(const Model& model, const Prepared& data, const Objective& objective) {
  const std::size_t width = model.config.output_width();
  std::vector<double> outputs;
  outputs.reserve(data.n * width);
  const std::size_t w_in = model.input_width();
  for (std::size_t start = 0; start < data.n; start += kPredictChunk) {
    const std::size_t count = std::min(kPredictChunk, data.n - start);
    const auto cache = forward(model, std::span<const double>(data.inputs).subspan(start * w_in, count * w_in), count,
                               Mode::inference);
    outputs.insert(outputs.end(), cache.outputs.begin(), cache.outputs.end());
  }
  return objective.value(outputs, data.targets);
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) throw ArgumentError("epochs must be nonnegative");
  if (batch_size == 0) throw ArgumentError("batch_size must be positive");
  if (!(learning_rate > 0)) throw ArgumentError("learning_rate must be positive");
  if (weight_decay < 0) throw ArgumentError("weight_decay must be nonnegative");
  if (freeze_epochs < 0) throw ArgumentError("freeze_epochs must be nonnegative");
  if (early_stop_patience < 0) throw ArgumentError("early_stop_patience must be nonnegative");
}

Objective make_objective(const ModelConfig& config, std::span<const Case> train_cases, const ObjectiveOptions& options) {
  if (train_cases.empty()) throw ValidationError("objective needs a nonempty train split");
  Objective obj;
  switch (config.variant) {
    case Variant::multitask_v1:
    case Variant::multitask_v2: {
      const auto cw = class_weights(train_cases);
      obj.spec.class_weights.assign(cw.begin(), cw.end());
      std::array<double, 3> hw = options.hospital_weights;
      if (hw[0] == 0.0 && hw[1] == 0.0 && hw[2] == 0.0) hw = hospital_weights(kDefaultPrices, {1, 1, 1}, {1, 1, 1});
      obj.spec.hospital_weights.assign(hw.begin(), hw.end());
      break;
    }
    case Variant::single_task: {
      std::size_t pos = 0;
      for (const Case& c : train_cases) pos += c.labels.get(config.task);
      obj.spec.class_weights = {positive_class_weight(pos, train_cases.size() - pos)};
      obj.spec.hospital_weights = {1.0};
      break;
    }
    case Variant::sex_head: {
      std::size_t female = 0;
      for (const Case& c : train_cases) female += c.sex;
      obj.spec.class_weights = {positive_class_weight(female, train_cases.size() - female)};
      obj.spec.hospital_weights = {1.0};
      break;
    }
    case Variant::age_head: {
      std::vector<std::uint8_t> bins;
      for (const Case& c : train_cases) bins.push_back(c.age_bin);
      const auto w = age_class_weights(bins);
      obj.kind = Objective::Kind::cross_entropy;
      obj.ce_weights.assign(w.begin(), w.end());
      return obj;
    }
  }
  obj.spec.mix_class = options.mix_class;
  obj.spec.mix_hospital = options.mix_hospital;
  obj.kind = options.clinical_loss ? Objective::Kind::clinical : Objective::Kind::weighted_bce;
  return obj;
}

std::vector<std::uint8_t> case_targets(const ModelConfig& config, const Case& c) {
  switch (config.variant) {
    case Variant::multitask_v1:
    case Variant::multitask_v2:
      return {c.labels.bacteria, c.labels.fungi, c.labels.amoeba};
    case Variant::single_task:
      return {c.labels.get(config.task)};
    case Variant::sex_head:
      return {c.sex};
    case Variant::age_head:
      return {c.age_bin};
  }
  return {};
}

std::vector<double> case_input(const ModelConfig& config, const Case& c) {
  if (config.trunk == TrunkKind::linear) {
    const auto* fv = std::get_if<FeatureVector>(&c.payload);
    if (fv == nullptr) throw UnsupportedModeError("case '" + c.case_id + "': linear trunk needs a feature vector");
    if (fv->size() != config.input_dim) {
      throw ArgumentError("case '" + c.case_id + "': feature dimension " + std::to_string(fv->size()) +
                          " does not match model input " + std::to_string(config.input_dim));
    }
    return *fv;
  }
  const auto* img = std::get_if<ImageTensor>(&c.payload);
  if (img == nullptr) throw UnsupportedModeError("case '" + c.case_id + "': conv trunk needs an image payload");
  const ImageTensor prepared = normalize_zscore(prepare_image(*img, static_cast<int>(config.image_size)));
  return {prepared.values().begin(), prepared.values().end()};
}

LossAndGradient gradients(const Model& model, std::span<const double> input, std::size_t n,
                          std::span<const std::uint8_t> targets, const Objective& objective, std::uint64_t dropout_seed,
                          bool freeze_trunk) {
  Rng rng = make_rng(dropout_seed, 0xd0);
  const ForwardCache cache = forward(model, input, n, Mode::train, &rng);
  LossAndGradient out;
  out.loss = objective.value(cache.outputs, targets);
  std::vector<double> dlogits(cache.outputs.size());
  objective.logit_grad(cache.outputs, targets, dlogits);
  out.grad.assign(model.num_params(), 0.0);
  backward(model, cache, dlogits, out.grad, {}, freeze_trunk);
  return out;
}

double train_mode_loss(const Model& model, std::span<const double> input, std::size_t n,
                       std::span<const std::uint8_t> targets, const Objective& objective, std::uint64_t dropout_seed) {
  Rng rng = make_rng(dropout_seed, 0xd0);
  const ForwardCache cache = forward(model, input, n, Mode::train, &rng);
  return objective.value(cache.outputs, targets);
}

TrainResult train_cases(std::span<const Case> train, std::span<const Case> validation, const ModelConfig& config,
                        const TrainConfig& tc, const ObjectiveOptions& options) {
  tc.validate();
  if (train.empty()) throw ValidationError("train split is empty");
  if (validation.empty()) throw ValidationError("validation split is empty");

  const bool images = config.trunk == TrunkKind::tiny_conv;
  TrainResult result;
  result.objective = make_objective(config, train, options);
  const Objective& objective = result.objective;

  Model model = Model::create(config);
  model.initialize(tc.seed);

  const Prepared train_data = prepare(config, train, !images);
  const Prepared val_data = prepare(config, validation, true);
  const std::size_t w_in = model.input_width();
  const std::size_t tw = train_data.target_width;

  std::vector<AdamState> adam;
  for (const ParamBlock& b : model.layout) adam.emplace_back(b.size());

  Rng shuffle_rng = make_rng(tc.seed, 0x5f);
  Rng dropout_rng = make_rng(tc.seed, 0xd0);
  Rng augment_rng = make_rng(tc.seed, 0xa6);

  result.initial_val_loss = inference_loss(model, val_data, objective);
  double best = std::numeric_limits<double>::infinity();
  Model best_model = model;
  int since_best = 0;

  std::vector<std::size_t> order(train_data.n);
  std::vector<double> batch_input;
  std::vector<std::uint8_t> batch_targets;
  std::vector<double> grad(model.num_params());
  std::vector<double> dlogits;

  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    const bool frozen = epoch <= tc.freeze_epochs;
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, shuffle_rng);

    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      const std::size_t count = std::min(tc.batch_size, order.size() - start);
      // Batch norm needs two samples; a trailing singleton batch is skipped.
      if (count < 2 && config.use_batchnorm) continue;
      batch_input.clear();
      batch_targets.clear();
      for (std::size_t k = start; k < start + count; ++k) {
        const std::size_t idx = order[k];
        const auto row = std::span<const double>(train_data.inputs).subspan(idx * w_in, w_in);
        if (images) {
          ImageTensor img = as_image(row, config.image_size);
          if (tc.augment_images) img = augment(img, augment_rng, tc.augment);
          img = normalize_zscore(img);
          batch_input.insert(batch_input.end(), img.values().begin(), img.values().end());
        } else {
          batch_input.insert(batch_input.end(), row.begin(), row.end());
        }
        batch_targets.insert(batch_targets.end(), train_data.targets.begin() + static_cast<long>(idx * tw),
                             train_data.targets.begin() + static_cast<long>((idx + 1) * tw));
      }

      const ForwardCache cache = forward(model, batch_input, count, Mode::train, &dropout_rng);
      const double loss = objective.value(cache.outputs, batch_targets);
      dlogits.resize(cache.outputs.size());
      objective.logit_grad(cache.outputs, batch_targets, dlogits);
      std::fill(grad.begin(), grad.end(), 0.0);
      backward(model, cache, dlogits, grad, {}, frozen);
      update_running_stats(model, cache);

      for (std::size_t bi = 0; bi < model.layout.size(); ++bi) {
        const ParamBlock& b = model.layout[bi];
        if (frozen && b.trunk) continue;
        adam_step(std::span<double>(model.params).subspan(b.offset, b.size()),
                  std::span<const double>(grad).subspan(b.offset, b.size()), adam[bi], tc.learning_rate,
                  tc.weight_decay);
      }
      loss_sum += loss * static_cast<double>(count);
      seen += count;
    }

    const double val_loss = inference_loss(model, val_data, objective);
    const double train_loss = seen > 0 ? loss_sum / static_cast<double>(seen) : 0.0;
    result.log.push_back({epoch, train_loss, val_loss, frozen});
    log::debug("epoch " + std::to_string(epoch) + " train " + format_real(train_loss) + " val " + format_real(val_loss));

    if (val_loss < best) {
      best = val_loss;
      best_model = model;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= tc.early_stop_patience) {
      break;
    }
  }
  result.model = tc.epochs > 0 ? std::move(best_model) : std::move(model);
  return result;
}

TrainResult train(const DatasetManifest& manifest, const FoldAssignment& assignment, int round,
                  const ModelConfig& config, const TrainConfig& train_config, const ObjectiveOptions& options) {
  std::vector<Case> train_set;
  std::vector<Case> val_set;
  for (const Case& c : manifest.cases) {
    const auto role = assignment.role_of(round, c.group_id);
    if (!role) throw ValidationError("case '" + c.case_id + "': group has no role in round " + std::to_string(round));
    if (*role == SplitRole::train) train_set.push_back(c);
    if (*role == SplitRole::validation) val_set.push_back(c);
  }
  return train_cases(train_set, val_set, config, train_config, options);
}

std::vector<double> predict_outputs(const Model& model, std::span<const Case> cases) {
  const std::size_t w_in = model.input_width();
  std::vector<double> outputs;
  outputs.reserve(cases.size() * model.config.output_width());
  std::vector<double> input;
  for (std::size_t start = 0; start < cases.size(); start += kPredictChunk) {
    const std::size_t count = std::min(kPredictChunk, cases.size() - start);
    input.clear();
    input.reserve(count * w_in);
    for (std::size_t i = start; i < start + count; ++i) {
      const auto row = case_input(model.config, cases[i]);
      input.insert(input.end(), row.begin(), row.end());
    }
    const auto cache = forward(model, input, count, Mode::inference);
    outputs.insert(outputs.end(), cache.outputs.begin(), cache.outputs.end());
  }
  return outputs;
}

std::vector<PredictionRecord> predict(const Model& model, const DatasetManifest& manifest,
                                      const FoldAssignment& assignment, int round, std::optional<SplitRole> role_filter) {
  std::vector<Case> selected;
  std::vector<SplitRole> roles;
  for (const Case& c : manifest.cases) {
    const auto role = assignment.role_of(round, c.group_id);
    if (!role) throw ValidationError("case '" + c.case_id + "': group has no role in round " + std::to_string(round));
    if (role_filter && *role != *role_filter) continue;
    selected.push_back(c);
    roles.push_back(*role);
  }
  const auto outputs = predict_outputs(model, selected);
  const std::size_t width = model.config.output_width();
  std::vector<PredictionRecord> records;
  records.reserve(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    PredictionRecord r;
    r.case_id = selected[i].case_id;
    r.fold = round;
    r.role = roles[i];
    const double* out = &outputs[i * width];
    switch (model.config.variant) {
      case Variant::multitask_v1:
      case Variant::multitask_v2:
        for (std::size_t t = 0; t < kNumTasks; ++t) r.scores[t] = out[t];
        break;
      case Variant::single_task:
        r.scores[static_cast<std::size_t>(model.config.task)] = out[0];
        break;
      case Variant::sex_head:
        r.score_sex = out[0];
        break;
      case Variant::age_head:
        r.probs_age = std::array<double, kNumAgeBins>{out[0], out[1], out[2], out[3]};
        break;
    }
    records.push_back(std::move(r));
  }
  return records;
}

void write_training_log(std::span<const EpochLog> log, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write training log " + path.string());
  out << "epoch,train_loss,val_loss,frozen\n";
  for (const auto& e : log) {
    out << e.epoch << ',' << format_real(e.train_loss) << ',' << format_real(e.val_loss) << ',' << (e.frozen ? 1 : 0)
        << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace keratix::model
