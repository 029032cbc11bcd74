#include "keratix/model/losses.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "keratix/core/error.hpp"
#include "keratix/core/log.hpp"

namespace keratix::model {

namespace {

struct ClampCounter {
  std::size_t count = 0;
  double operator()(double p) {
    if (p < kProbEps) {
      ++count;
      return kProbEps;
    }
    if (p > 1.0 - kProbEps) {
      ++count;
      return 1.0 - kProbEps;
    }
    return p;
  }
  ~ClampCounter() {
    if (count > 0) log::debug("loss: clamped " + std::to_string(count) + " probabilities to [1e-12, 1-1e-12]");
  }
};

void check_shapes(std::size_t scores, std::size_t labels, std::size_t tasks) {
  if (tasks == 0) throw ArgumentError("loss needs at least one task");
  if (scores != labels || scores % tasks != 0) throw ArgumentError("score/label shape mismatch");
}

double bce_term(double p, std::uint8_t y, double w) {
  return y ? -w * std::log(p) : -std::log(1.0 - p);
}

}  // namespace

std::array<double, 3> hospital_weights(const std::array<double, 3>& prices, const std::array<double, 3>& flasks,
                                       const std::array<double, 3>& months) {
  std::array<double, 3> cost{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(prices[i] > 0) || !(flasks[i] > 0) || !(months[i] > 0)) {
      throw ArgumentError("prices, flasks and months must be positive");
    }
    cost[i] = prices[i] * flasks[i] * months[i];
  }
  const double total = cost[0] + cost[1] + cost[2];
  for (double& c : cost) c /= total;
  return cost;
}

double positive_class_weight(std::size_t positives, std::size_t negatives) {
  if (positives == 0) throw ValidationError("class weight undefined: task has no positive cases");
  return static_cast<double>(negatives) / static_cast<double>(positives);
}

std::array<double, 3> class_weights(std::span<const Case> cases) {
  std::array<double, 3> w{};
  for (std::size_t t = 0; t < 3; ++t) {
    std::size_t pos = 0;
    for (const Case& c : cases) pos += c.labels.get(kAllTasks[t]);
    try {
      w[t] = positive_class_weight(pos, cases.size() - pos);
    } catch (const ValidationError&) {
      throw ValidationError("class weight undefined: task '" + std::string(task_name(kAllTasks[t])) +
                            "' has no positive cases");
    }
  }
  return w;
}

std::array<double, 3> class_weights(const DatasetManifest& manifest) { return class_weights(manifest.cases); }

std::array<double, 4> age_class_weights(std::span<const std::uint8_t> bins) {
  std::array<std::size_t, 4> counts{};
  for (auto b : bins) {
    if (b > 3) throw ArgumentError("age bin out of range");
    ++counts[b];
  }
  std::array<double, 4> w{};
  for (std::size_t k = 0; k < 4; ++k) {
    w[k] = counts[k] == 0 ? 1.0 : static_cast<double>(bins.size()) / (4.0 * static_cast<double>(counts[k]));
  }
  return w;
}

void LossSpec::validate() const {
  if (class_weights.empty() || class_weights.size() != hospital_weights.size()) {
    throw ArgumentError("class and hospital weights must have one entry per task");
  }
  for (double w : class_weights) {
    if (!(w > 0)) throw ArgumentError("class weights must be positive");
  }
  double sum = 0.0;
  for (double h : hospital_weights) {
    if (!(h >= 0)) throw ArgumentError("hospital weights must be nonnegative");
    sum += h;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ArgumentError("hospital weights must sum to 1");
}

double weighted_bce(std::span<const double> scores, std::span<const std::uint8_t> labels,
                    std::span<const double> pos_weights) {
  const std::size_t tasks = pos_weights.size();
  check_shapes(scores.size(), labels.size(), tasks);
  if (scores.empty()) throw ArgumentError("empty batch");
  ClampCounter clamp;
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    total += bce_term(clamp(scores[i]), labels[i], pos_weights[i % tasks]);
  }
  return total / static_cast<double>(scores.size());
}

double clinical_loss(std::span<const double> scores, std::span<const std::uint8_t> labels, const LossSpec& spec) {
  spec.validate();
  const std::size_t tasks = spec.class_weights.size();
  check_shapes(scores.size(), labels.size(), tasks);
  if (scores.empty()) throw ArgumentError("empty batch");
  const std::size_t n = scores.size() / tasks;
  ClampCounter clamp;
  double class_term = 0.0;
  double hospital_term = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const std::size_t t = i % tasks;
    const double p = clamp(scores[i]);
    class_term += bce_term(p, labels[i], spec.class_weights[t]);
    hospital_term += spec.hospital_weights[t] * bce_term(p, labels[i], 1.0);
  }
  return spec.mix_class * class_term / static_cast<double>(scores.size()) +
         spec.mix_hospital * hospital_term / static_cast<double>(n);
}

double cross_entropy(std::span<const double> probs, std::span<const std::uint8_t> labels,
                     std::span<const double> class_weights) {
  const std::size_t k = class_weights.size();
  if (k == 0 || probs.size() != labels.size() * k) throw ArgumentError("probability/label shape mismatch");
  if (labels.empty()) throw ArgumentError("empty batch");
  ClampCounter clamp;
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= k) throw ArgumentError("class label out of range");
    total += -class_weights[labels[i]] * std::log(clamp(probs[i * k + labels[i]]));
  }
  return total / static_cast<double>(labels.size());
}

void weighted_bce_logit_grad(std::span<const double> scores, std::span<const std::uint8_t> labels,
                             std::span<const double> pos_weights, std::span<double> out) {
  const std::size_t tasks = pos_weights.size();
  check_shapes(scores.size(), labels.size(), tasks);
  const double scale = 1.0 / static_cast<double>(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double p = scores[i];
    out[i] = scale * (labels[i] ? pos_weights[i % tasks] * (p - 1.0) : p);
  }
}

void clinical_logit_grad(std::span<const double> scores, std::span<const std::uint8_t> labels, const LossSpec& spec,
                         std::span<double> out) {
  const std::size_t tasks = spec.class_weights.size();
  check_shapes(scores.size(), labels.size(), tasks);
  const std::size_t n = scores.size() / tasks;
  const double class_scale = spec.mix_class / static_cast<double>(scores.size());
  const double hospital_scale = spec.mix_hospital / static_cast<double>(n);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const std::size_t t = i % tasks;
    const double p = scores[i];
    const double plain = labels[i] ? p - 1.0 : p;
    const double weighted = labels[i] ? spec.class_weights[t] * (p - 1.0) : p;
    out[i] = class_scale * weighted + hospital_scale * spec.hospital_weights[t] * plain;
  }
}

void cross_entropy_logit_grad(std::span<const double> probs, std::span<const std::uint8_t> labels,
                              std::span<const double> class_weights, std::span<double> out) {
  const std::size_t k = class_weights.size();
  const double scale = 1.0 / static_cast<double>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double w = class_weights[labels[i]] * scale;
    for (std::size_t j = 0; j < k; ++j) {
      out[i * k + j] = w * (probs[i * k + j] - (j == labels[i] ? 1.0 : 0.0));
    }
  }
}

double Objective::value(std::span<const double> outputs, std::span<const std::uint8_t> labels) const {
  switch (kind) {
    case Kind::weighted_bce:
      return weighted_bce(outputs, labels, spec.class_weights);
    case Kind::clinical:
      return clinical_loss(outputs, labels, spec);
    case Kind::cross_entropy:
      return cross_entropy(outputs, labels, ce_weights);
  }
  return 0.0;
}

void Objective::logit_grad(std::span<const double> outputs, std::span<const std::uint8_t> labels,
                           std::span<double> out) const {
  switch (kind) {
    case Kind::weighted_bce:
      weighted_bce_logit_grad(outputs, labels, spec.class_weights, out);
      break;
    case Kind::clinical:
      clinical_logit_grad(outputs, labels, spec, out);
      break;
    case Kind::cross_entropy:
      cross_entropy_logit_grad(outputs, labels, ce_weights, out);
      break;
  }
}

}  // namespace keratix::model
