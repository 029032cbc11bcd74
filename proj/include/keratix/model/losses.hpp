#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "keratix/core/types.hpp"

namespace keratix::model {

// Probabilities are clamped to [kProbEps, 1 - kProbEps] inside every log.
inline constexpr double kProbEps = 1e-12;

// Medicine prices per infection (bacteria, fungi, amoeba), in BRL.
inline constexpr std::array<double, 3> kDefaultPrices{45.2, 203.0, 95.5};

// Treatment cost price * flasks * months per infection, normalized to sum 1.
std::array<double, 3> hospital_weights(const std::array<double, 3>& prices,
                                       const std::array<double, 3>& flasks,
                                       const std::array<double, 3>& months);

// N_neg / N_pos. Throws ValidationError when there are no positives.
double positive_class_weight(std::size_t positives, std::size_t negatives);

// Per-task N_neg / N_pos over the given cases.
std::array<double, 3> class_weights(std::span<const Case> cases);
std::array<double, 3> class_weights(const DatasetManifest& manifest);

// Balanced weights N / (K * N_c); a bin with no cases gets weight 1.
std::array<double, 4> age_class_weights(std::span<const std::uint8_t> bins);

// Total loss = mix_class * BCE(C_w on positive terms) + mix_hospital * sum_t H_w[t] * BCE_t.
struct LossSpec {
  std::vector<double> class_weights;     // per task, > 0
  std::vector<double> hospital_weights;  // per task, simplex
  double mix_class = 0.8;
  double mix_hospital = 0.2;

  void validate() const;
};

// scores and labels are row-major n x T with T = pos_weights.size(). The
// result is the mean of -[w y ln p + (1 - y) ln(1 - p)] over all n*T terms.
double weighted_bce(std::span<const double> scores, std::span<const std::uint8_t> labels,
                    std::span<const double> pos_weights);

// mix_class * weighted_bce(C_w) + mix_hospital * mean_i sum_t H_w[t] * bce(i, t)
// where the hospital term uses the unweighted per-sample BCE.
double clinical_loss(std::span<const double> scores, std::span<const std::uint8_t> labels, const LossSpec& spec);

// probs is row-major n x K. Mean of -w[label] * ln p[label].
double cross_entropy(std::span<const double> probs, std::span<const std::uint8_t> labels,
                     std::span<const double> class_weights);

// Gradients of the losses above with respect to the pre-activation logits
// (sigmoid for the BCE losses, softmax for cross-entropy). `out` has the
// shape of scores / probs.
void weighted_bce_logit_grad(std::span<const double> scores, std::span<const std::uint8_t> labels,
                             std::span<const double> pos_weights, std::span<double> out);
void clinical_logit_grad(std::span<const double> scores, std::span<const std::uint8_t> labels,
                         const LossSpec& spec, std::span<double> out);
void cross_entropy_logit_grad(std::span<const double> probs, std::span<const std::uint8_t> labels,
                              std::span<const double> class_weights, std::span<double> out);

// Loss selected for a model head, with its weights bound.
struct Objective {
  enum class Kind { weighted_bce, clinical, cross_entropy };

  Kind kind = Kind::weighted_bce;
  LossSpec spec;                   // class_weights used by weighted_bce and clinical
  std::vector<double> ce_weights;  // cross_entropy class weights

  // outputs: n x width probabilities; labels: n x width bits, or n classes
  // for cross_entropy.
  double value(std::span<const double> outputs, std::span<const std::uint8_t> labels) const;
  void logit_grad(std::span<const double> outputs, std::span<const std::uint8_t> labels,
                  std::span<double> out) const;
};

}  // namespace keratix::model
