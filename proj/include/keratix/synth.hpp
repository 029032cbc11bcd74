#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "keratix/core/types.hpp"

namespace keratix {

// Label combinations the generator draws from, in weight order:
// B, F, B+F, A, B+A (joint indices 1, 2, 3, 4, 5).
inline constexpr std::array<int, 5> kSynthCombos{1, 2, 3, 4, 5};

struct Confound {
  Attribute attribute = Attribute::sex;
  Task task = Task::amoeba;
  double strength = 0.0;
};

struct SynthConfig {
  std::size_t n_groups = 2000;
  std::array<double, 5> combo_weights{0.5698, 0.1342, 0.1032, 0.1003, 0.0926};
  double sex_p_female = 0.4172;
  std::array<double, 4> age_bin_probs{0.0262, 0.3605, 0.3939, 0.2194};
  std::size_t feature_dim = 16;
  double separability = 3.0;
  std::vector<Confound> confounds;
  std::uint64_t seed = 0;

  // Throws ArgumentError for negative or all-zero weights, a probability
  // outside [0,1], a negative separability, or too few feature dimensions
  // for the class and coupling directions.
  void validate() const;
};

// Whether a case carries the attribute a confound couples to: female for
// sex, age 40 and over (bins 2 and 3) for age_bin.
bool attribute_indicator(const Case& c, Attribute attribute);

// Five orthonormal mean directions, one per entry of kSynthCombos.
std::vector<std::vector<double>> class_directions(std::uint64_t seed, std::size_t dim);

// Unit direction orthogonal to class_directions(seed, dim), fixed by
// (seed, attribute, task).
std::vector<double> coupling_direction(std::uint64_t seed, std::size_t dim, Attribute attribute, Task task);

// Largest-remainder allocation of n items to categories with the given
// (unnormalized) weights.
std::vector<std::size_t> quota_counts(std::span<const double> weights, std::size_t n);

// n_groups original cases. Combination, sex and age-bin labels are allocated
// by quota to the normalized marginals and shuffled independently. Features
// are unit-covariance Gaussian around separability * direction(combination),
// then each confound shifts cases with the attribute and a positive task label
// by strength along its coupling direction.
DatasetManifest generate(const SynthConfig& config);

// Shift of the feature payload of every case with the attribute and a
// positive label for the task. Labels are untouched. Strength 0 returns the
// input unchanged. Throws UnsupportedModeError on image payloads.
DatasetManifest inject_confound(const DatasetManifest& manifest, Attribute attribute, Task task,
                                double strength, std::uint64_t seed);

}  // namespace keratix
