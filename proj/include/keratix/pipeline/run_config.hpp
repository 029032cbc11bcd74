#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "keratix/model/config.hpp"
#include "keratix/model/losses.hpp"
#include "keratix/model/trainer.hpp"
#include "keratix/splitter.hpp"
#include "keratix/stats/hypothesis.hpp"
#include "keratix/synth.hpp"

namespace keratix::pipeline {

enum class ThresholdMode { fixed, adaptive };

std::string_view threshold_mode_name(ThresholdMode mode);
ThresholdMode parse_threshold_mode(std::string_view name);

struct LossInputs {
  bool clinical = true;
  std::array<double, 3> prices = model::kDefaultPrices;
  std::array<double, 3> flasks{1.0, 1.0, 1.0};
  std::array<double, 3> months{1.0, 1.0, 1.0};
};

// One experiment: data source, split, model, training, loss, thresholds and
// the subgroup analysis. A single seed drives generation, splitting and
// training.
struct RunConfig {
  std::filesystem::path workdir;
  std::optional<std::filesystem::path> manifest;  // external data; synthetic when empty
  SynthConfig synth;
  bool mirror = false;
  int k = 10;
  model::ModelConfig model;
  model::TrainConfig train;
  LossInputs loss;
  ThresholdMode threshold = ThresholdMode::fixed;
  std::vector<Attribute> attributes{Attribute::sex, Attribute::age_bin};
  stats::TFlavor t_test = stats::TFlavor::welch;
  bool demographic_heads = false;
  std::vector<int> rounds;  // empty: all k rounds
  std::uint64_t seed = 0;

  // Throws ValidationError for inconsistent settings.
  void validate() const;

  SplitConfig split_config() const;
  SynthConfig synth_config() const;  // synth with the run seed
  std::vector<int> selected_rounds() const;
  model::ObjectiveOptions objective_options() const;
};

// Parses a JSON run configuration. Unknown keys are rejected; relative paths
// resolve against `base_dir`.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// JSON form of the settings that determine results (no workdir).
std::string run_config_json(const RunConfig& config);

// Comma-separated round indices, e.g. "0,3,5".
std::vector<int> parse_rounds(std::string_view text);

}  // namespace keratix::pipeline
