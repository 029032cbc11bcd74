#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "keratix/pipeline/run_config.hpp"

namespace keratix::pipeline {

// Artifact locations inside a workdir.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path manifest() const { return root / "data" / "manifest.csv"; }
  std::filesystem::path assignment() const { return root / "split" / "assignment.csv"; }
  std::filesystem::path model_dir(int round) const { return root / "models" / ("round_" + std::to_string(round)); }
  std::filesystem::path predictions(int round) const {
    return root / "predictions" / ("round_" + std::to_string(round) + ".csv");
  }
  std::filesystem::path eval_json() const { return root / "eval" / "metrics.json"; }
  std::filesystem::path roc_csv() const { return root / "eval" / "roc.csv"; }
  std::filesystem::path stats_json() const { return root / "stats" / "subgroup.json"; }
  std::filesystem::path table_v_csv() const { return root / "stats" / "table_v.csv"; }
  std::filesystem::path report_json() const { return root / "report" / "report.json"; }
  std::filesystem::path report_md() const { return root / "report" / "report.md"; }
  std::filesystem::path report_roc_csv() const { return root / "report" / "roc.csv"; }
  std::filesystem::path report_table_v_csv() const { return root / "report" / "table_v.csv"; }
};

// A model trained per round: its file stem and configuration.
struct ModelSlot {
  std::string name;
  model::ModelConfig config;
};

// Models a run trains each round: the multitask model or three single-task
// models, plus the sex and age heads when enabled.
std::vector<ModelSlot> model_slots(const RunConfig& config, std::size_t input_dim);

// Each stage reads its upstream artifacts (DependencyError naming the first
// missing file) and writes its own under the workdir.
void cmd_synth(const RunConfig& config);
void cmd_split(const RunConfig& config);
void cmd_train(const RunConfig& config);
void cmd_predict(const RunConfig& config);
void cmd_eval(const RunConfig& config);
void cmd_stats(const RunConfig& config);
void cmd_report(const RunConfig& config);
void cmd_all(const RunConfig& config);

inline constexpr std::string_view kStageNames[] = {"synth", "split", "train", "predict",
                                                    "eval",  "stats", "report", "all"};
void run_stage(std::string_view stage, const RunConfig& config);

}  // namespace keratix::pipeline
