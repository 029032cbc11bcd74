#pragma once

#include <string>
#include <string_view>

#include "keratix/pipeline/run_config.hpp"

namespace keratix::pipeline {

struct Report {
  std::string json;      // structured document
  std::string markdown;  // the same tables rendered for reading
};

// Collates the eval and stats documents into the report: metric CIs per
// task, averaged per-task confusion matrices, the averaged joint confusion
// matrix in H, B, F, A, BF, FA, BA, BFA order and the corrected p-value grid
// ("-" where untested).
Report build_report(const RunConfig& config, std::string_view eval_json, std::string_view stats_json);

}  // namespace keratix::pipeline
