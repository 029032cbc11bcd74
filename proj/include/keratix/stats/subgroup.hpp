#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "keratix/core/types.hpp"
#include "keratix/eval/metrics.hpp"
#include "keratix/stats/hypothesis.hpp"

namespace keratix::stats {

// Test-role predictions of one round and the thresholds applied to them.
struct FoldRecords {
  int fold = 0;
  std::vector<PredictionRecord> records;
  std::array<double, kNumTasks> thresholds = eval::kDefaultThresholds;
};

inline constexpr std::array<std::string_view, 6> kSubgroupMetrics{"f1",           "recall", "precision",
                                                                  "balanced_acc", "acc",    "auroc"};

struct SubgroupCell {
  Attribute attribute = Attribute::sex;
  Task task = Task::bacteria;
  std::string metric;
  std::vector<std::vector<eval::Metric>> fold_values;  // [subgroup][fold]
  std::vector<std::size_t> group_sizes;                // test cases per subgroup over all folds
  std::size_t excluded_folds = 0;                      // (subgroup, fold) entries left undefined
  std::optional<TestResult> test;                      // empty: the cell is "-"
};

// For each task and metric, computes the metric on every subgroup's test
// cases per fold and compares the subgroups' fold series with a t-test (sex)
// or one-way ANOVA (age bin). Folds where a subgroup's metric is undefined
// are excluded and counted; AUROC cells with any undefined entry, and cells
// with too few values to test, are left without a test. Constant series
// that agree across subgroups get t = 0 (or F = 0) and p = 1. Holm
// correction runs within each (task, attribute) family.
std::vector<SubgroupCell> subgroup_analysis(std::span<const FoldRecords> folds, const DatasetManifest& manifest,
                                            Attribute attribute, TFlavor flavor = TFlavor::welch);

std::size_t subgroup_count(Attribute attribute);

// `attribute,task,metric,statistic,df,p_raw,p_corrected,excluded_folds`,
// with "-" in untested cells and F degrees of freedom written as "d1/d2".
void write_subgroup_csv(std::span<const SubgroupCell> cells, const std::filesystem::path& path);

}  // namespace keratix::stats
