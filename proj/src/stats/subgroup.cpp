#include "keratix/stats/subgroup.hpp"

#include <fstream>
#include <map>
#include <unordered_map>

#include "keratix/core/error.hpp"
#include "keratix/core/manifest.hpp"
#include "keratix/stats/multiple_testing.hpp"

namespace keratix::stats {

namespace {

eval::Metric pick(const eval::MetricsBundle& b, std::string_view metric) {
  for (const auto& [name, value] : b.entries())
    if (name == metric) return value;
  throw ArgumentError("unknown metric '" + std::string(metric) + "'");
}

bool all_equal(const std::vector<std::vector<double>>& groups) {
  const double* first = nullptr;
  for (const auto& g : groups) {
    for (const double& v : g) {
      if (first == nullptr) first = &v;
      else if (v != *first) return false;
    }
  }
  return true;
}

std::optional<TestResult> run_test(const std::vector<std::vector<double>>& groups, Attribute attribute,
                                   TFlavor flavor) {
  try {
    if (attribute == Attribute::sex) return t_test(groups[0], groups[1], flavor);
    return anova_oneway(groups);
  } catch (const UndefinedError&) {
    if (!all_equal(groups)) return std::nullopt;
    TestResult r;
    r.statistic = 0.0;
    r.p_raw = 1.0;
    if (attribute == Attribute::sex) {
      r.df1 = static_cast<double>(groups[0].size() + groups[1].size()) - 2.0;
    } else {
      std::size_t n = 0;
      for (const auto& g : groups) n += g.size();
      r.df1 = static_cast<double>(groups.size()) - 1.0;
      r.df2 = static_cast<double>(n) - static_cast<double>(groups.size());
    }
    return r;
  }
}

}  // namespace

std::size_t subgroup_count(Attribute attribute) { return attribute == Attribute::sex ? 2 : kNumAgeBins; }

std::vector<SubgroupCell> subgroup_analysis(std::span<const FoldRecords> folds, const DatasetManifest& manifest,
                                            Attribute attribute, TFlavor flavor) {
  if (folds.empty()) throw ArgumentError("subgroup analysis needs at least one fold");
  std::unordered_map<std::string, const Case*> by_id;
  for (const Case& c : manifest.cases) by_id.emplace(c.case_id, &c);
  const std::size_t groups = subgroup_count(attribute);

  // bundles[fold][task][group]; empty when the subgroup has no test cases.
  std::vector<std::array<std::vector<std::optional<eval::MetricsBundle>>, kNumTasks>> bundles(folds.size());
  std::vector<std::size_t> sizes(groups, 0);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::vector<const PredictionRecord*>> members(groups);
    std::vector<std::vector<const Case*>> cases(groups);
    for (const auto& r : folds[f].records) {
      if (r.role != SplitRole::test) continue;
      const auto it = by_id.find(r.case_id);
      if (it == by_id.end()) throw ValidationError("prediction for unknown case '" + r.case_id + "'");
      const std::size_t g = it->second->attribute(attribute);
      members[g].push_back(&r);
      cases[g].push_back(it->second);
      ++sizes[g];
    }
    for (Task task : kAllTasks) {
      const auto ti = static_cast<std::size_t>(task);
      auto& row = bundles[f][ti];
      row.resize(groups);
      for (std::size_t g = 0; g < groups; ++g) {
        if (members[g].empty()) continue;
        std::vector<double> scores;
        std::vector<std::uint8_t> truth;
        for (std::size_t i = 0; i < members[g].size(); ++i) {
          scores.push_back(members[g][i]->scores[ti]);
          truth.push_back(cases[g][i]->labels.get(task));
        }
        row[g] = eval::binary_metrics(eval::apply_threshold(scores, folds[f].thresholds[ti]), truth, scores);
      }
    }
  }

  std::vector<SubgroupCell> cells;
  for (Task task : kAllTasks) {
    const auto ti = static_cast<std::size_t>(task);
    const std::size_t family_start = cells.size();
    for (std::string_view metric : kSubgroupMetrics) {
      SubgroupCell cell;
      cell.attribute = attribute;
      cell.task = task;
      cell.metric = std::string(metric);
      cell.group_sizes = sizes;
      cell.fold_values.assign(groups, {});
      std::vector<std::vector<double>> series(groups);
      for (std::size_t g = 0; g < groups; ++g) {
        for (std::size_t f = 0; f < folds.size(); ++f) {
          const auto& b = bundles[f][ti][g];
          const eval::Metric v = b ? pick(*b, metric) : std::nullopt;
          cell.fold_values[g].push_back(v);
          if (v) series[g].push_back(*v);
          else ++cell.excluded_folds;
        }
      }
      const bool auroc_gap = metric == "auroc" && cell.excluded_folds > 0;
      if (!auroc_gap) {
        std::vector<std::vector<double>> testable;
        for (auto& s : series)
          if (s.size() >= 2) testable.push_back(std::move(s));
        const bool enough = attribute == Attribute::sex ? testable.size() == 2 : testable.size() >= 2;
        if (enough) cell.test = run_test(testable, attribute, flavor);
      }
      if (cell.test) cell.test->family = std::string(attribute_name(attribute)) + ":" + std::string(task_name(task));
      cells.push_back(std::move(cell));
    }
    std::vector<double> raw;
    std::vector<std::size_t> index;
    for (std::size_t i = family_start; i < cells.size(); ++i) {
      if (cells[i].test) {
        raw.push_back(cells[i].test->p_raw);
        index.push_back(i);
      }
    }
    const auto adjusted = holm_bonferroni(raw);
    for (std::size_t k = 0; k < index.size(); ++k) cells[index[k]].test->p_corrected = adjusted[k];
  }
  return cells;
}

void write_subgroup_csv(std::span<const SubgroupCell> cells, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "attribute,task,metric,statistic,df,p_raw,p_corrected,excluded_folds\n";
  for (const auto& c : cells) {
    out << attribute_name(c.attribute) << ',' << task_name(c.task) << ',' << c.metric << ',';
    if (c.test) {
      const auto& t = *c.test;
      out << format_real(t.statistic) << ',';
      if (c.attribute == Attribute::sex) out << format_real(t.df1);
      else out << format_real(t.df1) << '/' << format_real(t.df2);
      out << ',' << format_real(t.p_raw) << ',' << format_real(t.p_corrected.value_or(t.p_raw));
    } else {
      out << "-,-,-,-";
    }
    out << ',' << c.excluded_folds << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace keratix::stats
