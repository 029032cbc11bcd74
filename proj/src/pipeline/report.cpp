#include "keratix/pipeline/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "keratix/core/error.hpp"
#include "keratix/core/types.hpp"

using nlohmann::ordered_json;

namespace keratix::pipeline {

namespace {

struct TableVRow {
  const char* label;
  const char* metric;
};

constexpr TableVRow kTableVRows[] = {{"F1", "f1"},  {"Recall", "recall"}, {"Precision", "precision"},
                                     {"BA", "balanced_acc"}, {"ACC", "acc"}, {"AUROC", "auroc"}};
constexpr Attribute kTableVAttributes[] = {Attribute::age_bin, Attribute::sex};

std::string printf_str(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::string format_p(double p) { return p < 1e-4 ? "<0.0001" : printf_str("%.4f", p); }

std::string format_count(double v) {
  return std::abs(v * 10.0 - std::round(v * 10.0)) < 1e-9 ? printf_str("%.1f", v) : printf_str("%.2f", v);
}

std::string capitalized(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out;
}

std::string attribute_label(Attribute a) { return a == Attribute::sex ? "Sex" : "Age"; }

ordered_json parse(std::string_view text, const char* what) {
  try {
    return ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw FormatError(std::string(what) + ": " + e.what(), 0);
  }
}

const ordered_json* find_cell(const ordered_json& stats, Attribute a, Task t, std::string_view metric) {
  for (const auto& c : stats.at("cells")) {
    if (c.at("attribute") == attribute_name(a) && c.at("task") == task_name(t) && c.at("metric") == metric) return &c;
  }
  return nullptr;
}

void markdown_metrics(std::ostringstream& md, const ordered_json& metrics) {
  md << "| Metric | Mean | SD | 95% CI | Folds | Excluded |\n|---|---|---|---|---|---|\n";
  for (const auto& [name, s] : metrics.items()) {
    md << "| " << name << " | ";
    if (s.at("mean").is_null()) {
      md << "- | - | - | ";
    } else {
      md << printf_str("%.4f", s.at("mean").get<double>()) << " | " << printf_str("%.4f", s.at("sd").get<double>())
         << " | " << printf_str("%.4f", s.at("ci_low").get<double>()) << " - "
         << printf_str("%.4f", s.at("ci_high").get<double>()) << " | ";
    }
    md << s.at("folds").get<std::size_t>() << " | " << s.at("excluded").get<std::size_t>() << " |\n";
  }
  md << '\n';
}

}  // namespace

Report build_report(const RunConfig& config, std::string_view eval_json, std::string_view stats_json) {
  const ordered_json ev = parse(eval_json, "eval document");
  const ordered_json st = parse(stats_json, "stats document");
  const ordered_json& agg = ev.at("aggregate");

  ordered_json out;
  out["config"] = ordered_json::parse(run_config_json(config));
  std::vector<int> rounds;
  for (const auto& r : ev.at("rounds")) rounds.push_back(r.at("round").get<int>());
  out["rounds"] = rounds;

  std::ostringstream md;
  md << "# Keratitis multitask report\n\n";
  md << "Variant " << model::variant_name(config.model.variant) << ", clinical loss "
     << (config.loss.clinical ? "on" : "off") << ", " << threshold_mode_name(config.threshold) << " thresholds, "
     << rounds.size() << " of " << config.k << " rounds.\n\n";

  // Metric confidence intervals.
  ordered_json metrics = ordered_json::object();
  if (!agg.is_null()) {
    md << "## Test metrics (mean, 95% normal CI)\n\n";
    for (Task t : kAllTasks) {
      const std::string name(task_name(t));
      metrics[name] = agg.at("tasks").at(name).at("metrics");
      md << "### " << capitalized(name) << "\n\n";
      markdown_metrics(md, metrics[name]);
    }
    for (const char* head : {"sex", "age"}) {
      if (agg.contains(head)) {
        metrics[head] = agg.at(head).at("metrics");
        md << "### " << capitalized(head) << " head\n\n";
        markdown_metrics(md, metrics[head]);
      }
    }
  }
  out["metrics"] = metrics;

  // Averaged per-task confusion matrices.
  ordered_json table_iii = ordered_json::object();
  if (!agg.is_null()) {
    md << "## Average confusion matrices per task\n\n";
    for (Task t : kAllTasks) {
      const std::string name(task_name(t));
      const auto& cm = agg.at("tasks").at(name).at("confusion");
      table_iii[name] = {{"rows", {"Negative", "Positive"}}, {"columns", {"Negative", "Positive"}}, {"counts", cm}};
      md << "| " << capitalized(name) << " | Negative | Positive |\n|---|---|---|\n";
      for (int r = 0; r < 2; ++r) {
        md << "| " << (r == 0 ? "Negative" : "Positive") << " | " << format_count(cm[r][0].get<double>()) << " | "
           << format_count(cm[r][1].get<double>()) << " |\n";
      }
      md << '\n';
    }
  }
  out["table_iii"] = table_iii;

  // Averaged joint confusion in display order.
  ordered_json table_iv = ordered_json::object();
  if (!agg.is_null()) {
    const auto& joint = agg.at("joint_confusion");
    std::vector<std::string> labels;
    for (auto n : kJointDisplayNames) labels.emplace_back(n);
    ordered_json counts = ordered_json::array();
    md << "## Average joint confusion matrix (rows true, columns predicted)\n\n|   |";
    for (const auto& l : labels) md << ' ' << l << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < labels.size(); ++i) md << "---|";
    md << '\n';
    for (std::size_t i = 0; i < kNumJointStates; ++i) {
      ordered_json row = ordered_json::array();
      md << "| " << labels[i] << " |";
      for (std::size_t j = 0; j < kNumJointStates; ++j) {
        const double v = joint[static_cast<std::size_t>(kJointDisplayOrder[i])][static_cast<std::size_t>(kJointDisplayOrder[j])]
                             .get<double>();
        row.push_back(v);
        md << ' ' << format_count(v) << " |";
      }
      counts.push_back(row);
      md << '\n';
    }
    md << '\n';
    table_iv = {{"labels", labels}, {"counts", counts}};
  }
  out["table_iv"] = table_iv;

  // Holm-corrected p-values by task and attribute.
  ordered_json columns = ordered_json::array();
  std::vector<std::string> row_labels;
  for (const auto& r : kTableVRows) row_labels.emplace_back(r.label);
  md << "## Corrected p-values by task and attribute\n\n| Metric |";
  for (Task t : kAllTasks) {
    for (Attribute a : kTableVAttributes) {
      columns.push_back({{"task", task_name(t)}, {"attribute", attribute_name(a)}});
      md << ' ' << capitalized(task_name(t)) << ' ' << attribute_label(a) << " |";
    }
  }
  md << "\n|---|";
  for (std::size_t i = 0; i < columns.size(); ++i) md << "---|";
  md << '\n';
  ordered_json cells = ordered_json::array();
  for (const auto& r : kTableVRows) {
    ordered_json row = ordered_json::array();
    md << "| " << r.label << " |";
    for (Task t : kAllTasks) {
      for (Attribute a : kTableVAttributes) {
        const ordered_json* cell = find_cell(st, a, t, r.metric);
        std::string text = "-";
        if (cell != nullptr && !cell->at("p_corrected").is_null()) text = format_p(cell->at("p_corrected").get<double>());
        row.push_back(text);
        md << ' ' << text << " |";
      }
    }
    cells.push_back(row);
    md << '\n';
  }
  md << '\n';
  out["table_v"] = {{"rows", row_labels}, {"columns", columns}, {"cells", cells}};
  out["subgroup_tests"] = st.at("cells");
  out["correlation"] = st.at("correlation");
  out["per_round"] = ev.at("rounds");
  out["side_files"] = {{"roc", "roc.csv"}, {"table_v", "table_v.csv"}};

  md << "## Label and demographic correlation\n\n|   |";
  const auto& corr = st.at("correlation");
  for (const auto& c : corr.at("columns")) md << ' ' << c.get<std::string>() << " |";
  md << "\n|---|";
  for (std::size_t i = 0; i < corr.at("columns").size(); ++i) md << "---|";
  md << '\n';
  for (std::size_t i = 0; i < corr.at("columns").size(); ++i) {
    md << "| " << corr.at("columns")[i].get<std::string>() << " |";
    for (const auto& v : corr.at("values")[i]) md << ' ' << (v.is_null() ? "-" : printf_str("%.3f", v.get<double>())) << " |";
    md << '\n';
  }

  return {out.dump(2) + "\n", md.str()};
}

}  // namespace keratix::pipeline
