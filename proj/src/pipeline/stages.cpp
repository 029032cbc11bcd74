#include "keratix/pipeline/stages.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "keratix/core/error.hpp"
#include "keratix/core/log.hpp"
#include "keratix/core/manifest.hpp"
#include "keratix/core/predictions.hpp"
#include "keratix/core/random.hpp"
#include "keratix/eval/aggregate.hpp"
#include "keratix/eval/roc.hpp"
#include "keratix/model/checkpoint.hpp"
#include "keratix/pipeline/report.hpp"
#include "keratix/stats/descriptive.hpp"
#include "keratix/stats/subgroup.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace keratix::pipeline {

namespace {

void require(const fs::path& path) {
  if (!fs::exists(path)) throw DependencyError("missing upstream artifact: " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  require(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ordered_json read_json(const fs::path& path) {
  try {
    return ordered_json::parse(read_text(path));
  } catch (const ordered_json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what(), 0);
  }
}

Layout layout_of(const RunConfig& config) {
  if (config.workdir.empty()) throw ValidationError("no workdir given");
  return Layout{config.workdir};
}

std::size_t input_dim_of(const DatasetManifest& m) {
  if (m.cases.empty()) throw ValidationError("manifest has no cases");
  const auto& p = m.cases.front().payload;
  if (const auto* fv = std::get_if<FeatureVector>(&p)) return fv->size();
  return 0;
}

std::uint64_t train_seed(const RunConfig& config, int round, std::size_t slot) {
  Rng rng = make_rng(config.seed, 0x7000 + static_cast<std::uint64_t>(round) * 16 + slot);
  return rng();
}

ordered_json metric_json(const eval::Metric& m) { return m ? ordered_json(*m) : ordered_json(nullptr); }

ordered_json bundle_json(const eval::MetricsBundle& b) {
  ordered_json j = ordered_json::object();
  for (const auto& [name, value] : b.entries()) j[std::string(name)] = metric_json(value);
  return j;
}

ordered_json summary_json(const eval::MetricSummary& s) {
  auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  return {{"mean", opt(s.mean)},   {"sd", opt(s.sd)},        {"ci_low", opt(s.ci_low)},
          {"ci_high", opt(s.ci_high)}, {"folds", s.folds}, {"excluded", s.excluded}};
}

template <std::size_t N>
ordered_json matrix_json(const std::array<std::array<double, N>, N>& m) {
  ordered_json j = ordered_json::array();
  for (const auto& row : m) j.push_back(row);
  return j;
}

double youden_or_default(std::span<const double> scores, std::span<const std::uint8_t> labels, std::string_view what,
                         int round) {
  try {
    return eval::youden_threshold(eval::roc_curve(scores, labels)).threshold;
  } catch (const UndefinedError&) {
    log::warn("round " + std::to_string(round) + ": validation split lacks a class for " + std::string(what) +
              "; threshold 0.5 kept");
    return 0.5;
  }
}

struct RoundData {
  std::vector<const PredictionRecord*> validation;
  std::vector<const PredictionRecord*> test;
};

RoundData by_role(const std::vector<PredictionRecord>& records) {
  RoundData d;
  for (const auto& r : records) {
    if (r.role == SplitRole::validation) d.validation.push_back(&r);
    if (r.role == SplitRole::test) d.test.push_back(&r);
  }
  return d;
}

}  // namespace

std::vector<ModelSlot> model_slots(const RunConfig& config, std::size_t input_dim) {
  std::vector<ModelSlot> slots;
  model::ModelConfig base = config.model;
  if (input_dim > 0) base.input_dim = input_dim;
  if (base.variant == model::Variant::single_task) {
    for (Task t : kAllTasks) {
      model::ModelConfig c = base;
      c.task = t;
      slots.push_back({"st_" + std::string(task_name(t)), c});
    }
  } else {
    slots.push_back({"multitask", base});
  }
  if (config.demographic_heads) {
    model::ModelConfig sex = base;
    sex.variant = model::Variant::sex_head;
    slots.push_back({"sex", sex});
    model::ModelConfig age = base;
    age.variant = model::Variant::age_head;
    slots.push_back({"age", age});
  }
  return slots;
}

void cmd_synth(const RunConfig& config) {
  config.validate();
  const Layout layout = layout_of(config);
  DatasetManifest manifest;
  if (config.manifest) {
    require(*config.manifest);
    manifest = load_manifest(*config.manifest);
  } else {
    manifest = generate(config.synth_config());
  }
  if (config.mirror && !has_mirrored(manifest)) manifest = mirror_expand(manifest);
  ensure_dir(layout.manifest().parent_path());
  for (Case& c : manifest.cases) c.payload_ref.clear();
  save_manifest(manifest, layout.manifest());
  log::info("wrote " + layout.manifest().string() + " (" + std::to_string(manifest.cases.size()) + " cases)");
}

void cmd_split(const RunConfig& config) {
  config.validate();
  const Layout layout = layout_of(config);
  require(layout.manifest());
  const DatasetManifest manifest = load_manifest(layout.manifest());
  const FoldAssignment assignment = assign_folds(manifest, config.split_config());
  const LeakageReport leak = verify_no_leakage(manifest, assignment);
  if (!leak.ok()) throw ValidationError("split leaks groups: " + leak.violations.front());
  ensure_dir(layout.assignment().parent_path());
  write_assignment(assignment, layout.assignment());
}

void cmd_train(const RunConfig& config) {
  config.validate();
  const Layout layout = layout_of(config);
  require(layout.manifest());
  require(layout.assignment());
  const DatasetManifest manifest = load_manifest(layout.manifest());
  const FoldAssignment assignment = read_assignment(layout.assignment());
  if (assignment.k != config.k) throw ValidationError("assignment has k=" + std::to_string(assignment.k));
  const auto slots = model_slots(config, input_dim_of(manifest));
  for (int round : config.selected_rounds()) {
    ensure_dir(layout.model_dir(round));
    for (std::size_t s = 0; s < slots.size(); ++s) {
      model::TrainConfig tc = config.train;
      tc.seed = train_seed(config, round, s);
      const auto result = model::train(manifest, assignment, round, slots[s].config, tc, config.objective_options());
      model::save_checkpoint(result.model, layout.model_dir(round) / (slots[s].name + ".ckpt"));
      model::write_training_log(result.log, layout.model_dir(round) / (slots[s].name + "_log.csv"));
      log::info("round " + std::to_string(round) + " " + slots[s].name + ": best epoch " +
                std::to_string(result.best_epoch) + " of " + std::to_string(result.log.size()));
    }
  }
}

void cmd_predict(const RunConfig& config) {
  config.validate();
  const Layout layout = layout_of(config);
  require(layout.manifest());
  require(layout.assignment());
  const DatasetManifest manifest = load_manifest(layout.manifest());
  const FoldAssignment assignment = read_assignment(layout.assignment());
  const auto slots = model_slots(config, input_dim_of(manifest));
  for (int round : config.selected_rounds()) {
    for (const auto& slot : slots) require(layout.model_dir(round) / (slot.name + ".ckpt"));
  }
  for (int round : config.selected_rounds()) {
    std::vector<PredictionRecord> merged;
    for (const auto& slot : slots) {
      const model::Model m = model::load_checkpoint(layout.model_dir(round) / (slot.name + ".ckpt"));
      const auto records = model::predict(m, manifest, assignment, round);
      if (merged.empty()) {
        merged = records;
        continue;
      }
      for (std::size_t i = 0; i < records.size(); ++i) {
        switch (m.config.variant) {
          case model::Variant::single_task: {
            const auto t = static_cast<std::size_t>(m.config.task);
            merged[i].scores[t] = records[i].scores[t];
            break;
          }
          case model::Variant::sex_head:
            merged[i].score_sex = records[i].score_sex;
            break;
          case model::Variant::age_head:
            merged[i].probs_age = records[i].probs_age;
            break;
          default:
            merged[i].scores = records[i].scores;
        }
      }
    }
    ensure_dir(layout.predictions(round).parent_path());
    write_predictions(merged, layout.predictions(round));
  }
}

void cmd_eval(const RunConfig& config) {
  config.validate();
  const Layout layout = layout_of(config);
  require(layout.manifest());
  const auto rounds = config.selected_rounds();
  for (int round : rounds) require(layout.predictions(round));
  const DatasetManifest manifest = load_manifest(layout.manifest());
  std::unordered_map<std::string, const Case*> by_id;
  for (const Case& c : manifest.cases) by_id.emplace(c.case_id, &c);
  auto case_of = [&](const PredictionRecord& r) -> const Case& {
    const auto it = by_id.find(r.case_id);
    if (it == by_id.end()) throw ValidationError("prediction for unknown case '" + r.case_id + "'");
    return *it->second;
  };

  ordered_json rounds_json = ordered_json::array();
  std::array<std::vector<eval::MetricsBundle>, kNumTasks> task_bundles;
  std::array<std::vector<eval::ConfusionMatrix>, kNumTasks> task_cms;
  std::vector<eval::JointConfusion> joints;
  std::vector<eval::MetricsBundle> sex_bundles;
  std::vector<eval::MetricsBundle> age_bundles;
  std::array<std::vector<double>, kNumTasks> pooled_scores;
  std::array<std::vector<std::uint8_t>, kNumTasks> pooled_labels;

  for (int round : rounds) {
    const auto records = read_predictions(layout.predictions(round));
    const RoundData data = by_role(records);
    if (data.test.empty()) throw ValidationError("round " + std::to_string(round) + " has no test predictions");

    std::array<double, kNumTasks> thresholds = eval::kDefaultThresholds;
    double sex_threshold = 0.5;
    if (config.threshold == ThresholdMode::adaptive) {
      for (Task t : kAllTasks) {
        const auto ti = static_cast<std::size_t>(t);
        std::vector<double> s;
        std::vector<std::uint8_t> l;
        for (const auto* r : data.validation) {
          s.push_back(r->scores[ti]);
          l.push_back(case_of(*r).labels.get(t));
        }
        thresholds[ti] = youden_or_default(s, l, task_name(t), round);
      }
      if (config.demographic_heads) {
        std::vector<double> s;
        std::vector<std::uint8_t> l;
        for (const auto* r : data.validation) {
          s.push_back(r->score_sex.value_or(0.0));
          l.push_back(case_of(*r).sex);
        }
        sex_threshold = youden_or_default(s, l, "sex", round);
      }
    }

    std::vector<PredictionRecord> test_records;
    std::vector<LabelVector> truth;
    for (const auto* r : data.test) {
      test_records.push_back(*r);
      truth.push_back(case_of(*r).labels);
    }
    const auto predicted = eval::apply_thresholds(test_records, thresholds);

    ordered_json rj;
    rj["round"] = round;
    rj["n_test"] = test_records.size();
    rj["thresholds"] = ordered_json::object();
    ordered_json tasks = ordered_json::object();
    for (Task t : kAllTasks) {
      const auto ti = static_cast<std::size_t>(t);
      std::vector<double> scores;
      std::vector<std::uint8_t> labels;
      std::vector<std::uint8_t> preds;
      for (std::size_t i = 0; i < test_records.size(); ++i) {
        scores.push_back(test_records[i].scores[ti]);
        labels.push_back(truth[i].get(t));
        preds.push_back(predicted[i].get(t));
      }
      pooled_scores[ti].insert(pooled_scores[ti].end(), scores.begin(), scores.end());
      pooled_labels[ti].insert(pooled_labels[ti].end(), labels.begin(), labels.end());
      const auto bundle = eval::binary_metrics(preds, labels, scores);
      const auto cm = eval::confusion(predicted, truth, t);
      task_bundles[ti].push_back(bundle);
      task_cms[ti].push_back(cm);
      rj["thresholds"][std::string(task_name(t))] = thresholds[ti];
      tasks[std::string(task_name(t))] = {{"metrics", bundle_json(bundle)}, {"confusion", matrix_json(cm.counts)}};
    }
    rj["tasks"] = tasks;
    const auto joint = eval::joint_confusion(predicted, truth);
    joints.push_back(joint);
    rj["joint_confusion"] = matrix_json(joint.counts);

    if (config.demographic_heads) {
      std::vector<double> s;
      std::vector<std::uint8_t> l;
      std::vector<double> probs;
      std::vector<std::uint8_t> bins;
      for (const auto& r : test_records) {
        if (!r.score_sex || !r.probs_age) throw ValidationError("record '" + r.case_id + "' lacks demographic scores");
        s.push_back(*r.score_sex);
        l.push_back(case_of(r).sex);
        probs.insert(probs.end(), r.probs_age->begin(), r.probs_age->end());
        bins.push_back(case_of(r).age_bin);
      }
      const auto sex = eval::binary_metrics(eval::apply_threshold(s, sex_threshold), l, s);
      const auto age = eval::multiclass_metrics(eval::predicted_age_bins(test_records), bins, probs, kNumAgeBins);
      sex_bundles.push_back(sex);
      age_bundles.push_back(age);
      rj["thresholds"]["sex"] = sex_threshold;
      rj["sex"] = {{"metrics", bundle_json(sex)}};
      rj["age"] = {{"metrics", bundle_json(age)}};
    }
    rounds_json.push_back(rj);
  }

  ordered_json out;
  out["rounds"] = rounds_json;
  if (rounds.size() >= 2) {
    ordered_json agg;
    ordered_json tasks = ordered_json::object();
    for (Task t : kAllTasks) {
      const auto ti = static_cast<std::size_t>(t);
      ordered_json metrics = ordered_json::object();
      for (const auto& [name, summary] : eval::aggregate_folds(task_bundles[ti])) metrics[name] = summary_json(summary);
      tasks[std::string(task_name(t))] = {{"metrics", metrics},
                                          {"confusion", matrix_json(eval::mean_confusion(task_cms[ti]).counts)}};
    }
    agg["tasks"] = tasks;
    agg["joint_confusion"] = matrix_json(eval::mean_joint_confusion(joints).counts);
    if (config.demographic_heads) {
      for (const auto& [key, bundles] : {std::pair{"sex", &sex_bundles}, std::pair{"age", &age_bundles}}) {
        ordered_json metrics = ordered_json::object();
        for (const auto& [name, summary] : eval::aggregate_folds(*bundles)) metrics[name] = summary_json(summary);
        agg[key] = {{"metrics", metrics}};
      }
    }
    out["aggregate"] = agg;
  } else {
    out["aggregate"] = nullptr;
  }
  write_text(layout.eval_json(), out.dump(2) + "\n");

  std::vector<eval::NamedCurve> curves;
  for (Task t : kAllTasks) {
    const auto ti = static_cast<std::size_t>(t);
    try {
      curves.push_back({std::string(task_name(t)), eval::roc_curve(pooled_scores[ti], pooled_labels[ti])});
    } catch (const UndefinedError&) {
      log::warn(std::string("no ROC curve for ") + std::string(task_name(t)) + ": one class only");
    }
  }
  eval::write_roc_csv(curves, layout.roc_csv());
}

void cmd_stats(const RunConfig& config) {
  config.validate();
  const Layout layout = layout_of(config);
  require(layout.manifest());
  require(layout.eval_json());
  const auto rounds = config.selected_rounds();
  for (int round : rounds) require(layout.predictions(round));
  const DatasetManifest manifest = load_manifest(layout.manifest());
  const ordered_json ev = read_json(layout.eval_json());

  std::vector<stats::FoldRecords> folds;
  for (const auto& rj : ev.at("rounds")) {
    stats::FoldRecords f;
    f.fold = rj.at("round").get<int>();
    for (Task t : kAllTasks) {
      f.thresholds[static_cast<std::size_t>(t)] = rj.at("thresholds").at(std::string(task_name(t))).get<double>();
    }
    f.records = read_predictions(layout.predictions(f.fold));
    folds.push_back(std::move(f));
  }

  ordered_json cells = ordered_json::array();
  std::vector<stats::SubgroupCell> all_cells;
  for (Attribute a : config.attributes) {
    const auto result = stats::subgroup_analysis(folds, manifest, a, config.t_test);
    all_cells.insert(all_cells.end(), result.begin(), result.end());
  }
  for (const auto& c : all_cells) {
    ordered_json cj;
    cj["attribute"] = attribute_name(c.attribute);
    cj["task"] = task_name(c.task);
    cj["metric"] = c.metric;
    if (c.test) {
      cj["statistic"] = c.test->statistic;
      cj["df1"] = c.test->df1;
      cj["df2"] = c.test->df2;
      cj["p_raw"] = c.test->p_raw;
      cj["p_corrected"] = c.test->p_corrected.value_or(c.test->p_raw);
      cj["family"] = c.test->family;
    } else {
      cj["statistic"] = nullptr;
      cj["p_raw"] = nullptr;
      cj["p_corrected"] = nullptr;
    }
    cj["excluded_folds"] = c.excluded_folds;
    cj["group_sizes"] = c.group_sizes;
    ordered_json fv = ordered_json::array();
    for (const auto& g : c.fold_values) {
      ordered_json row = ordered_json::array();
      for (const auto& v : g) row.push_back(metric_json(v));
      fv.push_back(row);
    }
    cj["fold_values"] = fv;
    cells.push_back(cj);
  }

  const auto corr = stats::feature_label_correlation(manifest);
  ordered_json corr_json;
  corr_json["columns"] = stats::kCorrelationColumns;
  ordered_json rows = ordered_json::array();
  for (const auto& row : corr.values) {
    ordered_json r = ordered_json::array();
    for (const auto& v : row) r.push_back(v ? ordered_json(*v) : ordered_json(nullptr));
    rows.push_back(r);
  }
  corr_json["values"] = rows;

  ordered_json out;
  out["t_test"] = stats::flavor_name(config.t_test);
  out["cells"] = cells;
  out["correlation"] = corr_json;
  write_text(layout.stats_json(), out.dump(2) + "\n");
  stats::write_subgroup_csv(all_cells, layout.table_v_csv());
}

void cmd_report(const RunConfig& config) {
  config.validate();
  const Layout layout = layout_of(config);
  require(layout.eval_json());
  require(layout.roc_csv());
  require(layout.stats_json());
  require(layout.table_v_csv());
  const Report report = build_report(config, read_text(layout.eval_json()), read_text(layout.stats_json()));
  write_text(layout.report_json(), report.json);
  write_text(layout.report_md(), report.markdown);
  std::error_code ec;
  fs::copy_file(layout.roc_csv(), layout.report_roc_csv(), fs::copy_options::overwrite_existing, ec);
  if (!ec) fs::copy_file(layout.table_v_csv(), layout.report_table_v_csv(), fs::copy_options::overwrite_existing, ec);
  if (ec) throw IoError("cannot copy report side files: " + ec.message());
}

void cmd_all(const RunConfig& config) {
  cmd_synth(config);
  cmd_split(config);
  cmd_train(config);
  cmd_predict(config);
  cmd_eval(config);
  cmd_stats(config);
  cmd_report(config);
}

void run_stage(std::string_view stage, const RunConfig& config) {
  if (stage == "synth") return cmd_synth(config);
  if (stage == "split") return cmd_split(config);
  if (stage == "train") return cmd_train(config);
  if (stage == "predict") return cmd_predict(config);
  if (stage == "eval") return cmd_eval(config);
  if (stage == "stats") return cmd_stats(config);
  if (stage == "report") return cmd_report(config);
  if (stage == "all") return cmd_all(config);
  throw ArgumentError("unknown stage '" + std::string(stage) + "'");
}

}  // namespace keratix::pipeline
