// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments
// select criteria by number, e.g. `keratix_acceptance 8 13`.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "../support/temp_dir.hpp"
#include "keratix/core/log.hpp"
#include "keratix/core/manifest.hpp"
#include "keratix/eval/roc.hpp"
#include "keratix/pipeline/run_config.hpp"
#include "keratix/pipeline/stages.hpp"
#include "keratix/splitter.hpp"
#include "keratix/stats/hypothesis.hpp"
#include "keratix/stats/multiple_testing.hpp"
#include "keratix/synth.hpp"

using namespace keratix;
using nlohmann::json;

namespace {

// Tolerances and budgets.
constexpr double kGradRelTol = 1e-4;
constexpr double kGradSeconds = 10.0;
constexpr double kAurocTol = 1e-12;
constexpr double kJTol = 1e-12;
constexpr double kHolmTol = 1e-15;
constexpr double kV1V2Tol = 1e-12;
constexpr double kFtRelTol = 1e-9;
constexpr double kSignalAuroc = 0.90;
constexpr double kSignalSeconds = 300.0;
constexpr double kNullLow = 0.45;
constexpr double kNullHigh = 0.55;
constexpr double kAlpha = 0.05;
constexpr double kPowerRate = 0.80;
constexpr double kSizeRate = 0.10;
constexpr double kConformanceTol = 0.01;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---- pipeline helpers -------------------------------------------------------

pipeline::RunConfig signal_config(std::uint64_t seed) {
  pipeline::RunConfig c;
  c.seed = seed;
  c.k = 10;
  c.synth.n_groups = 2000;
  c.synth.separability = 3.0;
  c.model.variant = model::Variant::multitask_v2;
  c.loss.clinical = true;
  c.train.epochs = 50;
  return c;
}

pipeline::RunConfig power_config(std::uint64_t seed, bool confound) {
  pipeline::RunConfig c = signal_config(seed);
  c.synth.n_groups = 10000;
  c.synth.separability = 1.0;
  c.attributes = {Attribute::sex};
  if (confound) c.synth.confounds.push_back({Attribute::sex, Task::amoeba, 0.8});
  return c;
}

struct RunOutput {
  json eval;
  json stats;
  json report;
  std::string report_json;
  std::string report_md;
  std::string roc_csv;
  std::string table_v_csv;
  double seconds = 0.0;
};

RunOutput run_pipeline(pipeline::RunConfig config, const std::filesystem::path& dir) {
  config.workdir = dir;
  const auto t0 = Clock::now();
  pipeline::cmd_all(config);
  RunOutput out;
  out.seconds = seconds_since(t0);
  const pipeline::Layout layout{dir};
  out.eval = json::parse(slurp(layout.eval_json()));
  out.stats = json::parse(slurp(layout.stats_json()));
  out.report_json = slurp(layout.report_json());
  out.report = json::parse(out.report_json);
  out.report_md = slurp(layout.report_md());
  out.roc_csv = slurp(layout.report_roc_csv());
  out.table_v_csv = slurp(layout.report_table_v_csv());
  return out;
}

double mean_auroc(const RunOutput& r, Task t) {
  return r.eval.at("aggregate").at("tasks").at(std::string(task_name(t))).at("metrics").at("auroc").at("mean").get<double>();
}

std::optional<double> corrected_p(const json& stats, Attribute a, Task t, std::string_view metric) {
  for (const auto& c : stats.at("cells")) {
    if (c.at("attribute") == attribute_name(a) && c.at("task") == task_name(t) && c.at("metric") == metric) {
      if (c.at("p_corrected").is_null()) return std::nullopt;
      return c.at("p_corrected").get<double>();
    }
  }
  return std::nullopt;
}

// Shared by criteria 8, 12 and 13.
const RunOutput& signal_run() {
  static TempDir dir("accept_signal");
  static const RunOutput out = run_pipeline(signal_config(1), dir.path());
  return out;
}

// ---- criteria ---------------------------------------------------------------

std::vector<double> random_vec(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = standard_normal(rng);
  return v;
}

Outcome gradient_oracle() {
  using namespace model;
  struct Setup {
    const char* name;
    ModelConfig config;
    Objective::Kind kind;
  };
  auto cfg = [](Variant v, TrunkKind trunk) {
    ModelConfig c;
    c.variant = v;
    c.trunk = trunk;
    c.input_dim = 8;
    c.image_size = 6;
    c.hidden = trunk == TrunkKind::linear ? 6 : 3;
    return c;
  };
  const std::vector<Setup> setups{
      {"bce/V1", cfg(Variant::multitask_v1, TrunkKind::linear), Objective::Kind::weighted_bce},
      {"bce/V2", cfg(Variant::multitask_v2, TrunkKind::linear), Objective::Kind::weighted_bce},
      {"clinical/V1", cfg(Variant::multitask_v1, TrunkKind::linear), Objective::Kind::clinical},
      {"clinical/V2", cfg(Variant::multitask_v2, TrunkKind::linear), Objective::Kind::clinical},
      {"ce/age", cfg(Variant::age_head, TrunkKind::linear), Objective::Kind::cross_entropy},
      {"clinical/V1/conv", cfg(Variant::multitask_v1, TrunkKind::tiny_conv), Objective::Kind::clinical},
      {"clinical/V2/conv", cfg(Variant::multitask_v2, TrunkKind::tiny_conv), Objective::Kind::clinical},
      {"ce/age/conv", cfg(Variant::age_head, TrunkKind::tiny_conv), Objective::Kind::cross_entropy},
  };
  const auto t0 = Clock::now();
  Rng rng = make_rng(101);
  double worst = 0.0;
  std::string worst_name;
  std::uint64_t seed = 0;
  for (const auto& s : setups) {
    Model m = Model::create(s.config);
    m.initialize(++seed);
    for (auto& g : m.values("bn.gamma")) g = 0.5 + uniform01(rng);
    for (auto& b : m.values("bn.beta")) b = 0.2 * standard_normal(rng);
    const std::size_t n = 8;
    const auto x = random_vec(rng, n * m.input_width());
    std::vector<std::uint8_t> y;
    Objective o;
    o.kind = s.kind;
    if (s.kind == Objective::Kind::cross_entropy) {
      for (std::size_t i = 0; i < n; ++i) y.push_back(static_cast<std::uint8_t>(uniform_index(rng, 4)));
      o.ce_weights = {1.5, 0.7, 1.0, 2.0};
    } else {
      for (std::size_t i = 0; i < n * 3; ++i) y.push_back(static_cast<std::uint8_t>(uniform_index(rng, 2)));
      o.spec.class_weights = {0.30633, 3.21224, 1.7};
      o.spec.hospital_weights = {0.13151, 0.59063, 0.27786};
    }
    const double err = oracle::fd_gradient_error(m, x, n, y, o, 500 + seed, 100);
    if (err > worst) {
      worst = err;
      worst_name = s.name;
    }
  }
  const double secs = seconds_since(t0);
  return {worst < kGradRelTol && secs < kGradSeconds,
          "worst relative error " + fmt("%.2e", worst) + " (" + worst_name + ") over " +
              std::to_string(setups.size()) + " setups x 100 coords, " + fmt("%.2f", secs) + " s"};
}

void random_scores(Rng& rng, std::vector<double>& s, std::vector<std::uint8_t>& y) {
  const std::size_t n = 2 + uniform_index(rng, 49);
  s.resize(n);
  y.resize(n);
  do {
    const std::uint64_t levels = 2 + uniform_index(rng, 20);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(uniform_index(rng, levels)) / static_cast<double>(levels);
      y[i] = static_cast<std::uint8_t>(uniform_index(rng, 2));
    }
  } while (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 0) == 0);
}

Outcome auroc_oracle() {
  Rng rng = make_rng(102);
  double worst = 0.0;
  std::vector<double> s;
  std::vector<std::uint8_t> y;
  for (int i = 0; i < 1000; ++i) {
    random_scores(rng, s, y);
    worst = std::max(worst, std::abs(eval::auroc(s, y) - oracle::auroc_pairs(s, y)));
  }
  return {worst <= kAurocTol, "max |trapezoid - pairs| = " + fmt("%.1e", worst) + " over 1000 instances"};
}

Outcome youden_oracle() {
  Rng rng = make_rng(103);
  int mismatches = 0;
  std::vector<double> s;
  std::vector<std::uint8_t> y;
  for (int i = 0; i < 1000; ++i) {
    random_scores(rng, s, y);
    const auto got = eval::youden_threshold(eval::roc_curve(s, y));
    const auto want = oracle::youden_sweep(s, y);
    if (got.threshold != want.threshold || std::abs(got.j - want.j) > kJTol) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over 1000 instances"};
}

Outcome holm_oracle() {
  Rng rng = make_rng(104);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> p(1 + uniform_index(rng, 20));
    for (auto& v : p) v = std::pow(uniform01(rng), 2.0);
    if (p.size() > 2 && trial % 4 == 0) p[1] = p[0];
    const auto got = stats::holm_bonferroni(p);
    const auto want = oracle::holm_hand(p);
    const double m = static_cast<double>(p.size());
    bool ok = true;
    for (std::size_t i = 0; i < p.size(); ++i) {
      ok = ok && std::abs(got[i] - want[i]) <= kHolmTol && got[i] >= p[i] && got[i] <= std::min(1.0, m * p[i]);
      for (std::size_t j = 0; j < p.size(); ++j) ok = ok && !(p[i] <= p[j] && got[i] > got[j]);
    }
    bad += ok ? 0 : 1;
  }
  return {bad == 0, std::to_string(bad) + " of 1000 p-vectors violate the hand procedure or invariants"};
}

Outcome splitter_invariants() {
  Rng rng = make_rng(105);
  int bad_partition = 0;
  int bad_strata = 0;
  std::size_t twin_checks = 0;
  std::size_t twin_ok = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + static_cast<int>(uniform_index(rng, 9));
    const std::size_t groups = static_cast<std::size_t>(k) + uniform_index(rng, 300);
    std::vector<int> joints{1, 2, 3, 4, 5, 6, 7};
    joints.resize(1 + uniform_index(rng, 7));
    DatasetManifest m = fixture::random_manifest(rng, groups, joints);
    const bool mirrored = trial % 2 == 0;
    if (mirrored) m = mirror_expand(m);
    SplitConfig sc;
    sc.k = k;
    sc.val_fraction = sc.test_fraction = 1.0 / k;
    sc.train_fraction = 1.0 - 2.0 / k;
    sc.seed = static_cast<std::uint64_t>(trial);
    const auto a = assign_folds(m, sc);

    bool partition = verify_no_leakage(m, a).ok() && a.fold_of.size() == groups;
    for (const auto& r : a.rounds) {
      partition = partition && r.train.size() + r.validation.size() + r.test.size() == groups;
    }
    bad_partition += partition ? 0 : 1;

    std::map<int, std::vector<int>> per_fold;
    std::map<int, int> total;
    for (const auto& [g, stratum] : group_strata(m)) {
      auto& v = per_fold[stratum];
      v.resize(static_cast<std::size_t>(k), 0);
      ++v[static_cast<std::size_t>(a.fold_of.at(g))];
      ++total[stratum];
    }
    bool strata = true;
    for (const auto& [stratum, counts] : per_fold) {
      const int n = total[stratum];
      if (n < k) continue;
      for (int c : counts) strata = strata && (c == n / k || c == (n + k - 1) / k);
    }
    bad_strata += strata ? 0 : 1;

    if (mirrored) {
      const std::size_t half = m.cases.size() / 2;
      for (std::size_t i = 0; i < half; ++i) {
        for (int r = 0; r < k; ++r) {
          ++twin_checks;
          const Case& src = m.cases[i];
          const Case& twin = m.cases[half + i];
          if (twin.mirrored && a.role_of(r, twin.group_id) == a.role_of(r, src.group_id)) ++twin_ok;
        }
      }
    }
  }
  const double twin_rate = twin_checks ? static_cast<double>(twin_ok) / static_cast<double>(twin_checks) : 0.0;
  return {bad_partition == 0 && bad_strata == 0 && twin_rate == 1.0,
          "partition failures " + std::to_string(bad_partition) + ", stratification failures " +
              std::to_string(bad_strata) + ", twins co-located " + fmt("%.2f", 100.0 * twin_rate) + "% of " +
              std::to_string(twin_checks) + " (twin, round) pairs"};
}

Outcome v1_v2_equivalence() {
  Rng rng = make_rng(106);
  double worst = 0.0;
  for (int batch = 0; batch < 100; ++batch) {
    model::ModelConfig c;
    c.variant = model::Variant::multitask_v2;
    c.input_dim = 16;
    c.hidden = 12;
    model::Model v2 = model::Model::create(c);
    v2.initialize(static_cast<std::uint64_t>(batch));
    for (std::size_t i = 0; i < v2.running_mean.size(); ++i) {
      v2.running_mean[i] = 0.1 * standard_normal(rng);
      v2.running_var[i] = 0.5 + uniform01(rng);
    }
    const auto v1 = fixture::stacked_v1(v2);
    const std::size_t n = 1 + uniform_index(rng, 32);
    const auto x = random_vec(rng, n * 16);
    const auto a = model::forward(v1, x, n, model::Mode::inference);
    const auto b = model::forward(v2, x, n, model::Mode::inference);
    for (std::size_t i = 0; i < a.outputs.size(); ++i) worst = std::max(worst, std::abs(a.outputs[i] - b.outputs[i]));
  }
  return {worst <= kV1V2Tol, "max output difference " + fmt("%.1e", worst) + " over 100 batches"};
}

Outcome anova_t_identity() {
  Rng rng = make_rng(107);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_vec(rng, 2 + uniform_index(rng, 15));
    auto b = random_vec(rng, 2 + uniform_index(rng, 15));
    for (auto& v : b) v += 0.3;
    const auto t = stats::t_test(a, b, stats::TFlavor::student);
    const std::vector<std::vector<double>> groups{a, b};
    const auto f = stats::anova_oneway(groups);
    const double t2 = t.statistic * t.statistic;
    worst = std::max(worst, std::abs(f.statistic - t2) / std::max(t2, 1e-300));
  }
  return {worst <= kFtRelTol, "max relative |F - t^2| = " + fmt("%.1e", worst) + " over 1000 instances"};
}

Outcome synthetic_signal() {
  const auto& r = signal_run();
  std::string detail = "mean test AUROC";
  bool pass = r.seconds < kSignalSeconds;
  for (Task t : kAllTasks) {
    const double a = mean_auroc(r, t);
    pass = pass && a >= kSignalAuroc;
    detail += " " + std::string(task_name(t)) + " " + fmt("%.4f", a);
  }
  return {pass, detail + ", pipeline " + fmt("%.1f", r.seconds) + " s"};
}

Outcome null_control() {
  std::array<double, kNumTasks> sum{};
  std::array<double, kNumTasks> lo{1, 1, 1};
  std::array<double, kNumTasks> hi{0, 0, 0};
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    TempDir dir("accept_null");
    auto c = signal_config(200 + static_cast<std::uint64_t>(s));
    c.synth.separability = 0.0;
    const auto r = run_pipeline(c, dir.path());
    for (Task t : kAllTasks) {
      const auto i = static_cast<std::size_t>(t);
      const double a = mean_auroc(r, t);
      sum[i] += a;
      lo[i] = std::min(lo[i], a);
      hi[i] = std::max(hi[i], a);
    }
  }
  bool pass = true;
  std::string detail = "mean over " + std::to_string(seeds) + " seeds:";
  for (Task t : kAllTasks) {
    const auto i = static_cast<std::size_t>(t);
    const double m = sum[i] / seeds;
    pass = pass && m >= kNullLow && m <= kNullHigh;
    detail += " " + std::string(task_name(t)) + " " + fmt("%.4f", m) + " [" + fmt("%.3f", lo[i]) + "-" +
              fmt("%.3f", hi[i]) + "]";
  }
  return {pass, detail};
}

Outcome bias_power() {
  const int seeds = 20;
  int hits_confound = 0;
  int hits_null = 0;
  for (int s = 0; s < seeds; ++s) {
    for (bool confound : {true, false}) {
      TempDir dir("accept_power");
      const auto r = run_pipeline(power_config(300 + static_cast<std::uint64_t>(s), confound), dir.path());
      const auto p = corrected_p(r.stats, Attribute::sex, Task::amoeba, "recall");
      if (p && *p < kAlpha) (confound ? hits_confound : hits_null) += 1;
    }
  }
  const double power = static_cast<double>(hits_confound) / seeds;
  const double size = static_cast<double>(hits_null) / seeds;
  return {power >= kPowerRate && size <= kSizeRate,
          "amoeba recall by sex, corrected p < 0.05: confound " + std::to_string(hits_confound) + "/" +
              std::to_string(seeds) + ", no confound " + std::to_string(hits_null) + "/" + std::to_string(seeds) +
              " (separability 1.0, 10000 groups)"};
}

Outcome distribution_conformance() {
  SynthConfig c;
  c.n_groups = 10000;
  c.seed = 109;
  const auto m = generate(c);
  std::array<double, kNumJointStates> joint{};
  double female = 0.0;
  std::array<double, kNumAgeBins> age{};
  for (const auto& cs : m.cases) {
    joint[static_cast<std::size_t>(cs.labels.joint_index())] += 1.0;
    female += cs.sex;
    age[cs.age_bin] += 1.0;
  }
  const double n = static_cast<double>(m.cases.size());
  // Combination frequencies and the sex and age-bin marginals.
  const std::array<double, 5> table{0.5698, 0.1342, 0.1032, 0.1003, 0.0926};
  const std::array<double, 4> ages{0.0262, 0.3605, 0.3939, 0.2194};
  double worst = 0.0;
  for (std::size_t i = 0; i < 5; ++i)
    worst = std::max(worst, std::abs(joint[static_cast<std::size_t>(kSynthCombos[i])] / n - table[i]));
  worst = std::max(worst, std::abs(female / n - 0.4172));
  for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(age[i] / n - ages[i]));
  const double other = joint[0] + joint[6] + joint[7];
  return {worst <= kConformanceTol && other == 0.0,
          "max absolute deviation " + fmt("%.4f", worst) + " at n=10000"};
}

Outcome format_fidelity() {
  const auto& r = signal_run();
  const json& agg = r.eval.at("aggregate");
  std::vector<std::string> problems;
  const auto& rounds = r.eval.at("rounds");
  const double k = static_cast<double>(rounds.size());

  // Per-task 2x2 fold averages.
  bool fractional = false;
  for (Task t : kAllTasks) {
    const std::string name(task_name(t));
    const auto& tab = r.report.at("table_iii").at(name);
    if (tab.at("rows") != json{"Negative", "Positive"} || tab.at("columns") != json{"Negative", "Positive"})
      problems.push_back("task matrix labels for " + name);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        double sum = 0.0;
        for (const auto& rd : rounds) sum += rd.at("tasks").at(name).at("confusion")[i][j].get<double>();
        const double v = tab.at("counts")[i][j].get<double>();
        if (std::abs(v - sum / k) > 1e-9) problems.push_back("task matrix mean for " + name);
        fractional = fractional || v != std::floor(v);
      }
    }
  }

  // Joint matrix: 8 states in display order.
  const auto& t4 = r.report.at("table_iv");
  json labels = json::array();
  for (auto l : kJointDisplayNames) labels.push_back(std::string(l));
  if (t4.at("labels") != labels) problems.push_back("joint labels");
  if (labels != json{"H", "B", "F", "A", "B,F", "F,A", "B,A", "B,F,A"}) problems.push_back("display names");
  for (std::size_t i = 0; i < kNumJointStates; ++i) {
    for (std::size_t j = 0; j < kNumJointStates; ++j) {
      const auto a = static_cast<std::size_t>(kJointDisplayOrder[i]);
      const auto b = static_cast<std::size_t>(kJointDisplayOrder[j]);
      if (std::abs(t4.at("counts")[i][j].get<double>() - agg.at("joint_confusion")[a][b].get<double>()) > 1e-12)
        problems.push_back("joint entry");
    }
  }

  // P-value grid: 6 metrics x (3 tasks x {age, sex}); "-" exactly where no test exists.
  const auto& t5 = r.report.at("table_v");
  if (t5.at("rows") != json{"F1", "Recall", "Precision", "BA", "ACC", "AUROC"}) problems.push_back("grid rows");
  const auto& cols = t5.at("columns");
  if (cols.size() != 6) problems.push_back("grid columns");
  const char* metric_keys[] = {"f1", "recall", "precision", "balanced_acc", "acc", "auroc"};
  int dashes = 0;
  int undefined_auroc = 0;
  for (std::size_t row = 0; row < 6; ++row) {
    for (std::size_t col = 0; col < cols.size(); ++col) {
      const Task t = parse_task(cols[col].at("task").get<std::string>());
      const Attribute a = parse_attribute(cols[col].at("attribute").get<std::string>());
      if (col != (static_cast<std::size_t>(t) * 2 + (a == Attribute::sex ? 1 : 0))) problems.push_back("column order");
      const std::string cell = t5.at("cells")[row][col].get<std::string>();
      const auto p = corrected_p(r.stats, a, t, metric_keys[row]);
      if (cell == "-") ++dashes;
      if ((cell == "-") != !p.has_value()) problems.push_back("grid dash mismatch");
      if (row == 5) {
        bool any_undefined = false;
        for (const auto& c : r.stats.at("cells")) {
          if (c.at("attribute") != attribute_name(a) || c.at("task") != task_name(t) || c.at("metric") != "auroc") continue;
          for (const auto& g : c.at("fold_values"))
            for (const auto& v : g) any_undefined = any_undefined || v.is_null();
        }
        if (any_undefined) {
          ++undefined_auroc;
          if (cell != "-") problems.push_back("undefined subgroup AUROC not shown as -");
        }
      }
    }
  }
  if (r.report_md.find("| Label") == std::string::npos && r.report_md.find("| H |") == std::string::npos)
    problems.push_back("markdown joint table");

  std::string detail = "task matrices fractional=" + std::string(fractional ? "yes" : "no") + ", joint 8x8 in H,B,F,A,BF,FA,BA,BFA order, p-value grid 6x6 with " +
                       std::to_string(dashes) + " '-' cells (" + std::to_string(undefined_auroc) +
                       " from undefined subgroup AUROC)";
  if (!problems.empty()) detail += "; first problem: " + problems.front();
  return {problems.empty() && undefined_auroc > 0, detail};
}

Outcome determinism() {
  const auto& a = signal_run();
  TempDir dir("accept_det");
  const auto b = run_pipeline(signal_config(1), dir.path());
  const bool same = a.report_json == b.report_json && a.report_md == b.report_md && a.roc_csv == b.roc_csv &&
                    a.table_v_csv == b.table_v_csv;
  return {same, same ? "report.json, report.md, roc.csv and table_v.csv byte-identical across two runs"
                     : "reports differ between runs"};
}

}  // namespace

int main(int argc, char** argv) {
  setenv("KERATIX_LOG", "error", 0);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient oracle", gradient_oracle},
      {"AUROC oracle", auroc_oracle},
      {"Youden oracle", youden_oracle},
      {"Holm oracle", holm_oracle},
      {"splitter invariants", splitter_invariants},
      {"V1/V2 equivalence", v1_v2_equivalence},
      {"ANOVA/t identity", anova_t_identity},
      {"synthetic end-to-end signal", synthetic_signal},
      {"null control", null_control},
      {"bias detection power", bias_power},
      {"distribution conformance", distribution_conformance},
      {"format fidelity", format_fidelity},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
