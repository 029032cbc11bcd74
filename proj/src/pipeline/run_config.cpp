#include "keratix/pipeline/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "keratix/core/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace keratix::pipeline {

namespace {

void check_keys(const json& j, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ValidationError("config section '" + std::string(section) + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError("unknown config key '" + std::string(section) + "." + key + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config key '") + key + "': " + e.what());
  }
}

void parse_synth(const json& j, SynthConfig& s) {
  check_keys(j, "synth",
             {"n_groups", "combo_weights", "sex_p_female", "age_bin_probs", "feature_dim", "separability", "confounds"});
  read(j, "n_groups", s.n_groups);
  read(j, "combo_weights", s.combo_weights);
  read(j, "sex_p_female", s.sex_p_female);
  read(j, "age_bin_probs", s.age_bin_probs);
  read(j, "feature_dim", s.feature_dim);
  read(j, "separability", s.separability);
  if (j.contains("confounds")) {
    s.confounds.clear();
    for (const auto& c : j.at("confounds")) {
      check_keys(c, "synth.confounds", {"attribute", "task", "strength"});
      Confound cf;
      std::string attr = "sex";
      std::string task = "amoeba";
      read(c, "attribute", attr);
      read(c, "task", task);
      read(c, "strength", cf.strength);
      cf.attribute = parse_attribute(attr);
      cf.task = parse_task(task);
      s.confounds.push_back(cf);
    }
  }
}

void parse_model(const json& j, model::ModelConfig& m) {
  check_keys(j, "model", {"variant", "task", "trunk", "hidden", "dropout", "batchnorm", "image_size"});
  std::string variant(model::variant_name(m.variant));
  std::string task(task_name(m.task));
  std::string trunk(model::trunk_name(m.trunk));
  read(j, "variant", variant);
  read(j, "task", task);
  read(j, "trunk", trunk);
  read(j, "hidden", m.hidden);
  read(j, "dropout", m.dropout_p);
  read(j, "batchnorm", m.use_batchnorm);
  read(j, "image_size", m.image_size);
  m.variant = model::parse_variant(variant);
  m.task = parse_task(task);
  m.trunk = model::parse_trunk(trunk);
}

void parse_train(const json& j, model::TrainConfig& t) {
  check_keys(j, "train",
             {"epochs", "batch_size", "learning_rate", "weight_decay", "freeze_epochs", "early_stop_patience",
              "augment"});
  read(j, "epochs", t.epochs);
  read(j, "batch_size", t.batch_size);
  read(j, "learning_rate", t.learning_rate);
  read(j, "weight_decay", t.weight_decay);
  read(j, "freeze_epochs", t.freeze_epochs);
  read(j, "early_stop_patience", t.early_stop_patience);
  read(j, "augment", t.augment_images);
}

void parse_loss(const json& j, LossInputs& l) {
  check_keys(j, "loss", {"clinical", "prices", "flasks", "months"});
  read(j, "clinical", l.clinical);
  read(j, "prices", l.prices);
  read(j, "flasks", l.flasks);
  read(j, "months", l.months);
}

}  // namespace

std::string_view threshold_mode_name(ThresholdMode mode) { return mode == ThresholdMode::fixed ? "fixed" : "adaptive"; }

ThresholdMode parse_threshold_mode(std::string_view name) {
  if (name == "fixed") return ThresholdMode::fixed;
  if (name == "adaptive") return ThresholdMode::adaptive;
  throw ArgumentError("unknown threshold mode '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  try {
    split_config().validate();
    if (!manifest) synth_config().validate();
    model.validate();
    train.validate();
    model::hospital_weights(loss.prices, loss.flasks, loss.months);
  } catch (const ArgumentError& e) {
    throw ValidationError(e.what());
  }
  if (model.variant == model::Variant::sex_head || model.variant == model::Variant::age_head) {
    throw ValidationError("model.variant must be ST, Mv1 or Mv2; demographic heads are enabled by demographic_heads");
  }
  std::set<int> seen;
  for (int r : rounds) {
    if (r < 0 || r >= k) throw ValidationError("round " + std::to_string(r) + " outside [0, k)");
    if (!seen.insert(r).second) throw ValidationError("round " + std::to_string(r) + " listed twice");
  }
  std::set<Attribute> attrs(attributes.begin(), attributes.end());
  if (attrs.size() != attributes.size()) throw ValidationError("attributes listed twice");
}

SplitConfig RunConfig::split_config() const {
  SplitConfig s;
  s.k = k;
  s.val_fraction = 1.0 / k;
  s.test_fraction = 1.0 / k;
  s.train_fraction = 1.0 - s.val_fraction - s.test_fraction;
  s.seed = seed;
  return s;
}

SynthConfig RunConfig::synth_config() const {
  SynthConfig s = synth;
  s.seed = seed;
  return s;
}

std::vector<int> RunConfig::selected_rounds() const {
  if (!rounds.empty()) {
    std::vector<int> r = rounds;
    std::sort(r.begin(), r.end());
    return r;
  }
  std::vector<int> all(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) all[static_cast<std::size_t>(i)] = i;
  return all;
}

model::ObjectiveOptions RunConfig::objective_options() const {
  model::ObjectiveOptions o;
  o.clinical_loss = loss.clinical;
  o.hospital_weights = model::hospital_weights(loss.prices, loss.flasks, loss.months);
  return o;
}

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("run config is not valid JSON: ") + e.what(), 0);
  }
  check_keys(j, "config",
             {"workdir", "manifest", "mirror", "seed", "k", "synth", "model", "train", "loss", "threshold",
              "attributes", "t_test", "demographic_heads", "rounds"});
  RunConfig c;
  std::string path;
  if (j.contains("workdir")) {
    read(j, "workdir", path);
    c.workdir = base_dir / path;
  }
  if (j.contains("manifest")) {
    read(j, "manifest", path);
    c.manifest = base_dir / path;
  }
  read(j, "mirror", c.mirror);
  read(j, "seed", c.seed);
  read(j, "k", c.k);
  if (j.contains("synth")) parse_synth(j.at("synth"), c.synth);
  if (j.contains("model")) parse_model(j.at("model"), c.model);
  if (j.contains("train")) parse_train(j.at("train"), c.train);
  if (j.contains("loss")) parse_loss(j.at("loss"), c.loss);
  if (j.contains("threshold")) {
    std::string mode;
    read(j, "threshold", mode);
    c.threshold = parse_threshold_mode(mode);
  }
  if (j.contains("attributes")) {
    std::vector<std::string> names;
    read(j, "attributes", names);
    c.attributes.clear();
    for (const auto& n : names) c.attributes.push_back(parse_attribute(n));
  }
  if (j.contains("t_test")) {
    std::string flavor;
    read(j, "t_test", flavor);
    c.t_test = stats::parse_flavor(flavor);
  }
  read(j, "demographic_heads", c.demographic_heads);
  read(j, "rounds", c.rounds);
  if (j.contains("synth") && c.manifest) throw ValidationError("config names both a manifest and a synth section");
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path());
}

std::string run_config_json(const RunConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  if (c.manifest) {
    j["manifest"] = c.manifest->filename().string();
  } else {
    ordered_json s;
    s["n_groups"] = c.synth.n_groups;
    s["combo_weights"] = c.synth.combo_weights;
    s["sex_p_female"] = c.synth.sex_p_female;
    s["age_bin_probs"] = c.synth.age_bin_probs;
    s["feature_dim"] = c.synth.feature_dim;
    s["separability"] = c.synth.separability;
    s["confounds"] = ordered_json::array();
    for (const auto& cf : c.synth.confounds) {
      s["confounds"].push_back(
          {{"attribute", attribute_name(cf.attribute)}, {"task", task_name(cf.task)}, {"strength", cf.strength}});
    }
    j["synth"] = s;
  }
  j["mirror"] = c.mirror;
  j["k"] = c.k;
  j["model"] = {{"variant", model::variant_name(c.model.variant)},
                {"task", task_name(c.model.task)},
                {"trunk", model::trunk_name(c.model.trunk)},
                {"hidden", c.model.hidden},
                {"dropout", c.model.dropout_p},
                {"batchnorm", c.model.use_batchnorm},
                {"image_size", c.model.image_size}};
  j["train"] = {{"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"learning_rate", c.train.learning_rate},
                {"weight_decay", c.train.weight_decay},
                {"freeze_epochs", c.train.freeze_epochs},
                {"early_stop_patience", c.train.early_stop_patience},
                {"augment", c.train.augment_images}};
  j["loss"] = {{"clinical", c.loss.clinical},
               {"prices", c.loss.prices},
               {"flasks", c.loss.flasks},
               {"months", c.loss.months}};
  j["threshold"] = threshold_mode_name(c.threshold);
  std::vector<std::string_view> attrs;
  for (Attribute a : c.attributes) attrs.push_back(attribute_name(a));
  j["attributes"] = attrs;
  j["t_test"] = stats::flavor_name(c.t_test);
  j["demographic_heads"] = c.demographic_heads;
  j["rounds"] = c.selected_rounds();
  return j.dump(2);
}

std::vector<int> parse_rounds(std::string_view text) {
  std::vector<int> out;
  std::string item;
  std::istringstream ss{std::string(text)};
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int r = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(r);
    } catch (const std::exception&) {
      throw ArgumentError("bad round index '" + item + "'");
    }
  }
  if (out.empty()) throw ArgumentError("empty round list");
  return out;
}

}  // namespace keratix::pipeline
