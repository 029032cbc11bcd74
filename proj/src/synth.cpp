#include "keratix/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "keratix/core/error.hpp"
#include "keratix/core/random.hpp"

namespace keratix {

namespace {

constexpr std::uint64_t kDirectionStream = 0xd1ec;
constexpr std::uint64_t kLabelStream = 0x1abe;
constexpr std::uint64_t kNoiseStream = 0x2015e;

void normalize(std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  for (double& x : v) x /= n;
}

// Gram-Schmidt step; returns false when the residual is degenerate.
bool orthogonalize(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) {
      double proj = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) proj += v[i] * b[i];
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * b[i];
    }
  }
  double n = 0.0;
  for (double x : v) n += x * x;
  return n > 1e-12;
}

std::vector<double> random_gaussian(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  for (double& x : v) x = standard_normal(rng);
  return v;
}

std::uint64_t coupling_stream(Attribute attribute, Task task) {
  return 0xc0f0 + 16 * static_cast<std::uint64_t>(attribute) + static_cast<std::uint64_t>(task);
}

void shift_features(DatasetManifest& m, Attribute attribute, Task task, double strength,
                    const std::vector<double>& direction) {
  for (Case& c : m.cases) {
    if (!attribute_indicator(c, attribute) || c.labels.get(task) != 1) continue;
    auto& fv = std::get<FeatureVector>(c.payload);
    for (std::size_t i = 0; i < fv.size(); ++i) fv[i] += strength * direction[i];
  }
}

std::string padded_id(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%06zu", prefix, i);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  auto check_weights = [](std::span<const double> w, const char* name) {
    double sum = 0.0;
    for (double x : w) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw ArgumentError(std::string(name) + " must be nonnegative");
      sum += x;
    }
    if (!(sum > 0.0)) throw ArgumentError(std::string(name) + " must not all be zero");
  };
  check_weights(combo_weights, "combo_weights");
  check_weights(age_bin_probs, "age_bin_probs");
  if (!(sex_p_female >= 0.0 && sex_p_female <= 1.0)) throw ArgumentError("sex_p_female must be in [0,1]");
  if (!(separability >= 0.0) || !std::isfinite(separability)) {
    throw ArgumentError("separability must be nonnegative");
  }
  if (n_groups == 0) throw ArgumentError("n_groups must be positive");
  const std::size_t needed = kSynthCombos.size() + (confounds.empty() ? 0 : 1);
  if (feature_dim < needed) {
    throw ArgumentError("feature_dim must be at least " + std::to_string(needed));
  }
  for (const auto& cf : confounds) {
    if (!std::isfinite(cf.strength)) throw ArgumentError("confound strength must be finite");
  }
}

bool attribute_indicator(const Case& c, Attribute attribute) {
  return attribute == Attribute::sex ? c.sex == 1 : c.age_bin >= 2;
}

std::vector<std::vector<double>> class_directions(std::uint64_t seed, std::size_t dim) {
  if (dim < kSynthCombos.size()) throw ArgumentError("feature_dim too small for class directions");
  Rng rng = make_rng(seed, kDirectionStream);
  std::vector<std::vector<double>> basis;
  while (basis.size() < kSynthCombos.size()) {
    auto v = random_gaussian(rng, dim);
    if (!orthogonalize(v, basis)) continue;
    normalize(v);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::vector<double> coupling_direction(std::uint64_t seed, std::size_t dim, Attribute attribute, Task task) {
  if (dim <= kSynthCombos.size()) throw ArgumentError("feature_dim too small for a coupling direction");
  const auto basis = class_directions(seed, dim);
  Rng rng = make_rng(seed, coupling_stream(attribute, task));
  while (true) {
    auto v = random_gaussian(rng, dim);
    if (!orthogonalize(v, basis)) continue;
    normalize(v);
    return v;
  }
}

std::vector<std::size_t> quota_counts(std::span<const double> weights, std::size_t n) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = weights[i] / total * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  // Largest remainder first; lower index wins ties.
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t j = 0; assigned < n; ++j, ++assigned) ++counts[remainders[j % remainders.size()].second];
  return counts;
}

DatasetManifest generate(const SynthConfig& config) {
  config.validate();
  const std::size_t n = config.n_groups;
  const std::size_t dim = config.feature_dim;

  Rng label_rng = make_rng(config.seed, kLabelStream);
  auto expand = [&](std::span<const double> weights) {
    const auto counts = quota_counts(weights, n);
    std::vector<int> values;
    values.reserve(n);
    for (std::size_t cat = 0; cat < counts.size(); ++cat) values.insert(values.end(), counts[cat], static_cast<int>(cat));
    shuffle(values, label_rng);
    return values;
  };
  const auto combos = expand(config.combo_weights);
  const std::array<double, 2> sex_weights{1.0 - config.sex_p_female, config.sex_p_female};
  const auto sexes = expand(sex_weights);
  const auto ages = expand(config.age_bin_probs);

  const auto directions = class_directions(config.seed, dim);
  Rng noise_rng = make_rng(config.seed, kNoiseStream);

  DatasetManifest m;
  m.metadata.seed = config.seed;
  m.metadata.source = "synthetic";
  m.metadata.kind = PayloadKind::feature_vector;
  m.metadata.feature_dim = dim;
  m.cases.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Case c;
    c.case_id = padded_id('c', i);
    c.group_id = padded_id('g', i);
    const auto combo_slot = static_cast<std::size_t>(combos[i]);
    c.labels = LabelVector::from_joint_index(kSynthCombos[combo_slot]);
    c.sex = static_cast<std::uint8_t>(sexes[i]);
    c.age_bin = static_cast<std::uint8_t>(ages[i]);
    FeatureVector fv(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      fv[d] = config.separability * directions[combo_slot][d] + standard_normal(noise_rng);
    }
    c.payload = std::move(fv);
    m.cases.push_back(std::move(c));
  }
  for (const auto& cf : config.confounds) {
    if (cf.strength == 0.0) continue;
    shift_features(m, cf.attribute, cf.task, cf.strength,
                   coupling_direction(config.seed, dim, cf.attribute, cf.task));
  }
  return m;
}

DatasetManifest inject_confound(const DatasetManifest& manifest, Attribute attribute, Task task,
                                double strength, std::uint64_t seed) {
  for (const Case& c : manifest.cases) {
    if (is_image(c.payload)) throw UnsupportedModeError("confound injection needs feature-vector payloads");
  }
  if (strength == 0.0) return manifest;
  if (manifest.cases.empty()) return manifest;
  const std::size_t dim = std::get<FeatureVector>(manifest.cases.front().payload).size();
  DatasetManifest out = manifest;
  shift_features(out, attribute, task, strength, coupling_direction(seed, dim, attribute, task));
  return out;
}

}  // namespace keratix
