#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "keratix/core/random.hpp"
#include "keratix/core/types.hpp"
#include "keratix/model/network.hpp"

namespace fixture {

// One original case per group, joint labels drawn from `joints`, with a
// small feature payload.
inline keratix::DatasetManifest random_manifest(keratix::Rng& rng, std::size_t groups,
                                                const std::vector<int>& joints = {1, 2, 3, 4, 5, 6, 7}) {
  using namespace keratix;
  DatasetManifest m;
  for (std::size_t g = 0; g < groups; ++g) {
    Case c;
    c.case_id = "c" + std::to_string(g);
    c.group_id = "g" + std::to_string(g);
    c.labels = LabelVector::from_joint_index(joints[uniform_index(rng, joints.size())]);
    c.sex = static_cast<std::uint8_t>(uniform_index(rng, 2));
    c.age_bin = static_cast<std::uint8_t>(uniform_index(rng, 4));
    c.payload = FeatureVector{standard_normal(rng), standard_normal(rng)};
    m.cases.push_back(c);
  }
  return m;
}

// V1 parameters holding the same head as a V2 model.
inline keratix::model::Model stacked_v1(const keratix::model::Model& v2) {
  using namespace keratix;
  model::ModelConfig c = v2.config;
  c.variant = model::Variant::multitask_v1;
  model::Model v1 = model::Model::create(c);
  for (const auto& b : v2.layout) {
    if (b.name.rfind("head.", 0) == 0) continue;
    std::copy_n(v2.values(b.name).begin(), b.size(), v1.values(b.name).begin());
  }
  const auto w = v2.values("head.W");
  const auto bias = v2.values("head.b");
  const std::size_t h = v2.config.hidden;
  for (Task t : kAllTasks) {
    const auto i = static_cast<std::size_t>(t);
    const std::string prefix = "head." + std::string(task_name(t)) + ".";
    std::copy_n(w.begin() + static_cast<long>(i * h), h, v1.values(prefix + "W").begin());
    v1.values(prefix + "b")[0] = bias[i];
  }
  v1.running_mean = v2.running_mean;
  v1.running_var = v2.running_var;
  return v1;
}

}  // namespace fixture
