#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "../support/temp_dir.hpp"
#include "keratix/core/error.hpp"
#include "keratix/core/manifest.hpp"
#include "keratix/model/adam.hpp"
#include "keratix/model/checkpoint.hpp"
#include "keratix/model/saliency.hpp"
#include "keratix/model/trainer.hpp"
#include "keratix/synth.hpp"

using namespace keratix;
using namespace keratix::model;

namespace {

ModelConfig feature_config(Variant v, bool bn = true, double dropout = 0.3) {
  ModelConfig c;
  c.variant = v;
  c.trunk = TrunkKind::linear;
  c.input_dim = 6;
  c.hidden = 5;
  c.use_batchnorm = bn;
  c.dropout_p = dropout;
  return c;
}

ModelConfig conv_config(Variant v) {
  ModelConfig c;
  c.variant = v;
  c.trunk = TrunkKind::tiny_conv;
  c.image_size = 6;
  c.hidden = 3;
  return c;
}

std::vector<double> random_input(Rng& rng, std::size_t count) {
  std::vector<double> x(count);
  for (auto& v : x) v = standard_normal(rng);
  return x;
}

std::vector<std::uint8_t> random_targets(Rng& rng, const ModelConfig& c, std::size_t n) {
  std::vector<std::uint8_t> y;
  if (c.softmax_output()) {
    for (std::size_t i = 0; i < n; ++i) y.push_back(static_cast<std::uint8_t>(uniform_index(rng, 4)));
  } else {
    for (std::size_t i = 0; i < n * c.output_width(); ++i) y.push_back(static_cast<std::uint8_t>(uniform_index(rng, 2)));
  }
  return y;
}

Objective objective_for(const ModelConfig& c, Objective::Kind kind) {
  Objective o;
  o.kind = kind;
  if (kind == Objective::Kind::cross_entropy) {
    o.ce_weights = {1.5, 0.7, 1.0, 2.0};
  } else if (c.output_width() == 3) {
    o.spec.class_weights = {0.4, 2.5, 1.2};
    o.spec.hospital_weights = {0.13151, 0.59063, 0.27786};
  } else {
    o.spec.class_weights = {1.7};
    o.spec.hospital_weights = {1.0};
  }
  return o;
}

DatasetManifest small_synth(double separability, std::size_t groups, std::uint64_t seed) {
  SynthConfig sc;
  sc.n_groups = groups;
  sc.separability = separability;
  sc.seed = seed;
  return generate(sc);
}

}  // namespace

TEST_CASE("zero weights give one half on every output") {
  Model m = Model::create(feature_config(Variant::multitask_v2));
  Rng rng = make_rng(1);
  const auto x = random_input(rng, 4 * 6);
  const auto out = forward(m, x, 4, Mode::inference);
  for (double v : out.outputs) CHECK(v == 0.5);
}

TEST_CASE("output widths and softmax normalization") {
  CHECK(feature_config(Variant::single_task).output_width() == 1);
  CHECK(feature_config(Variant::sex_head).output_width() == 1);
  CHECK(feature_config(Variant::multitask_v1).output_width() == 3);
  CHECK(feature_config(Variant::age_head).output_width() == 4);

  Rng rng = make_rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    Model m = Model::create(feature_config(Variant::age_head));
    m.initialize(static_cast<std::uint64_t>(trial));
    for (auto& p : m.params) p *= 5.0;
    const auto x = random_input(rng, 7 * 6);
    const auto out = forward(m, x, 7, Mode::inference);
    for (std::size_t i = 0; i < 7; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < 4; ++k) s += out.outputs[i * 4 + k];
      CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("V1 and V2 agree with stacked-identical parameters") {
  Rng rng = make_rng(3);
  for (int batch = 0; batch < 100; ++batch) {
    Model v2 = Model::create(feature_config(Variant::multitask_v2));
    v2.initialize(static_cast<std::uint64_t>(batch));
    for (std::size_t i = 0; i < v2.running_mean.size(); ++i) {
      v2.running_mean[i] = 0.1 * standard_normal(rng);
      v2.running_var[i] = 0.5 + uniform01(rng);
    }
    const Model v1 = fixture::stacked_v1(v2);
    const std::size_t n = 1 + uniform_index(rng, 16);
    const auto x = random_input(rng, n * 6);
    const auto a = forward(v1, x, n, Mode::inference);
    const auto b = forward(v2, x, n, Mode::inference);
    REQUIRE(a.outputs.size() == b.outputs.size());
    for (std::size_t i = 0; i < a.outputs.size(); ++i) CHECK(std::abs(a.outputs[i] - b.outputs[i]) <= 1e-12);

    const Objective o = objective_for(v2.config, Objective::Kind::clinical);
    const auto y = random_targets(rng, v2.config, n);
    CHECK(std::abs(o.value(a.outputs, y) - o.value(b.outputs, y)) <= 1e-12);
  }
}

TEST_CASE("analytic gradients match central finite differences") {
  struct Setup {
    ModelConfig config;
    Objective::Kind kind;
  };
  const std::vector<Setup> setups{
      {feature_config(Variant::multitask_v2), Objective::Kind::clinical},
      {feature_config(Variant::multitask_v1), Objective::Kind::clinical},
      {feature_config(Variant::multitask_v2), Objective::Kind::weighted_bce},
      {feature_config(Variant::multitask_v1), Objective::Kind::weighted_bce},
      {feature_config(Variant::single_task), Objective::Kind::weighted_bce},
      {feature_config(Variant::single_task), Objective::Kind::clinical},
      {feature_config(Variant::sex_head, false, 0.0), Objective::Kind::weighted_bce},
      {feature_config(Variant::age_head), Objective::Kind::cross_entropy},
      {conv_config(Variant::multitask_v2), Objective::Kind::clinical},
      {conv_config(Variant::multitask_v1), Objective::Kind::clinical},
      {conv_config(Variant::age_head), Objective::Kind::cross_entropy},
  };
  Rng rng = make_rng(4);
  int index = 0;
  for (const auto& s : setups) {
    CAPTURE(index);
    Model m = Model::create(s.config);
    m.initialize(static_cast<std::uint64_t>(index) + 100);
    // Nontrivial batch-norm affine parameters.
    if (s.config.use_batchnorm) {
      for (auto& g : m.values("bn.gamma")) g = 0.5 + uniform01(rng);
      for (auto& b : m.values("bn.beta")) b = 0.2 * standard_normal(rng);
    }
    const std::size_t n = 6;
    const auto x = random_input(rng, n * m.input_width());
    const auto y = random_targets(rng, s.config, n);
    const Objective o = objective_for(s.config, s.kind);
    CHECK(oracle::fd_gradient_error(m, x, n, y, o, 77 + static_cast<std::uint64_t>(index), 100) < 1e-4);
    ++index;
  }
}

TEST_CASE("frozen trunk gradient entries are exactly zero") {
  for (const auto& cfg : {feature_config(Variant::multitask_v2), conv_config(Variant::multitask_v1)}) {
    Model m = Model::create(cfg);
    m.initialize(5);
    Rng rng = make_rng(5);
    const auto x = random_input(rng, 4 * m.input_width());
    const auto y = random_targets(rng, cfg, 4);
    const auto g = gradients(m, x, 4, y, objective_for(cfg, Objective::Kind::clinical), 9, true);
    const auto full = gradients(m, x, 4, y, objective_for(cfg, Objective::Kind::clinical), 9, false);
    bool trunk_nonzero = false;
    for (const auto& b : m.layout) {
      for (std::size_t i = b.offset; i < b.offset + b.size(); ++i) {
        if (b.trunk) {
          CHECK(g.grad[i] == 0.0);
          trunk_nonzero = trunk_nonzero || full.grad[i] != 0.0;
        } else {
          CHECK(g.grad[i] == full.grad[i]);
        }
      }
    }
    CHECK(trunk_nonzero);
  }
}

TEST_CASE("gradient vanishes at a perfect-prediction stationary point") {
  ModelConfig cfg = feature_config(Variant::multitask_v2, false, 0.0);
  Model m = Model::create(cfg);
  auto b = m.values("head.b");
  b[0] = 60.0;
  b[1] = -60.0;
  b[2] = 60.0;
  Rng rng = make_rng(6);
  const std::size_t n = 5;
  const auto x = random_input(rng, n * 6);
  std::vector<std::uint8_t> y;
  for (std::size_t i = 0; i < n; ++i) y.insert(y.end(), {1, 0, 1});
  const auto g = gradients(m, x, n, y, objective_for(cfg, Objective::Kind::clinical), 1);
  for (double v : g.grad) CHECK(std::abs(v) <= 1e-8);
}

TEST_CASE("adam step") {
  SUBCASE("first step moves by the learning rate") {
    std::vector<double> p{0.3};
    AdamState s(1);
    adam_step(p, std::vector<double>{1.0}, s, 0.01, 0.0);
    CHECK(p[0] - 0.3 == doctest::Approx(-0.01 / (1.0 + 1e-8)).epsilon(1e-9));
    CHECK(s.step == 1);
  }
  SUBCASE("zero gradient leaves parameters unchanged") {
    std::vector<double> p{0.3, -2.0, 5.0};
    const auto before = p;
    AdamState s(3);
    adam_step(p, std::vector<double>(3, 0.0), s, 0.01, 0.0);
    CHECK(p == before);
  }
  SUBCASE("negating gradients negates updates") {
    Rng rng = make_rng(7);
    std::vector<double> g(33);
    for (auto& v : g) v = standard_normal(rng);
    std::vector<double> ng(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) ng[i] = -g[i];
    std::vector<double> p1(g.size(), 0.0);
    std::vector<double> p2(g.size(), 0.0);
    AdamState s1(g.size());
    AdamState s2(g.size());
    adam_step(p1, g, s1, 1e-3, 0.0);
    adam_step(p2, ng, s2, 1e-3, 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(p1[i] == -p2[i]);
  }
  SUBCASE("closed form over two steps with weight decay") {
    std::vector<double> p{1.0};
    AdamState s(1);
    const double lr = 0.1;
    const double wd = 0.01;
    double m = 0.0;
    double v = 0.0;
    double theta = 1.0;
    for (int t = 1; t <= 2; ++t) {
      const double g = 0.5 * t;
      adam_step(p, std::vector<double>{g}, s, lr, wd);
      const double ge = g + wd * theta;
      m = 0.9 * m + 0.1 * ge;
      v = 0.999 * v + 0.001 * ge * ge;
      theta -= lr * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
      CHECK(p[0] == doctest::Approx(theta).epsilon(1e-12));
    }
  }
}

TEST_CASE("training reduces validation loss on separable data") {
  const auto manifest = small_synth(5.0, 600, 11);
  SplitConfig sc;
  sc.seed = 11;
  const auto assignment = assign_folds(manifest, sc);
  ModelConfig cfg = feature_config(Variant::multitask_v2);
  cfg.input_dim = 16;
  cfg.hidden = 16;
  TrainConfig tc;
  tc.epochs = 50;
  tc.seed = 3;
  ObjectiveOptions opts;
  opts.clinical_loss = false;
  const auto result = train(manifest, assignment, 0, cfg, tc, opts);
  REQUIRE(result.objective.kind == Objective::Kind::weighted_bce);
  REQUIRE(result.best_epoch >= 1);
  const double best = result.log[static_cast<std::size_t>(result.best_epoch - 1)].val_loss;
  CHECK(best <= 0.5 * result.initial_val_loss);
  for (const auto& e : result.log) CHECK(e.val_loss >= best);
}

TEST_CASE("trainer contracts") {
  const auto manifest = small_synth(2.0, 200, 12);
  const auto assignment = assign_folds(manifest, SplitConfig{});
  ModelConfig cfg = feature_config(Variant::multitask_v2);
  cfg.input_dim = 16;
  TrainConfig tc;
  tc.seed = 8;
  tc.epochs = 30;
  ObjectiveOptions opts;

  SUBCASE("patience zero stops at the first non-improving epoch") {
    tc.early_stop_patience = 0;
    tc.freeze_epochs = 0;
    const auto r = train(manifest, assignment, 0, cfg, tc, opts);
    double best = r.initial_val_loss;
    std::size_t first_worse = r.log.size();
    for (std::size_t i = 0; i < r.log.size(); ++i) {
      if (i > 0 && !(r.log[i].val_loss < best)) {
        first_worse = i;
        break;
      }
      best = std::min(best, r.log[i].val_loss);
    }
    if (first_worse < r.log.size()) CHECK(r.log.size() == first_worse + 1);
    else CHECK(r.log.size() == static_cast<std::size_t>(tc.epochs));
  }

  SUBCASE("trunk is bit-identical to initialization through the frozen epochs") {
    tc.epochs = 10;
    tc.freeze_epochs = 10;
    tc.early_stop_patience = 100;
    const auto r = train(manifest, assignment, 0, cfg, tc, opts);
    Model init = Model::create(cfg);
    init.initialize(tc.seed);
    bool heads_moved = false;
    for (const auto& b : init.layout) {
      const auto a = r.model.values(b.name);
      const auto i = init.values(b.name);
      if (b.trunk) {
        CHECK(std::equal(a.begin(), a.end(), i.begin()));
      } else if (!std::equal(a.begin(), a.end(), i.begin())) {
        heads_moved = true;
      }
    }
    CHECK(heads_moved);
    for (const auto& e : r.log) CHECK(e.frozen);

    tc.epochs = 11;
    const auto r11 = train(manifest, assignment, 0, cfg, tc, opts);
    CHECK_FALSE(r11.log.back().frozen);
  }

  SUBCASE("identical seeds give identical logs and parameters") {
    const auto a = train(manifest, assignment, 1, cfg, tc, opts);
    const auto b = train(manifest, assignment, 1, cfg, tc, opts);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
      CHECK(a.log[i].train_loss == b.log[i].train_loss);
      CHECK(a.log[i].val_loss == b.log[i].val_loss);
    }
    CHECK(a.model.params == b.model.params);
  }

  SUBCASE("empty splits are rejected") {
    std::vector<Case> none;
    CHECK_THROWS_AS(train_cases(none, manifest.cases, cfg, tc, opts), ValidationError);
    CHECK_THROWS_AS(train_cases(manifest.cases, none, cfg, tc, opts), ValidationError);
  }
}

TEST_CASE("predict is deterministic, bounded and mirror-consistent") {
  const auto manifest = mirror_expand(small_synth(2.0, 100, 13));
  const auto assignment = assign_folds(manifest, SplitConfig{});
  ModelConfig cfg = feature_config(Variant::multitask_v2);
  cfg.input_dim = 16;
  TrainConfig tc;
  tc.epochs = 3;
  const auto r = train(manifest, assignment, 0, cfg, tc, ObjectiveOptions{});
  const auto a = predict(r.model, manifest, assignment, 0);
  const auto b = predict(r.model, manifest, assignment, 0);
  CHECK(a == b);
  REQUIRE(a.size() == manifest.cases.size());
  std::map<std::string, const PredictionRecord*> by_id;
  for (const auto& rec : a) {
    by_id[rec.case_id] = &rec;
    for (double s : rec.scores) {
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
  }
  for (const auto& c : manifest.cases) {
    if (!c.mirrored) continue;
    const std::string src = c.case_id.substr(0, c.case_id.size() - 2);
    CHECK(by_id.at(c.case_id)->scores == by_id.at(src)->scores);
  }
  const auto tests = predict(r.model, manifest, assignment, 0, SplitRole::test);
  for (const auto& rec : tests) CHECK(rec.role == SplitRole::test);
  CHECK(tests.size() < a.size());
}

TEST_CASE("checkpoint round trip is lossless") {
  TempDir dir("ckpt");
  for (const auto& cfg : {feature_config(Variant::multitask_v1), conv_config(Variant::age_head)}) {
    Model m = Model::create(cfg);
    m.initialize(21);
    Rng rng = make_rng(21);
    for (auto& v : m.running_mean) v = standard_normal(rng) / 3.0;
    for (auto& v : m.running_var) v = uniform01(rng) + 0.1;
    save_checkpoint(m, dir.path() / "m.ckpt");
    const Model back = load_checkpoint(dir.path() / "m.ckpt");
    CHECK(back.params == m.params);
    CHECK(back.running_mean == m.running_mean);
    CHECK(back.running_var == m.running_var);
    CHECK(back.config.variant == cfg.variant);
    CHECK(back.config.trunk == cfg.trunk);
    CHECK(back.layout.size() == m.layout.size());
  }
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "missing.ckpt"), IoError);
}

namespace {

Case image_case(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  ImageTensor img(h, w);
  for (auto& v : img.values()) v = uniform01(rng);
  Case c;
  c.case_id = "img";
  c.group_id = "g";
  c.labels = {1, 0, 0};
  c.payload = img;
  return c;
}

}  // namespace

TEST_CASE("saliency maps") {
  ModelConfig cfg = conv_config(Variant::multitask_v2);
  const Case c = image_case(9, 7, 3);

  SUBCASE("zero trunk weights give an all-zero map") {
    Model m = Model::create(cfg);
    m.initialize(1);
    for (auto& v : m.values("trunk.conv.W")) v = 0.0;
    const auto s = saliency_map(m, c, Task::bacteria);
    for (double v : s.values) CHECK(v == 0.0);
  }
  SUBCASE("shape matches the input and the maximum is exactly one") {
    Model m = Model::create(cfg);
    m.initialize(2);
    for (Task t : kAllTasks) {
      const auto s = saliency_map(m, c, t);
      CHECK(s.height == 9);
      CHECK(s.width == 7);
      REQUIRE(s.values.size() == 63);
      CHECK(*std::max_element(s.values.begin(), s.values.end()) == 1.0);
      for (double v : s.values) CHECK(v >= 0.0);
    }
  }
  SUBCASE("map agrees with finite differences of the score") {
    Model m = Model::create(cfg);
    m.initialize(4);
    const auto s = saliency_map(m, c, Task::fungi);
    auto score = [&](const Case& cs) { return predict_outputs(m, std::span<const Case>(&cs, 1))[1]; };
    std::vector<double> raw(63, 0.0);
    const double h = 1e-6;
    for (std::size_t y = 0; y < 9; ++y) {
      for (std::size_t x = 0; x < 7; ++x) {
        for (std::size_t ch = 0; ch < 3; ++ch) {
          Case p = c;
          Case q = c;
          std::get<ImageTensor>(p.payload).at(y, x, ch) += h;
          std::get<ImageTensor>(q.payload).at(y, x, ch) -= h;
          raw[y * 7 + x] = std::max(raw[y * 7 + x], std::abs(score(p) - score(q)) / (2 * h));
        }
      }
    }
    const double peak = *std::max_element(raw.begin(), raw.end());
    for (std::size_t i = 0; i < raw.size(); ++i) CHECK(s.values[i] == doctest::Approx(raw[i] / peak).epsilon(1e-5));
  }
  SUBCASE("feature payloads are rejected") {
    Model m = Model::create(feature_config(Variant::multitask_v2));
    Case f;
    f.payload = FeatureVector(6, 0.0);
    CHECK_THROWS_AS(saliency_map(m, f, Task::bacteria), UnsupportedModeError);
  }
}
