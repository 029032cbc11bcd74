#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "../support/temp_dir.hpp"
#include "keratix/core/error.hpp"
#include "keratix/pipeline/run_config.hpp"
#include "keratix/pipeline/stages.hpp"

using namespace keratix;
using namespace keratix::pipeline;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig small_config(const std::filesystem::path& workdir) {
  RunConfig c = parse_run_config(R"({
    "seed": 5,
    "k": 5,
    "rounds": [0, 1],
    "synth": {"n_groups": 150},
    "model": {"variant": "Mv2", "hidden": 8},
    "train": {"epochs": 4, "freeze_epochs": 1},
    "threshold": "adaptive"
  })");
  c.workdir = workdir;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(KERATIX_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("run config parsing") {
  const auto c = parse_run_config(R"({"seed": 3, "k": 4, "model": {"variant": "ST", "task": "fungi"},
                                      "loss": {"clinical": false}, "rounds": [1, 2]})");
  CHECK(c.seed == 3);
  CHECK(c.k == 4);
  CHECK(c.model.variant == model::Variant::single_task);
  CHECK(c.model.task == Task::fungi);
  CHECK_FALSE(c.loss.clinical);
  CHECK(c.selected_rounds() == std::vector<int>{1, 2});
  CHECK(c.split_config().test_fraction == doctest::Approx(0.25));
  CHECK(c.synth_config().seed == 3);

  CHECK_THROWS_AS(parse_run_config(R"({"sed": 3})"), ValidationError);
  CHECK_THROWS_AS(parse_run_config(R"({"model": {"varient": "Mv2"}})"), ValidationError);
  CHECK_THROWS_AS(parse_run_config("{not json"), FormatError);
  CHECK_THROWS_AS(parse_run_config(R"({"k": 4, "rounds": [4]})").validate(), ValidationError);

  CHECK(parse_rounds("0,3,5") == std::vector<int>{0, 3, 5});
  CHECK_THROWS(parse_rounds("1,x"));

  // Every compared variant is expressible.
  for (const char* v : {"ST", "Mv1", "Mv2"}) {
    for (const char* clinical : {"true", "false"}) {
      for (const char* th : {"fixed", "adaptive"}) {
        const std::string text = std::string(R"({"model": {"variant": ")") + v + R"("}, "loss": {"clinical": )" +
                                 clinical + R"(}, "threshold": ")" + th + R"("})";
        CHECK_NOTHROW(parse_run_config(text).validate());
      }
    }
  }
}

TEST_CASE("run config json round trips") {
  const auto c = parse_run_config(R"({"seed": 9, "synth": {"n_groups": 77, "confounds":
                                      [{"attribute": "sex", "task": "amoeba", "strength": 0.8}]}})");
  const auto back = parse_run_config(run_config_json(c));
  CHECK(run_config_json(back) == run_config_json(c));
  REQUIRE(back.synth.confounds.size() == 1);
  CHECK(back.synth.confounds[0].strength == 0.8);
}

TEST_CASE("model slots") {
  RunConfig c;
  CHECK(model_slots(c, 16).size() == 1);
  c.model.variant = model::Variant::single_task;
  c.demographic_heads = true;
  const auto slots = model_slots(c, 16);
  CHECK(slots.size() == 5);
}

TEST_CASE("stages refuse to run without upstream artifacts") {
  TempDir dir("deps");
  const RunConfig c = small_config(dir.path());
  CHECK_THROWS_AS(cmd_eval(c), DependencyError);
  CHECK_THROWS_AS(cmd_split(c), DependencyError);
  try {
    cmd_predict(c);
    FAIL("expected a dependency error");
  } catch (const DependencyError& e) {
    CHECK(std::string(e.what()).find("manifest.csv") != std::string::npos);
  }
  CHECK_THROWS_AS(run_stage("bogus", c), ArgumentError);
}

TEST_CASE("cli exit codes") {
  TempDir dir("cli");
  std::ofstream(dir.path() / "run.json") << R"({"k": 5, "synth": {"n_groups": 60}, "train": {"epochs": 2}})";
  const std::string base = "--config " + (dir.path() / "run.json").string() + " --workdir " + (dir.path() / "w").string();
  CHECK(run_cli("eval " + base) == 1);
  CHECK(run_cli("predict " + base) == 1);
  CHECK(run_cli("synth --config " + (dir.path() / "absent.json").string()) == 2);
  CHECK(run_cli("synth " + base + " --variant Mv3") != 0);
  CHECK(run_cli("synth " + base) == 0);
  CHECK(run_cli("split " + base) == 0);
  CHECK(run_cli("train " + base + " --rounds 0 --variant Mv1 --clinical-loss false") == 0);
  CHECK(std::filesystem::exists(dir.path() / "w" / "models" / "round_0"));
}

TEST_CASE("pipeline runs end to end and is byte-reproducible") {
  TempDir a("pipe_a");
  TempDir b("pipe_b");
  cmd_all(small_config(a.path()));
  cmd_all(small_config(b.path()));
  for (const char* f : {"report/report.json", "report/report.md", "report/roc.csv", "report/table_v.csv",
                        "data/manifest.csv", "split/assignment.csv", "predictions/round_1.csv"}) {
    CAPTURE(f);
    REQUIRE(std::filesystem::exists(a.path() / f));
    CHECK(slurp(a.path() / f) == slurp(b.path() / f));
  }
  const auto report = nlohmann::json::parse(slurp(a.path() / "report/report.json"));
  CHECK(report.at("rounds") == nlohmann::json{0, 1});
  for (const char* t : {"bacteria", "fungi", "amoeba"}) CHECK(report.at("metrics").at(t).contains("auroc"));
  CHECK(report.at("table_iv").at("counts").size() == 8);
  CHECK(report.at("table_v").at("cells").size() == 6);
  CHECK(report.at("table_v").at("cells")[0].size() == 6);

  // Re-running a stage with unchanged inputs reproduces its outputs.
  const std::string before = slurp(a.path() / "eval/metrics.json");
  cmd_eval(small_config(a.path()));
  CHECK(slurp(a.path() / "eval/metrics.json") == before);
}
