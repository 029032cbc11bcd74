#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "keratix/core/error.hpp"
#include "keratix/pipeline/run_config.hpp"
#include "keratix/pipeline/stages.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

}  // namespace

int main(int argc, char** argv) {
  using namespace keratix;

  CLI::App app{"Multitask keratitis classification pipeline"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string workdir;
  std::optional<std::uint64_t> seed;
  std::string rounds;
  std::string variant;
  std::optional<bool> clinical_loss;
  std::optional<bool> adaptive_threshold;

  for (std::string_view stage : pipeline::kStageNames) {
    CLI::App* sub = app.add_subcommand(std::string(stage), "run the " + std::string(stage) + " stage");
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--workdir", workdir, "artifact directory (overrides the config)");
    sub->add_option("--seed", seed, "run seed");
    sub->add_option("--rounds", rounds, "comma-separated round indices");
    sub->add_option("--variant", variant, "ST, Mv1 or Mv2")->check(CLI::IsMember({"ST", "Mv1", "Mv2"}));
    sub->add_option("--clinical-loss", clinical_loss, "true or false");
    sub->add_option("--adaptive-threshold", adaptive_threshold, "true or false");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    pipeline::RunConfig config = config_path.empty() ? pipeline::RunConfig{} : pipeline::load_run_config(config_path);
    if (!workdir.empty()) config.workdir = workdir;
    if (seed) config.seed = *seed;
    if (!rounds.empty()) config.rounds = pipeline::parse_rounds(rounds);
    if (!variant.empty()) config.model.variant = model::parse_variant(variant);
    if (clinical_loss) config.loss.clinical = *clinical_loss;
    if (adaptive_threshold) {
      config.threshold = *adaptive_threshold ? pipeline::ThresholdMode::adaptive : pipeline::ThresholdMode::fixed;
    }
    pipeline::run_stage(app.get_subcommands().front()->get_name(), config);
  } catch (const IoError& e) {
    std::cerr << "keratix: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const DependencyError& e) {
    std::cerr << "keratix: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "keratix: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}
