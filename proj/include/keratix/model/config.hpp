#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "keratix/core/image.hpp"
#include "keratix/core/types.hpp"

namespace keratix::model {

enum class Variant : std::uint8_t { single_task, multitask_v1, multitask_v2, sex_head, age_head };
enum class TrunkKind : std::uint8_t { linear, tiny_conv };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);
std::string_view trunk_name(TrunkKind t);
TrunkKind parse_trunk(std::string_view name);

struct ModelConfig {
  Variant variant = Variant::multitask_v2;
  Task task = Task::bacteria;  // single_task only
  TrunkKind trunk = TrunkKind::linear;
  std::size_t input_dim = 16;   // linear trunk
  std::size_t image_size = 32;  // conv trunk input is image_size x image_size x 3
  std::size_t hidden = 32;
  double dropout_p = 0.3;
  bool use_batchnorm = true;

  // 1 for single_task and sex_head, 3 for the multitask heads, 4 for age.
  std::size_t output_width() const;
  bool softmax_output() const { return variant == Variant::age_head; }
  void validate() const;
};

}  // namespace keratix::model
