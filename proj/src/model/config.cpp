#include "keratix/model/config.hpp"

#include "keratix/core/error.hpp"

namespace keratix::model {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::single_task:
      return "ST";
    case Variant::multitask_v1:
      return "Mv1";
    case Variant::multitask_v2:
      return "Mv2";
    case Variant::sex_head:
      return "sex";
    case Variant::age_head:
      return "age";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  if (name == "ST" || name == "single_task") return Variant::single_task;
  if (name == "Mv1" || name == "multitask_v1") return Variant::multitask_v1;
  if (name == "Mv2" || name == "multitask_v2") return Variant::multitask_v2;
  if (name == "sex" || name == "sex_head") return Variant::sex_head;
  if (name == "age" || name == "age_head") return Variant::age_head;
  throw ArgumentError("unknown model variant '" + std::string(name) + "'");
}

std::string_view trunk_name(TrunkKind t) { return t == TrunkKind::linear ? "linear" : "tiny_conv"; }

TrunkKind parse_trunk(std::string_view name) {
  if (name == "linear") return TrunkKind::linear;
  if (name == "tiny_conv" || name == "conv") return TrunkKind::tiny_conv;
  throw ArgumentError("unknown trunk '" + std::string(name) + "'");
}

std::size_t ModelConfig::output_width() const {
  switch (variant) {
    case Variant::single_task:
    case Variant::sex_head:
      return 1;
    case Variant::multitask_v1:
    case Variant::multitask_v2:
      return 3;
    case Variant::age_head:
      return 4;
  }
  return 0;
}

void ModelConfig::validate() const {
  if (hidden == 0) throw ArgumentError("hidden width must be positive");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ArgumentError("dropout_p must be in [0,1)");
  if (trunk == TrunkKind::linear && input_dim == 0) throw ArgumentError("input_dim must be positive");
  if (trunk == TrunkKind::tiny_conv && image_size < 2) throw ArgumentError("image_size must be at least 2");
}

}  // namespace keratix::model
