#include "keratix/core/types.hpp"

#include <cmath>

#include "keratix/core/error.hpp"

namespace keratix {

std::string_view task_name(Task task) {
  switch (task) {
    case Task::bacteria:
      return "bacteria";
    case Task::fungi:
      return "fungi";
    case Task::amoeba:
      return "amoeba";
  }
  return "?";
}

Task parse_task(std::string_view name) {
  for (Task t : kAllTasks) {
    if (task_name(t) == name) return t;
  }
  throw ArgumentError("unknown task '" + std::string(name) + "'");
}

std::string_view attribute_name(Attribute attribute) {
  return attribute == Attribute::sex ? "sex" : "age_bin";
}

Attribute parse_attribute(std::string_view name) {
  if (name == "sex") return Attribute::sex;
  if (name == "age_bin" || name == "age") return Attribute::age_bin;
  throw ArgumentError("unknown attribute '" + std::string(name) + "'");
}

std::uint8_t LabelVector::get(Task task) const noexcept {
  switch (task) {
    case Task::bacteria:
      return bacteria;
    case Task::fungi:
      return fungi;
    case Task::amoeba:
      return amoeba;
  }
  return 0;
}

void LabelVector::set(Task task, std::uint8_t value) noexcept {
  switch (task) {
    case Task::bacteria:
      bacteria = value;
      break;
    case Task::fungi:
      fungi = value;
      break;
    case Task::amoeba:
      amoeba = value;
      break;
  }
}

LabelVector LabelVector::from_joint_index(int index) {
  if (index < 0 || index >= static_cast<int>(kNumJointStates)) {
    throw ArgumentError("joint index out of range: " + std::to_string(index));
  }
  return LabelVector{static_cast<std::uint8_t>(index & 1), static_cast<std::uint8_t>((index >> 1) & 1),
                     static_cast<std::uint8_t>((index >> 2) & 1)};
}

int joint_display_position(int joint_index) {
  for (std::size_t i = 0; i < kJointDisplayOrder.size(); ++i) {
    if (kJointDisplayOrder[i] == joint_index) return static_cast<int>(i);
  }
  throw ArgumentError("joint index out of range: " + std::to_string(joint_index));
}

int age_bin_from_years(double years) {
  if (!std::isfinite(years) || years < 0.0) {
    throw ArgumentError("age must be a nonnegative number of years");
  }
  if (years < 18.0) return 0;
  if (years < 40.0) return 1;
  if (years < 65.0) return 2;
  return 3;
}

std::string_view role_name(SplitRole role) {
  switch (role) {
    case SplitRole::train:
      return "train";
    case SplitRole::validation:
      return "validation";
    case SplitRole::test:
      return "test";
  }
  return "?";
}

SplitRole parse_role(std::string_view name) {
  if (name == "train") return SplitRole::train;
  if (name == "validation") return SplitRole::validation;
  if (name == "test") return SplitRole::test;
  throw FormatError("unknown split role '" + std::string(name) + "'");
}

}  // namespace keratix
