#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace keratix {

inline constexpr std::size_t kNumTasks = 3;
inline constexpr std::size_t kNumAgeBins = 4;
inline constexpr std::size_t kNumJointStates = 8;

enum class Task : std::uint8_t { bacteria = 0, fungi = 1, amoeba = 2 };

inline constexpr std::array<Task, kNumTasks> kAllTasks{Task::bacteria, Task::fungi,
                                                       Task::amoeba};

std::string_view task_name(Task task);
Task parse_task(std::string_view name);

enum class Attribute : std::uint8_t { sex, age_bin };

std::string_view attribute_name(Attribute attribute);
Attribute parse_attribute(std::string_view name);

// Height x width x 3 image, row-major HWC, channel values nominally in [0,1].
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(std::size_t height, std::size_t width, double fill = 0.0)
      : height_(height), width_(width), data_(height * width * 3, fill) {}

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return data_[(y * width_ + x) * 3 + c];
  }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[(y * width_ + x) * 3 + c];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

using FeatureVector = std::vector<double>;
using Payload = std::variant<FeatureVector, ImageTensor>;

inline bool is_image(const Payload& payload) {
  return std::holds_alternative<ImageTensor>(payload);
}

struct LabelVector {
  std::uint8_t bacteria = 0;
  std::uint8_t fungi = 0;
  std::uint8_t amoeba = 0;

  // bacteria*1 + fungi*2 + amoeba*4
  int joint_index() const noexcept { return bacteria + 2 * fungi + 4 * amoeba; }
  std::uint8_t get(Task task) const noexcept;
  void set(Task task, std::uint8_t value) noexcept;

  static LabelVector from_joint_index(int index);

  friend bool operator==(const LabelVector&, const LabelVector&) = default;
};

// Display order of the joint states in confusion tables:
// H, B, F, A, BF, FA, BA, BFA.
inline constexpr std::array<int, kNumJointStates> kJointDisplayOrder{0, 1, 2, 4, 3, 6, 5, 7};
inline constexpr std::array<std::string_view, kNumJointStates> kJointDisplayNames{
    "H", "B", "F", "A", "B,F", "F,A", "B,A", "B,F,A"};

// Position of a joint index in kJointDisplayOrder.
int joint_display_position(int joint_index);

// Age bins: 0 <-> 0-17, 1 <-> 18-39, 2 <-> 40-64, 3 <-> 65 and over.
int age_bin_from_years(double years);

struct Case {
  std::string case_id;
  std::string group_id;
  std::string payload_ref;
  Payload payload;
  LabelVector labels;
  std::uint8_t sex = 0;  // 0 male, 1 female
  std::uint8_t age_bin = 0;
  bool mirrored = false;

  std::uint8_t attribute(Attribute a) const noexcept {
    return a == Attribute::sex ? sex : age_bin;
  }
};

enum class PayloadKind : std::uint8_t { feature_vector, image };

struct ManifestMetadata {
  std::uint64_t seed = 0;
  std::string source = "external";  // "synthetic" or "external"
  PayloadKind kind = PayloadKind::feature_vector;
  std::size_t feature_dim = 0;
  std::size_t image_size = 0;
};

struct DatasetManifest {
  std::vector<Case> cases;
  ManifestMetadata metadata;
};

enum class SplitRole : std::uint8_t { train, validation, test };

std::string_view role_name(SplitRole role);
SplitRole parse_role(std::string_view name);

struct PredictionRecord {
  std::string case_id;
  int fold = 0;
  SplitRole role = SplitRole::test;
  std::array<double, kNumTasks> scores{};
  std::optional<double> score_sex;
  std::optional<std::array<double, kNumAgeBins>> probs_age;

  double score(Task task) const { return scores[static_cast<std::size_t>(task)]; }

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

}  // namespace keratix
