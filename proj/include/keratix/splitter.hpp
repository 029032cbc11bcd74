#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "keratix/core/types.hpp"

namespace keratix {

struct SplitConfig {
  int k = 10;
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;

  // Throws ArgumentError unless k >= 2, the fractions sum to 1 and the
  // validation and test fractions are each 1/k.
  void validate() const;
};

struct RoundSplit {
  std::set<std::string> train;
  std::set<std::string> validation;
  std::set<std::string> test;

  std::optional<SplitRole> role_of(const std::string& group_id) const;
};

// Round r tests on fold r, validates on fold (r+1) mod k and trains on the
// rest.
struct FoldAssignment {
  int k = 0;
  std::map<std::string, int> fold_of;
  std::vector<RoundSplit> rounds;

  static FoldAssignment from_folds(std::map<std::string, int> fold_of, int k);

  std::optional<SplitRole> role_of(int round, const std::string& group_id) const;
};

// Group key of every group in the manifest mapped to the joint label index of
// its first non-mirrored case.
std::map<std::string, int> group_strata(const DatasetManifest& manifest);

// Within each joint label combination the groups are shuffled with the seed
// and dealt round-robin to the folds, continuing from the fold where the
// previous combination stopped. Per fold, each combination gets
// floor(n_c/k) or ceil(n_c/k) groups. Mirrored cases carry their group.
FoldAssignment assign_folds(const DatasetManifest& manifest, const SplitConfig& config);

struct LeakageReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

LeakageReport verify_no_leakage(const DatasetManifest& manifest, const FoldAssignment& assignment);

// `group_id,fold` rows.
void write_assignment(const FoldAssignment& assignment, const std::filesystem::path& path);
FoldAssignment read_assignment(const std::filesystem::path& path);

}  // namespace keratix
