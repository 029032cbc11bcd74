#include "keratix/splitter.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "keratix/core/error.hpp"
#include "keratix/core/manifest.hpp"
#include "keratix/core/random.hpp"

namespace fs = std::filesystem;

namespace keratix {

void SplitConfig::validate() const {
  if (k < 2) throw ArgumentError("k must be at least 2");
  if (train_fraction < 0 || val_fraction < 0 || test_fraction < 0) {
    throw ArgumentError("split fractions must be nonnegative");
  }
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    throw ArgumentError("split fractions must sum to 1");
  }
  const double fold = 1.0 / k;
  if (std::abs(val_fraction - fold) > 1e-9 || std::abs(test_fraction - fold) > 1e-9) {
    throw ArgumentError("validation and test fractions must each be 1/k (one fold each)");
  }
}

std::optional<SplitRole> RoundSplit::role_of(const std::string& group_id) const {
  if (test.contains(group_id)) return SplitRole::test;
  if (validation.contains(group_id)) return SplitRole::validation;
  if (train.contains(group_id)) return SplitRole::train;
  return std::nullopt;
}

FoldAssignment FoldAssignment::from_folds(std::map<std::string, int> fold_of, int k) {
  if (k < 2) throw ArgumentError("k must be at least 2");
  FoldAssignment a;
  a.k = k;
  a.rounds.resize(static_cast<std::size_t>(k));
  for (const auto& [group, fold] : fold_of) {
    if (fold < 0 || fold >= k) {
      throw ValidationError("group '" + group + "': fold " + std::to_string(fold) + " outside 0.." +
                            std::to_string(k - 1));
    }
    for (int r = 0; r < k; ++r) {
      auto& split = a.rounds[static_cast<std::size_t>(r)];
      if (fold == r) {
        split.test.insert(group);
      } else if (fold == (r + 1) % k) {
        split.validation.insert(group);
      } else {
        split.train.insert(group);
      }
    }
  }
  a.fold_of = std::move(fold_of);
  return a;
}

std::optional<SplitRole> FoldAssignment::role_of(int round, const std::string& group_id) const {
  if (round < 0 || round >= static_cast<int>(rounds.size())) {
    throw ArgumentError("round " + std::to_string(round) + " out of range");
  }
  return rounds[static_cast<std::size_t>(round)].role_of(group_id);
}

std::map<std::string, int> group_strata(const DatasetManifest& manifest) {
  std::map<std::string, int> strata;
  for (const Case& c : manifest.cases) {
    if (!c.mirrored) strata.try_emplace(c.group_id, c.labels.joint_index());
  }
  for (const Case& c : manifest.cases) {
    if (!strata.contains(c.group_id)) {
      throw ValidationError("group '" + c.group_id + "' has only mirrored cases");
    }
  }
  return strata;
}

FoldAssignment assign_folds(const DatasetManifest& manifest, const SplitConfig& config) {
  config.validate();
  const auto strata = group_strata(manifest);
  if (static_cast<int>(strata.size()) < config.k) {
    throw ValidationError("manifest has " + std::to_string(strata.size()) + " groups, fewer than k = " +
                          std::to_string(config.k));
  }

  std::array<std::vector<std::string>, kNumJointStates> by_combo;
  for (const auto& [group, combo] : strata) by_combo[static_cast<std::size_t>(combo)].push_back(group);

  Rng rng = make_rng(config.seed, 0x5b1e);
  std::map<std::string, int> fold_of;
  int next = 0;
  for (auto& groups : by_combo) {
    shuffle(groups, rng);
    for (const auto& g : groups) {
      fold_of[g] = next;
      next = (next + 1) % config.k;
    }
  }
  return FoldAssignment::from_folds(std::move(fold_of), config.k);
}

LeakageReport verify_no_leakage(const DatasetManifest& manifest, const FoldAssignment& assignment) {
  LeakageReport report;
  std::set<std::string> groups;
  for (const Case& c : manifest.cases) groups.insert(c.group_id);

  const int k = static_cast<int>(assignment.rounds.size());
  std::map<std::string, int> test_count;
  for (int r = 0; r < k; ++r) {
    const auto& split = assignment.rounds[static_cast<std::size_t>(r)];
    const std::string where = "round " + std::to_string(r) + ": ";
    for (const auto& g : groups) {
      const int roles = static_cast<int>(split.train.contains(g)) +
                        static_cast<int>(split.validation.contains(g)) +
                        static_cast<int>(split.test.contains(g));
      if (roles == 0) {
        report.violations.push_back(where + "group '" + g + "' has no role (partition violation)");
      } else if (roles > 1) {
        report.violations.push_back(where + "group '" + g + "' spans " + std::to_string(roles) +
                                    " roles (leakage)");
      }
    }
    for (const auto* role_set : {&split.train, &split.validation, &split.test}) {
      for (const auto& g : *role_set) {
        if (!groups.contains(g)) {
          report.violations.push_back(where + "group '" + g + "' is not in the manifest");
        }
      }
    }
    for (const auto& g : split.test) ++test_count[g];
  }
  for (const auto& g : groups) {
    const int n = test_count.contains(g) ? test_count[g] : 0;
    if (n != 1) {
      report.violations.push_back("group '" + g + "' is a test group in " + std::to_string(n) +
                                  " rounds (expected 1)");
    }
  }
  return report;
}

void write_assignment(const FoldAssignment& assignment, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write assignment " + path.string());
  out << "#k=" << assignment.k << '\n';
  out << "group_id,fold\n";
  for (const auto& [group, fold] : assignment.fold_of) out << group << ',' << fold << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

FoldAssignment read_assignment(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open assignment " + path.string());
  std::string line;
  std::size_t row = 0;
  int k = 0;
  bool header = false;
  std::map<std::string, int> fold_of;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("#k=", 0) == 0) {
      k = std::stoi(line.substr(3));
      continue;
    }
    if (!header) {
      if (line != "group_id,fold") throw FormatError("unexpected assignment header", row);
      header = true;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 2) throw FormatError("expected 2 fields", row);
    int fold = 0;
    auto [ptr, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), fold);
    if (ec != std::errc() || ptr != f[1].data() + f[1].size()) {
      throw FormatError("field 'fold' is not an integer", row);
    }
    if (!fold_of.emplace(f[0], fold).second) throw FormatError("duplicate group '" + f[0] + "'", row);
  }
  if (!header) throw FormatError("assignment has no header", row);
  if (k == 0) {
    for (const auto& [g, fold] : fold_of) k = std::max(k, fold + 1);
  }
  return FoldAssignment::from_folds(std::move(fold_of), k);
}

}  // namespace keratix
