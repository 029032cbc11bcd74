#include "keratix/core/predictions.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "keratix/core/error.hpp"
#include "keratix/core/manifest.hpp"

namespace fs = std::filesystem;

namespace keratix {

namespace {

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

double parse_score(const std::string& field, const char* name, std::size_t row) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(std::string("field '") + name + "' is not a number: '" + field + "'", row);
  }
  return value;
}

}  // namespace

void validate_prediction(const PredictionRecord& r) {
  for (std::size_t t = 0; t < kNumTasks; ++t) {
    if (!in_unit(r.scores[t])) {
      throw ValidationError("prediction '" + r.case_id + "': score_" +
                            std::string(task_name(kAllTasks[t])) + " outside [0,1]");
    }
  }
  if (r.score_sex && !in_unit(*r.score_sex)) {
    throw ValidationError("prediction '" + r.case_id + "': score_sex outside [0,1]");
  }
  if (r.probs_age) {
    double sum = 0.0;
    for (double p : *r.probs_age) {
      if (!in_unit(p)) throw ValidationError("prediction '" + r.case_id + "': probs_age outside [0,1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ValidationError("prediction '" + r.case_id + "': probs_age does not sum to 1");
    }
  }
}

void write_predictions(std::span<const PredictionRecord> records, const fs::path& path) {
  for (const auto& r : records) validate_prediction(r);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write predictions " + path.string());
  out << kPredictionsHeader << '\n';
  for (const auto& r : records) {
    out << r.case_id << ',' << r.fold << ',' << role_name(r.role);
    for (double s : r.scores) out << ',' << format_real(s);
    out << ',';
    if (r.score_sex) out << format_real(*r.score_sex);
    for (std::size_t k = 0; k < kNumAgeBins; ++k) {
      out << ',';
      if (r.probs_age) out << format_real((*r.probs_age)[k]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<PredictionRecord> read_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open predictions " + path.string());
  std::string line;
  std::size_t row = 1;
  if (!std::getline(in, line)) throw FormatError("predictions file is empty", row);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kPredictionsHeader) throw FormatError("unexpected predictions header", row);

  std::vector<PredictionRecord> records;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 11) {
      throw FormatError("expected 11 fields, got " + std::to_string(f.size()), row);
    }
    PredictionRecord r;
    r.case_id = f[0];
    {
      int fold = 0;
      auto [ptr, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), fold);
      if (ec != std::errc() || ptr != f[1].data() + f[1].size()) {
        throw FormatError("field 'fold' is not an integer", row);
      }
      r.fold = fold;
    }
    r.role = parse_role(f[2]);
    for (std::size_t t = 0; t < kNumTasks; ++t) r.scores[t] = parse_score(f[3 + t], "score", row);
    if (!f[6].empty()) r.score_sex = parse_score(f[6], "score_sex", row);
    const bool any_age = !f[7].empty() || !f[8].empty() || !f[9].empty() || !f[10].empty();
    if (any_age) {
      std::array<double, kNumAgeBins> probs{};
      for (std::size_t k = 0; k < kNumAgeBins; ++k) {
        if (f[7 + k].empty()) throw FormatError("partial probs_age columns", row);
        probs[k] = parse_score(f[7 + k], "probs_age", row);
      }
      r.probs_age = probs;
    }
    validate_prediction(r);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace keratix
