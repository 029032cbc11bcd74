#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "keratix/core/types.hpp"

namespace keratix {

inline constexpr std::string_view kPredictionsHeader =
    "case_id,fold,split_role,score_bacteria,score_fungi,score_amoeba,score_sex,"
    "probs_age_0,probs_age_1,probs_age_2,probs_age_3";

// Throws ValidationError for scores outside [0,1] or an age vector that is
// not a simplex within 1e-9.
void validate_prediction(const PredictionRecord& record);

void write_predictions(std::span<const PredictionRecord> records,
                       const std::filesystem::path& path);
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);

}  // namespace keratix
