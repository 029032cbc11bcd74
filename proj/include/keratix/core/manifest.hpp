#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "keratix/core/types.hpp"

namespace keratix {

// Manifest text format:
//
//   #seed=<uint>            optional metadata lines, before the header
//   #source=synthetic|external
//   #kind=features|image
//   case_id,group_id,payload_ref,bacteria,fungi,amoeba,sex,age_bin,mirrored
//
// An `age` column (years) may replace `age_bin`; it is binned on load.
// payload_ref is resolved relative to the manifest directory. Feature files
// hold one real per line; image files are binary or ASCII PPM. A mirrored
// image row references its source image and is flipped on load.
inline constexpr std::string_view kManifestHeader =
    "case_id,group_id,payload_ref,bacteria,fungi,amoeba,sex,age_bin,mirrored";

DatasetManifest load_manifest(const std::filesystem::path& path);

// Writes the manifest and any payload that has no payload_ref yet (under
// `payloads/` next to the manifest). Assigned refs are stored back into
// `manifest`.
void save_manifest(DatasetManifest& manifest, const std::filesystem::path& path);

// Throws ValidationError naming the case and field on the first violation.
void validate_manifest(const DatasetManifest& manifest);
void validate_case(const Case& c);

// Appends a horizontally flipped twin of every case. Feature payloads are
// copied unchanged. Throws ValidationError if any case is already mirrored.
DatasetManifest mirror_expand(const DatasetManifest& manifest);

bool has_mirrored(const DatasetManifest& manifest);

FeatureVector read_feature_vector(const std::filesystem::path& path);
void write_feature_vector(std::span<const double> values, const std::filesystem::path& path);

ImageTensor read_ppm(const std::filesystem::path& path);
void write_ppm(const ImageTensor& image, const std::filesystem::path& path);

std::vector<std::string> split_csv_line(std::string_view line);

// Shortest text that parses back to the same double.
std::string format_real(double value);

}  // namespace keratix
