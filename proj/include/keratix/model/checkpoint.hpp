#pragma once

#include <filesystem>

#include "keratix/model/network.hpp"

namespace keratix::model {

// Text checkpoint, version 1:
//
//   keratix-checkpoint 1
//   <config key/value lines>
//   blocks <count>
//   block <name> <rows> <cols> <trunk 0|1>
//   <rows*cols values, one per line>
//   ...
//   running_mean <hidden> / values
//   running_var <hidden> / values
//
// Values are written in shortest round-trip form, so save/load is lossless.
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace keratix::model
