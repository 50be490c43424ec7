#pragma once

#include "fhiqa/dataset/manifest.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace fhiqa::dataset {

// Maps PIQ23-style per-attribute score tables onto manifest records.
//
// Each input is a CSV with (case-insensitive) columns for the image path
// ("IMAGE PATH"), the scene ("SCENE"), the score ("JOD") and optionally the
// lighting condition ("CONDITION") and attribute ("ATTRIBUTE"). When the
// attribute column is absent it is taken from the file name
// (e.g. "scores_Details.csv" -> Details).
std::vector<AnnotatedImage> convert_piq23_tables(const std::vector<std::filesystem::path>& tables);

// "Low-Light", "low light", "LOWLIGHT" -> "lowlight"; unknown values are
// lower-cased with spaces and dashes removed.
std::string normalize_lighting(const std::string& raw);

}  // namespace fhiqa::dataset
