#pragma once

#include "cvaod/model.hpp"

#include <json.hpp>

#include <filesystem>

namespace cvaod {

/// Row-major nested arrays; an r x 0 or 0 x c matrix is written as [] and
/// needs explicit dimensions on the way back in.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, Index rows, Index cols, const char* name);

/**
 * Model files are JSON objects
 *
 *     {"n": 2, "s": 2, "A": [[...]], "B": [[...]], "C": [[...]], "omega": [[...]]}
 *
 * with every matrix stored row-major as an array of rows.
 */
nlohmann::json model_to_json(const StateSpaceModel& model);
StateSpaceModel model_from_json(const nlohmann::json& j);

/// Like model_to_json but for an unconstrained triple; omega is required.
nlohmann::json system_to_json(const System& system, const Matrix& omega);

StateSpaceModel read_model_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace cvaod
