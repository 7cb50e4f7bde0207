#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "matflow/matrix.hpp"

namespace matflow {

// Shared matrix file format:
//   {"n": <int>, "re": [[...], ...], "im": [[...], ...]}
// with row-major n x n real arrays. "im" may be omitted for real matrices.

nlohmann::json matrix_to_json(const Matrix& a);
/// Throws InvalidInput on missing fields, wrong sizes or ragged rows.
Matrix matrix_from_json(const nlohmann::json& j);

Matrix read_matrix_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path, const Matrix& a);

/// printf("%.17g"); round-trip exact for doubles.
std::string format_double(double x);

} // namespace matflow
