#pragma once

#include "rlasso/model.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace rlasso {

using Json = nlohmann::json;

inline constexpr int kInstanceSchemaVersion = 1;
inline constexpr int kSolutionSchemaVersion = 1;

/// Base-64 of the values as little-endian IEEE-754 binary64.
std::string encode_f64(const std::vector<double>& values);
std::vector<double> decode_f64(const std::string& text);

/// {"dtype": "f64le", "shape": [...], "order": "column-major", "data": base64}
Json array_to_json(const Vector& v);
Json array_to_json(const Matrix& m);
Vector vector_from_json(const Json& node, const char* name);
Matrix matrix_from_json(const Json& node, const char* name);

Json instance_to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const Json& doc);

Json solution_to_json(const Solution& solution);
Solution solution_from_json(const Json& doc);

/// "-" reads stdin / writes stdout. Parse failures throw ParseError.
Json read_json(const std::string& path);
void write_json(const Json& doc, const std::string& path);

}  // namespace rlasso
