#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "vrc/estimator.hpp"

namespace vrc::serialize {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json spec_to_json(const estimator::EstimatorSpec& spec);
/// Missing fields keep their defaults; `path` prefixes error messages.
estimator::EstimatorSpec spec_from_json(const Json& j, const std::string& path = "estimator");

Json model_to_json(const estimator::FittedEstimator& model);
estimator::FittedEstimator model_from_json(const Json& j);

/// FNV-1a 64 of the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string config_hash(const Json& j);

Json read_json(const std::filesystem::path& path);
void write_json(const Json& j, const std::filesystem::path& path);

}  // namespace vrc::serialize
