#pragma once

#include <json.hpp>

#include "ddempc/empc.hpp"

namespace ddempc {

// JSON encodings shared by run summaries and scenario files. Infinite bounds are written
// as null.

nlohmann::json vector_to_json(const Vecd& v);
Vecd vector_from_json(const nlohmann::json& j, double null_value = 0.0);

nlohmann::json matrix_to_json(const Matd& m);
Matd matrix_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const BoxSet& box);
void from_json(const nlohmann::json& j, BoxSet& box);

void to_json(nlohmann::json& j, const LinearCost& cost);
void from_json(const nlohmann::json& j, LinearCost& cost);

const char* to_string(CostMode mode);
CostMode cost_mode_from_string(const std::string& s);

/// Controller settings only; solver tolerances are included, the solver seam is not.
void to_json(nlohmann::json& j, const EmpcConfig& cfg);
void from_json(const nlohmann::json& j, EmpcConfig& cfg);

}  // namespace ddempc
