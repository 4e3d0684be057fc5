#pragma once

#include <json.hpp>

#include "sograb/transform.hpp"

namespace sograb::detail {

RigidTransform transform_from_json(const nlohmann::json& j);
nlohmann::json transform_to_json_obj(const RigidTransform& t);

}  // namespace sograb::detail
