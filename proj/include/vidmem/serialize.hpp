#pragma once

#include <json.hpp>

#include "vidmem/geometry.hpp"

namespace vidmem {

using json = nlohmann::ordered_json;

json intrinsics_to_json(const Intrinsics& k);
Intrinsics intrinsics_from_json(const json& j);

// Rotation stored as 9 row-major doubles so reloads are bit-identical.
json pose_to_json(const CameraPose& pose);
CameraPose pose_from_json(const json& j);

json overlap_config_to_json(const OverlapConfig& cfg);
OverlapConfig overlap_config_from_json(const json& j);

}  // namespace vidmem
