#include "vidmem/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace vidmem {

json intrinsics_to_json(const Intrinsics& k) {
  return json{{"fx", k.fx},     {"fy", k.fy},         {"cx", k.cx},
              {"cy", k.cy},     {"width", k.width},   {"height", k.height}};
}

Intrinsics intrinsics_from_json(const json& j) {
  Intrinsics k;
  k.fx = j.at("fx").get<double>();
  k.fy = j.at("fy").get<double>();
  k.cx = j.at("cx").get<double>();
  k.cy = j.at("cy").get<double>();
  k.width = j.at("width").get<int>();
  k.height = j.at("height").get<int>();
  return k;
}

json pose_to_json(const CameraPose& pose) {
  json rotation = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rotation.push_back(pose.rotation()(r, c));
  return json{{"rotation", std::move(rotation)},
              {"center",
               {pose.center().x(), pose.center().y(), pose.center().z()}},
              {"intrinsics", intrinsics_to_json(pose.intrinsics())}};
}

CameraPose pose_from_json(const json& j) {
  Eigen::Matrix3d rotation;
  const json& jr = j.at("rotation");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rotation(r, c) = jr[3 * r + c].get<double>();
  const json& jc = j.at("center");
  return CameraPose(rotation,
                    Eigen::Vector3d(jc[0].get<double>(), jc[1].get<double>(),
                                    jc[2].get<double>()),
                    intrinsics_from_json(j.at("intrinsics")));
}

json overlap_config_to_json(const OverlapConfig& cfg) {
  return json{{"grid", cfg.grid},
              {"sample_depth", cfg.sample_depth},
              {"scene_diameter", cfg.scene_diameter},
              {"distance_weight", cfg.distance_weight}};
}

OverlapConfig overlap_config_from_json(const json& j) {
  OverlapConfig cfg;
  cfg.grid = j.at("grid").get<int>();
  cfg.sample_depth = j.at("sample_depth").get<double>();
  cfg.scene_diameter = j.at("scene_diameter").get<double>();
  cfg.distance_weight = j.at("distance_weight").get<double>();
  return cfg;
}

EpisodeConfig RunConfig::episode_config(bool memory_enabled) const {
  EpisodeConfig cfg;
  cfg.gating = gating;
  cfg.drift = drift;
  cfg.segment_length = segment_length;
  cfg.width = width;
  cfg.height = height;
  cfg.window = window;
  cfg.patch = patch;
  cfg.memory_enabled = memory_enabled;
  return cfg;
}

void RunConfig::validate() const {
  gating.validate();
  drift.validate();
  if (window < 0) throw std::invalid_argument("config: window must be >= 0");
  if (patch < 1) throw std::invalid_argument("config: patch must be >= 1");
  if (segment_length < 1)
    throw std::invalid_argument("config: segment_length must be >= 1");
  if (width < 1 || height < 1)
    throw std::invalid_argument("config: resolution must be >= 1");
  if (scene.box_count < 0)
    throw std::invalid_argument("config: box_count must be >= 0");
  if (scene.texture_cell <= 0.0)
    throw std::invalid_argument("config: texture_cell must be > 0");
}

json run_config_to_json(const RunConfig& cfg) {
  json j;
  j["version"] = 1;
  j["score_threshold"] = cfg.gating.score_threshold;
  j["distance_threshold"] = cfg.gating.distance_threshold;
  j["temporal_threshold"] = cfg.gating.temporal_threshold;
  j["distance_weight"] = cfg.gating.overlap.distance_weight;
  j["overlap_grid"] = cfg.gating.overlap.grid;
  j["sample_depth"] = cfg.gating.overlap.sample_depth;
  j["scene_diameter"] = cfg.gating.overlap.scene_diameter;
  j["window"] = cfg.window;
  j["patch"] = cfg.patch;
  j["drift_sigma"] = cfg.drift.sigma0;
  j["segment_length"] = cfg.segment_length;
  j["width"] = cfg.width;
  j["height"] = cfg.height;
  j["scene_seed"] = cfg.scene.seed;
  j["box_count"] = cfg.scene.box_count;
  j["texture_cell"] = cfg.scene.texture_cell;
  j["room_half_extents"] = {cfg.scene.room_half_extents.x(),
                            cfg.scene.room_half_extents.y(),
                            cfg.scene.room_half_extents.z()};
  j["seed"] = cfg.seed;
  return j;
}

RunConfig run_config_from_json(const json& j) {
  static const std::set<std::string> known = {
      "version",          "score_threshold", "distance_threshold",
      "temporal_threshold", "distance_weight", "overlap_grid",
      "sample_depth",     "scene_diameter",  "window",
      "patch",            "drift_sigma",     "segment_length",
      "width",            "height",          "scene_seed",
      "box_count",        "texture_cell",    "room_half_extents",
      "seed"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key))
      throw std::invalid_argument("config: unknown key \"" + key + "\"");
  }

  RunConfig cfg;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("score_threshold", cfg.gating.score_threshold);
  get("distance_threshold", cfg.gating.distance_threshold);
  get("temporal_threshold", cfg.gating.temporal_threshold);
  get("distance_weight", cfg.gating.overlap.distance_weight);
  get("overlap_grid", cfg.gating.overlap.grid);
  get("sample_depth", cfg.gating.overlap.sample_depth);
  get("scene_diameter", cfg.gating.overlap.scene_diameter);
  get("window", cfg.window);
  get("patch", cfg.patch);
  get("drift_sigma", cfg.drift.sigma0);
  get("segment_length", cfg.segment_length);
  get("width", cfg.width);
  get("height", cfg.height);
  get("scene_seed", cfg.scene.seed);
  get("box_count", cfg.scene.box_count);
  get("texture_cell", cfg.scene.texture_cell);
  get("seed", cfg.seed);
  if (j.contains("room_half_extents")) {
    const json& je = j.at("room_half_extents");
    cfg.scene.room_half_extents =
        Eigen::Vector3d(je.at(0).get<double>(), je.at(1).get<double>(),
                        je.at(2).get<double>());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: malformed JSON: " + std::string(e.what()));
  }
  return run_config_from_json(j);
}

}  // namespace vidmem
