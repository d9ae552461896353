#pragma once

#include <cstdint>
#include <filesystem>

#include "vidmem/gating.hpp"
#include "vidmem/serialize.hpp"
#include "vidmem/simworld.hpp"

namespace vidmem {

// Flat run configuration consumed by the CLI. Unknown keys are rejected at
// load; every field is validated against its module's preconditions.
struct RunConfig {
  GatingConfig gating;
  DriftConfig drift;
  SceneSpec scene;
  int window = 2;
  int patch = 16;
  int segment_length = 49;
  int width = 128;
  int height = 128;
  std::uint64_t seed = 0;

  EpisodeConfig episode_config(bool memory_enabled) const;
  void validate() const;
};

json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const json& j);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace vidmem
