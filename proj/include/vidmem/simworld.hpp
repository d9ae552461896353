#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vidmem/gating.hpp"
#include "vidmem/geometry.hpp"
#include "vidmem/image.hpp"
#include "vidmem/membank.hpp"
#include "vidmem/trajectory.hpp"

namespace vidmem {

// Procedural room: textured axis-aligned walls plus seeded colored boxes.
// Identical seed, identical radiance.
struct SceneSpec {
  std::uint64_t seed = 0;
  Eigen::Vector3d room_half_extents{4.0, 2.5, 4.0};
  int box_count = 6;
  double texture_cell = 0.5;  // value-noise cell size, scene units
};

struct SceneBox {
  Eigen::Vector3d min;
  Eigen::Vector3d max;
  Eigen::Vector3d color;
};

std::vector<SceneBox> scene_boxes(const SceneSpec& scene);

// Deterministic ray-cast render; throws if the camera center leaves the room.
Frame render(const SceneSpec& scene, const CameraPose& pose, int width,
             int height);

// Linear radiance in [0,1], 3 channels per pixel, row-major.
std::vector<double> render_radiance(const SceneSpec& scene,
                                    const CameraPose& pose, int width,
                                    int height);

struct DriftConfig {
  double sigma0 = 0.01;  // channel units per step since the last anchor

  void validate() const;
};

// Standard-normal field for one frame's drift noise; the stream depends only
// on (seed, frame_index) so runs that differ elsewhere still agree per frame.
std::vector<double> drift_noise_field(std::uint64_t seed, long frame_index,
                                      std::size_t count);

struct EpisodeConfig {
  GatingConfig gating;
  DriftConfig drift;
  int segment_length = 49;
  int width = 128;
  int height = 128;
  int window = 2;  // hybrid memory temporal window
  int patch = 16;  // hybrid memory patch size
  bool memory_enabled = true;
};

struct EpisodeFrameInfo {
  GateDecision decision;
  int steps_since_anchor = 0;
};

struct EpisodeRecord {
  SceneSpec scene;
  EpisodeConfig config;
  std::uint64_t seed = 0;
  std::vector<CameraPose> poses;
  std::vector<Frame> ground_truth;
  std::vector<Frame> generated;
  std::vector<EpisodeFrameInfo> frames;
  MemoryBank bank;
  json segment_stats = json::array();
  json trajectory_metadata;
};

// Gate off: ground truth plus drift noise at the current accumulation level.
// Gate on: stored reference blended by the relevance score plus the residual
// render; the drift counter resets. Generated frames are appended to the
// bank after the segment completes.
std::vector<Frame> generate_segment(const SceneSpec& scene,
                                    std::span<const CameraPose> poses,
                                    const std::vector<GateDecision>& decisions,
                                    const MemoryBank& bank,
                                    const DriftConfig& drift,
                                    std::uint64_t seed, bool memory_enabled,
                                    long first_global_index, int& counter,
                                    std::vector<int>* steps_out = nullptr,
                                    std::vector<Frame>* gt_out = nullptr);

// Full segment loop: gates computed against the growing bank per chunk.
EpisodeRecord run_episode(const SceneSpec& scene, const Trajectory& traj,
                          const EpisodeConfig& config, std::uint64_t seed);

// Output layout: episode.json, gt/{i:06}.ppm, gen/{i:06}.ppm, bank/.
void save_episode(const EpisodeRecord& episode,
                  const std::filesystem::path& dir);
EpisodeRecord load_episode(const std::filesystem::path& dir);

}  // namespace vidmem
