#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vidmem/geometry.hpp"
#include "vidmem/serialize.hpp"

namespace vidmem {

enum class PatternKind { kPanoramic, kRevisit, kLoops, kOffsetReturn };

std::string to_string(PatternKind kind);
PatternKind pattern_kind_from_string(const std::string& text);

struct PatternParams {
  int frames = 49;
  double yaw_amplitude_deg = 30.0;  // revisit oscillation
  int cycles = 3;                   // revisit
  double step = 0.04;               // forward step, scene units
  double offset = 0.05;             // offset-return lateral displacement
  int min_loop = 2;                 // loop-insertion retrace length bounds
  int max_loop = 6;
  int max_loops = 3;
  Intrinsics intrinsics;
};

struct Trajectory {
  std::vector<CameraPose> poses;
  int segment_length = 49;
  json metadata;  // pattern kind, generator params, seed, declared revisits

  std::size_t size() const { return poses.size(); }
};

Trajectory gen_pattern(PatternKind kind, const PatternParams& params,
                       std::uint64_t seed);

// RealEstate10K camera files: one 19-field line per frame, world-to-camera
// 3x4 row-major, normalized intrinsics. Inverted to world-from-camera at
// ingest; export applies the inverse.
Trajectory import_re10k(const std::string& text);
std::string export_re10k(const Trajectory& traj);

// Native format: pattern metadata + per-frame quaternion (w,x,y,z) + center,
// shared intrinsics.
json trajectory_to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const json& j);

struct TrainingPair {
  std::optional<long> history;  // absent after dropout
  long target = 0;
  int stride = 0;
};

struct PseudoLoop {
  std::vector<long> frame_order;  // forward-backward loop over 0..N-1
  std::vector<TrainingPair> pairs;
};

PseudoLoop synth_pseudo_loop(int video_length, int stride);

std::vector<TrainingPair> apply_history_dropout(std::vector<TrainingPair> pairs,
                                                double rate,
                                                std::uint64_t seed);

}  // namespace vidmem
