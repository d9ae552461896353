#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "vidmem/geometry.hpp"

namespace vidmem {

struct GatingConfig {
  double score_threshold = 0.3;     // tau_c
  double distance_threshold = 0.6;  // tau_d
  int temporal_threshold = 2;       // tau_temp, frame-index spread
  OverlapConfig overlap;

  void validate() const;
};

enum class GateReason {
  kNone,
  kLowScore,
  kFarDistance,
  kTemporalRedundancy,
  kEmptyHistory,
};

std::string to_string(GateReason reason);
GateReason gate_reason_from_string(const std::string& text);

struct GateDecision {
  int target_index = 0;
  double score = 0.0;
  std::optional<int> matched;  // r*, retained even when the gate is off
  bool active = false;         // g_t
  GateReason reason = GateReason::kNone;
};

// c[t][r] = fov_overlap(targets[t], history[r]) - lambda_d * distance.
Eigen::MatrixXd relevance_matrix(const std::vector<CameraPose>& targets,
                                 const std::vector<CameraPose>& history,
                                 const GatingConfig& cfg);

// Relevance scoring, best-reference selection, and the three deactivation
// rules (low score, far distance, temporal redundancy). The redundancy pass
// runs left to right against the already-updated previous gate.
std::vector<GateDecision> compute_gates(const std::vector<CameraPose>& targets,
                                        const std::vector<CameraPose>& history,
                                        const GatingConfig& cfg);

// Line-oriented trace: `t, s_t, r_star (or -), g_t, reason` per frame.
std::string format_gate_trace(const std::vector<GateDecision>& decisions);
std::vector<GateDecision> parse_gate_trace(const std::string& text);

}  // namespace vidmem
