#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "vidmem/gating.hpp"
#include "vidmem/geometry.hpp"
#include "vidmem/image.hpp"
#include "vidmem/rng.hpp"

namespace vidmem::testutil {

inline Eigen::Matrix3d random_rotation(SplitMix64& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q.toRotationMatrix();
}

inline CameraPose random_pose(SplitMix64& rng, double center_range = 1.0) {
  Intrinsics k;
  k.fx = rng.uniform(0.3, 0.9);
  k.fy = rng.uniform(0.3, 0.9);
  k.cx = rng.uniform(0.35, 0.65);
  k.cy = rng.uniform(0.35, 0.65);
  const Eigen::Vector3d center(rng.uniform(-center_range, center_range),
                               rng.uniform(-center_range, center_range),
                               rng.uniform(-center_range, center_range));
  return CameraPose(random_rotation(rng), center, k);
}

inline CameraPose yaw_pose(double yaw_rad, const Intrinsics& k = {},
                           const Eigen::Vector3d& center =
                               Eigen::Vector3d::Zero()) {
  const double c = std::cos(yaw_rad), s = std::sin(yaw_rad);
  Eigen::Matrix3d r;
  r << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
  return CameraPose(r, center, k);
}

// Monte-Carlo frustum overlap: random image-plane samples instead of the
// deterministic grid.
inline double mc_overlap(const CameraPose& target, const CameraPose& history,
                         double sample_depth, long rays, std::uint64_t seed) {
  SplitMix64 rng(seed);
  long visible = 0;
  for (long i = 0; i < rays; ++i) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    const Eigen::Vector3d p = target.point_at(u, v, sample_depth);
    const Projection proj = project_point(history, p);
    if (proj.depth > 0.0 && proj.pixel.x() >= 0.0 && proj.pixel.x() <= 1.0 &&
        proj.pixel.y() >= 0.0 && proj.pixel.y() <= 1.0)
      ++visible;
  }
  return static_cast<double>(visible) / static_cast<double>(rays);
}

// Straight-line transcription of the three-step gating procedure, written
// independently of the library implementation.
inline std::vector<GateDecision> reference_gates(
    const std::vector<CameraPose>& targets,
    const std::vector<CameraPose>& history, const GatingConfig& cfg) {
  const std::size_t n = targets.size();
  const std::size_t f = history.size();
  std::vector<GateDecision> out(n);

  std::vector<double> scores(n, 0.0);
  std::vector<int> best(n, -1);
  std::vector<std::vector<double>> dist(n, std::vector<double>(f, 0.0));

  for (std::size_t t = 0; t < n; ++t) {
    double best_score = 0.0;
    for (std::size_t r = 0; r < f; ++r) {
      double rho = 0.0;
      const int g = cfg.overlap.grid;
      for (int j = 0; j < g; ++j)
        for (int i = 0; i < g; ++i) {
          const double u = (i + 0.5) / g;
          const double v = (j + 0.5) / g;
          const Eigen::Vector3d sample =
              targets[t].point_at(u, v, cfg.overlap.sample_depth);
          const Eigen::Vector3d cam = history[r].to_camera(sample);
          if (cam.z() <= 0.0) continue;
          const Intrinsics& k = history[r].intrinsics();
          const double px = k.cx + k.fx * cam.x() / cam.z();
          const double py = k.cy + k.fy * cam.y() / cam.z();
          if (px >= 0.0 && px <= 1.0 && py >= 0.0 && py <= 1.0) rho += 1.0;
        }
      rho /= static_cast<double>(g) * g;
      const double d = std::min(
          (targets[t].center() - history[r].center()).norm() /
              cfg.overlap.scene_diameter,
          1.0);
      dist[t][r] = d;
      const double c = rho - cfg.overlap.distance_weight * d;
      if (best[t] < 0 || c > best_score) {
        best_score = c;
        best[t] = static_cast<int>(r);
      }
    }
    scores[t] = best_score;
  }

  for (std::size_t t = 0; t < n; ++t) {
    GateDecision& d = out[t];
    d.target_index = static_cast<int>(t);
    if (f == 0) {
      d.active = false;
      d.reason = GateReason::kEmptyHistory;
      continue;
    }
    d.matched = best[t];
    d.score = scores[t];
    d.active = true;
    d.reason = GateReason::kNone;
    if (d.score < cfg.score_threshold) {
      d.active = false;
      d.reason = GateReason::kLowScore;
    } else if (dist[t][best[t]] > cfg.distance_threshold) {
      d.active = false;
      d.reason = GateReason::kFarDistance;
    }
  }
  for (std::size_t t = 1; t < n; ++t) {
    if (out[t].active && out[t - 1].active &&
        std::abs(*out[t].matched - *out[t - 1].matched) <
            cfg.temporal_threshold) {
      out[t].active = false;
      out[t].reason = GateReason::kTemporalRedundancy;
    }
  }
  return out;
}

inline Frame random_frame(SplitMix64& rng, int width, int height) {
  Frame frame(width, height);
  for (std::uint8_t& b : frame.data())
    b = static_cast<std::uint8_t>(rng.below(256));
  return frame;
}

inline Frame constant_frame(int width, int height, double value) {
  Frame frame(width, height);
  for (std::uint8_t& b : frame.data()) b = Frame::quantize(value);
  return frame;
}

// No adjacent active pair may reuse nearly the same reference.
inline bool temporal_invariant_holds(const std::vector<GateDecision>& trace,
                                     int temporal_threshold) {
  for (std::size_t t = 1; t < trace.size(); ++t) {
    if (trace[t].active && trace[t - 1].active &&
        std::abs(*trace[t].matched - *trace[t - 1].matched) <
            temporal_threshold)
      return false;
  }
  return true;
}

}  // namespace vidmem::testutil
