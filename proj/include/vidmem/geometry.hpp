#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace vidmem {

// Pinhole intrinsics normalized to image dimension: a point at camera
// coordinates (x, y, z) lands at pixel (cx + fx*x/z, cy + fy*y/z) in
// [0,1]-relative units.
struct Intrinsics {
  double fx = 0.5;
  double fy = 0.5;
  double cx = 0.5;
  double cy = 0.5;
  int width = 128;
  int height = 128;
};

// SE(3) camera pose: world-from-camera rotation and the camera center in
// world coordinates. Camera frame is x-right, y-down, z-forward.
class CameraPose {
 public:
  CameraPose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& center,
             const Intrinsics& intrinsics);

  static CameraPose identity(const Intrinsics& intrinsics = {});

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& center() const { return center_; }
  const Intrinsics& intrinsics() const { return intr_; }

  Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const {
    return rotation_.transpose() * (world - center_);
  }
  Eigen::Vector3d to_world(const Eigen::Vector3d& camera) const {
    return rotation_ * camera + center_;
  }

  Eigen::Vector3d forward() const { return rotation_.col(2); }
  Eigen::Vector3d right() const { return rotation_.col(0); }

  // Unit world-space direction of the ray through normalized pixel (u, v).
  Eigen::Vector3d ray_direction(double u, double v) const;

  // World point at camera depth `depth` on the ray through (u, v).
  Eigen::Vector3d point_at(double u, double v, double depth) const;

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d center_;
  Intrinsics intr_;
};

struct OverlapConfig {
  int grid = 16;              // G samples per axis
  double sample_depth = 1.0;  // d_s, scene units
  double scene_diameter = 1.0;
  double distance_weight = 0.5;  // lambda_d

  void validate() const;
};

struct Projection {
  Eigen::Vector2d pixel;  // normalized [0,1] coordinates, unclamped
  double depth;           // camera-frame z, signed
};

// Total function: returns the extrapolated pixel even behind the camera.
Projection project_point(const CameraPose& pose,
                         const Eigen::Vector3d& world_point);

// Fraction of target frustum samples (G x G grid at depth d_s) that fall
// inside the history camera's frustum with positive depth.
double fov_overlap(const CameraPose& target, const CameraPose& history,
                   const OverlapConfig& cfg);

// min(||t_target - t_history|| / D, 1).
double translation_distance(const CameraPose& target,
                            const CameraPose& history,
                            const OverlapConfig& cfg);

// Per-pixel (direction, moment) ray map; moment = center x direction.
struct PluckerMap {
  int height = 0;
  int width = 0;
  std::vector<std::array<double, 6>> rays;  // row-major

  const std::array<double, 6>& at(int row, int col) const {
    return rays[static_cast<std::size_t>(row) * width + col];
  }
};

PluckerMap plucker_embed(const CameraPose& pose, int height, int width);

}  // namespace vidmem
