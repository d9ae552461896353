#include "vidmem/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace vidmem {

namespace {

constexpr double kOrthoTol = 1e-6;

}  // namespace

CameraPose::CameraPose(const Eigen::Matrix3d& rotation,
                       const Eigen::Vector3d& center,
                       const Intrinsics& intrinsics)
    : rotation_(rotation), center_(center), intr_(intrinsics) {
  const Eigen::Matrix3d err =
      rotation * rotation.transpose() - Eigen::Matrix3d::Identity();
  if (err.cwiseAbs().maxCoeff() > kOrthoTol)
    throw std::invalid_argument("CameraPose: rotation is not orthonormal");
  if (std::abs(rotation.determinant() - 1.0) > kOrthoTol)
    throw std::invalid_argument("CameraPose: rotation determinant is not +1");
  if (intr_.fx <= 0.0 || intr_.fy <= 0.0)
    throw std::invalid_argument("CameraPose: focal lengths must be positive");
  if (intr_.cx <= 0.0 || intr_.cx >= 1.0 || intr_.cy <= 0.0 || intr_.cy >= 1.0)
    throw std::invalid_argument("CameraPose: principal point outside (0,1)");
  if (intr_.width < 1 || intr_.height < 1)
    throw std::invalid_argument("CameraPose: image dimensions must be >= 1");
}

CameraPose CameraPose::identity(const Intrinsics& intrinsics) {
  return CameraPose(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(),
                    intrinsics);
}

Eigen::Vector3d CameraPose::ray_direction(double u, double v) const {
  const Eigen::Vector3d cam((u - intr_.cx) / intr_.fx,
                            (v - intr_.cy) / intr_.fy, 1.0);
  return (rotation_ * cam).normalized();
}

Eigen::Vector3d CameraPose::point_at(double u, double v, double depth) const {
  const Eigen::Vector3d cam(depth * (u - intr_.cx) / intr_.fx,
                            depth * (v - intr_.cy) / intr_.fy, depth);
  return to_world(cam);
}

void OverlapConfig::validate() const {
  if (grid < 2) throw std::invalid_argument("OverlapConfig: grid must be >= 2");
  if (sample_depth <= 0.0)
    throw std::invalid_argument("OverlapConfig: sample_depth must be > 0");
  if (scene_diameter <= 0.0)
    throw std::invalid_argument("OverlapConfig: scene_diameter must be > 0");
  if (distance_weight < 0.0)
    throw std::invalid_argument("OverlapConfig: distance_weight must be >= 0");
}

Projection project_point(const CameraPose& pose,
                         const Eigen::Vector3d& world_point) {
  const Eigen::Vector3d cam = pose.to_camera(world_point);
  const Intrinsics& k = pose.intrinsics();
  const double z = cam.z();
  return {Eigen::Vector2d(k.cx + k.fx * cam.x() / z, k.cy + k.fy * cam.y() / z),
          z};
}

double fov_overlap(const CameraPose& target, const CameraPose& history,
                   const OverlapConfig& cfg) {
  cfg.validate();
  const int g = cfg.grid;
  int visible = 0;
  for (int j = 0; j < g; ++j) {
    const double v = (j + 0.5) / g;
    for (int i = 0; i < g; ++i) {
      const double u = (i + 0.5) / g;
      const Eigen::Vector3d p = target.point_at(u, v, cfg.sample_depth);
      const Projection proj = project_point(history, p);
      if (proj.depth > 0.0 && proj.pixel.x() >= 0.0 && proj.pixel.x() <= 1.0 &&
          proj.pixel.y() >= 0.0 && proj.pixel.y() <= 1.0)
        ++visible;
    }
  }
  return static_cast<double>(visible) / (static_cast<double>(g) * g);
}

double translation_distance(const CameraPose& target,
                            const CameraPose& history,
                            const OverlapConfig& cfg) {
  if (cfg.scene_diameter <= 0.0)
    throw std::invalid_argument("translation_distance: scene_diameter <= 0");
  const double d = (target.center() - history.center()).norm();
  return std::min(d / cfg.scene_diameter, 1.0);
}

PluckerMap plucker_embed(const CameraPose& pose, int height, int width) {
  if (height < 1 || width < 1)
    throw std::invalid_argument("plucker_embed: resolution must be >= 1");
  PluckerMap map;
  map.height = height;
  map.width = width;
  map.rays.resize(static_cast<std::size_t>(height) * width);
  const Eigen::Vector3d& o = pose.center();
  for (int row = 0; row < height; ++row) {
    const double v = (row + 0.5) / height;
    for (int col = 0; col < width; ++col) {
      const double u = (col + 0.5) / width;
      const Eigen::Vector3d d = pose.ray_direction(u, v);
      const Eigen::Vector3d m = o.cross(d);
      map.rays[static_cast<std::size_t>(row) * width + col] = {
          d.x(), d.y(), d.z(), m.x(), m.y(), m.z()};
    }
  }
  return map;
}

}  // namespace vidmem
