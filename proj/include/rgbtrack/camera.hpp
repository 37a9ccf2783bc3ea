#pragma once

#include <optional>
#include <string>

#include "rgbtrack/core.hpp"

namespace rgbtrack {

/// Undistorted pinhole camera. The pose maps world coordinates into the
/// camera frame: X_cam = rotation * X_world + translation.
struct PinholeCamera {
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();
  int width = 0, height = 0;

  Vec3 to_camera(const Point3& world) const { return rotation * world + translation; }
  /// Optical centre in world coordinates.
  Point3 center() const { return -(rotation.conjugate() * translation); }
  /// Unit ray direction (world frame) through a pixel.
  Vec3 ray(const Pixel& p) const;

  void validate() const;
};

/// Pinhole projection; nullopt when the point is not in front of the camera.
std::optional<Pixel> project(const Point3& point, const PinholeCamera& camera);

/// Projection of a point already expressed in the camera frame.
inline std::optional<Pixel> project_camera_frame(const Vec3& p, const PinholeCamera& c) {
  if (!(p.z() > 0.0)) return std::nullopt;
  return Pixel{c.cx + c.fx * p.x() / p.z(), c.cy + c.fy * p.y() / p.z()};
}

struct StereoRig {
  PinholeCamera left;
  PinholeCamera right;

  double baseline() const { return (left.center() - right.center()).norm(); }
  void validate() const;
};

/// Midpoint of the shortest segment between the back-projected rays.
Point3 triangulate(const Pixel& left, const Pixel& right, const StereoRig& rig);

/// Parallel rig with the left camera at the world origin and the right
/// camera displaced by `baseline_mm` along +x.
StereoRig make_parallel_rig(double focal, int width, int height, double baseline_mm);

StereoRig parse_calibration(const std::string& json_text);
StereoRig load_calibration(const std::string& path);
std::string calibration_to_json(const StereoRig& rig);
void save_calibration(const StereoRig& rig, const std::string& path);

}  // namespace rgbtrack
