#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <set>
#include <vector>

#include "rgbtrack/dataset.hpp"
#include "rgbtrack/hand_model.hpp"
#include "rgbtrack/objective.hpp"
#include "rgbtrack/render.hpp"
#include "rgbtrack/scene.hpp"

namespace rgbtrack::testing {

/// 640x480, f = 600 px, 120 mm baseline.
StereoRig desk_rig();

/// Rigid single-bone model of a planar rectangle in the model XY plane,
/// spanning [x0, x1] x [y0, y1] at z = 0, split into n x n cells.
KinematicModel make_plane_model(double x0, double x1, double y0, double y1, int n = 4);

SceneState single_component(std::shared_ptr<const KinematicModel> model, const Pose& pose);

/// Uniform random RGB noise.
ImageRgb noise_image(int width, int height, std::uint64_t seed);

/// Textured right hand over the textured parallax background, rendered at
/// the given pose.
struct HandScene {
  StereoRig rig;
  SceneState truth;
  StereoImages frame;
  std::vector<Rgb8> texture;
  StereoImages background;
};
HandScene make_hand_scene(const Vec3& position = Vec3(0, 0, 800), std::uint64_t seed = 7);

/// Scoring context around the scene's ground-truth footprint.
ObjectiveContext context_for(const HandScene& scene, double threshold = 0.1, const ObjectiveParams& params = {});

/// Rear plane at z = 1000 seen by the left camera, hidden from the right
/// camera by a front plane at z = 700.
struct OcclusionScene {
  StereoRig rig;
  std::shared_ptr<const KinematicModel> front;
  std::shared_ptr<const KinematicModel> rear;
  double front_z = 700.0;
  double rear_z = 1000.0;
  SceneState with_occluder() const;
  SceneState without_occluder() const;
};
OcclusionScene make_occlusion_scene();

/// Nearest-hit ray caster over axis-aligned planar
/// rectangles facing the cameras; returns the nearest hit for a pixel centre.
struct PlaneRect {
  double x0, x1, y0, y1, z;
};
std::optional<Point3> cast_ray(const PinholeCamera& cam, int px, int py, std::span<const PlaneRect> planes);

/// Mutually visible (left pixel, right pixel) pairs predicted by ray casting
/// both full images against the planes, with occlusion distance `r`.
using PixelPairSet = std::set<std::pair<std::pair<int, int>, std::pair<int, int>>>;
PixelPairSet ray_cast_pairs(const StereoRig& rig, std::span<const PlaneRect> planes, double r);

/// Random perturbation of every pose dimension inside +/- scale * range.
SceneState perturb(const SceneState& s, std::mt19937_64& rng, double pos_mm, double rot_rad, double angle_rad);

}  // namespace rgbtrack::testing
