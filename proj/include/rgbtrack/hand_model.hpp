#pragma once

#include <cstdint>

#include "rgbtrack/scene.hpp"

namespace rgbtrack {

struct HandMeshOptions {
  int ring_slices = 10;        ///< vertices around each finger ring
  int rings_per_segment = 4;   ///< rings along each phalanx
  int palm_stacks = 14;
  int palm_slices = 18;
};

/// Procedural right hand: 21 bones (palm + 4 per finger including the tip
/// marker bone) and 20 articulation DOFs. Finger order is thumb, index,
/// middle, ring, little; each finger carries two DOFs at its base joint
/// (abduction, then flexion) and one flexion DOF at each of the two distal joints.
/// In the model frame the fingers point along +y, the palm faces -z and the
/// thumb sits on the +x side.
KinematicModel make_hand_model(const HandMeshOptions& options = {});

/// Subdivided cuboid with one bone and no DOFs. Anchors are three box
/// corners.
KinematicModel make_box_model(const Vec3& size_mm = Vec3(60, 100, 40), int subdivisions = 6);

enum class TextureStyle {
  Mottled,  ///< skin tone with per-vertex variation and darker creases
  Uniform,  ///< flat model colour
};

/// Deterministic per-vertex colours for rendering synthetic datasets.
std::vector<Rgb8> make_texture(const KinematicModel& model, std::uint64_t seed, TextureStyle style,
                               Rgb8 base = Rgb8{205, 150, 125});

/// A comfortable open-hand pose facing the camera at `position`.
Pose default_hand_pose(const KinematicModel& model, const Vec3& position);

}  // namespace rgbtrack
