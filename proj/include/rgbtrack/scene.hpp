#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rgbtrack/core.hpp"

namespace rgbtrack {

struct Bone {
  std::string name;
  int parent = -1;  ///< -1 for the root
  Transform rest = Transform::Identity();  ///< relative to the parent bone
};

/// One articulated rotational degree of freedom (radians).
struct Dof {
  int bone = 0;
  Vec3 axis = Vec3::UnitX();  ///< unit axis in the bone's local frame
  double lower = 0.0;
  double upper = 0.0;
};

struct SkinWeight {
  int bone = 0;
  double weight = 0.0;
};

using Triangle = std::array<int, 3>;

enum class Handedness { None, Right, Left };

/// Skinned kinematic tree. Rigid objects are models with a single bone and
/// no DOFs.
struct KinematicModel {
  std::string name;
  Handedness handedness = Handedness::None;
  std::vector<Bone> bones;
  std::vector<Dof> dofs;
  std::vector<Vec3> vertices;  ///< rest positions, mm, model frame
  std::vector<Triangle> triangles;
  std::vector<std::vector<SkinWeight>> weights;  ///< one list per vertex
  std::vector<int> markers;  ///< bones whose origins serve as joint centres
  std::vector<Vec3> anchors;  ///< object error anchors, model frame (rigid objects)
  Rgb8 color{200, 200, 200};

  int dof_count() const { return static_cast<int>(dofs.size()); }
  /// Flattened parameter count: position (3) + quaternion (4) + DOFs.
  int parameter_count() const { return 7 + dof_count(); }

  /// Throws ValidationError when a structural invariant is violated.
  void validate() const;
  /// Bone transforms at the identity pose.
  std::vector<Transform> rest_globals() const;
};

/// Extrinsic pose plus articulation angles. Hands carry 20 angles, rigid
/// objects none.
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
  std::vector<double> angles;

  static Pose identity(const KinematicModel& model) {
    Pose p;
    p.angles.assign(model.dofs.size(), 0.0);
    return p;
  }
};
using HandPose = Pose;
using RigidPose = Pose;

std::vector<Transform> forward_kinematics(const KinematicModel& model, const Pose& pose);

/// World-space mesh. Triangles reference the model and stay valid as long as
/// the model does.
struct PosedMesh {
  std::vector<Vec3> vertices;
  std::span<const Triangle> triangles;
};

/// Linear blend skinning.
PosedMesh skin(const KinematicModel& model, std::span<const Transform> transforms);
void skin_into(const KinematicModel& model, std::span<const Transform> transforms, PosedMesh& out);

std::vector<Point3> joint_centers(const KinematicModel& model, const Pose& pose);

/// Left/right reflection across the model's x = 0 plane.
KinematicModel mirror(const KinematicModel& model);
/// The pose that, applied to mirror(model), reproduces the reflection of the
/// original posed model.
Pose mirror_pose(const Pose& pose);

struct SceneComponent {
  std::shared_ptr<const KinematicModel> model;
  Pose pose;
};

struct SceneState {
  std::vector<SceneComponent> components;

  int dimension() const {
    int n = 0;
    for (const auto& c : components) n += c.model->parameter_count();
    return n;
  }
};

/// Flat hypothesis vector with per-dimension bounds.
struct PoseVector {
  std::vector<double> values;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const { return values.size(); }
  void clamp();
};

/// Default positional bound, mm, on each axis.
inline constexpr double kPositionBound = 10000.0;

PoseVector flatten(const SceneState& state);
/// Rebuilds a state from values; each quaternion block is renormalised.
SceneState unflatten(std::span<const double> values, const SceneState& templ);
inline SceneState unflatten(const PoseVector& vec, const SceneState& templ) { return unflatten(vec.values, templ); }

/// Posed meshes for every component, in component order.
std::vector<PosedMesh> pose_scene(const SceneState& state);

// Model files (JSON).
KinematicModel parse_model(const std::string& json_text);
KinematicModel load_model(const std::string& path);
std::string model_to_json(const KinematicModel& model);
void save_model(const KinematicModel& model, const std::string& path);

}  // namespace rgbtrack
