#include "rgbtrack/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rgbtrack {

using nlohmann::json;

void KinematicModel::validate() const {
  if (bones.empty()) throw ValidationError("model: no bones");
  int roots = 0;
  for (std::size_t i = 0; i < bones.size(); ++i) {
    const int p = bones[i].parent;
    if (p < 0) {
      ++roots;
      continue;
    }
    // Parents must precede children; this also rules out cycles.
    if (p >= static_cast<int>(i)) throw ValidationError("model: bone '" + bones[i].name + "' has an invalid parent");
  }
  if (roots != 1 || bones[0].parent != -1) throw ValidationError("model: expected a single root at index 0");
  for (const Dof& d : dofs) {
    if (d.bone < 0 || d.bone >= static_cast<int>(bones.size())) throw ValidationError("model: DOF bone out of range");
    if (!std::isfinite(d.lower) || !std::isfinite(d.upper) || d.lower > d.upper)
      throw ValidationError("model: DOF bounds must be finite and ordered");
    if (std::abs(d.axis.norm() - 1.0) > 1e-9) throw ValidationError("model: DOF axis must be unit length");
  }
  if (weights.size() != vertices.size()) throw ValidationError("model: one weight list per vertex required");
  for (const auto& w : weights) {
    double sum = 0.0;
    for (const SkinWeight& sw : w) {
      if (sw.bone < 0 || sw.bone >= static_cast<int>(bones.size()))
        throw ValidationError("model: skin weight bone out of range");
      sum += sw.weight;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw ValidationError("model: skin weights must sum to 1");
  }
  const int nv = static_cast<int>(vertices.size());
  for (const Triangle& t : triangles)
    for (int idx : t)
      if (idx < 0 || idx >= nv) throw ValidationError("model: triangle index out of range");
  for (int m : markers)
    if (m < 0 || m >= static_cast<int>(bones.size())) throw ValidationError("model: marker bone out of range");
}

std::vector<Transform> KinematicModel::rest_globals() const {
  return forward_kinematics(*this, Pose::identity(*this));
}

std::vector<Transform> forward_kinematics(const KinematicModel& model, const Pose& pose) {
  const std::size_t nb = model.bones.size();
  std::vector<Transform> local(nb);
  for (std::size_t b = 0; b < nb; ++b) local[b] = model.bones[b].rest;
  // DOFs on the same bone compose in declaration order.
  for (std::size_t k = 0; k < model.dofs.size(); ++k) {
    const Dof& d = model.dofs[k];
    const double angle = k < pose.angles.size() ? pose.angles[k] : 0.0;
    local[d.bone].rotate(Eigen::AngleAxisd(angle, d.axis));
  }
  std::vector<Transform> world(nb);
  Transform root = Transform::Identity();
  root.translate(pose.position);
  root.rotate(pose.orientation.normalized());
  for (std::size_t b = 0; b < nb; ++b) {
    const int p = model.bones[b].parent;
    world[b] = (p < 0 ? root : world[p]) * local[b];
  }
  return world;
}

void skin_into(const KinematicModel& model, std::span<const Transform> transforms, PosedMesh& out) {
  const auto rest = model.rest_globals();
  std::vector<Eigen::Matrix<double, 3, 4>> m(transforms.size());
  for (std::size_t b = 0; b < transforms.size(); ++b) m[b] = (transforms[b] * rest[b].inverse()).matrix().topRows<3>();
  out.vertices.resize(model.vertices.size());
  for (std::size_t i = 0; i < model.vertices.size(); ++i) {
    const Vec3& v = model.vertices[i];
    Vec3 acc = Vec3::Zero();
    for (const SkinWeight& w : model.weights[i])
      acc += w.weight * (m[w.bone].leftCols<3>() * v + m[w.bone].col(3));
    out.vertices[i] = acc;
  }
  out.triangles = model.triangles;
}

PosedMesh skin(const KinematicModel& model, std::span<const Transform> transforms) {
  PosedMesh out;
  skin_into(model, transforms, out);
  return out;
}

std::vector<Point3> joint_centers(const KinematicModel& model, const Pose& pose) {
  const auto world = forward_kinematics(model, pose);
  std::vector<Point3> out;
  out.reserve(model.markers.size());
  for (int b : model.markers) out.push_back(world[b].translation());
  return out;
}

namespace {

const Eigen::Matrix3d kReflectX = Eigen::Vector3d(-1, 1, 1).asDiagonal();

Vec3 reflect(const Vec3& v) { return Vec3(-v.x(), v.y(), v.z()); }
// Axial vectors pick up the determinant of the reflection.
Vec3 reflect_axis(const Vec3& a) { return Vec3(a.x(), -a.y(), -a.z()); }

}  // namespace

KinematicModel mirror(const KinematicModel& model) {
  KinematicModel out = model;
  for (Bone& b : out.bones) {
    Transform t = Transform::Identity();
    t.linear() = kReflectX * b.rest.linear() * kReflectX;
    t.translation() = reflect(b.rest.translation());
    b.rest = t;
  }
  for (Dof& d : out.dofs) d.axis = reflect_axis(d.axis);
  for (Vec3& v : out.vertices) v = reflect(v);
  for (Vec3& a : out.anchors) a = reflect(a);
  for (Triangle& t : out.triangles) std::swap(t[1], t[2]);
  if (model.handedness == Handedness::Right) out.handedness = Handedness::Left;
  else if (model.handedness == Handedness::Left) out.handedness = Handedness::Right;
  return out;
}

Pose mirror_pose(const Pose& pose) {
  Pose out = pose;
  out.position = reflect(pose.position);
  out.orientation = Quat(pose.orientation.w(), pose.orientation.x(), -pose.orientation.y(), -pose.orientation.z());
  return out;
}

void PoseVector::clamp() {
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::clamp(values[i], lower[i], upper[i]);
}

PoseVector flatten(const SceneState& state) {
  PoseVector out;
  const auto n = static_cast<std::size_t>(state.dimension());
  out.values.reserve(n);
  out.lower.reserve(n);
  out.upper.reserve(n);
  for (const auto& c : state.components) {
    const Pose& p = c.pose;
    for (int i = 0; i < 3; ++i) {
      out.values.push_back(p.position[i]);
      out.lower.push_back(-kPositionBound);
      out.upper.push_back(kPositionBound);
    }
    for (double q : {p.orientation.w(), p.orientation.x(), p.orientation.y(), p.orientation.z()}) {
      out.values.push_back(q);
      out.lower.push_back(-1.0);
      out.upper.push_back(1.0);
    }
    if (p.angles.size() != c.model->dofs.size())
      throw DimensionMismatch("flatten: pose angle count does not match the model");
    for (std::size_t k = 0; k < p.angles.size(); ++k) {
      out.values.push_back(p.angles[k]);
      out.lower.push_back(c.model->dofs[k].lower);
      out.upper.push_back(c.model->dofs[k].upper);
    }
  }
  return out;
}

SceneState unflatten(std::span<const double> values, const SceneState& templ) {
  if (static_cast<int>(values.size()) != templ.dimension())
    throw DimensionMismatch("unflatten: expected " + std::to_string(templ.dimension()) + " values, got " +
                            std::to_string(values.size()));
  SceneState out = templ;
  std::size_t i = 0;
  for (auto& c : out.components) {
    Pose& p = c.pose;
    p.position = Vec3(values[i], values[i + 1], values[i + 2]);
    Quat q(values[i + 3], values[i + 4], values[i + 5], values[i + 6]);
    const double norm = q.norm();
    if (!(norm > 1e-12)) p.orientation = Quat::Identity();
    else if (std::abs(norm - 1.0) <= 4 * std::numeric_limits<double>::epsilon()) p.orientation = q;
    else p.orientation = Quat(q.coeffs() / norm);
    i += 7;
    p.angles.assign(values.begin() + static_cast<std::ptrdiff_t>(i),
                    values.begin() + static_cast<std::ptrdiff_t>(i + c.model->dofs.size()));
    i += c.model->dofs.size();
  }
  return out;
}

std::vector<PosedMesh> pose_scene(const SceneState& state) {
  std::vector<PosedMesh> out(state.components.size());
  for (std::size_t i = 0; i < state.components.size(); ++i) {
    const auto& c = state.components[i];
    skin_into(*c.model, forward_kinematics(*c.model, c.pose), out[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON model format

namespace {

json transform_json(const Transform& t) {
  const Quat q(t.linear());
  return json{{"quat", {q.w(), q.x(), q.y(), q.z()}},
              {"trans", {t.translation().x(), t.translation().y(), t.translation().z()}}};
}

Vec3 vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ParseError(std::string("model: ") + what + " must have 3 entries");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Transform parse_transform(const json& j) {
  if (!j.contains("quat") || !j["quat"].is_array() || j["quat"].size() != 4)
    throw ParseError("model: rest transform needs quat[4]");
  Quat q(j["quat"][0].get<double>(), j["quat"][1].get<double>(), j["quat"][2].get<double>(),
         j["quat"][3].get<double>());
  if (std::abs(q.norm() - 1.0) > 1e-6) throw ValidationError("model: rest quaternion is not unit-norm");
  Transform t = Transform::Identity();
  t.translate(vec3(j.at("trans"), "trans"));
  t.rotate(q.normalized());
  return t;
}

const char* handedness_name(Handedness h) {
  switch (h) {
    case Handedness::Right: return "right";
    case Handedness::Left: return "left";
    default: return "none";
  }
}

}  // namespace

KinematicModel parse_model(const std::string& json_text) {
  KinematicModel m;
  try {
    const json j = json::parse(json_text);
    m.name = j.value("name", "");
    const std::string hand = j.value("handedness", "none");
    m.handedness = hand == "right" ? Handedness::Right : hand == "left" ? Handedness::Left : Handedness::None;
    for (const auto& b : j.at("bones")) {
      Bone bone;
      bone.name = b.value("name", "");
      bone.parent = b.at("parent").get<int>();
      bone.rest = b.contains("rest") ? parse_transform(b["rest"]) : Transform::Identity();
      m.bones.push_back(bone);
    }
    if (j.contains("dofs"))
      for (const auto& d : j["dofs"])
        m.dofs.push_back(Dof{d.at("bone").get<int>(), vec3(d.at("axis"), "axis"), d.at("lower").get<double>(),
                             d.at("upper").get<double>()});
    for (const auto& v : j.at("vertices")) m.vertices.push_back(vec3(v, "vertex"));
    for (const auto& t : j.at("triangles")) m.triangles.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
    if (j.contains("weights")) {
      for (const auto& wl : j["weights"]) {
        std::vector<SkinWeight> list;
        for (const auto& w : wl) list.push_back({w.at(0).get<int>(), w.at(1).get<double>()});
        m.weights.push_back(std::move(list));
      }
    } else {
      m.weights.assign(m.vertices.size(), {SkinWeight{0, 1.0}});
    }
    if (j.contains("markers")) m.markers = j["markers"].get<std::vector<int>>();
    if (j.contains("anchors"))
      for (const auto& a : j["anchors"]) m.anchors.push_back(vec3(a, "anchor"));
    if (j.contains("color")) {
      const auto c = j["color"].get<std::vector<int>>();
      if (c.size() != 3) throw ParseError("model: color must have 3 entries");
      m.color = Rgb8{static_cast<std::uint8_t>(c[0]), static_cast<std::uint8_t>(c[1]), static_cast<std::uint8_t>(c[2])};
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  m.validate();
  return m;
}

KinematicModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

std::string model_to_json(const KinematicModel& m) {
  json j;
  j["name"] = m.name;
  j["handedness"] = handedness_name(m.handedness);
  j["bones"] = json::array();
  for (const Bone& b : m.bones) j["bones"].push_back({{"name", b.name}, {"parent", b.parent}, {"rest", transform_json(b.rest)}});
  j["dofs"] = json::array();
  for (const Dof& d : m.dofs)
    j["dofs"].push_back({{"bone", d.bone}, {"axis", {d.axis.x(), d.axis.y(), d.axis.z()}}, {"lower", d.lower}, {"upper", d.upper}});
  j["vertices"] = json::array();
  for (const Vec3& v : m.vertices) j["vertices"].push_back({v.x(), v.y(), v.z()});
  j["triangles"] = m.triangles;
  j["weights"] = json::array();
  for (const auto& wl : m.weights) {
    json list = json::array();
    for (const SkinWeight& w : wl) list.push_back({w.bone, w.weight});
    j["weights"].push_back(list);
  }
  j["markers"] = m.markers;
  j["anchors"] = json::array();
  for (const Vec3& a : m.anchors) j["anchors"].push_back({a.x(), a.y(), a.z()});
  j["color"] = {m.color.r, m.color.g, m.color.b};
  return j.dump();
}

void save_model(const KinematicModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write model file " + path);
  out << model_to_json(model) << "\n";
}

}  // namespace rgbtrack
