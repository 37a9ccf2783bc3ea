#include "fixtures.hpp"

#include <cmath>
#include <limits>

namespace rgbtrack::testing {

StereoRig desk_rig() { return make_parallel_rig(600.0, 640, 480, 120.0); }

KinematicModel make_plane_model(double x0, double x1, double y0, double y1, int n) {
  KinematicModel m;
  m.name = "plane";
  m.bones.push_back(Bone{"root", -1, Transform::Identity()});
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      m.vertices.emplace_back(x0 + (x1 - x0) * i / n, y0 + (y1 - y0) * j / n, 0.0);
      m.weights.push_back({SkinWeight{0, 1.0}});
    }
  const auto at = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      m.triangles.push_back(Triangle{at(i, j), at(i + 1, j), at(i + 1, j + 1)});
      m.triangles.push_back(Triangle{at(i, j), at(i + 1, j + 1), at(i, j + 1)});
    }
  m.markers = {0};
  m.anchors = {Vec3(x0, y0, 0), Vec3(x1, y0, 0), Vec3(x0, y1, 0)};
  m.validate();
  return m;
}

SceneState single_component(std::shared_ptr<const KinematicModel> model, const Pose& pose) {
  SceneState s;
  s.components.push_back(SceneComponent{std::move(model), pose});
  return s;
}

ImageRgb noise_image(int width, int height, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, 255);
  ImageRgb img(width, height);
  for (std::size_t i = 0; i < img.size(); ++i)
    img[i] = Rgb8{static_cast<std::uint8_t>(u(rng)), static_cast<std::uint8_t>(u(rng)), static_cast<std::uint8_t>(u(rng))};
  return img;
}

HandScene make_hand_scene(const Vec3& position, std::uint64_t seed) {
  HandScene s;
  s.rig = desk_rig();
  auto model = std::make_shared<const KinematicModel>(make_hand_model());
  s.truth = single_component(model, default_hand_pose(*model, position));
  s.texture = make_texture(*model, seed, TextureStyle::Mottled);
  s.background = make_background(s.rig, seed);
  const std::vector<std::vector<Rgb8>> textures{s.texture};
  s.frame = synthesize_frame(s.truth, s.rig, s.background, textures).images;
  return s;
}

ObjectiveContext context_for(const HandScene& scene, double threshold, const ObjectiveParams& params) {
  return ObjectiveContext::build(scene.frame, scene.rig, model_roi(scene.truth, scene.rig, 40), threshold, params);
}

SceneState OcclusionScene::with_occluder() const {
  SceneState s;
  Pose pf, pr;
  pf.position = Vec3(0, 0, front_z);
  pr.position = Vec3(0, 0, rear_z);
  s.components.push_back(SceneComponent{front, pf});
  s.components.push_back(SceneComponent{rear, pr});
  return s;
}

SceneState OcclusionScene::without_occluder() const {
  Pose pr;
  pr.position = Vec3(0, 0, rear_z);
  return single_component(rear, pr);
}

OcclusionScene make_occlusion_scene() {
  OcclusionScene s;
  s.rig = desk_rig();
  s.front = std::make_shared<const KinematicModel>(make_plane_model(158.3, 197.9, -30.3, 30.7, 3));
  s.rear = std::make_shared<const KinematicModel>(make_plane_model(181.3, 219.7, -20.35, 20.35, 3));
  return s;
}

std::optional<Point3> cast_ray(const PinholeCamera& cam, int px, int py, std::span<const PlaneRect> planes) {
  const Vec3 origin = cam.center();
  const Vec3 dir = cam.rotation.conjugate() * Vec3((px - cam.cx) / cam.fx, (py - cam.cy) / cam.fy, 1.0);
  std::optional<Point3> best;
  double best_t = std::numeric_limits<double>::infinity();
  for (const PlaneRect& p : planes) {
    if (std::abs(dir.z()) < 1e-12) continue;
    const double t = (p.z - origin.z()) / dir.z();
    if (!(t > 0.0) || t >= best_t) continue;
    const Vec3 hit = origin + t * dir;
    if (hit.x() < p.x0 || hit.x() > p.x1 || hit.y() < p.y0 || hit.y() > p.y1) continue;
    best_t = t;
    best = hit;
  }
  return best;
}

PixelPairSet ray_cast_pairs(const StereoRig& rig, std::span<const PlaneRect> planes, double r) {
  PixelPairSet out;
  const PinholeCamera* cams[2] = {&rig.left, &rig.right};
  for (int a = 0; a < 2; ++a) {
    const PinholeCamera& from = *cams[a];
    const PinholeCamera& to = *cams[1 - a];
    for (int y = 0; y < from.height; ++y)
      for (int x = 0; x < from.width; ++x) {
        const auto hit = cast_ray(from, x, y, planes);
        if (!hit) continue;
        const auto q = project(*hit, to);
        if (!q) continue;
        const int bx = static_cast<int>(std::floor(q->u + 0.5)), by = static_cast<int>(std::floor(q->v + 0.5));
        if (bx < 0 || by < 0 || bx >= to.width || by >= to.height) continue;
        const auto back = cast_ray(to, bx, by, planes);
        if (!back || (*back - *hit).norm() > r) continue;
        if (a == 0) out.insert({{x, y}, {bx, by}});
        else out.insert({{bx, by}, {x, y}});
      }
  }
  return out;
}

SceneState perturb(const SceneState& s, std::mt19937_64& rng, double pos_mm, double rot_rad, double angle_rad) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SceneState out = s;
  for (auto& c : out.components) {
    c.pose.position += pos_mm * Vec3(u(rng), u(rng), u(rng));
    const Vec3 axis = Vec3(u(rng), u(rng), u(rng)).normalized();
    c.pose.orientation = (Quat(Eigen::AngleAxisd(rot_rad * u(rng), axis)) * c.pose.orientation).normalized();
    for (std::size_t d = 0; d < c.pose.angles.size(); ++d) {
      const Dof& dof = c.model->dofs[d];
      c.pose.angles[d] = std::clamp(c.pose.angles[d] + angle_rad * u(rng), dof.lower, dof.upper);
    }
  }
  return out;
}

}  // namespace rgbtrack::testing
