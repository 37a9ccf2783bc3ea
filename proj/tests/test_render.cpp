#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "rgbtrack/render.hpp"

using namespace rgbtrack;
using namespace rgbtrack::testing;

namespace {

PosedMesh mesh_of(std::vector<Vec3> vertices, const std::vector<Triangle>& tris) {
  PosedMesh m;
  m.vertices = std::move(vertices);
  m.triangles = tris;
  return m;
}

const std::vector<Triangle> kOneTriangle{Triangle{0, 1, 2}};

struct UvSphere {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
};

UvSphere make_sphere(const Vec3& c, double r, int stacks, int slices) {
  UvSphere s;
  for (int i = 0; i <= stacks; ++i) {
    const double th = kPi * i / stacks;
    for (int j = 0; j < slices; ++j) {
      const double ph = 2 * kPi * j / slices;
      s.vertices.push_back(c + r * Vec3(std::sin(th) * std::cos(ph), std::cos(th), std::sin(th) * std::sin(ph)));
    }
  }
  for (int i = 0; i < stacks; ++i)
    for (int j = 0; j < slices; ++j) {
      const int a = i * slices + j, b = i * slices + (j + 1) % slices;
      const int c2 = a + slices, d = b + slices;
      s.triangles.push_back(Triangle{a, c2, b});
      s.triangles.push_back(Triangle{b, c2, d});
    }
  return s;
}

// Camera-frame depth of the first ray/triangle hit, if any, with the hit
// strictly inside the triangle by `margin` in barycentric terms.
std::optional<double> ray_depth(const PinholeCamera& cam, int px, int py, const Vec3& a, const Vec3& b, const Vec3& c,
                                double margin) {
  const Vec3 dir((px - cam.cx) / cam.fx, (py - cam.cy) / cam.fy, 1.0);
  const Vec3 A = cam.to_camera(a), B = cam.to_camera(b), C = cam.to_camera(c);
  const Vec3 e1 = B - A, e2 = C - A;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-12) return std::nullopt;
  const Vec3 t = -A;
  const double u = t.dot(p) / det;
  const Vec3 q = t.cross(e1);
  const double v = dir.dot(q) / det;
  const double s = e2.dot(q) / det;
  if (u < margin || v < margin || u + v > 1 - margin || s <= 0) return std::nullopt;
  return s;  // dir has unit z, so the ray parameter equals depth
}

}  // namespace

TEST(Rasterize, EmptyMeshListIsAllBackground) {
  const StereoRig rig = desk_rig();
  const RenderBuffers buf = rasterize({}, rig.left);
  EXPECT_EQ(buf.point_id.width(), 640);
  EXPECT_EQ(buf.point_id.height(), 480);
  for (std::size_t i = 0; i < buf.point_id.size(); ++i) {
    ASSERT_TRUE(buf.point_id[i].is_background());
    ASSERT_TRUE(std::isinf(buf.depth[i]));
  }
  EXPECT_FALSE(footprint(buf));
  EXPECT_TRUE(visible_points(buf, {}).empty());
}

TEST(Rasterize, CentredTriangleDepth) {
  const StereoRig rig = desk_rig();
  const PosedMesh m = mesh_of({Vec3(-50, -50, 600), Vec3(50, -50, 600), Vec3(0, 60, 600)}, kOneTriangle);
  const MeshView views[] = {view_of(m)};
  const RenderBuffers buf = rasterize(views, rig.left);
  EXPECT_NEAR(buf.depth(320, 240), 600.0, 0.5);
  EXPECT_FALSE(buf.point_id(320, 240).is_background());
}

TEST(Rasterize, NearerTriangleWins) {
  const StereoRig rig = desk_rig();
  const PosedMesh front = mesh_of({Vec3(-50, -50, 500), Vec3(50, -50, 500), Vec3(0, 60, 500)}, kOneTriangle);
  const PosedMesh back = mesh_of({Vec3(-120, -120, 800), Vec3(120, -120, 800), Vec3(0, 140, 800)}, kOneTriangle);
  for (bool front_first : {true, false}) {
    std::vector<MeshView> views = front_first ? std::vector{view_of(front), view_of(back)}
                                              : std::vector{view_of(back), view_of(front)};
    const int front_mesh = front_first ? 0 : 1;
    const RenderBuffers buf = rasterize(views, rig.left);
    const MeshView solo[] = {view_of(front)};
    const RenderBuffers only_front = rasterize(solo, rig.left);
    for (std::size_t i = 0; i < buf.point_id.size(); ++i)
      if (!only_front.point_id[i].is_background()) ASSERT_EQ(buf.point_id[i].mesh(), front_mesh);
  }
}

TEST(Rasterize, DepthFiniteExactlyWhereCovered) {
  const HandScene scene = make_hand_scene();
  const auto posed = pose_scene(scene.truth);
  const MeshView views[] = {view_of(posed[0])};
  const RenderBuffers buf = rasterize(views, scene.rig.right);
  std::size_t covered = 0;
  for (std::size_t i = 0; i < buf.point_id.size(); ++i) {
    const bool c = !buf.point_id[i].is_background();
    covered += c;
    ASSERT_EQ(c, std::isfinite(buf.depth[i]));
  }
  EXPECT_GT(covered, 1000u);
}

TEST(Rasterize, DepthBufferAgreesWithBruteForceRayCasting) {
  PinholeCamera cam;
  cam.fx = cam.fy = 80;
  cam.cx = 32;
  cam.cy = 24;
  cam.width = 64;
  cam.height = 48;
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-60, 60), z(300, 500);
  for (int scene = 0; scene < 5; ++scene) {
    std::vector<Vec3> verts;
    std::vector<Triangle> tris;
    for (int t = 0; t < 12; ++t) {
      const Vec3 c(u(rng), u(rng), z(rng));
      for (int k = 0; k < 3; ++k) verts.push_back(c + Vec3(u(rng), u(rng), 0.3 * u(rng)));
      tris.push_back(Triangle{3 * t, 3 * t + 1, 3 * t + 2});
    }
    const PosedMesh m = mesh_of(verts, tris);
    const MeshView views[] = {view_of(m)};
    const RenderBuffers buf = rasterize(views, cam);
    for (int y = 0; y < cam.height; ++y)
      for (int x = 0; x < cam.width; ++x) {
        double nearest = std::numeric_limits<double>::infinity();
        bool surely_covered = false;
        for (const Triangle& t : tris) {
          if (const auto d = ray_depth(cam, x, y, verts[t[0]], verts[t[1]], verts[t[2]], 0.0)) nearest = std::min(nearest, *d);
          surely_covered |= ray_depth(cam, x, y, verts[t[0]], verts[t[1]], verts[t[2]], 1e-6).has_value();
        }
        const float recorded = buf.depth(x, y);
        if (surely_covered) ASSERT_FALSE(buf.point_id(x, y).is_background()) << x << "," << y;
        if (std::isfinite(recorded)) ASSERT_LE(recorded, nearest * (1 + 1e-5) + 1e-4) << x << "," << y;
        if (std::isfinite(nearest) && surely_covered) ASSERT_NEAR(recorded, nearest, nearest * 1e-5);
      }
  }
}

TEST(Rasterize, Deterministic) {
  const HandScene scene = make_hand_scene();
  const auto posed = pose_scene(scene.truth);
  const MeshView views[] = {view_of(posed[0], scene.texture)};
  RasterOptions opt;
  opt.with_color = true;
  const RenderBuffers a = rasterize(views, scene.rig.left, opt);
  const RenderBuffers b = rasterize(views, scene.rig.left, opt);
  EXPECT_TRUE(a.color == b.color);
  EXPECT_TRUE(a.point_id == b.point_id);
  for (std::size_t i = 0; i < a.depth.size(); ++i)
    ASSERT_EQ(std::memcmp(&a.depth[i], &b.depth[i], sizeof(float)), 0);
}

TEST(Rasterize, ViewportMatchesFullFrameRender) {
  const HandScene scene = make_hand_scene();
  const auto posed = pose_scene(scene.truth);
  const MeshView views[] = {view_of(posed[0])};
  const RenderBuffers full = rasterize(views, scene.rig.left);
  RasterOptions opt;
  opt.viewport = Roi{250, 60, 120, 140};
  const RenderBuffers part = rasterize(views, scene.rig.left, opt);
  EXPECT_EQ(part.point_id.width(), 120);
  for (int y = 0; y < 140; ++y)
    for (int x = 0; x < 120; ++x) ASSERT_EQ(part.point_id(x, y), full.point_id(250 + x, 60 + y));
}

TEST(PointIdTest, PacksAndUnpacks) {
  const PointId id(3, 123456, 0.25, 0.5);
  EXPECT_EQ(id.mesh(), 3);
  EXPECT_EQ(id.triangle(), 123456);
  EXPECT_NEAR(id.b1(), 0.25, 1.0 / 65535);
  EXPECT_NEAR(id.b2(), 0.5, 1.0 / 65535);
  EXPECT_FALSE(id.is_background());
  EXPECT_TRUE(PointId().is_background());
  EXPECT_EQ(PointId::from_packed(id.packed()), id);
}

TEST(VisiblePoints, OneEntryPerCoveredPixel) {
  const StereoRig rig = desk_rig();
  const PosedMesh m = mesh_of({Vec3(-50, -50, 600), Vec3(50, -50, 600), Vec3(0, 60, 600)}, kOneTriangle);
  const MeshView views[] = {view_of(m)};
  const RenderBuffers buf = rasterize(views, rig.left);
  std::size_t k = 0;
  for (std::size_t i = 0; i < buf.point_id.size(); ++i) k += !buf.point_id[i].is_background();
  EXPECT_GT(k, 0u);
  EXPECT_EQ(visible_points(buf, views).size(), k);
}

TEST(VisiblePoints, SphereReprojectsOntoOwnPixel) {
  const StereoRig rig = desk_rig();
  const UvSphere s = make_sphere(Vec3(30, -20, 700), 80, 24, 36);
  const PosedMesh m = mesh_of(s.vertices, s.triangles);
  const MeshView views[] = {view_of(m)};
  for (const PinholeCamera* cam : {&rig.left, &rig.right}) {
    const RenderBuffers buf = rasterize(views, *cam);
    const auto pts = visible_points(buf, views);
    ASSERT_GT(pts.size(), 1000u);
    for (const VisiblePoint& vp : pts) {
      const auto px = project(vp.point, *cam);
      ASSERT_TRUE(px);
      ASSERT_LE(std::abs(px->u - vp.pixel.u), 0.5 + 1e-3);
      ASSERT_LE(std::abs(px->v - vp.pixel.v), 0.5 + 1e-3);
    }
  }
}

TEST(ModelRoi, FootprintPlusMargin) {
  const StereoRig rig = desk_rig();
  // Pixel centres 100..120 x 50..60 at z = 1000 with f = 600.
  auto plane = std::make_shared<const KinematicModel>(make_plane_model(-367.33, -332.67, -317.33, -299.33, 1));
  Pose p;
  p.position = Vec3(0, 0, 1000);
  const auto rois = model_roi(single_component(plane, p), rig, 10);
  EXPECT_EQ(rois[0], (Roi{90, 40, 41, 31}));
  EXPECT_EQ(rois[1].y0, 40);
  EXPECT_EQ(rois[1].height, 31);
}

TEST(ModelRoi, ClampedToImage) {
  const StereoRig rig = desk_rig();
  auto plane = std::make_shared<const KinematicModel>(make_plane_model(-600, -400, -450, -300, 1));
  Pose p;
  p.position = Vec3(0, 0, 1000);
  const auto rois = model_roi(single_component(plane, p), rig, 200);
  for (const Roi& r : rois) {
    EXPECT_GE(r.x0, 0);
    EXPECT_GE(r.y0, 0);
    EXPECT_LE(r.x1(), 640);
    EXPECT_LE(r.y1(), 480);
  }
  EXPECT_EQ(rois[0].x0, 0);
  EXPECT_EQ(rois[0].y0, 0);
}

TEST(ModelRoi, OffScreenHandThrows) {
  HandScene scene = make_hand_scene();
  scene.truth.components[0].pose.position = Vec3(5000, 0, 800);
  EXPECT_THROW(model_roi(scene.truth, scene.rig, 10), EmptyProjection);
  scene.truth.components[0].pose.position = Vec3(0, 0, -800);
  EXPECT_THROW(model_roi(scene.truth, scene.rig, 10), EmptyProjection);
}

TEST(ExpandRoi, ClipsAtBorders) {
  EXPECT_EQ(expand_roi(Roi{5, 5, 10, 10}, 10, 100, 100), (Roi{0, 0, 25, 25}));
  EXPECT_EQ(expand_roi(Roi{90, 90, 10, 10}, 10, 100, 100), (Roi{80, 80, 20, 20}));
}

TEST(SynthesizeFrame, HandBehindCameraLeavesBackground) {
  HandScene scene = make_hand_scene();
  scene.truth.components[0].pose.position = Vec3(0, 0, -800);
  const std::vector<std::vector<Rgb8>> tex{scene.texture};
  const SyntheticFrame f = synthesize_frame(scene.truth, scene.rig, scene.background, tex);
  EXPECT_TRUE(f.images.left == scene.background.left);
  EXPECT_TRUE(f.images.right == scene.background.right);
}

TEST(SynthesizeFrame, DeterministicAndRecordsTruth) {
  const HandScene a = make_hand_scene(Vec3(10, 0, 800), 5);
  const HandScene b = make_hand_scene(Vec3(10, 0, 800), 5);
  EXPECT_TRUE(a.frame.left == b.frame.left);
  EXPECT_TRUE(a.frame.right == b.frame.right);
  EXPECT_FALSE(a.frame.left == a.background.left);
  const std::vector<std::vector<Rgb8>> tex{a.texture};
  const SyntheticFrame f = synthesize_frame(a.truth, a.rig, a.background, tex);
  EXPECT_EQ(f.truth.values, flatten(a.truth).values);
  ASSERT_EQ(f.joints_left.size(), 1u);
  EXPECT_EQ(f.joints_left[0].size(), a.truth.components[0].model->markers.size());
}

TEST(SynthesizeFrame, ResolutionMismatchThrows) {
  const HandScene scene = make_hand_scene();
  StereoImages small{ImageRgb(320, 240), ImageRgb(320, 240)};
  const std::vector<std::vector<Rgb8>> tex{scene.texture};
  EXPECT_THROW(synthesize_frame(scene.truth, scene.rig, small, tex), ResolutionMismatch);
}

TEST(SynthesizeFrame, GroundTruthOutscoresNearbyHypotheses) {
  const HandScene scene = make_hand_scene();
  const ObjectiveContext ctx = context_for(scene);
  const double at_truth = score(scene.truth, ctx);
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> mag(5.0, 15.0);
  std::normal_distribution<double> gauss;
  int checked = 0;
  while (checked < 100) {
    SceneState s = perturb(scene.truth, rng, 0.0, deg2rad(3), deg2rad(5));
    const Vec3 dir = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
    s.components[0].pose.position += mag(rng) * dir;
    ++checked;
    EXPECT_GT(at_truth, score(s, ctx)) << "perturbation " << checked;
  }
}
