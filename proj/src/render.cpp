#include "rgbtrack/render.hpp"

#include <algorithm>
#include <cmath>

namespace rgbtrack {

PointId::PointId(int mesh, int triangle, double b1, double b2) {
  const auto q1 = static_cast<std::uint64_t>(std::clamp(b1, 0.0, 1.0) * kBaryScale + 0.5);
  const auto q2 = static_cast<std::uint64_t>(std::clamp(b2, 0.0, 1.0) * kBaryScale + 0.5);
  packed_ = (static_cast<std::uint64_t>(mesh) << 56) | ((static_cast<std::uint64_t>(triangle) & 0xFFFFFFu) << 32) |
            (q2 << 16) | q1;
}

namespace {

struct ScreenVertex {
  double u, v;  // projected position
  double inv_z;
  bool valid;
};

int floor_int(double v) {
  const int i = static_cast<int>(v);
  return i > v ? i - 1 : i;
}

int ceil_int(double v) {
  const int i = static_cast<int>(v);
  return i < v ? i + 1 : i;
}

std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

namespace {

// Edge-function setup of a triangle that reached the pixel loop. The
// barycentrics of the winning fragment are resolved from it after all
// triangles have been drawn.
struct TriSetup {
  double A[3], B[3], C[3];  // edge functions opposite each vertex, positive inside
  double inv_area;
  double iz[3];
  int mesh, triangle;
};

// Edge function of the directed edge p -> q. Coefficients are derived from
// the lexicographically smaller endpoint and negated for the other
// direction, so the two triangles sharing an edge evaluate exactly opposite
// values at every pixel and no pixel on a shared edge is dropped by both.
void edge_coefficients(const ScreenVertex& p, const ScreenVertex& q, double& A, double& B, double& C) {
  const bool swapped = q.u < p.u || (q.u == p.u && q.v < p.v);
  const ScreenVertex& s = swapped ? q : p;
  const ScreenVertex& e = swapped ? p : q;
  A = -(e.v - s.v);
  B = e.u - s.u;
  C = (e.v - s.v) * s.u - (e.u - s.u) * s.v;
  if (swapped) {
    A = -A;
    B = -B;
    C = -C;
  }
}

}  // namespace

void rasterize_into(std::span<const MeshView> meshes, const PinholeCamera& camera, const RasterOptions& options,
                    RenderBuffers& out) {
  const Roi full{0, 0, camera.width, camera.height};
  Roi vp = options.viewport.value_or(full);
  vp.x0 = std::max(vp.x0, 0);
  vp.y0 = std::max(vp.y0, 0);
  vp.width = std::max(0, std::min(vp.x1(), camera.width) - vp.x0);
  vp.height = std::max(0, std::min(vp.y1(), camera.height) - vp.y0);
  out.viewport = vp;
  if (out.depth.width() != vp.width || out.depth.height() != vp.height) {
    out.depth.resize(vp.width, vp.height, std::numeric_limits<float>::infinity());
    out.point_id.resize(vp.width, vp.height, PointId{});
  } else {
    out.depth.fill(std::numeric_limits<float>::infinity());
    out.point_id.fill(PointId{});
  }
  if (options.with_color) out.color.resize(vp.width, vp.height, Rgb8{});
  else out.color = ImageRgb{};
  out.drawn = Roi{vp.x0, vp.y0, 0, 0};
  if (vp.empty()) return;
  int dx0 = vp.x1(), dy0 = vp.y1(), dx1 = vp.x0 - 1, dy1 = vp.y0 - 1;

  thread_local std::vector<TriSetup> setups;
  thread_local std::vector<ScreenVertex> screen;
  setups.clear();

  const Eigen::Matrix3d rot = camera.rotation.toRotationMatrix();
  for (std::size_t mi = 0; mi < meshes.size(); ++mi) {
    const MeshView& mesh = meshes[mi];
    screen.resize(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
      const Vec3 p = rot * mesh.vertices[i] + camera.translation;
      ScreenVertex& s = screen[i];
      s.valid = p.z() > options.near_plane;
      if (!s.valid) continue;
      s.inv_z = 1.0 / p.z();
      s.u = camera.cx + camera.fx * p.x() * s.inv_z;
      s.v = camera.cy + camera.fy * p.y() * s.inv_z;
    }

    for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
      const Triangle& tri = mesh.triangles[ti];
      const ScreenVertex& a = screen[tri[0]];
      const ScreenVertex& b = screen[tri[1]];
      const ScreenVertex& c = screen[tri[2]];
      if (!a.valid || !b.valid || !c.valid) continue;
      const double area = (b.u - a.u) * (c.v - a.v) - (c.u - a.u) * (b.v - a.v);
      if (std::abs(area) < 1e-12) continue;

      const double lo_x = vp.x0 - 1.0, hi_x = vp.x1(), lo_y = vp.y0 - 1.0, hi_y = vp.y1();
      const int xmin = std::max(vp.x0, ceil_int(std::clamp(std::min({a.u, b.u, c.u}), lo_x, hi_x)));
      const int xmax = std::min(vp.x1() - 1, floor_int(std::clamp(std::max({a.u, b.u, c.u}), lo_x, hi_x)));
      const int ymin = std::max(vp.y0, ceil_int(std::clamp(std::min({a.v, b.v, c.v}), lo_y, hi_y)));
      const int ymax = std::min(vp.y1() - 1, floor_int(std::clamp(std::max({a.v, b.v, c.v}), lo_y, hi_y)));
      if (xmin > xmax || ymin > ymax) continue;

      TriSetup t;
      edge_coefficients(b, c, t.A[0], t.B[0], t.C[0]);
      edge_coefficients(c, a, t.A[1], t.B[1], t.C[1]);
      edge_coefficients(a, b, t.A[2], t.B[2], t.C[2]);
      if (area < 0.0)
        for (int k = 0; k < 3; ++k) {
          t.A[k] = -t.A[k];
          t.B[k] = -t.B[k];
          t.C[k] = -t.C[k];
        }
      t.inv_area = 1.0 / std::abs(area);
      t.iz[0] = a.inv_z;
      t.iz[1] = b.inv_z;
      t.iz[2] = c.inv_z;
      t.mesh = static_cast<int>(mi);
      t.triangle = static_cast<int>(ti);
      const std::uint64_t index = setups.size();
      bool drawn = false;

      for (int y = ymin; y <= ymax; ++y) {
        const double row0 = t.B[0] * y + t.C[0], row1 = t.B[1] * y + t.C[1], row2 = t.B[2] * y + t.C[2];
        float* depth_row = &out.depth(0, y - vp.y0);
        PointId* id_row = &out.point_id(0, y - vp.y0);
        for (int x = xmin; x <= xmax; ++x) {
          const double e0 = t.A[0] * x + row0;
          const double e1 = t.A[1] * x + row1;
          const double e2 = t.A[2] * x + row2;
          if (e0 < 0.0 || e1 < 0.0 || e2 < 0.0) continue;
          const double iz = (e0 * t.iz[0] + e1 * t.iz[1] + e2 * t.iz[2]) * t.inv_area;
          const auto z = static_cast<float>(1.0 / iz);
          const int lx = x - vp.x0;
          if (!(z < depth_row[lx])) continue;
          depth_row[lx] = z;
          id_row[lx] = PointId::from_packed(index);
          drawn = true;
        }
      }
      if (drawn) {
        setups.push_back(t);
        dx0 = std::min(dx0, xmin);
        dx1 = std::max(dx1, xmax);
        dy0 = std::min(dy0, ymin);
        dy1 = std::max(dy1, ymax);
      }
    }
  }

  if (dx1 < dx0) return;
  out.drawn = Roi{dx0, dy0, dx1 - dx0 + 1, dy1 - dy0 + 1};
  for (int ly = dy0 - vp.y0; ly <= dy1 - vp.y0; ++ly) {
    const int y = vp.y0 + ly;
    for (int lx = dx0 - vp.x0; lx <= dx1 - vp.x0; ++lx) {
      PointId& id = out.point_id(lx, ly);
      if (id.is_background()) continue;
      const TriSetup& t = setups[id.packed()];
      const int x = vp.x0 + lx;
      const double l0 = (t.A[0] * x + (t.B[0] * y + t.C[0])) * t.inv_area;
      const double l1 = (t.A[1] * x + (t.B[1] * y + t.C[1])) * t.inv_area;
      const double l2 = (t.A[2] * x + (t.B[2] * y + t.C[2])) * t.inv_area;
      const double w1 = l1 * t.iz[1], w2 = l2 * t.iz[2];
      const double iz = l0 * t.iz[0] + w1 + w2;
      const double p1 = w1 / iz, p2 = w2 / iz;
      id = PointId(t.mesh, t.triangle, p1, p2);
      if (options.with_color) {
        const MeshView& mesh = meshes[static_cast<std::size_t>(t.mesh)];
        Rgb8 col = mesh.flat_color;
        if (!mesh.colors.empty()) {
          const Triangle& tri = mesh.triangles[static_cast<std::size_t>(t.triangle)];
          const double p0 = 1.0 - p1 - p2;
          const Rgb8 &ca = mesh.colors[tri[0]], &cb = mesh.colors[tri[1]], &cc = mesh.colors[tri[2]];
          col = Rgb8{to_u8(p0 * ca.r + p1 * cb.r + p2 * cc.r), to_u8(p0 * ca.g + p1 * cb.g + p2 * cc.g),
                     to_u8(p0 * ca.b + p1 * cb.b + p2 * cc.b)};
        }
        out.color(lx, ly) = col;
      }
    }
  }
}

RenderBuffers rasterize(std::span<const MeshView> meshes, const PinholeCamera& camera, const RasterOptions& options) {
  RenderBuffers out;
  rasterize_into(meshes, camera, options, out);
  return out;
}

std::vector<VisiblePoint> visible_points(const RenderBuffers& buffers, std::span<const MeshView> meshes) {
  std::vector<VisiblePoint> out;
  const Roi& vp = buffers.viewport;
  for (int y = 0; y < vp.height; ++y)
    for (int x = 0; x < vp.width; ++x) {
      const PointId id = buffers.point_id(x, y);
      if (id.is_background()) continue;
      out.push_back(VisiblePoint{surface_point(id, meshes), Pixel{double(vp.x0 + x), double(vp.y0 + y)}, id});
    }
  return out;
}

std::optional<Roi> footprint(const RenderBuffers& buffers) {
  const Roi& vp = buffers.viewport;
  const Roi& d = buffers.drawn;
  int x0 = vp.width, y0 = vp.height, x1 = -1, y1 = -1;
  for (int y = d.y0 - vp.y0; y < d.y1() - vp.y0; ++y)
    for (int x = d.x0 - vp.x0; x < d.x1() - vp.x0; ++x) {
      if (buffers.point_id(x, y).is_background()) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (x1 < 0) return std::nullopt;
  return Roi{vp.x0 + x0, vp.y0 + y0, x1 - x0 + 1, y1 - y0 + 1};
}

Roi expand_roi(const Roi& box, int margin, int width, int height) {
  const int x0 = std::max(0, box.x0 - margin);
  const int y0 = std::max(0, box.y0 - margin);
  const int x1 = std::min(width, box.x1() + margin);
  const int y1 = std::min(height, box.y1() + margin);
  return Roi{x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

namespace {

std::vector<MeshView> mesh_views(const SceneState& state, const std::vector<PosedMesh>& posed,
                                 std::span<const std::vector<Rgb8>> textures) {
  std::vector<MeshView> views;
  for (std::size_t i = 0; i < posed.size(); ++i) {
    std::span<const Rgb8> tex;
    if (i < textures.size() && textures[i].size() == posed[i].vertices.size()) tex = textures[i];
    views.push_back(view_of(posed[i], tex, state.components[i].model->color));
  }
  return views;
}

ImageRgb composite(const ImageRgb& background, const RenderBuffers& buf) {
  ImageRgb out = background;
  for (int y = 0; y < buf.viewport.height; ++y)
    for (int x = 0; x < buf.viewport.width; ++x)
      if (!buf.point_id(x, y).is_background()) out(x + buf.viewport.x0, y + buf.viewport.y0) = buf.color(x, y);
  return out;
}

}  // namespace

SyntheticFrame synthesize_frame(const SceneState& state, const StereoRig& rig, const StereoImages& background,
                                std::span<const std::vector<Rgb8>> textures) {
  for (const ImageRgb* img : {&background.left, &background.right})
    if (img->width() != rig.left.width || img->height() != rig.left.height)
      throw ResolutionMismatch("synthesize_frame: background does not match the rig resolution");
  const auto posed = pose_scene(state);
  const auto views = mesh_views(state, posed, textures);
  RasterOptions opt;
  opt.with_color = true;
  SyntheticFrame frame;
  frame.images.left = composite(background.left, rasterize(views, rig.left, opt));
  frame.images.right = composite(background.right, rasterize(views, rig.right, opt));
  frame.truth = flatten(state);
  for (const auto& c : state.components) {
    std::vector<std::optional<Pixel>> jl, jr;
    for (const Point3& p : joint_centers(*c.model, c.pose)) {
      jl.push_back(project(p, rig.left));
      jr.push_back(project(p, rig.right));
    }
    frame.joints_left.push_back(std::move(jl));
    frame.joints_right.push_back(std::move(jr));
  }
  return frame;
}

std::array<Roi, 2> model_roi(const SceneState& state, const StereoRig& rig, int margin) {
  const auto posed = pose_scene(state);
  const auto views = mesh_views(state, posed, {});
  std::array<Roi, 2> out;
  const PinholeCamera* cams[2] = {&rig.left, &rig.right};
  for (int v = 0; v < 2; ++v) {
    const auto box = footprint(rasterize(views, *cams[v]));
    if (!box) throw EmptyProjection("model_roi: scene projects to no pixels in the " + std::string(v ? "right" : "left") + " view");
    out[v] = expand_roi(*box, margin, cams[v]->width, cams[v]->height);
  }
  return out;
}

}  // namespace rgbtrack
