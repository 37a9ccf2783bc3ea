#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "rgbtrack/camera.hpp"
#include "rgbtrack/scene.hpp"

namespace rgbtrack {

/// Identifies the surface point seen by a pixel: mesh index, triangle index
/// and perspective-correct barycentrics quantised to 16 bits.
class PointId {
 public:
  static constexpr std::uint64_t kBackground = std::numeric_limits<std::uint64_t>::max();
  static constexpr double kBaryScale = 65535.0;

  PointId() = default;
  PointId(int mesh, int triangle, double b1, double b2);

  bool is_background() const { return packed_ == kBackground; }
  int mesh() const { return static_cast<int>(packed_ >> 56); }
  int triangle() const { return static_cast<int>((packed_ >> 32) & 0xFFFFFFu); }
  double b1() const { return static_cast<double>(packed_ & 0xFFFFu) / kBaryScale; }
  double b2() const { return static_cast<double>((packed_ >> 16) & 0xFFFFu) / kBaryScale; }
  std::uint64_t packed() const { return packed_; }
  static PointId from_packed(std::uint64_t packed) {
    PointId id;
    id.packed_ = packed;
    return id;
  }

  friend bool operator==(const PointId&, const PointId&) = default;

 private:
  std::uint64_t packed_ = kBackground;
};

/// Read-only view of a world-space mesh to rasterize.
struct MeshView {
  std::span<const Vec3> vertices;
  std::span<const Triangle> triangles;
  std::span<const Rgb8> colors;  ///< per-vertex texture; empty means flat colour
  Rgb8 flat_color{200, 200, 200};
};

inline MeshView view_of(const PosedMesh& mesh, std::span<const Rgb8> colors = {}, Rgb8 flat = Rgb8{200, 200, 200}) {
  return MeshView{mesh.vertices, mesh.triangles, colors, flat};
}

/// Per-view buffers covering `viewport` (full-frame pixel coordinates).
struct RenderBuffers {
  Roi viewport;
  ImageRgb color;  ///< empty unless colour output was requested
  Grid<float> depth;  ///< camera-frame depth, +inf where empty
  Grid<PointId> point_id;
  Roi drawn;  ///< full-frame box containing every covered pixel (may be loose; empty when nothing was drawn)

  bool covered(int x, int y) const { return !point_id(x - viewport.x0, y - viewport.y0).is_background(); }
};

struct RasterOptions {
  std::optional<Roi> viewport;  ///< defaults to the full image
  bool with_color = false;
  double near_plane = 1.0;  ///< triangles with a vertex closer than this (mm) are skipped
};

/// Z-buffered perspective rasterization sampled at pixel centres.
RenderBuffers rasterize(std::span<const MeshView> meshes, const PinholeCamera& camera, const RasterOptions& options = {});
/// Same as rasterize but reuses the storage of `out`.
void rasterize_into(std::span<const MeshView> meshes, const PinholeCamera& camera, const RasterOptions& options,
                    RenderBuffers& out);

/// World-space surface point referenced by an id.
inline Point3 surface_point(const PointId& id, std::span<const MeshView> meshes) {
  const MeshView& m = meshes[static_cast<std::size_t>(id.mesh())];
  const Triangle& t = m.triangles[static_cast<std::size_t>(id.triangle())];
  const double b1 = id.b1(), b2 = id.b2();
  return (1.0 - b1 - b2) * m.vertices[t[0]] + b1 * m.vertices[t[1]] + b2 * m.vertices[t[2]];
}

struct VisiblePoint {
  Point3 point;
  Pixel pixel;  ///< full-frame pixel centre
  PointId id;
};

std::vector<VisiblePoint> visible_points(const RenderBuffers& buffers, std::span<const MeshView> meshes);

/// Tight bounding box (full-frame coordinates) of the covered pixels.
std::optional<Roi> footprint(const RenderBuffers& buffers);
/// Expands a box by `margin` on every side and clips it to the image.
Roi expand_roi(const Roi& box, int margin, int width, int height);

struct SyntheticFrame {
  StereoImages images;
  PoseVector truth;
  std::vector<std::vector<std::optional<Pixel>>> joints_left;   ///< per component, per marker
  std::vector<std::vector<std::optional<Pixel>>> joints_right;
};

/// Renders textured models over the background pair (ambient-only shading).
/// `textures[i]` colours component i; an empty texture uses the model colour.
SyntheticFrame synthesize_frame(const SceneState& state, const StereoRig& rig, const StereoImages& background,
                                std::span<const std::vector<Rgb8>> textures);

/// Per-view boxes around the rendered footprint of `state`, expanded by
/// `margin` and clipped. Throws EmptyProjection when nothing is visible in
/// either view.
std::array<Roi, 2> model_roi(const SceneState& state, const StereoRig& rig, int margin);

}  // namespace rgbtrack
