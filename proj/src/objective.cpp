#include "rgbtrack/objective.hpp"

#include <cmath>
#include <fstream>

namespace rgbtrack {

ObjectiveContext ObjectiveContext::build(const StereoImages& frames, const StereoRig& rig,
                                         const std::array<Roi, 2>& rois, double threshold,
                                         const ObjectiveParams& params, AngleConvention convention) {
  ObjectiveContext ctx;
  ctx.rig = rig;
  ctx.params = params;
  const ImageRgb* images[2] = {&frames.left, &frames.right};
  for (int v = 0; v < 2; ++v) {
    if (images[v]->width() != rig.left.width || images[v]->height() != rig.left.height)
      throw ResolutionMismatch("objective: frame does not match the rig resolution");
    ViewObservation& obs = ctx.views[v];
    obs.roi = expand_roi(rois[v], 0, rig.left.width, rig.left.height);
    if (obs.roi.empty()) throw EmptyProjection("objective: empty region of interest");
    const ImageRgb crop = images[v]->crop(obs.roi);
    obs.rgb.resize(crop.size());
    for (std::size_t i = 0; i < crop.size(); ++i)
      obs.rgb[i] = {crop[i].r / 255.0f, crop[i].g / 255.0f, crop[i].b / 255.0f};
    obs.map = distinctiveness(structure_eigen(to_gray(crop), 3), threshold, convention);
  }
  return ctx;
}

namespace {

// Covered pixels of one rendered view with their surface points. `index`
// maps a buffer pixel to its entry (-1 when uncovered) and is reset entry by
// entry so it never needs a full clear.
struct CoveredView {
  std::vector<std::int32_t> index;
  std::vector<std::uint32_t> pixels;
  std::vector<Point3> points;

  void rebuild(const RenderBuffers& buf, std::span<const MeshView> views) {
    const auto& ids = buf.point_id;
    if (index.size() != ids.size()) index.assign(ids.size(), -1);
    for (std::uint32_t i : pixels) index[i] = -1;
    pixels.clear();
    points.clear();
    const Roi& vp = buf.viewport;
    const Roi& d = buf.drawn;
    for (int y = d.y0 - vp.y0; y < d.y1() - vp.y0; ++y)
      for (int x = d.x0 - vp.x0; x < d.x1() - vp.x0; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * vp.width + x;
        if (ids[i].is_background()) continue;
        index[i] = static_cast<std::int32_t>(pixels.size());
        pixels.push_back(static_cast<std::uint32_t>(i));
        points.push_back(surface_point(ids[i], views));
      }
  }
};

struct Scratch {
  std::vector<PosedMesh> posed;
  std::vector<MeshView> views;
  RenderBuffers buffers[2];
  CoveredView covered[2];
  std::vector<std::int32_t> partner;  // right pixel matched by each covered left pixel
};

double color_distance(const std::array<float, 3>& a, const std::array<float, 3>& b, ColorNorm norm) {
  const double dr = a[0] - b[0], dg = a[1] - b[1], db = a[2] - b[2];
  if (norm == ColorNorm::L1) return std::abs(dr) + std::abs(dg) + std::abs(db);
  return std::sqrt(dr * dr + dg * dg + db * db);
}

double pixel_score(const ObjectiveContext& ctx, int lx, int ly, int rx, int ry) {
  const ViewObservation& L = ctx.views[0];
  const ViewObservation& R = ctx.views[1];
  const double c = std::min(L.c(lx, ly), R.c(rx, ry));
  if (c <= 0.0) return 0.0;
  return c * std::exp(-ctx.params.beta * color_distance(L.color(lx, ly), R.color(rx, ry), ctx.params.norm));
}

// Calls fn(point, left_pixel, right_pixel, source, lx, ly, rx, ry) once per
// surviving pixel pair.
template <class Fn>
void for_each_correspondence(const SceneState& state, const ObjectiveContext& ctx, Fn&& fn) {
  thread_local Scratch s;
  const std::size_t nc = state.components.size();
  s.posed.resize(nc);
  s.views.clear();
  for (std::size_t i = 0; i < nc; ++i) {
    const auto& c = state.components[i];
    skin_into(*c.model, forward_kinematics(*c.model, c.pose), s.posed[i]);
    s.views.push_back(view_of(s.posed[i]));
  }
  const PinholeCamera* cams[2] = {&ctx.rig.left, &ctx.rig.right};
  for (int v = 0; v < 2; ++v) {
    RasterOptions opt;
    opt.viewport = ctx.views[v].roi;
    rasterize_into(s.views, *cams[v], opt, s.buffers[v]);
    s.covered[v].rebuild(s.buffers[v], s.views);
  }
  const double r2 = ctx.params.occlusion_mm * ctx.params.occlusion_mm;
  s.partner.assign(s.covered[0].pixels.size(), -1);

  for (int src = 0; src < 2; ++src) {
    const Roi& aroi = s.buffers[src].viewport;
    const Roi& broi = s.buffers[1 - src].viewport;
    const CoveredView& a = s.covered[src];
    const CoveredView& b = s.covered[1 - src];
    const PinholeCamera& other = *cams[1 - src];
    const Eigen::Matrix3d rot = other.rotation.toRotationMatrix();
    for (std::size_t k = 0; k < a.pixels.size(); ++k) {
      const Point3& p = a.points[k];
      const Vec3 pc = rot * p + other.translation;
      if (!(pc.z() > 0.0)) continue;
      const double u = other.cx + other.fx * pc.x() / pc.z();
      const double v = other.cy + other.fy * pc.y() / pc.z();
      const int bx = nearest_pixel(u), by = nearest_pixel(v);
      if (!broi.contains(bx, by)) continue;
      const std::int32_t bpix = (by - broi.y0) * broi.width + (bx - broi.x0);
      const std::int32_t bk = b.index[static_cast<std::size_t>(bpix)];
      if (bk < 0) continue;
      if ((b.points[static_cast<std::size_t>(bk)] - p).squaredNorm() > r2) continue;

      const auto apix = static_cast<std::int32_t>(a.pixels[k]);
      const int ax = aroi.x0 + apix % aroi.width, ay = aroi.y0 + apix / aroi.width;
      const Pixel pa{double(ax), double(ay)}, pb{u, v};
      if (src == 0) {
        s.partner[k] = bpix;
        fn(p, pa, pb, View::Left, ax, ay, bx, by);
      } else {
        if (s.partner[static_cast<std::size_t>(bk)] == apix) continue;  // already counted by the left pass
        fn(p, pb, pa, View::Right, bx, by, ax, ay);
      }
    }
  }
}

}  // namespace

std::vector<Correspondence> mutual_correspondences(const SceneState& state, const ObjectiveContext& ctx) {
  std::vector<Correspondence> out;
  for_each_correspondence(state, ctx, [&](const Point3& p, Pixel pl, Pixel pr, View src, int, int, int, int) {
    out.push_back(Correspondence{p, pl, pr, src});
  });
  return out;
}

double point_score(const Correspondence& corr, const ObjectiveContext& ctx) {
  return pixel_score(ctx, nearest_pixel(corr.left.u), nearest_pixel(corr.left.v), nearest_pixel(corr.right.u),
                     nearest_pixel(corr.right.v));
}

double score(const SceneState& state, const ObjectiveContext& ctx) {
  double total = 0.0;
  for_each_correspondence(state, ctx, [&](const Point3&, Pixel, Pixel, View, int lx, int ly, int rx, int ry) {
    total += pixel_score(ctx, lx, ly, rx, ry);
  });
  return total;
}

void write_correspondence_csv(const SceneState& state, const ObjectiveContext& ctx, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "X,Y,Z,ul,vl,ur,vr,source,c_left,c_right,color_distance,s\n";
  out.precision(10);
  for (const Correspondence& c : mutual_correspondences(state, ctx)) {
    const int lx = nearest_pixel(c.left.u), ly = nearest_pixel(c.left.v);
    const int rx = nearest_pixel(c.right.u), ry = nearest_pixel(c.right.v);
    out << c.point.x() << "," << c.point.y() << "," << c.point.z() << "," << c.left.u << "," << c.left.v << ","
        << c.right.u << "," << c.right.v << "," << (c.source == View::Left ? "L" : "R") << ","
        << ctx.views[0].c(lx, ly) << "," << ctx.views[1].c(rx, ry) << ","
        << color_distance(ctx.views[0].color(lx, ly), ctx.views[1].color(rx, ry), ctx.params.norm) << ","
        << point_score(c, ctx) << "\n";
  }
}

}  // namespace rgbtrack
