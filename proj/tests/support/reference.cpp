#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include <Eigen/Eigenvalues>

#include "rgbtrack/render.hpp"

namespace rgbtrack::testing {

namespace {

double luma_at(const ImageF& g, int x, int y) {
  x = std::clamp(x, 0, g.width() - 1);
  y = std::clamp(y, 0, g.height() - 1);
  return g(x, y);
}

double median_by_sort(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

EigenMaps reference_eigen(const ImageF& gray, int window) {
  const int w = gray.width(), h = gray.height(), r = window / 2;
  EigenMaps out{ImageF(w, h), ImageF(w, h), window};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int sx = std::clamp(x + dx, 0, w - 1), sy = std::clamp(y + dy, 0, h - 1);
          const double gx = 0.5 * (luma_at(gray, sx + 1, sy) - luma_at(gray, sx - 1, sy));
          const double gy = 0.5 * (luma_at(gray, sx, sy + 1) - luma_at(gray, sx, sy - 1));
          m(0, 0) += gx * gx;
          m(0, 1) += gx * gy;
          m(1, 1) += gy * gy;
        }
      m(1, 0) = m(0, 1);
      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(m, Eigen::EigenvaluesOnly);
      out.lambda1(x, y) = solver.eigenvalues()(1);
      out.lambda2(x, y) = std::max(0.0, solver.eigenvalues()(0));
    }
  return out;
}

ImageF reference_distinctiveness(const EigenMaps& eig, double threshold, AngleConvention convention) {
  const int w = eig.lambda1.width(), h = eig.lambda1.height();
  std::vector<double> ds, as;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double l1 = eig.lambda1(x, y), l2 = eig.lambda2(x, y);
      if (l1 == 0.0 && l2 == 0.0) continue;
      ds.push_back(std::log(std::hypot(l1, l2)));
      as.push_back(convention == AngleConvention::SmallOverLarge ? std::atan2(l2, l1) : std::atan2(l1, l2));
    }
  ImageF c(w, h, 0.0);
  if (ds.empty()) return c;
  const double md = median_by_sort(ds), ma = median_by_sort(as);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double l1 = eig.lambda1(x, y), l2 = eig.lambda2(x, y);
      if (l1 == 0.0 && l2 == 0.0) continue;
      const double d = std::log(std::hypot(l1, l2));
      const double a = convention == AngleConvention::SmallOverLarge ? std::atan2(l2, l1) : std::atan2(l1, l2);
      const double v = 1.0 / (1.0 + std::exp(md - d)) * (1.0 / (1.0 + std::exp(ma - a)));
      c(x, y) = v > threshold ? v : 0.0;
    }
  return c;
}

ImageF reference_map(const ImageRgb& image, double threshold) {
  ImageF gray(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) {
      const Rgb8 p = image(x, y);
      gray(x, y) = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
    }
  return reference_distinctiveness(reference_eigen(gray, 3), threshold);
}

namespace {

using PixelPair = std::pair<std::pair<int, int>, std::pair<int, int>>;

std::set<PixelPair> reference_pairs(const SceneState& state, const ObjectiveContext& ctx) {
  const auto posed = pose_scene(state);
  std::vector<MeshView> views;
  for (const auto& p : posed) views.push_back(view_of(p));
  const PinholeCamera* cams[2] = {&ctx.rig.left, &ctx.rig.right};
  RenderBuffers buf[2];
  for (int v = 0; v < 2; ++v) {
    RasterOptions opt;
    opt.viewport = ctx.views[static_cast<std::size_t>(v)].roi;
    buf[v] = rasterize(views, *cams[v], opt);
  }
  const double r = ctx.params.occlusion_mm;
  std::set<PixelPair> pairs;
  for (int a = 0; a < 2; ++a) {
    const int b = 1 - a;
    const Roi& ra = buf[a].viewport;
    const Roi& rb = buf[b].viewport;
    for (int y = ra.y0; y < ra.y1(); ++y)
      for (int x = ra.x0; x < ra.x1(); ++x) {
        const PointId id = buf[a].point_id(x - ra.x0, y - ra.y0);
        if (id.is_background()) continue;
        const Point3 p = surface_point(id, views);
        const auto q = project(p, *cams[b]);
        if (!q) continue;
        const int bx = static_cast<int>(std::floor(q->u + 0.5)), by = static_cast<int>(std::floor(q->v + 0.5));
        if (!rb.contains(bx, by)) continue;
        const PointId other = buf[b].point_id(bx - rb.x0, by - rb.y0);
        if (other.is_background()) continue;
        if ((surface_point(other, views) - p).norm() > r) continue;
        if (a == 0) pairs.insert({{x, y}, {bx, by}});
        else pairs.insert({{bx, by}, {x, y}});
      }
  }
  return pairs;
}

}  // namespace

double reference_score(const SceneState& state, const ObjectiveContext& ctx, const StereoImages& frames) {
  double total = 0.0;
  for (const auto& [l, rp] : reference_pairs(state, ctx)) {
    const auto& L = ctx.views[0];
    const auto& R = ctx.views[1];
    const double cl = L.map.c(l.first - L.roi.x0, l.second - L.roi.y0);
    const double cr = R.map.c(rp.first - R.roi.x0, rp.second - R.roi.y0);
    const Rgb8 il = frames.left(l.first, l.second), ir = frames.right(rp.first, rp.second);
    const double dr = il.r / 255.0 - ir.r / 255.0, dg = il.g / 255.0 - ir.g / 255.0, db = il.b / 255.0 - ir.b / 255.0;
    const double diff = ctx.params.norm == ColorNorm::L1 ? std::abs(dr) + std::abs(dg) + std::abs(db)
                                                         : std::sqrt(dr * dr + dg * dg + db * db);
    total += std::min(cl, cr) * std::exp(-ctx.params.beta * diff);
  }
  return total;
}

std::size_t reference_pair_count(const SceneState& state, const ObjectiveContext& ctx) {
  return reference_pairs(state, ctx).size();
}

}  // namespace rgbtrack::testing
