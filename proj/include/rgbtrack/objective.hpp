#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "rgbtrack/camera.hpp"
#include "rgbtrack/distinct.hpp"
#include "rgbtrack/render.hpp"
#include "rgbtrack/scene.hpp"

namespace rgbtrack {

enum class ColorNorm {
  Euclidean,  ///< L2 over RGB scaled to [0, 1]
  L1,
};

struct ObjectiveParams {
  double beta = 100.0;         ///< steepness of the colour-similarity exponential
  double occlusion_mm = 3.0;   ///< max distance between the two views' surface points
  ColorNorm norm = ColorNorm::Euclidean;
};

/// Observation data for one view, restricted to its ROI.
struct ViewObservation {
  Roi roi;  ///< full-frame coordinates
  std::vector<std::array<float, 3>> rgb;  ///< ROI pixels, channels scaled to [0, 1]
  DistinctivenessMap map;  ///< computed on the ROI crop

  float c(int x, int y) const { return static_cast<float>(map.c(x - roi.x0, y - roi.y0)); }
  const std::array<float, 3>& color(int x, int y) const {
    return rgb[static_cast<std::size_t>(y - roi.y0) * roi.width + (x - roi.x0)];
  }
};

/// Everything needed to score hypotheses for one stereo frame. Immutable
/// once built and safe to share between threads.
struct ObjectiveContext {
  StereoRig rig;
  ObjectiveParams params;
  std::array<ViewObservation, 2> views;  ///< left, right

  /// Crops both images, computes distinctiveness on the crops.
  static ObjectiveContext build(const StereoImages& frames, const StereoRig& rig, const std::array<Roi, 2>& rois,
                                double threshold, const ObjectiveParams& params = {},
                                AngleConvention convention = AngleConvention::SmallOverLarge);
};

enum class View { Left = 0, Right = 1 };

struct Correspondence {
  Point3 point;
  Pixel left;
  Pixel right;
  View source = View::Left;
};

/// Model points visible in one view whose projection into the other view
/// hits the same surface (within the occlusion tolerance). Union of the
/// left-to-right and right-to-left passes; a pixel pair appears once.
std::vector<Correspondence> mutual_correspondences(const SceneState& state, const ObjectiveContext& ctx);

/// Colour consistency of one correspondence (nearest-pixel sampling).
double point_score(const Correspondence& corr, const ObjectiveContext& ctx);

/// Total colour consistency of a hypothesis.
double score(const SceneState& state, const ObjectiveContext& ctx);

/// Debug dump, one row per correspondence.
void write_correspondence_csv(const SceneState& state, const ObjectiveContext& ctx, const std::string& path);

inline int nearest_pixel(double coord) {
  const double c = std::clamp(coord + 0.5, -1e9, 1e9);
  const int i = static_cast<int>(c);
  return i > c ? i - 1 : i;
}

}  // namespace rgbtrack
