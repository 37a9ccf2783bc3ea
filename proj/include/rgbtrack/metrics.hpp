#pragma once

#include <span>
#include <utility>
#include <vector>

#include "rgbtrack/scene.hpp"

namespace rgbtrack {

/// Mean distance between corresponding joint centres, mm.
double hand_error(const Pose& estimated, const Pose& truth, const KinematicModel& model);

/// Mean distance between the three transformed anchors, mm. Throws
/// CollinearAnchors for degenerate anchor sets.
double object_error(const Pose& estimated, const Pose& truth, std::span<const Vec3> anchors);

struct FrameError {
  std::vector<double> per_object;
  double mean = 0.0;
};

/// Components with anchors use object_error, everything else hand_error.
FrameError frame_error(const SceneState& estimated, const SceneState& truth);

struct SuccessPoint {
  double threshold_mm;
  double fraction;
};

/// Fraction of frames whose error is at or below each threshold.
std::vector<SuccessPoint> success_curve(std::span<const double> errors, std::span<const double> thresholds);

/// 5, 10, ..., 50 mm.
std::vector<double> default_success_thresholds();

struct SequenceReport {
  std::vector<FrameError> frames;
  double mean = 0.0;  ///< mean of per-frame means
  std::vector<SuccessPoint> success;

  std::vector<double> frame_means() const;
};

SequenceReport make_report(std::span<const SceneState> estimated, std::span<const SceneState> truth,
                           std::span<const double> thresholds = {});

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation (0 for a single run)
  double median = 0.0;
  std::size_t count = 0;
};

Aggregate aggregate(std::span<const double> values);

}  // namespace rgbtrack
