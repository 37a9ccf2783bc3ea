#include "rgbtrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rgbtrack {

double hand_error(const Pose& estimated, const Pose& truth, const KinematicModel& model) {
  const auto a = joint_centers(model, estimated);
  const auto b = joint_centers(model, truth);
  if (a.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]).norm();
  return sum / static_cast<double>(a.size());
}

namespace {

Transform pose_transform(const Pose& p) {
  Transform t = Transform::Identity();
  t.translate(p.position);
  t.rotate(p.orientation.normalized());
  return t;
}

}  // namespace

double object_error(const Pose& estimated, const Pose& truth, std::span<const Vec3> anchors) {
  if (anchors.size() != 3) throw CollinearAnchors("object_error: exactly three anchors required");
  const Vec3 n = (anchors[1] - anchors[0]).cross(anchors[2] - anchors[0]);
  const double scale = (anchors[1] - anchors[0]).norm() * (anchors[2] - anchors[0]).norm();
  if (!(n.norm() > 1e-9 * std::max(scale, 1e-12))) throw CollinearAnchors("object_error: anchors are collinear");
  const Transform te = pose_transform(estimated), tt = pose_transform(truth);
  double sum = 0.0;
  for (const Vec3& a : anchors) sum += (te * a - tt * a).norm();
  return sum / 3.0;
}

FrameError frame_error(const SceneState& estimated, const SceneState& truth) {
  if (estimated.components.size() != truth.components.size())
    throw DimensionMismatch("frame_error: scenes have different component counts");
  FrameError out;
  for (std::size_t i = 0; i < truth.components.size(); ++i) {
    const KinematicModel& m = *truth.components[i].model;
    const Pose& e = estimated.components[i].pose;
    const Pose& t = truth.components[i].pose;
    out.per_object.push_back(m.anchors.size() == 3 ? object_error(e, t, m.anchors) : hand_error(e, t, m));
  }
  if (!out.per_object.empty())
    out.mean = std::accumulate(out.per_object.begin(), out.per_object.end(), 0.0) / out.per_object.size();
  return out;
}

std::vector<SuccessPoint> success_curve(std::span<const double> errors, std::span<const double> thresholds) {
  std::vector<SuccessPoint> out;
  for (double t : thresholds) {
    const auto ok = std::count_if(errors.begin(), errors.end(), [t](double e) { return e <= t; });
    out.push_back({t, errors.empty() ? 0.0 : static_cast<double>(ok) / errors.size()});
  }
  return out;
}

std::vector<double> default_success_thresholds() {
  std::vector<double> t;
  for (int mm = 5; mm <= 50; mm += 5) t.push_back(mm);
  return t;
}

std::vector<double> SequenceReport::frame_means() const {
  std::vector<double> out;
  for (const FrameError& f : frames) out.push_back(f.mean);
  return out;
}

SequenceReport make_report(std::span<const SceneState> estimated, std::span<const SceneState> truth,
                           std::span<const double> thresholds) {
  if (estimated.size() != truth.size()) throw DimensionMismatch("make_report: trajectory length differs from truth");
  SequenceReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) r.frames.push_back(frame_error(estimated[i], truth[i]));
  const auto means = r.frame_means();
  if (!means.empty()) r.mean = std::accumulate(means.begin(), means.end(), 0.0) / means.size();
  const auto defaults = default_success_thresholds();
  r.success = success_curve(means, thresholds.empty() ? std::span<const double>(defaults) : thresholds);
  return r;
}

Aggregate aggregate(std::span<const double> values) {
  Aggregate a;
  a.count = values.size();
  if (values.empty()) return a;
  a.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(ss / (values.size() - 1));
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  a.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return a;
}

}  // namespace rgbtrack
