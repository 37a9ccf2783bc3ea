#include "rgbtrack/tracker.hpp"

#include <algorithm>
#include <cmath>

namespace rgbtrack {

int TrackerConfig::margin_for_width(int width) const {
  return static_cast<int>(std::lround(roi_margin_px * width / 640.0));
}

void TrackerConfig::validate() const {
  if (particles < 1 || generations < 1) throw BadConfig("tracker: budget must be at least 1x1");
  if (!(c1 + c2 > 4.0)) throw BadConfig("tracker: c1 + c2 must exceed 4");
  if (!(objective.beta > 0)) throw BadConfig("tracker: beta must be positive");
  if (!(objective.occlusion_mm > 0)) throw BadConfig("tracker: occlusion range must be positive");
  if (roi_margin_px < 0) throw BadConfig("tracker: negative ROI margin");
  if (ranges.position_mm < 0 || ranges.rotation_deg < 0 || ranges.angle_deg < 0)
    throw BadConfig("tracker: negative search range");
}

std::vector<double> search_ranges(const SceneState& layout, const SearchRanges& ranges) {
  std::vector<double> out;
  const double quat = 0.5 * deg2rad(ranges.rotation_deg);
  for (const auto& c : layout.components) {
    out.insert(out.end(), 3, ranges.position_mm);
    out.insert(out.end(), 4, quat);
    out.insert(out.end(), c.model->dofs.size(), deg2rad(ranges.angle_deg));
  }
  return out;
}

Tracker::Tracker(StereoRig rig, TrackerConfig config) : rig_(std::move(rig)), config_(std::move(config)) {
  rig_.validate();
  config_.validate();
}

TrackerState Tracker::init(const SceneState& initial, const StereoImages& frame0) const {
  if (frame0.left.width() != rig_.left.width || frame0.left.height() != rig_.left.height)
    throw ResolutionMismatch("tracker: frame does not match the rig resolution");
  TrackerState s;
  s.current = initial;
  s.rois = model_roi(initial, rig_, config_.margin_for_width(rig_.left.width));
  return s;
}

namespace {

bool touches_border(const Roi& box, const Roi& roi, int width, int height) {
  return (box.x0 <= roi.x0 && roi.x0 > 0) || (box.y0 <= roi.y0 && roi.y0 > 0) ||
         (box.x1() >= roi.x1() && roi.x1() < width) || (box.y1() >= roi.y1() && roi.y1() < height);
}

}  // namespace

TrackerState Tracker::track(const TrackerState& state, const StereoImages& frames,
                            const std::optional<MaskPair>& masks) const {
  const int width = rig_.left.width, height = rig_.left.height;
  if (frames.left.width() != width || frames.left.height() != height || frames.right.width() != width ||
      frames.right.height() != height)
    throw ResolutionMismatch("tracker: frame does not match the rig resolution");

  TrackerState next = state;
  const PoseVector center = flatten(state.current);
  const std::vector<double> range = search_ranges(state.current, config_.ranges);

  SwarmConfig swarm;
  swarm.particles = config_.particles;
  swarm.generations = config_.generations;
  swarm.c1 = config_.c1;
  swarm.c2 = config_.c2;
  swarm.coefficients = config_.coefficients;
  swarm.seed = mix_seed(config_.seed, static_cast<std::uint64_t>(state.frame_index));
  swarm.init_range = range;
  swarm.lower.resize(center.size());
  swarm.upper.resize(center.size());
  std::vector<double> start = center.values;
  for (std::size_t d = 0; d < center.size(); ++d) {
    start[d] = std::clamp(start[d], center.lower[d], center.upper[d]);
    swarm.lower[d] = std::max(center.lower[d], start[d] - range[d]);
    swarm.upper[d] = std::min(center.upper[d], start[d] + range[d]);
  }

  int margin = config_.margin_for_width(width);
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::array<Roi, 2> rois;
    try {
      rois = model_roi(state.current, rig_, margin);
    } catch (const EmptyProjection&) {
      TrackerState lost = state;
      lost.lost = true;
      return lost;
    }
    ObjectiveContext ctx = ObjectiveContext::build(frames, rig_, rois, config_.threshold, config_.objective,
                                                   config_.angle_convention);
    if (config_.use_foreground_mask && masks) {
      for (int v = 0; v < 2; ++v) {
        ViewObservation& obs = ctx.views[v];
        const auto& mask = (*masks)[v];
        for (int y = 0; y < obs.roi.height; ++y)
          for (int x = 0; x < obs.roi.width; ++x)
            if (mask(obs.roi.x0 + x, obs.roi.y0 + y) == 0) obs.map.c(x, y) = 0.0;
      }
    }
    const SceneState& layout = state.current;
    const OptimizeResult result = optimize(
        [&](std::span<const double> x) { return score(unflatten(x, layout), ctx); }, start, swarm);

    SceneState best = unflatten(result.best, layout);
    next.current = best;
    next.last_score = result.best_score;
    next.rois = rois;

    bool retry = false;
    if (attempt == 0) {
      try {
        const auto footprint_boxes = model_roi(best, rig_, 0);
        for (int v = 0; v < 2; ++v)
          if (touches_border(footprint_boxes[v], rois[v], width, height)) retry = true;
      } catch (const EmptyProjection&) {
      }
    }
    if (!retry) break;
    margin *= 2;
  }
  next.lost = false;
  next.frame_index = state.frame_index + 1;
  next.history.push_back(next.current);
  return next;
}

}  // namespace rgbtrack
