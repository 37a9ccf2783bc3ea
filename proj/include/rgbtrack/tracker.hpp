#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "rgbtrack/objective.hpp"
#include "rgbtrack/pso.hpp"
#include "rgbtrack/scene.hpp"

namespace rgbtrack {

/// Half-widths of the per-frame search window around the previous solution.
struct SearchRanges {
  double position_mm = 40.0;
  double rotation_deg = 10.0;  ///< applied to quaternion components as rad/2
  double angle_deg = 10.0;     ///< articulation angles
};

struct TrackerConfig {
  int particles = 32;
  int generations = 32;
  double c1 = 2.8;
  double c2 = 1.3;
  std::uint64_t seed = 1;
  RandomCoefficients coefficients = RandomCoefficients::PerDimension;
  SearchRanges ranges;
  ObjectiveParams objective;
  double threshold = 0.1;  ///< distinctiveness threshold
  AngleConvention angle_convention = AngleConvention::SmallOverLarge;
  int roi_margin_px = 40;  ///< at 640 px image width, scaled with resolution
  bool use_foreground_mask = false;

  int margin_for_width(int width) const;
  void validate() const;
};

/// Per-dimension search window half-widths for a scene layout.
std::vector<double> search_ranges(const SceneState& layout, const SearchRanges& ranges);

struct TrackerState {
  SceneState current;
  double last_score = 0.0;
  int frame_index = 0;           ///< frames processed so far
  std::array<Roi, 2> rois{};     ///< regions used for the latest scoring
  std::vector<SceneState> history;
  bool lost = false;             ///< the subject projected to nothing
};

/// Per-view binary masks (non-zero = foreground).
using MaskPair = std::array<Grid<std::uint8_t>, 2>;

/// Frame-to-frame tracking loop. The tracker itself holds only immutable
/// configuration; all evolving data lives in TrackerState.
class Tracker {
 public:
  Tracker(StereoRig rig, TrackerConfig config);

  const StereoRig& rig() const { return rig_; }
  const TrackerConfig& config() const { return config_; }

  /// Throws EmptyProjection when the initial scene is not visible.
  TrackerState init(const SceneState& initial, const StereoImages& frame0) const;

  /// Crops around the previous solution, searches the window around it and
  /// commits the best hypothesis. When the previous solution projects to
  /// nothing the returned state is unchanged apart from `lost`.
  TrackerState track(const TrackerState& state, const StereoImages& frames,
                     const std::optional<MaskPair>& masks = std::nullopt) const;

 private:
  StereoRig rig_;
  TrackerConfig config_;
};

}  // namespace rgbtrack
