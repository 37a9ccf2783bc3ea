#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rgbtrack/dataset.hpp"
#include "rgbtrack/metrics.hpp"
#include "rgbtrack/tracker.hpp"

namespace rgbtrack {

struct TrackRun {
  std::vector<SceneState> trajectory;
  std::optional<SequenceReport> report;  ///< present when ground truth exists
  bool lost = false;
  int lost_frame = -1;
};

/// Initialises from the ground truth of frame 0 (or `initial` when given)
/// and tracks every frame, frame 0 included. Frames after a loss repeat the
/// frozen state; a start pose that is not visible counts as lost at frame 0.
TrackRun track_sequence(const Sequence& seq, const TrackerConfig& config,
                        const std::optional<SceneState>& initial = std::nullopt);

std::vector<std::vector<double>> trajectory_rows(const std::vector<SceneState>& trajectory);

enum class SweepParameter { Beta, Threshold, Budget };

SweepParameter parse_sweep_parameter(const std::string& name);
std::string sweep_parameter_name(SweepParameter p);

struct SweepRow {
  std::string value;
  std::vector<double> run_means;  ///< per-run sequence mean error, mm
  Aggregate stats;
};

/// Applies one sweep value ("32x32" for budgets) to a config.
TrackerConfig apply_sweep_value(TrackerConfig config, SweepParameter p, const std::string& value);

/// For each value, `runs` tracking runs with seeds base.seed, base.seed+1, ...
std::vector<SweepRow> sweep(const Sequence& seq, const TrackerConfig& base, SweepParameter p,
                            const std::vector<std::string>& values, int runs);

std::string format_sweep_csv(SweepParameter p, const std::vector<SweepRow>& rows);
std::string format_report_csv(const SequenceReport& report);
std::string format_success_csv(const SequenceReport& report);

/// Tracker configuration file (JSON); unknown keys are rejected.
TrackerConfig parse_tracker_config(const std::string& json_text, TrackerConfig base = {});
TrackerConfig load_tracker_config(const std::string& path, TrackerConfig base = {});

}  // namespace rgbtrack
