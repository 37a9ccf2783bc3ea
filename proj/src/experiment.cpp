#include "rgbtrack/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rgbtrack {

using nlohmann::json;

TrackRun track_sequence(const Sequence& seq, const TrackerConfig& config, const std::optional<SceneState>& initial) {
  TrackRun run;
  if (seq.frames.empty()) return run;
  if (!initial && seq.truth.empty()) throw BadConfig("track_sequence: no initial pose and no ground truth");
  const Tracker tracker(seq.rig, config);
  const SceneState start = initial ? *initial : seq.truth_state(0);
  TrackerState state;
  try {
    state = tracker.init(start, seq.frames.front());
  } catch (const EmptyProjection&) {
    state.current = start;
    state.lost = true;
    run.lost = true;
    run.lost_frame = 0;
  }
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    if (!run.lost) {
      state = tracker.track(state, seq.frames[i]);
      if (state.lost) {
        run.lost = true;
        run.lost_frame = static_cast<int>(i);
      }
    }
    run.trajectory.push_back(state.current);
  }
  if (!seq.truth.empty()) {
    std::vector<SceneState> truth;
    for (std::size_t i = 0; i < seq.frames.size(); ++i) truth.push_back(seq.truth_state(i));
    run.report = make_report(run.trajectory, truth);
  }
  return run;
}

std::vector<std::vector<double>> trajectory_rows(const std::vector<SceneState>& trajectory) {
  std::vector<std::vector<double>> rows;
  for (const SceneState& s : trajectory) rows.push_back(flatten(s).values);
  return rows;
}

SweepParameter parse_sweep_parameter(const std::string& name) {
  if (name == "beta") return SweepParameter::Beta;
  if (name == "w_T" || name == "threshold" || name == "wt") return SweepParameter::Threshold;
  if (name == "budget") return SweepParameter::Budget;
  throw ParseError("unknown sweep parameter '" + name + "' (expected beta, w_T or budget)");
}

std::string sweep_parameter_name(SweepParameter p) {
  switch (p) {
    case SweepParameter::Beta: return "beta";
    case SweepParameter::Threshold: return "w_T";
    default: return "budget";
  }
}

TrackerConfig apply_sweep_value(TrackerConfig config, SweepParameter p, const std::string& value) {
  try {
    switch (p) {
      case SweepParameter::Beta: config.objective.beta = std::stod(value); break;
      case SweepParameter::Threshold: config.threshold = std::stod(value); break;
      case SweepParameter::Budget: {
        const auto x = value.find('x');
        if (x == std::string::npos) throw ParseError("budget values look like 32x32");
        config.particles = std::stoi(value.substr(0, x));
        config.generations = std::stoi(value.substr(x + 1));
        break;
      }
    }
  } catch (const std::logic_error&) {
    throw ParseError("bad sweep value '" + value + "'");
  }
  config.validate();
  return config;
}

std::vector<SweepRow> sweep(const Sequence& seq, const TrackerConfig& base, SweepParameter p,
                            const std::vector<std::string>& values, int runs) {
  if (seq.truth.empty()) throw BadConfig("sweep: sequence has no ground truth");
  std::vector<SweepRow> rows;
  for (const std::string& v : values) {
    const TrackerConfig cfg = apply_sweep_value(base, p, v);
    SweepRow row;
    row.value = v;
    for (int r = 0; r < runs; ++r) {
      TrackerConfig run_cfg = cfg;
      run_cfg.seed = base.seed + static_cast<std::uint64_t>(r);
      row.run_means.push_back(track_sequence(seq, run_cfg).report->mean);
    }
    row.stats = aggregate(row.run_means);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string format_sweep_csv(SweepParameter p, const std::vector<SweepRow>& rows) {
  std::string out = "parameter,value,runs,mean_mm,std_mm,median_mm\n";
  for (const SweepRow& r : rows)
    out += sweep_parameter_name(p) + "," + r.value + "," + std::to_string(r.stats.count) + "," + fmt(r.stats.mean) + "," +
           fmt(r.stats.stddev) + "," + fmt(r.stats.median) + "\n";
  return out;
}

std::string format_report_csv(const SequenceReport& report) {
  std::string out = "frame,mean_mm";
  const std::size_t objects = report.frames.empty() ? 0 : report.frames.front().per_object.size();
  for (std::size_t o = 0; o < objects; ++o) out += ",object" + std::to_string(o) + "_mm";
  out += "\n";
  for (std::size_t i = 0; i < report.frames.size(); ++i) {
    out += std::to_string(i) + "," + fmt(report.frames[i].mean);
    for (double e : report.frames[i].per_object) out += "," + fmt(e);
    out += "\n";
  }
  return out;
}

std::string format_success_csv(const SequenceReport& report) {
  std::string out = "threshold_mm,success_fraction\n";
  for (const SuccessPoint& s : report.success) out += fmt(s.threshold_mm) + "," + fmt(s.fraction) + "\n";
  return out;
}

TrackerConfig parse_tracker_config(const std::string& json_text, TrackerConfig c) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config: top level must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "particles") c.particles = value.get<int>();
      else if (key == "generations") c.generations = value.get<int>();
      else if (key == "c1") c.c1 = value.get<double>();
      else if (key == "c2") c.c2 = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "pos_range_mm") c.ranges.position_mm = value.get<double>();
      else if (key == "rot_range_deg") c.ranges.rotation_deg = value.get<double>();
      else if (key == "angle_range_deg") c.ranges.angle_deg = value.get<double>();
      else if (key == "beta") c.objective.beta = value.get<double>();
      else if (key == "w_T") c.threshold = value.get<double>();
      else if (key == "r_mm") c.objective.occlusion_mm = value.get<double>();
      else if (key == "roi_margin_px") c.roi_margin_px = value.get<int>();
      else if (key == "foreground_mask") c.use_foreground_mask = value.get<bool>();
      else if (key == "color_norm") {
        const auto s = value.get<std::string>();
        if (s == "l2") c.objective.norm = ColorNorm::Euclidean;
        else if (s == "l1") c.objective.norm = ColorNorm::L1;
        else throw ParseError("config: color_norm must be l2 or l1");
      } else if (key == "angle_convention") {
        const auto s = value.get<std::string>();
        if (s == "small_over_large") c.angle_convention = AngleConvention::SmallOverLarge;
        else if (s == "large_over_small") c.angle_convention = AngleConvention::LargeOverSmall;
        else throw ParseError("config: angle_convention must be small_over_large or large_over_small");
      } else if (key == "random_coefficients") {
        const auto s = value.get<std::string>();
        if (s == "per_dimension") c.coefficients = RandomCoefficients::PerDimension;
        else if (s == "per_particle") c.coefficients = RandomCoefficients::PerParticle;
        else throw ParseError("config: random_coefficients must be per_dimension or per_particle");
      } else {
        throw ParseError("config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

TrackerConfig load_tracker_config(const std::string& path, TrackerConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_tracker_config(ss.str(), std::move(base));
}

}  // namespace rgbtrack
