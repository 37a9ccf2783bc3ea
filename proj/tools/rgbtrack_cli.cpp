// Command-line front end: dataset generation, tracking, evaluation,
// parameter sweeps and per-frame debug dumps.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rgbtrack/experiment.hpp"
#include "rgbtrack/image_io.hpp"

namespace fs = std::filesystem;
using namespace rgbtrack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitLost = 2;

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  if (out.empty()) throw ParseError("empty value list");
  return out;
}

struct GenerateArgs {
  std::string scenario = "single-hand";
  int frames = 30;
  std::uint64_t seed = 7;
  std::string script;
  std::string texture = "mottled";
  std::string background = "textured";
  double max_step = 5.0;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  const MotionScript script = a.script.empty()
                                  ? default_motion_script(parse_scenario(a.scenario), a.frames, a.seed, a.max_step)
                                  : load_motion_script(a.script);
  SynthesisOptions opt;
  opt.seed = a.seed;
  if (a.texture == "mottled") opt.texture = TextureStyle::Mottled;
  else if (a.texture == "uniform") opt.texture = TextureStyle::Uniform;
  else throw ParseError("--texture must be mottled or uniform");
  if (a.background == "textured") opt.background = BackgroundStyle::Textured;
  else if (a.background == "uniform") opt.background = BackgroundStyle::Uniform;
  else throw ParseError("--background must be textured or uniform");
  generate_dataset(script, default_rig(), opt, a.out);
  return kExitOk;
}

struct TrackArgs {
  std::string seq;
  std::string calib;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string report;
};

TrackerConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
  TrackerConfig cfg = path.empty() ? TrackerConfig{} : load_tracker_config(path);
  if (seed) cfg.seed = *seed;
  return cfg;
}

Sequence load_with_calibration(const std::string& dir, const std::string& calib) {
  Sequence seq = load_sequence(dir);
  if (!calib.empty()) seq.rig = load_calibration(calib);
  return seq;
}

int run_track(const TrackArgs& a) {
  const Sequence seq = load_with_calibration(a.seq, a.calib);
  const TrackRun run = track_sequence(seq, load_config(a.config, a.seed));
  emit(format_pose_csv(trajectory_rows(run.trajectory)), a.out);
  if (!a.report.empty()) {
    if (!run.report) throw BadConfig("--report needs a sequence with gt.csv");
    emit(format_report_csv(*run.report), a.report);
  }
  if (run.lost) {
    std::cerr << "tracking lost at frame " << run.lost_frame << "\n";
    return kExitLost;
  }
  return kExitOk;
}

struct EvalArgs {
  std::string seq;
  std::string traj;
  std::string gt;
  std::string out;
  std::string success;
};

int run_eval(const EvalArgs& a) {
  const Sequence seq = load_sequence(a.seq);
  const auto truth_rows = a.gt.empty() ? seq.truth : read_pose_csv(a.gt);
  if (truth_rows.empty()) throw BadConfig("no ground truth: pass --gt or use a sequence with gt.csv");
  const auto est_rows = read_pose_csv(a.traj);
  if (est_rows.size() != truth_rows.size())
    throw DimensionMismatch("trajectory has " + std::to_string(est_rows.size()) + " rows, ground truth " +
                            std::to_string(truth_rows.size()));
  std::vector<SceneState> est, truth;
  for (std::size_t i = 0; i < est_rows.size(); ++i) {
    if (est_rows[i].size() != truth_rows[i].size()) throw DimensionMismatch("row length differs at frame " + std::to_string(i));
    est.push_back(unflatten(est_rows[i], seq.layout.state));
    truth.push_back(unflatten(truth_rows[i], seq.layout.state));
  }
  const SequenceReport report = make_report(est, truth);
  emit(format_report_csv(report), a.out);
  if (!a.success.empty()) emit(format_success_csv(report), a.success);
  return kExitOk;
}

struct SweepArgs {
  std::string seq;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string param;
  std::string values;
  int runs = 10;
  std::string out;
};

int run_sweep(const SweepArgs& a) {
  const Sequence seq = load_sequence(a.seq);
  const SweepParameter p = parse_sweep_parameter(a.param);
  if (a.runs < 1) throw BadConfig("--runs must be positive");
  const auto rows = sweep(seq, load_config(a.config, a.seed), p, split_list(a.values), a.runs);
  emit(format_sweep_csv(p, rows), a.out);
  return kExitOk;
}

struct DebugArgs {
  std::string seq;
  std::string config;
  std::string traj;
  int frame = 0;
  std::string out;
};

ImageRgb flat_render(const RenderBuffers& buf, const ImageRgb& frame) {
  ImageRgb img = frame;
  for (int y = 0; y < buf.viewport.height; ++y)
    for (int x = 0; x < buf.viewport.width; ++x)
      if (!buf.point_id(x, y).is_background()) img(buf.viewport.x0 + x, buf.viewport.y0 + y) = buf.color(x, y);
  return img;
}

int run_render_debug(const DebugArgs& a) {
  const Sequence seq = load_sequence(a.seq);
  if (a.frame < 0 || a.frame >= static_cast<int>(seq.frames.size()))
    throw BadConfig("--frame out of range (sequence has " + std::to_string(seq.frames.size()) + " frames)");
  const auto f = static_cast<std::size_t>(a.frame);
  SceneState state;
  if (!a.traj.empty()) {
    const auto rows = read_pose_csv(a.traj);
    if (f >= rows.size()) throw BadConfig("--traj has no row for the requested frame");
    state = unflatten(rows[f], seq.layout.state);
  } else {
    if (seq.truth.empty()) throw BadConfig("render-debug needs --traj or a sequence with gt.csv");
    state = seq.truth_state(f);
  }
  const TrackerConfig cfg = load_config(a.config, std::nullopt);
  fs::create_directories(a.out);
  const auto path = [&](const std::string& name) { return (fs::path(a.out) / name).string(); };

  const auto rois = model_roi(state, seq.rig, cfg.margin_for_width(seq.rig.left.width));
  const ObjectiveContext ctx =
      ObjectiveContext::build(seq.frames[f], seq.rig, rois, cfg.threshold, cfg.objective, cfg.angle_convention);

  const auto posed = pose_scene(state);
  std::vector<MeshView> views;
  for (std::size_t i = 0; i < posed.size(); ++i) views.push_back(view_of(posed[i], {}, state.components[i].model->color));
  RasterOptions opt;
  opt.with_color = true;
  const PinholeCamera* cams[2] = {&seq.rig.left, &seq.rig.right};
  const ImageRgb* frames[2] = {&seq.frames[f].left, &seq.frames[f].right};
  const char* side[2] = {"left", "right"};
  std::string summary = "view,roi_x0,roi_y0,roi_width,roi_height,covered_pixels,median_d,median_a,degenerate\n";
  for (int v = 0; v < 2; ++v) {
    const RenderBuffers buf = rasterize(views, *cams[v], opt);
    write_png(flat_render(buf, *frames[v]), path(std::string(side[v]) + "_overlay.png"));
    write_pgm16(buf.depth, 10.0, path(std::string(side[v]) + "_depth.pgm"));
    const ViewObservation& obs = ctx.views[static_cast<std::size_t>(v)];
    write_pgm16(obs.map.c, 65535.0, path(std::string(side[v]) + "_distinctiveness.pgm"));
    std::size_t covered = 0;
    for (std::size_t i = 0; i < buf.point_id.size(); ++i) covered += !buf.point_id[i].is_background();
    char line[256];
    std::snprintf(line, sizeof line, "%s,%d,%d,%d,%d,%zu,%.6f,%.6f,%d\n", side[v], obs.roi.x0, obs.roi.y0, obs.roi.width,
                  obs.roi.height, covered, obs.map.median_d, obs.map.median_a, obs.map.degenerate ? 1 : 0);
    summary += line;
  }
  write_correspondence_csv(state, ctx, path("correspondences.csv"));
  char line[128];
  std::snprintf(line, sizeof line, "score\n%.10g\n", score(state, ctx));
  emit(line, path("score.csv"));
  emit(summary, path("views.csv"));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stereo RGB model-based tracking of hands and objects"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Synthesize a stereo sequence with ground truth");
  g->add_option("--scenario", gen.scenario, "single-hand, hand-object or two-hands")->capture_default_str();
  g->add_option("--frames", gen.frames, "Number of frames")->capture_default_str()->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "Seed for motion, textures and background")->capture_default_str();
  g->add_option("--script", gen.script, "Motion script JSON (overrides --scenario/--frames)");
  g->add_option("--texture", gen.texture, "mottled or uniform")->capture_default_str();
  g->add_option("--background", gen.background, "textured or uniform")->capture_default_str();
  g->add_option("--max-step", gen.max_step, "Largest joint displacement per frame, mm")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->required();

  TrackArgs trk;
  auto* t = app.add_subcommand("track", "Track a sequence; writes the trajectory CSV");
  t->add_option("--seq", trk.seq, "Sequence directory")->required();
  t->add_option("--calib", trk.calib, "Calibration JSON (defaults to the sequence's calib.json)");
  t->add_option("--config", trk.config, "Tracker configuration JSON");
  t->add_option("--seed", trk.seed, "Optimizer seed (overrides the config)");
  t->add_option("--out", trk.out, "Trajectory CSV (stdout when omitted)");
  t->add_option("--report", trk.report, "Per-frame error CSV (needs gt.csv)");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Per-frame errors of a trajectory against ground truth");
  e->add_option("--seq", ev.seq, "Sequence directory (model layout and default gt.csv)")->required();
  e->add_option("--traj", ev.traj, "Trajectory CSV")->required();
  e->add_option("--gt", ev.gt, "Ground-truth CSV (defaults to the sequence's gt.csv)");
  e->add_option("--out", ev.out, "Per-frame error CSV (stdout when omitted)");
  e->add_option("--success", ev.success, "Success-rate curve CSV");

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Mean error over seeds for a list of parameter values");
  s->add_option("--seq", sw.seq, "Sequence directory with gt.csv")->required();
  s->add_option("--config", sw.config, "Base tracker configuration JSON");
  s->add_option("--seed", sw.seed, "First seed; run r uses seed + r");
  s->add_option("--param", sw.param, "beta, w_T or budget")->required();
  s->add_option("--values", sw.values, "Comma-separated values, budgets as PxG (e.g. 8x8,32x32)")->required();
  s->add_option("--runs", sw.runs, "Runs per value")->capture_default_str();
  s->add_option("--out", sw.out, "Sweep CSV (stdout when omitted)");

  DebugArgs dbg;
  auto* d = app.add_subcommand("render-debug", "Dump render buffers, distinctiveness maps and correspondences");
  d->add_option("--seq", dbg.seq, "Sequence directory")->required();
  d->add_option("--frame", dbg.frame, "Frame index")->capture_default_str();
  d->add_option("--traj", dbg.traj, "Trajectory CSV to take the pose from (default: ground truth)");
  d->add_option("--config", dbg.config, "Tracker configuration JSON");
  d->add_option("--out", dbg.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*g) return run_generate(gen);
    if (*t) return run_track(trk);
    if (*e) return run_eval(ev);
    if (*s) return run_sweep(sw);
    if (*d) return run_render_debug(dbg);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
