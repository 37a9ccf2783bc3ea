#include "rgbtrack/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rgbtrack/image_io.hpp"
#include "rgbtrack/pso.hpp"

namespace rgbtrack {

namespace fs = std::filesystem;
using nlohmann::json;

Scenario parse_scenario(const std::string& name) {
  if (name == "single-hand") return Scenario::SingleHand;
  if (name == "hand-object") return Scenario::HandObject;
  if (name == "two-hands") return Scenario::TwoHands;
  throw ParseError("unknown scenario '" + name + "' (expected single-hand, hand-object or two-hands)");
}

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::HandObject: return "hand-object";
    case Scenario::TwoHands: return "two-hands";
    default: return "single-hand";
  }
}

std::shared_ptr<const KinematicModel> resolve_model(const std::string& ref) {
  static const auto right = std::make_shared<const KinematicModel>(make_hand_model());
  static const auto left = std::make_shared<const KinematicModel>(mirror(*right));
  static const auto box = std::make_shared<const KinematicModel>(make_box_model());
  if (ref == kBuiltinRightHand) return right;
  if (ref == kBuiltinLeftHand) return left;
  if (ref == kBuiltinBox) return box;
  return std::make_shared<const KinematicModel>(load_model(ref));
}

SceneLayout make_layout(const std::vector<std::string>& refs) {
  SceneLayout layout;
  layout.model_refs = refs;
  for (const auto& r : refs) {
    auto m = resolve_model(r);
    layout.state.components.push_back(SceneComponent{m, Pose::identity(*m)});
  }
  return layout;
}

SceneLayout scenario_layout(Scenario s) {
  switch (s) {
    case Scenario::HandObject: return make_layout({kBuiltinRightHand, kBuiltinBox});
    case Scenario::TwoHands: return make_layout({kBuiltinRightHand, kBuiltinLeftHand});
    default: return make_layout({kBuiltinRightHand});
  }
}

// ---------------------------------------------------------------------------
// Motion scripts

std::vector<double> interpolate(const MotionScript& script, const SceneState& layout, double frame) {
  const auto& kf = script.keyframes;
  if (kf.empty()) throw ParseError("motion script has no keyframes");
  const std::size_t n = static_cast<std::size_t>(layout.dimension());
  for (const Keyframe& k : kf)
    if (k.pose.size() != n) throw DimensionMismatch("motion script: keyframe dimension does not match the scene");
  if (frame <= kf.front().frame) return kf.front().pose;
  if (frame >= kf.back().frame) return kf.back().pose;
  std::size_t i = 0;
  while (kf[i + 1].frame < frame) ++i;
  const Keyframe& a = kf[i];
  const Keyframe& b = kf[i + 1];
  const double t = (frame - a.frame) / (b.frame - a.frame);
  std::vector<double> out(n);
  for (std::size_t d = 0; d < n; ++d) out[d] = a.pose[d] + t * (b.pose[d] - a.pose[d]);
  std::size_t off = 0;
  for (const auto& c : layout.components) {
    const Quat qa(a.pose[off + 3], a.pose[off + 4], a.pose[off + 5], a.pose[off + 6]);
    const Quat qb(b.pose[off + 3], b.pose[off + 4], b.pose[off + 5], b.pose[off + 6]);
    const Quat q = qa.normalized().slerp(t, qb.normalized());
    out[off + 3] = q.w();
    out[off + 4] = q.x();
    out[off + 5] = q.y();
    out[off + 6] = q.z();
    off += static_cast<std::size_t>(c.model->parameter_count());
  }
  return out;
}

MotionScript parse_motion_script(const std::string& json_text) {
  MotionScript s;
  try {
    const json j = json::parse(json_text);
    s.scenario = parse_scenario(j.value("scenario", "single-hand"));
    s.frames = j.at("frames").get<int>();
    for (const auto& k : j.at("keyframes")) s.keyframes.push_back(Keyframe{k.at("frame").get<double>(), k.at("pose").get<std::vector<double>>()});
  } catch (const json::exception& e) {
    throw ParseError(std::string("motion script: ") + e.what());
  }
  if (s.frames < 0) throw ParseError("motion script: negative frame count");
  std::stable_sort(s.keyframes.begin(), s.keyframes.end(), [](const Keyframe& a, const Keyframe& b) { return a.frame < b.frame; });
  return s;
}

MotionScript load_motion_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open motion script " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_motion_script(ss.str());
}

std::string motion_script_to_json(const MotionScript& s) {
  json j;
  j["scenario"] = scenario_name(s.scenario);
  j["frames"] = s.frames;
  j["keyframes"] = json::array();
  for (const Keyframe& k : s.keyframes) j["keyframes"].push_back({{"frame", k.frame}, {"pose", k.pose}});
  return j.dump(1);
}

namespace {

constexpr double kSubjectDepth = 800.0;

std::vector<Pose> scenario_base_poses(Scenario s, const SceneState& layout) {
  std::vector<Pose> out;
  const KinematicModel& hand = *layout.components[0].model;
  switch (s) {
    case Scenario::SingleHand:
      out.push_back(default_hand_pose(hand, Vec3(0, 0, kSubjectDepth)));
      break;
    case Scenario::HandObject: {
      out.push_back(default_hand_pose(hand, Vec3(-45, 10, kSubjectDepth)));
      Pose box = Pose::identity(*layout.components[1].model);
      box.position = Vec3(75, -10, kSubjectDepth - 30);
      box.orientation = Quat(Eigen::AngleAxisd(0.4, Vec3(0.3, 1.0, 0.2).normalized()));
      out.push_back(box);
      break;
    }
    case Scenario::TwoHands: {
      out.push_back(default_hand_pose(hand, Vec3(95, 10, kSubjectDepth + 20)));
      Pose left = default_hand_pose(*layout.components[1].model, Vec3(-95, 10, kSubjectDepth + 20));
      out.push_back(left);
      break;
    }
  }
  return out;
}

struct Wave {
  double amp, omega, phase;
};

std::vector<double> sample_motion(const std::vector<Pose>& base, const SceneState& layout,
                                  const std::vector<std::array<Wave, 2>>& waves, double scale, double t) {
  std::vector<double> out;
  std::size_t w = 0;
  auto val = [&](double b) {
    const auto& ws = waves[w++];
    return b + scale * (ws[0].amp * std::sin(ws[0].omega * t + ws[0].phase) + ws[1].amp * std::sin(ws[1].omega * t + ws[1].phase));
  };
  for (std::size_t c = 0; c < base.size(); ++c) {
    const Pose& p = base[c];
    for (int i = 0; i < 3; ++i) out.push_back(val(p.position[i]));
    Vec3 rv;
    for (int i = 0; i < 3; ++i) rv[i] = val(0.0);
    const Quat q = p.orientation * Quat(Eigen::AngleAxisd(rv.norm(), rv.norm() > 0 ? Vec3(rv.normalized()) : Vec3::UnitX()));
    for (double v : {q.w(), q.x(), q.y(), q.z()}) out.push_back(v);
    const auto& dofs = layout.components[c].model->dofs;
    for (std::size_t k = 0; k < dofs.size(); ++k) {
      const double margin = 0.05;
      out.push_back(std::clamp(val(p.angles[k]), dofs[k].lower + margin, dofs[k].upper - margin));
    }
  }
  return out;
}

std::vector<std::vector<Point3>> tracked_points(const SceneState& s) {
  std::vector<std::vector<Point3>> out;
  for (const auto& c : s.components) {
    if (c.model->anchors.size() == 3) {
      Transform t = Transform::Identity();
      t.translate(c.pose.position);
      t.rotate(c.pose.orientation);
      std::vector<Point3> pts;
      for (const Vec3& a : c.model->anchors) pts.push_back(t * a);
      out.push_back(pts);
    } else {
      out.push_back(joint_centers(*c.model, c.pose));
    }
  }
  return out;
}

double max_step(const MotionScript& script, const SceneState& layout) {
  double worst = 0.0;
  auto prev = tracked_points(unflatten(interpolate(script, layout, 0), layout));
  for (int f = 1; f < script.frames; ++f) {
    auto cur = tracked_points(unflatten(interpolate(script, layout, f), layout));
    for (std::size_t c = 0; c < cur.size(); ++c)
      for (std::size_t i = 0; i < cur[c].size(); ++i) worst = std::max(worst, (cur[c][i] - prev[c][i]).norm());
    prev = std::move(cur);
  }
  return worst;
}

}  // namespace

MotionScript default_motion_script(Scenario scenario, int frames, std::uint64_t seed, double max_step_mm) {
  const SceneLayout layout = scenario_layout(scenario);
  const auto base = scenario_base_poses(scenario, layout.state);
  std::mt19937_64 rng(mix_seed(seed, 0x5C817ULL));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Two sinusoids per scalar; amplitudes chosen by parameter kind.
  std::vector<std::array<Wave, 2>> waves;
  for (const auto& c : layout.state.components) {
    auto add = [&](double amp) {
      std::array<Wave, 2> w;
      for (auto& x : w) x = Wave{amp * (0.5 + 0.5 * unit(rng)), 0.05 + 0.15 * unit(rng), 2 * kPi * unit(rng)};
      waves.push_back(w);
    };
    for (int i = 0; i < 3; ++i) add(i == 2 ? 15.0 : 25.0);      // mm
    for (int i = 0; i < 3; ++i) add(0.15);                      // rad
    for (std::size_t k = 0; k < c.model->dofs.size(); ++k) add(0.3);  // rad
  }

  MotionScript script;
  script.scenario = scenario;
  script.frames = frames;
  double scale = 1.0;
  for (int iter = 0; iter < 20; ++iter) {
    script.keyframes.clear();
    const int stride = 3;
    for (int f = 0; f < frames + stride; f += stride)
      script.keyframes.push_back(Keyframe{double(f), sample_motion(base, layout.state, waves, scale, f)});
    if (frames < 2) break;
    const double step = max_step(script, layout.state);
    if (step <= max_step_mm) break;
    scale *= 0.95 * max_step_mm / step;
  }
  return script;
}

StereoRig default_rig() { return make_parallel_rig(600.0, 640, 480, 120.0); }

// ---------------------------------------------------------------------------
// Backgrounds

namespace {

double lattice(std::int64_t ix, std::int64_t iy, std::uint64_t seed) {
  const std::uint64_t h = mix_seed(seed, static_cast<std::uint64_t>(ix), static_cast<std::uint64_t>(iy));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double value_noise(double x, double y, double spacing, std::uint64_t seed) {
  const double fx = x / spacing, fy = y / spacing;
  const double x0 = std::floor(fx), y0 = std::floor(fy);
  double tx = fx - x0, ty = fy - y0;
  tx = tx * tx * (3 - 2 * tx);
  ty = ty * ty * (3 - 2 * ty);
  const auto ix = static_cast<std::int64_t>(x0), iy = static_cast<std::int64_t>(y0);
  const double a = lattice(ix, iy, seed), b = lattice(ix + 1, iy, seed);
  const double c = lattice(ix, iy + 1, seed), d = lattice(ix + 1, iy + 1, seed);
  return (a + (b - a) * tx) * (1 - ty) + (c + (d - c) * tx) * ty;
}

Rgb8 background_color(double x, double y, std::uint64_t seed) {
  double rgb[3];
  for (int ch = 0; ch < 3; ++ch) {
    const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(ch));
    rgb[ch] = 0.45 * value_noise(x, y, 150.0, s) + 0.35 * value_noise(x, y, 45.0, s + 1) + 0.2 * value_noise(x, y, 12.0, s + 2);
  }
  // Muted indoor palette.
  auto to8 = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(30 + 200 * v), 0L, 255L)); };
  return Rgb8{to8(rgb[0]), to8(0.8 * rgb[1] + 0.2 * rgb[0]), to8(0.7 * rgb[2] + 0.3 * rgb[1])};
}

ImageRgb render_background(const PinholeCamera& cam, std::uint64_t seed, BackgroundStyle style, double depth) {
  ImageRgb img(cam.width, cam.height, Rgb8{120, 128, 136});
  if (style == BackgroundStyle::Uniform) return img;
  const Point3 o = cam.center();
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) {
      const Vec3 d = cam.ray(Pixel{double(x), double(y)});
      if (d.z() <= 1e-9) continue;
      const double t = (depth - o.z()) / d.z();
      const Point3 p = o + t * d;
      img(x, y) = background_color(p.x(), p.y(), seed);
    }
  return img;
}

}  // namespace

StereoImages make_background(const StereoRig& rig, std::uint64_t seed, BackgroundStyle style, double depth_mm) {
  return StereoImages{render_background(rig.left, seed, style, depth_mm), render_background(rig.right, seed, style, depth_mm)};
}

// ---------------------------------------------------------------------------
// Sequences

Sequence synthesize_sequence(const MotionScript& script, const StereoRig& rig, const StereoImages& background,
                             const std::vector<std::vector<Rgb8>>& textures) {
  Sequence seq;
  seq.rig = rig;
  seq.layout = scenario_layout(script.scenario);
  for (int f = 0; f < script.frames; ++f) {
    std::vector<double> pose = interpolate(script, seq.layout.state, f);
    const SceneState state = unflatten(pose, seq.layout.state);
    SyntheticFrame frame = synthesize_frame(state, rig, background, textures);
    seq.frames.push_back(std::move(frame.images));
    seq.truth.push_back(flatten(state).values);
  }
  return seq;
}

Sequence synthesize_sequence(const MotionScript& script, const StereoRig& rig, const SynthesisOptions& options) {
  const SceneLayout layout = scenario_layout(script.scenario);
  std::vector<std::vector<Rgb8>> textures;
  for (std::size_t i = 0; i < layout.state.components.size(); ++i) {
    const KinematicModel& m = *layout.state.components[i].model;
    textures.push_back(make_texture(m, mix_seed(options.seed, 0x7E47ULL, i), options.texture, m.color));
  }
  return synthesize_sequence(script, rig, make_background(rig, options.seed, options.background), textures);
}

namespace {

std::string frame_name(const std::string& dir, char side, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c_%06zu.png", side, i);
  return (fs::path(dir) / buf).string();
}

}  // namespace

std::string format_pose_csv(const std::vector<std::vector<double>>& rows) {
  std::string out = "frame";
  const std::size_t n = rows.empty() ? 0 : rows.front().size();
  for (std::size_t d = 0; d < n; ++d) out += ",p" + std::to_string(d);
  out += "\n";
  char buf[64];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += std::to_string(i);
    for (double v : rows[i]) {
      std::snprintf(buf, sizeof buf, ",%.10g", v);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

void write_pose_csv(const std::vector<std::vector<double>>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << format_pose_csv(rows);
}

std::vector<std::vector<double>> read_pose_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // frame index
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("malformed number '" + cell + "' in " + path);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sequence(const Sequence& seq, const std::string& dir) {
  fs::create_directories(dir);
  save_calibration(seq.rig, (fs::path(dir) / "calib.json").string());
  {
    std::ofstream out(fs::path(dir) / "scene.json");
    if (!out) throw IoError("cannot write scene.json in " + dir);
    out << json{{"models", seq.layout.model_refs}, {"frames", seq.frames.size()}}.dump(2) << "\n";
  }
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    write_png(seq.frames[i].left, frame_name(dir, 'L', i));
    write_png(seq.frames[i].right, frame_name(dir, 'R', i));
  }
  if (!seq.truth.empty()) write_pose_csv(seq.truth, (fs::path(dir) / "gt.csv").string());
}

Sequence load_sequence(const std::string& dir) {
  Sequence seq;
  seq.rig = load_calibration((fs::path(dir) / "calib.json").string());
  std::ifstream in(fs::path(dir) / "scene.json");
  if (!in) throw IoError("missing scene.json in " + dir);
  std::vector<std::string> refs;
  std::size_t frames = 0;
  try {
    const json scene = json::parse(in);
    refs = scene.at("models").get<std::vector<std::string>>();
    frames = scene.at("frames").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("scene.json: ") + e.what());
  }
  seq.layout = make_layout(refs);
  for (std::size_t i = 0; i < frames; ++i) {
    try {
      seq.frames.push_back(StereoImages{read_png(frame_name(dir, 'L', i)), read_png(frame_name(dir, 'R', i))});
    } catch (const Error& e) {
      throw IoError("frame " + std::to_string(i) + ": " + e.what());
    }
  }
  const auto gt = fs::path(dir) / "gt.csv";
  if (fs::exists(gt)) {
    seq.truth = read_pose_csv(gt.string());
    if (seq.truth.size() != frames) throw ParseError("gt.csv row count does not match the frame count");
    for (const auto& row : seq.truth)
      if (static_cast<int>(row.size()) != seq.layout.state.dimension()) throw DimensionMismatch("gt.csv: wrong column count");
  }
  return seq;
}

void generate_dataset(const MotionScript& script, const StereoRig& rig, const SynthesisOptions& options,
                      const std::string& dir) {
  write_sequence(synthesize_sequence(script, rig, options), dir);
  std::ofstream out(fs::path(dir) / "script.json");
  out << motion_script_to_json(script) << "\n";
}

}  // namespace rgbtrack
