#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rgbtrack/camera.hpp"
#include "rgbtrack/hand_model.hpp"
#include "rgbtrack/render.hpp"
#include "rgbtrack/scene.hpp"

namespace rgbtrack {

enum class Scenario { SingleHand, HandObject, TwoHands };

Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario s);

/// Model identifiers usable in scene files besides plain file paths.
inline constexpr const char* kBuiltinRightHand = "builtin:right_hand";
inline constexpr const char* kBuiltinLeftHand = "builtin:left_hand";
inline constexpr const char* kBuiltinBox = "builtin:box";

/// Resolves a builtin identifier or loads a model file.
std::shared_ptr<const KinematicModel> resolve_model(const std::string& ref);

/// Scene layout with identity poses.
struct SceneLayout {
  std::vector<std::string> model_refs;
  SceneState state;
};
SceneLayout scenario_layout(Scenario s);
SceneLayout make_layout(const std::vector<std::string>& model_refs);

/// A pose vector at a frame index. Frames are sampled at integer indices;
/// positions and angles interpolate linearly between the bracketing
/// keyframes, quaternion blocks spherically. Frames outside the keyframe
/// span hold the nearest keyframe.
struct Keyframe {
  double frame = 0.0;
  std::vector<double> pose;
};

struct MotionScript {
  Scenario scenario = Scenario::SingleHand;
  int frames = 0;
  std::vector<Keyframe> keyframes;
};

std::vector<double> interpolate(const MotionScript& script, const SceneState& layout, double frame);

MotionScript parse_motion_script(const std::string& json_text);
MotionScript load_motion_script(const std::string& path);
std::string motion_script_to_json(const MotionScript& script);

/// Smooth pseudo-random motion whose joint centres move at most
/// `max_step_mm` between consecutive frames.
MotionScript default_motion_script(Scenario scenario, int frames, std::uint64_t seed, double max_step_mm = 5.0);

/// The standard desk-scale rig: 640x480, f = 600 px, 120 mm baseline.
StereoRig default_rig();

enum class BackgroundStyle { Textured, Uniform };

/// Background pair showing a textured plane `depth_mm` in front of the rig,
/// so it carries consistent stereo parallax.
StereoImages make_background(const StereoRig& rig, std::uint64_t seed, BackgroundStyle style = BackgroundStyle::Textured,
                             double depth_mm = 1500.0);

/// In-memory sequence with ground truth.
struct Sequence {
  StereoRig rig;
  SceneLayout layout;
  std::vector<StereoImages> frames;
  std::vector<std::vector<double>> truth;  ///< one pose vector per frame (may be empty)

  SceneState truth_state(std::size_t frame) const { return unflatten(truth.at(frame), layout.state); }
};

struct SynthesisOptions {
  std::uint64_t seed = 7;
  TextureStyle texture = TextureStyle::Mottled;
  BackgroundStyle background = BackgroundStyle::Textured;
};

Sequence synthesize_sequence(const MotionScript& script, const StereoRig& rig, const SynthesisOptions& options = {});
Sequence synthesize_sequence(const MotionScript& script, const StereoRig& rig, const StereoImages& background,
                             const std::vector<std::vector<Rgb8>>& textures);

/// Writes calib.json, scene.json, L_{i:06}.png, R_{i:06}.png and gt.csv.
void write_sequence(const Sequence& seq, const std::string& dir);
Sequence load_sequence(const std::string& dir);

/// generate = synthesize_sequence + write_sequence.
void generate_dataset(const MotionScript& script, const StereoRig& rig, const SynthesisOptions& options,
                      const std::string& dir);

// CSV helpers. Rows are "frame,p0,...,pN-1" with a header line.
void write_pose_csv(const std::vector<std::vector<double>>& rows, const std::string& path);
std::vector<std::vector<double>> read_pose_csv(const std::string& path);
std::string format_pose_csv(const std::vector<std::vector<double>>& rows);

}  // namespace rgbtrack
