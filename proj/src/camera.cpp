#include "rgbtrack/camera.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rgbtrack {

using nlohmann::json;

Vec3 PinholeCamera::ray(const Pixel& p) const {
  Vec3 dir_cam((p.u - cx) / fx, (p.v - cy) / fy, 1.0);
  return (rotation.conjugate() * dir_cam).normalized();
}

void PinholeCamera::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!(fx > 0) || !(fy > 0) || !finite(fx) || !finite(fy))
    throw ValidationError("camera: focal lengths must be positive");
  if (width <= 0 || height <= 0) throw ValidationError("camera: image size must be positive");
  if (!(cx > 0 && cx < width && cy > 0 && cy < height))
    throw ValidationError("camera: principal point outside the image");
  if (std::abs(rotation.norm() - 1.0) > 1e-9)
    throw ValidationError("camera: rotation quaternion is not unit-norm");
  if (!translation.allFinite()) throw ValidationError("camera: non-finite translation");
}

std::optional<Pixel> project(const Point3& point, const PinholeCamera& camera) {
  return project_camera_frame(camera.to_camera(point), camera);
}

void StereoRig::validate() const {
  left.validate();
  right.validate();
  if (left.width != right.width || left.height != right.height)
    throw ValidationError("rig: cameras differ in resolution");
  if (!(baseline() > 0)) throw ValidationError("rig: baseline must be positive");
}

Point3 triangulate(const Pixel& left, const Pixel& right, const StereoRig& rig) {
  const Point3 o1 = rig.left.center();
  const Point3 o2 = rig.right.center();
  const Vec3 d1 = rig.left.ray(left);
  const Vec3 d2 = rig.right.ray(right);
  const Vec3 w = o1 - o2;
  const double b = d1.dot(d2);
  const double denom = 1.0 - b * b;  // rays are unit length
  if (denom < 1e-14) throw ParallelRays("triangulate: rays are parallel");
  const double d = d1.dot(w);
  const double e = d2.dot(w);
  const double s = (b * e - d) / denom;
  const double t = (e - b * d) / denom;
  return 0.5 * ((o1 + s * d1) + (o2 + t * d2));
}

StereoRig make_parallel_rig(double focal, int width, int height, double baseline_mm) {
  StereoRig rig;
  PinholeCamera cam;
  cam.fx = cam.fy = focal;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.width = width;
  cam.height = height;
  rig.left = cam;
  rig.right = cam;
  rig.right.translation = Vec3(-baseline_mm, 0, 0);
  return rig;
}

namespace {

double number(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("calibration: missing field '") + key + "'");
  if (!j[key].is_number()) throw ParseError(std::string("calibration: field '") + key + "' is not a number");
  return j[key].get<double>();
}

template <std::size_t N>
std::array<double, N> numbers(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != N)
    throw ParseError(std::string("calibration: field '") + key + "' must be an array of " + std::to_string(N));
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!j[key][i].is_number()) throw ParseError(std::string("calibration: non-numeric entry in '") + key + "'");
    out[i] = j[key][i].get<double>();
  }
  return out;
}

PinholeCamera parse_camera(const json& root, const char* name) {
  if (!root.contains(name) || !root[name].is_object())
    throw ParseError(std::string("calibration: missing camera '") + name + "'");
  const json& j = root[name];
  PinholeCamera c;
  c.fx = number(j, "fx");
  c.fy = number(j, "fy");
  c.cx = number(j, "cx");
  c.cy = number(j, "cy");
  const double w = number(j, "width"), h = number(j, "height");
  if (w != std::floor(w) || h != std::floor(h)) throw ParseError("calibration: width/height must be integers");
  c.width = static_cast<int>(w);
  c.height = static_cast<int>(h);
  const auto q = numbers<4>(j, "quat");
  c.rotation = Quat(q[0], q[1], q[2], q[3]);  // w-first
  const auto t = numbers<3>(j, "trans");
  c.translation = Vec3(t[0], t[1], t[2]);
  return c;
}

json camera_json(const PinholeCamera& c) {
  return json{{"fx", c.fx},
              {"fy", c.fy},
              {"cx", c.cx},
              {"cy", c.cy},
              {"width", c.width},
              {"height", c.height},
              {"quat", {c.rotation.w(), c.rotation.x(), c.rotation.y(), c.rotation.z()}},
              {"trans", {c.translation.x(), c.translation.y(), c.translation.z()}}};
}

}  // namespace

StereoRig parse_calibration(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("calibration: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("calibration: top level must be an object");
  StereoRig rig{parse_camera(root, "left"), parse_camera(root, "right")};
  rig.validate();
  return rig;
}

StereoRig load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open calibration file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_calibration(ss.str());
}

std::string calibration_to_json(const StereoRig& rig) {
  return json{{"left", camera_json(rig.left)}, {"right", camera_json(rig.right)}}.dump(2);
}

void save_calibration(const StereoRig& rig, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write calibration file " + path);
  out << calibration_to_json(rig) << "\n";
}

}  // namespace rgbtrack
