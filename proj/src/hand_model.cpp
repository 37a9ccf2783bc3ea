#include "rgbtrack/hand_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rgbtrack {

namespace {

struct FingerSpec {
  const char* name;
  Vec3 base;            // base joint position in the palm frame
  double tilt_deg;      // rest rotation of the finger about the palm normal
  double lift_deg;      // rest rotation about the finger's own x axis
  std::array<double, 3> lengths;
  std::array<double, 2> radius;  // base, tip
  std::array<double, 2> abduction;
  std::array<double, 2> base_flex;
  std::array<double, 2> mid_flex;
  std::array<double, 2> dist_flex;
};

// Adult-sized right hand in mm; flexion bounds in degrees.
const FingerSpec kFingers[5] = {
    {"thumb", {30, 22, -6}, -50, -20, {44, 32, 27}, {11.0, 8.0}, {-25, 25}, {-20, 50}, {0, 70}, {0, 80}},
    {"index", {27, 92, 0}, -6, 0, {40, 24, 20}, {9.0, 7.0}, {-20, 20}, {-20, 90}, {0, 100}, {0, 80}},
    {"middle", {8, 96, 0}, 0, 0, {44, 28, 21}, {9.5, 7.0}, {-20, 20}, {-20, 90}, {0, 100}, {0, 80}},
    {"ring", {-11, 92, 0}, 5, 0, {41, 27, 21}, {8.5, 6.5}, {-20, 20}, {-20, 90}, {0, 100}, {0, 80}},
    {"little", {-28, 84, 0}, 12, 0, {33, 20, 18}, {7.5, 6.0}, {-20, 20}, {-20, 90}, {0, 100}, {0, 80}},
};

// Fingers curl toward the palm (-z) for positive flexion.
const Vec3 kFlexAxis = -Vec3::UnitX();
const Vec3 kAbductionAxis = Vec3::UnitZ();

void add_triangle(KinematicModel& m, int a, int b, int c) { m.triangles.push_back({a, b, c}); }

int add_vertex(KinematicModel& m, const Vec3& p, std::vector<SkinWeight> w) {
  m.vertices.push_back(p);
  m.weights.push_back(std::move(w));
  return static_cast<int>(m.vertices.size()) - 1;
}

double sgnpow(double v, double e) { return std::copysign(std::pow(std::abs(v), e), v); }

void add_palm(KinematicModel& m, const HandMeshOptions& opt) {
  const Vec3 center(0, 48, 0);
  const Vec3 half(44, 50, 13);
  const double e = 0.6;  // < 1 gives a boxier outline
  const int stacks = opt.palm_stacks, slices = opt.palm_slices;
  const int top = add_vertex(m, center + Vec3(0, half.y(), 0), {{0, 1.0}});
  std::vector<int> ring_start;
  for (int i = 1; i < stacks; ++i) {
    const double th = kPi * i / stacks;
    ring_start.push_back(static_cast<int>(m.vertices.size()));
    for (int j = 0; j < slices; ++j) {
      const double ph = 2 * kPi * j / slices;
      const Vec3 p(half.x() * sgnpow(std::sin(th) * std::cos(ph), e), half.y() * sgnpow(std::cos(th), e),
                   half.z() * sgnpow(std::sin(th) * std::sin(ph), e));
      add_vertex(m, center + p, {{0, 1.0}});
    }
  }
  const int bottom = add_vertex(m, center - Vec3(0, half.y(), 0), {{0, 1.0}});
  for (int j = 0; j < slices; ++j) {
    const int j1 = (j + 1) % slices;
    add_triangle(m, top, ring_start.front() + j1, ring_start.front() + j);
    add_triangle(m, bottom, ring_start.back() + j, ring_start.back() + j1);
  }
  for (std::size_t i = 0; i + 1 < ring_start.size(); ++i)
    for (int j = 0; j < slices; ++j) {
      const int j1 = (j + 1) % slices;
      const int a = ring_start[i] + j, b = ring_start[i + 1] + j, c = ring_start[i + 1] + j1, d = ring_start[i] + j1;
      add_triangle(m, a, c, b);
      add_triangle(m, a, d, c);
    }
}

// Tapered tube following a straight rest chain of three segments.
void add_finger_tube(KinematicModel& m, const Transform& base_rest, const std::array<int, 3>& bones,
                     const FingerSpec& f, const HandMeshOptions& opt) {
  const double total = f.lengths[0] + f.lengths[1] + f.lengths[2];
  const double joints[2] = {f.lengths[0], f.lengths[0] + f.lengths[1]};
  const double blend = 4.0;
  const int slices = opt.ring_slices;

  auto weights_at = [&](double a) -> std::vector<SkinWeight> {
    for (int s = 0; s < 2; ++s) {
      if (std::abs(a - joints[s]) < blend) {
        const double t = (a - joints[s] + blend) / (2 * blend);
        return {{bones[s], 1.0 - t}, {bones[s + 1], t}};
      }
    }
    const int seg = a < joints[0] ? 0 : a < joints[1] ? 1 : 2;
    return {{bones[seg], 1.0}};
  };
  auto radius_at = [&](double a) {
    const double t = std::clamp(a / total, 0.0, 1.0);
    return f.radius[0] + (f.radius[1] - f.radius[0]) * t;
  };

  const double start = -4.0;
  const int rings = 3 * opt.rings_per_segment + 1;
  std::vector<int> ring_start;
  for (int i = 0; i < rings; ++i) {
    const double a = start + (total - start) * i / (rings - 1);
    const double r = radius_at(a);
    ring_start.push_back(static_cast<int>(m.vertices.size()));
    for (int j = 0; j < slices; ++j) {
      const double ph = 2 * kPi * j / slices;
      // Slightly flattened on the palmar/dorsal axis.
      add_vertex(m, base_rest * Vec3(r * std::cos(ph), a, 0.85 * r * std::sin(ph)), weights_at(a));
    }
  }
  const int tip = add_vertex(m, base_rest * Vec3(0, total + 0.8 * f.radius[1], 0), {{bones[2], 1.0}});
  const int root = add_vertex(m, base_rest * Vec3(0, start - 0.5 * f.radius[0], 0), {{bones[0], 1.0}});
  for (int i = 0; i + 1 < rings; ++i)
    for (int j = 0; j < slices; ++j) {
      const int j1 = (j + 1) % slices;
      const int a = ring_start[i] + j, b = ring_start[i + 1] + j, c = ring_start[i + 1] + j1, d = ring_start[i] + j1;
      add_triangle(m, a, b, c);
      add_triangle(m, a, c, d);
    }
  for (int j = 0; j < slices; ++j) {
    const int j1 = (j + 1) % slices;
    add_triangle(m, ring_start.back() + j, tip, ring_start.back() + j1);
    add_triangle(m, ring_start.front() + j, ring_start.front() + j1, root);
  }
}

}  // namespace

KinematicModel make_hand_model(const HandMeshOptions& opt) {
  KinematicModel m;
  m.name = "procedural_right_hand";
  m.handedness = Handedness::Right;
  m.color = Rgb8{205, 150, 125};
  m.bones.push_back(Bone{"palm", -1, Transform::Identity()});

  for (const FingerSpec& f : kFingers) {
    Transform rest = Transform::Identity();
    rest.translate(f.base);
    rest.rotate(Eigen::AngleAxisd(deg2rad(f.tilt_deg), Vec3::UnitZ()));
    rest.rotate(Eigen::AngleAxisd(deg2rad(f.lift_deg), Vec3::UnitX()));
    const int b0 = static_cast<int>(m.bones.size());
    m.bones.push_back(Bone{std::string(f.name) + "_base", 0, rest});
    for (int s = 0; s < 3; ++s) {
      Transform t = Transform::Identity();
      t.translate(Vec3(0, f.lengths[s], 0));
      static const char* suffix[3] = {"_mid", "_dist", "_tip"};
      m.bones.push_back(Bone{std::string(f.name) + suffix[s], b0 + s, t});
    }
    m.dofs.push_back(Dof{b0, kAbductionAxis, deg2rad(f.abduction[0]), deg2rad(f.abduction[1])});
    m.dofs.push_back(Dof{b0, kFlexAxis, deg2rad(f.base_flex[0]), deg2rad(f.base_flex[1])});
    m.dofs.push_back(Dof{b0 + 1, kFlexAxis, deg2rad(f.mid_flex[0]), deg2rad(f.mid_flex[1])});
    m.dofs.push_back(Dof{b0 + 2, kFlexAxis, deg2rad(f.dist_flex[0]), deg2rad(f.dist_flex[1])});
  }

  add_palm(m, opt);
  const auto rest = m.rest_globals();
  for (int f = 0; f < 5; ++f) {
    const int b0 = 1 + 4 * f;
    add_finger_tube(m, rest[b0], {b0, b0 + 1, b0 + 2}, kFingers[f], opt);
  }
  for (int b = 0; b < static_cast<int>(m.bones.size()); ++b) m.markers.push_back(b);
  m.validate();
  return m;
}

KinematicModel make_box_model(const Vec3& size, int n) {
  KinematicModel m;
  m.name = "box";
  m.color = Rgb8{60, 110, 200};
  m.bones.push_back(Bone{"body", -1, Transform::Identity()});
  const Vec3 h = size / 2;
  struct Face {
    Vec3 normal, u, v;
  };
  const Face faces[6] = {{Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()},  {-Vec3::UnitX(), Vec3::UnitZ(), Vec3::UnitY()},
                         {Vec3::UnitY(), Vec3::UnitZ(), Vec3::UnitX()},  {-Vec3::UnitY(), Vec3::UnitX(), Vec3::UnitZ()},
                         {Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY()},  {-Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitX()}};
  for (const Face& f : faces) {
    const int base = static_cast<int>(m.vertices.size());
    const double hn = std::abs(f.normal.dot(h)), hu = std::abs(f.u.dot(h)), hv = std::abs(f.v.dot(h));
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) {
        const double s = -1.0 + 2.0 * i / n, t = -1.0 + 2.0 * j / n;
        add_vertex(m, f.normal * hn + f.u * (s * hu) + f.v * (t * hv), {{0, 1.0}});
      }
    auto idx = [&](int i, int j) { return base + j * (n + 1) + i; };
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        add_triangle(m, idx(i, j), idx(i + 1, j), idx(i + 1, j + 1));
        add_triangle(m, idx(i, j), idx(i + 1, j + 1), idx(i, j + 1));
      }
  }
  m.markers = {0};
  m.anchors = {Vec3(-h.x(), -h.y(), -h.z()), Vec3(h.x(), -h.y(), -h.z()), Vec3(-h.x(), h.y(), -h.z())};
  m.validate();
  return m;
}

std::vector<Rgb8> make_texture(const KinematicModel& model, std::uint64_t seed, TextureStyle style, Rgb8 base) {
  std::vector<Rgb8> out(model.vertices.size(), base);
  if (style == TextureStyle::Uniform) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lum(-45.0, 45.0);
  std::uniform_real_distribution<double> chroma(-12.0, 12.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto clamp8 = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); };
  for (Rgb8& c : out) {
    double l = lum(rng);
    if (unit(rng) < 0.15) l -= 70.0;  // creases and freckles
    c = Rgb8{clamp8(base.r + l + chroma(rng)), clamp8(base.g + l + chroma(rng)), clamp8(base.b + l + chroma(rng))};
  }
  return out;
}

Pose default_hand_pose(const KinematicModel& model, const Vec3& position) {
  Pose p = Pose::identity(model);
  p.position = position;
  // Fingers up in the image, palm toward the camera.
  p.orientation = Quat(Eigen::AngleAxisd(kPi, Vec3::UnitZ()));
  for (std::size_t k = 0; k < model.dofs.size(); ++k) {
    const Dof& d = model.dofs[k];
    const double natural = d.axis == kFlexAxis || d.axis == Vec3(1, 0, 0) ? 0.25 : 0.0;
    p.angles[k] = std::clamp(natural, d.lower, d.upper);
  }
  return p;
}

}  // namespace rgbtrack
