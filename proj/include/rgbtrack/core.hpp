#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace rgbtrack {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;
using Transform = Eigen::Isometry3d;

/// World-frame point in millimetres.
using Point3 = Vec3;

/// Continuous image coordinates. Pixel (x, y) covers [x-0.5, x+0.5) so its
/// centre sits at integer coordinates.
struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

struct Rgb8 {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb8&, const Rgb8&) = default;
};

/// Axis-aligned pixel rectangle, inclusive origin, exclusive extent.
struct Roi {
  int x0 = 0, y0 = 0, width = 0, height = 0;

  int x1() const { return x0 + width; }
  int y1() const { return y0 + height; }
  bool contains(int x, int y) const { return x >= x0 && y >= y0 && x < x1() && y < y1(); }
  bool empty() const { return width <= 0 || height <= 0; }
  friend bool operator==(const Roi&, const Roi&) = default;
};

/// Dense row-major 2D array.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, const T& fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const T& operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  void fill(const T& value) { std::fill(data_.begin(), data_.end(), value); }
  void resize(int width, int height, const T& fill = T{}) {
    width_ = width;
    height_ = height;
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  Grid crop(const Roi& roi) const {
    Grid out(roi.width, roi.height);
    for (int y = 0; y < roi.height; ++y)
      for (int x = 0; x < roi.width; ++x) out(x, y) = (*this)(roi.x0 + x, roi.y0 + y);
    return out;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using ImageRgb = Grid<Rgb8>;
using ImageF = Grid<double>;

struct StereoImages {
  ImageRgb left;
  ImageRgb right;
};

// Errors. Everything derives from Error so callers can catch one type.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct ParallelRays : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct ImageTooSmall : Error { using Error::Error; };
struct ResolutionMismatch : Error { using Error::Error; };
struct EmptyProjection : Error { using Error::Error; };
struct BadConfig : Error { using Error::Error; };
struct CollinearAnchors : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

inline constexpr double kPi = 3.14159265358979323846;
inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

}  // namespace rgbtrack
