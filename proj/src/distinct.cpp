#include "rgbtrack/distinct.hpp"

#include <algorithm>
#include <cmath>

namespace rgbtrack {

ImageF to_gray(const ImageRgb& image) {
  ImageF out(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) {
    const Rgb8 p = image[i];
    out[i] = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
  }
  return out;
}

EigenMaps structure_eigen(const ImageF& gray, int window) {
  if (window < 3 || window % 2 == 0) throw BadConfig("structure_eigen: window must be odd and >= 3");
  const int w = gray.width(), h = gray.height();
  if (w < window || h < window) throw ImageTooSmall("structure_eigen: image smaller than the window");

  auto clampx = [w](int x) { return std::clamp(x, 0, w - 1); };
  auto clampy = [h](int y) { return std::clamp(y, 0, h - 1); };

  ImageF ixx(w, h), iyy(w, h), ixy(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gx = 0.5 * (gray(clampx(x + 1), y) - gray(clampx(x - 1), y));
      const double gy = 0.5 * (gray(x, clampy(y + 1)) - gray(x, clampy(y - 1)));
      ixx(x, y) = gx * gx;
      iyy(x, y) = gy * gy;
      ixy(x, y) = gx * gy;
    }

  // Separable box sum: horizontal then vertical.
  const int r = window / 2;
  auto box = [&](const ImageF& in) {
    ImageF tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0;
        for (int k = -r; k <= r; ++k) s += in(clampx(x + k), y);
        tmp(x, y) = s;
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = 0;
        for (int k = -r; k <= r; ++k) s += tmp(x, clampy(y + k));
        out(x, y) = s;
      }
    return out;
  };
  const ImageF sxx = box(ixx), syy = box(iyy), sxy = box(ixy);

  EigenMaps eig{ImageF(w, h), ImageF(w, h), window};
  for (std::size_t i = 0; i < sxx.size(); ++i) {
    const double half_trace = 0.5 * (sxx[i] + syy[i]);
    const double diff = 0.5 * (sxx[i] - syy[i]);
    const double disc = std::sqrt(diff * diff + sxy[i] * sxy[i]);
    eig.lambda1[i] = half_trace + disc;
    eig.lambda2[i] = std::max(0.0, half_trace - disc);
  }
  return eig;
}

ImageF harris_response(const EigenMaps& eig, double k) {
  ImageF out(eig.lambda1.width(), eig.lambda1.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double l1 = eig.lambda1[i], l2 = eig.lambda2[i];
    out[i] = l1 * l2 - k * (l1 + l2) * (l1 + l2);
  }
  return out;
}

double median_inplace(std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

DistinctivenessMap distinctiveness(const EigenMaps& eig, double threshold, AngleConvention convention) {
  const int w = eig.lambda1.width(), h = eig.lambda1.height();
  DistinctivenessMap out;
  out.c = ImageF(w, h, 0.0);
  out.threshold = threshold;

  ImageF d(w, h), a(w, h);
  std::vector<double> ds, as;
  ds.reserve(out.c.size());
  as.reserve(out.c.size());
  for (std::size_t i = 0; i < out.c.size(); ++i) {
    const double l1 = eig.lambda1[i], l2 = eig.lambda2[i];
    const double mag2 = l1 * l1 + l2 * l2;
    if (!(mag2 > 0.0)) continue;
    d[i] = 0.5 * std::log(mag2);
    a[i] = convention == AngleConvention::SmallOverLarge ? std::atan2(l2, l1) : std::atan2(l1, l2);
    ds.push_back(d[i]);
    as.push_back(a[i]);
  }
  if (ds.empty()) {
    out.degenerate = true;
    return out;
  }
  out.median_d = median_inplace(ds);
  out.median_a = median_inplace(as);

  for (std::size_t i = 0; i < out.c.size(); ++i) {
    const double l1 = eig.lambda1[i], l2 = eig.lambda2[i];
    if (!(l1 * l1 + l2 * l2 > 0.0)) continue;
    const double sd = 1.0 / (1.0 + std::exp(-(d[i] - out.median_d)));
    const double sa = 1.0 / (1.0 + std::exp(-(a[i] - out.median_a)));
    const double c = sd * sa;
    out.c[i] = c > threshold ? c : 0.0;
  }
  return out;
}

}  // namespace rgbtrack
