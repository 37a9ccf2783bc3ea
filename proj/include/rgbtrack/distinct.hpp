#pragma once

#include "rgbtrack/core.hpp"

namespace rgbtrack {

/// Eigenvalues of the windowed gradient auto-correlation (structure tensor).
struct EigenMaps {
  ImageF lambda1;  ///< larger eigenvalue
  ImageF lambda2;  ///< smaller eigenvalue, >= 0
  int window = 3;
};

/// How the eigenvalue-ratio angle is measured.
///
/// The default, `SmallOverLarge`, uses atan2(lambda2, lambda1) in [0, pi/4],
/// which grows toward corners (lambda2 -> lambda1) and is ~0 on edges.
/// `LargeOverSmall` is atan2(lambda1, lambda2) in [pi/4, pi/2], which grows
/// toward edges instead; it is kept for comparison experiments.
enum class AngleConvention { SmallOverLarge, LargeOverSmall };

struct DistinctivenessMap {
  ImageF c;  ///< values in [0, 1)
  double threshold = 0.1;
  double median_d = 0.0;  ///< median of log-magnitude over informative pixels
  double median_a = 0.0;  ///< median of the angle over informative pixels
  bool degenerate = false;  ///< no pixel had a non-zero structure tensor
};

/// Rec.601 luma in [0, 255].
ImageF to_gray(const ImageRgb& image);

/// Central-difference gradients, unweighted B x B window sum, edge
/// replication at the borders.
EigenMaps structure_eigen(const ImageF& gray, int window = 3);

/// Harris response lambda1*lambda2 - k*(lambda1+lambda2)^2.
ImageF harris_response(const EigenMaps& eig, double k);

/// Median-centred sigmoid product of log-magnitude and eigenvalue angle,
/// zeroed at or below `threshold`. Pixels with a zero tensor are excluded
/// from the medians and get c = 0.
DistinctivenessMap distinctiveness(const EigenMaps& eig, double threshold,
                                   AngleConvention convention = AngleConvention::SmallOverLarge);

/// Exact median (mean of the two middle values for even counts). Reorders
/// its input.
double median_inplace(std::vector<double>& values);

}  // namespace rgbtrack
