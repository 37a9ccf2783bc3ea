#pragma once

#include <string>

#include "rgbtrack/core.hpp"

namespace rgbtrack {

/// 8-bit RGB PNG. Grey and alpha inputs are converted to RGB on read.
ImageRgb read_png(const std::string& path);
void write_png(const ImageRgb& image, const std::string& path);

/// 16-bit binary PGM of `values * scale`, clamped to [0, 65535]. Non-finite
/// values are written as 0.
void write_pgm16(const Grid<double>& values, double scale, const std::string& path);
void write_pgm16(const Grid<float>& values, double scale, const std::string& path);

}  // namespace rgbtrack
