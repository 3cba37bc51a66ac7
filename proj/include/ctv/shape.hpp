#pragma once

#include <cmath>

#include "ctv/grid.hpp"

namespace ctv {

/// Deterministic piecewise-constant test image: a filled rectangle, disk and
/// triangle plus a 3-pixel-wide diagonal bar on a uniform background, at the
/// five gray levels {0, 64, 128, 192, 255}. The figures scale with size and
/// never overlap, so the histogram contains exactly those levels.
inline ImageGrid generate_shape(int size) {
  if (size < 32)
    throw ParamError("shape size must be >= 32, got " + std::to_string(size));
  const double s = static_cast<double>(size);
  ImageGrid img(size, size, 128.0);

  // rectangle, top-left
  {
    const int r0 = static_cast<int>(std::lround(0.08 * s));
    const int r1 = static_cast<int>(std::lround(0.36 * s));
    const int c0 = static_cast<int>(std::lround(0.08 * s));
    const int c1 = static_cast<int>(std::lround(0.44 * s));
    for (int i = r0; i <= r1; ++i)
      for (int j = c0; j <= c1; ++j) img.at(i, j) = 255.0;
  }

  // disk, top-right
  {
    const double cy = 0.24 * s, cx = 0.72 * s, rad = 0.15 * s;
    const double rad2 = rad * rad;
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) {
        const double dy = i - cy, dx = j - cx;
        if (dy * dy + dx * dx <= rad2) img.at(i, j) = 0.0;
      }
  }

  // triangle pointing down, bottom-left
  {
    const int r0 = static_cast<int>(std::lround(0.60 * s));
    const int r1 = static_cast<int>(std::lround(0.92 * s));
    for (int i = r0; i <= r1 && i < size; ++i) {
      const double t = (i - 0.60 * s) / (0.32 * s);
      const double halfw = (1.0 - std::min(1.0, std::max(0.0, t))) * 0.17 * s;
      for (int j = 0; j < size; ++j)
        if (std::fabs(j - 0.27 * s) <= halfw) img.at(i, j) = 64.0;
    }
  }

  // diagonal bar, 3 pixels wide, bottom-right
  {
    const int r0 = static_cast<int>(std::lround(0.58 * s));
    const int r1 = static_cast<int>(std::lround(0.94 * s));
    for (int i = r0; i <= r1 && i < size; ++i)
      for (int dj = -1; dj <= 1; ++dj) {
        const int j = i + dj;
        if (j >= 0 && j < size) img.at(i, j) = 192.0;
      }
  }

  return img;
}

}  // namespace ctv
