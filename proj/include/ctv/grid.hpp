#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ctv/errors.hpp"

namespace ctv {

/// Rectangular grid of real-valued intensities, row-major. Nominal scale is
/// [0,255] but values are never clamped internally; quantization happens only
/// at PGM export.
struct ImageGrid {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // size() == width * height

  ImageGrid() = default;

  ImageGrid(int w, int h, double fill = 0.0) : width(w), height(h) {
    if (w < 1 || h < 1)
      throw DimensionError("grid dimensions must be positive, got " +
                           std::to_string(w) + "x" + std::to_string(h));
    if (!std::isfinite(fill))
      throw ParamError("grid fill value must be finite");
    values.assign(static_cast<std::size_t>(w) * h, fill);
  }

  std::size_t size() const { return values.size(); }

  double& at(int row, int col) {
    return values[static_cast<std::size_t>(row) * width + col];
  }
  double at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * width + col];
  }

  bool same_shape(const ImageGrid& o) const {
    return width == o.width && height == o.height;
  }
};

inline ImageGrid constant(int width, int height, double value) {
  return ImageGrid(width, height, value);
}

/// Pair of x/y difference grids of identical dimensions.
struct VectorField {
  ImageGrid gx;
  ImageGrid gy;
};

enum class Norm { L1, L2, Linf };

/// Sequential, fixed-order reductions so results are bit-reproducible.
inline double norm(const ImageGrid& f, Norm p) {
  double acc = 0.0;
  switch (p) {
    case Norm::L1:
      for (double v : f.values) acc += std::fabs(v);
      return acc;
    case Norm::L2:
      for (double v : f.values) acc += v * v;
      return std::sqrt(acc);
    case Norm::Linf:
      for (double v : f.values) acc = std::max(acc, std::fabs(v));
      return acc;
  }
  return acc;
}

inline double dot(const ImageGrid& a, const ImageGrid& b) {
  if (!a.same_shape(b)) throw DimensionError("dot: grid shapes differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    acc += a.values[i] * b.values[i];
  return acc;
}

inline bool all_finite(const ImageGrid& f) {
  for (double v : f.values)
    if (!std::isfinite(v)) return false;
  return true;
}

inline ImageGrid operator+(const ImageGrid& a, const ImageGrid& b) {
  if (!a.same_shape(b)) throw DimensionError("operator+: grid shapes differ");
  ImageGrid out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] += b.values[i];
  return out;
}

inline ImageGrid operator-(const ImageGrid& a, const ImageGrid& b) {
  if (!a.same_shape(b)) throw DimensionError("operator-: grid shapes differ");
  ImageGrid out = a;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] -= b.values[i];
  return out;
}

inline ImageGrid operator*(double s, const ImageGrid& a) {
  ImageGrid out = a;
  for (double& v : out.values) v *= s;
  return out;
}

}  // namespace ctv
