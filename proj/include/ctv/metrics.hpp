#pragma once

#include <cmath>
#include <limits>

#include "ctv/grid.hpp"

namespace ctv {

/// Peak constant in the PSNR formula, fixed at 255 regardless of the
/// actual dynamic range of the operands.
inline constexpr double kPsnrPeak = 255.0;

inline double mse(const ImageGrid& f, const ImageGrid& g) {
  if (!f.same_shape(g)) throw DimensionError("mse: grid shapes differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double d = f.values[i] - g.values[i];
    acc += d * d;
  }
  return acc / static_cast<double>(f.values.size());
}

/// 10*log10(255^2 / MSE); +infinity when the images are identical.
inline double psnr(const ImageGrid& f, const ImageGrid& g) {
  const double m = mse(f, g);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(kPsnrPeak * kPsnrPeak / m);
}

struct QualityReport {
  double mse = 0.0;
  double psnr_db = std::numeric_limits<double>::infinity();
};

inline QualityReport quality(const ImageGrid& f, const ImageGrid& g) {
  QualityReport q;
  q.mse = mse(f, g);
  q.psnr_db = q.mse == 0.0 ? std::numeric_limits<double>::infinity()
                           : 10.0 * std::log10(kPsnrPeak * kPsnrPeak / q.mse);
  return q;
}

}  // namespace ctv
