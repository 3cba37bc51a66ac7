#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ctv/grid.hpp"

namespace ctv {

/// Finite 2D tap array realizing a blur operator K and, via point
/// reflection, its adjoint K*. Taps span [-radius, +radius] per axis.
struct ConvolutionKernel {
  int radius_x = 0;
  int radius_y = 0;
  std::vector<double> taps;  // (2*radius_y+1) x (2*radius_x+1), row-major
  bool normalized = false;

  int tap_width() const { return 2 * radius_x + 1; }
  int tap_height() const { return 2 * radius_y + 1; }

  /// dy in [-radius_y, radius_y], dx in [-radius_x, radius_x].
  double tap(int dy, int dx) const {
    return taps[static_cast<std::size_t>(dy + radius_y) * tap_width() +
                (dx + radius_x)];
  }
};

namespace detail {

inline void rescale_to_unit_sum(ConvolutionKernel& k) {
  double sum = 0.0;
  for (double t : k.taps) sum += t;
  if (sum == 0.0 || !std::isfinite(sum))
    throw ParamError("kernel taps cannot be normalized: sum is " +
                     std::to_string(sum));
  for (double& t : k.taps) t /= sum;
  k.normalized = true;
}

}  // namespace detail

/// Sampled Gaussian, truncated at radius ceil(4*sigma_b) per axis and
/// rescaled to unit sum so constants are preserved.
inline ConvolutionKernel make_gaussian_kernel(double sigma_b) {
  if (!(sigma_b > 0.0) || !std::isfinite(sigma_b))
    throw ParamError("gaussian kernel sigma must be positive and finite");
  ConvolutionKernel k;
  k.radius_x = k.radius_y = static_cast<int>(std::ceil(4.0 * sigma_b));
  k.taps.resize(static_cast<std::size_t>(k.tap_height()) * k.tap_width());
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma_b * sigma_b);
  const double amp = 1.0 / (2.0 * std::numbers::pi * sigma_b * sigma_b);
  std::size_t i = 0;
  for (int dy = -k.radius_y; dy <= k.radius_y; ++dy)
    for (int dx = -k.radius_x; dx <= k.radius_x; ++dx)
      k.taps[i++] = amp * std::exp(-(double(dx) * dx + double(dy) * dy) *
                                   inv_two_sigma2);
  detail::rescale_to_unit_sum(k);
  return k;
}

/// n x n box average, n odd. Every tap is 1/n^2.
inline ConvolutionKernel make_box_kernel(int n) {
  if (n < 1 || n % 2 == 0)
    throw ParamError("box kernel size must be an odd positive integer, got " +
                     std::to_string(n));
  ConvolutionKernel k;
  k.radius_x = k.radius_y = (n - 1) / 2;
  k.taps.assign(static_cast<std::size_t>(n) * n,
                1.0 / (static_cast<double>(n) * n));
  k.normalized = true;
  return k;
}

/// Single unit tap: K = identity.
inline ConvolutionKernel identity_kernel() { return make_box_kernel(1); }

/// Plain-text tap format: first line "rx ry", then (2*ry+1) lines of
/// (2*rx+1) space-separated reals.
inline ConvolutionKernel parse_kernel(std::string_view text, bool normalize) {
  std::istringstream in{std::string(text)};
  int rx = -1, ry = -1;
  if (!(in >> rx >> ry) || rx < 0 || ry < 0)
    throw ParseError("kernel file must start with 'rx ry' (nonnegative ints)",
                     0);
  ConvolutionKernel k;
  k.radius_x = rx;
  k.radius_y = ry;
  std::size_t count =
      static_cast<std::size_t>(k.tap_height()) * k.tap_width();
  k.taps.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> k.taps[i]))
      throw ParseError("kernel file: expected " + std::to_string(count) +
                           " taps, failed reading tap " + std::to_string(i),
                       static_cast<std::size_t>(std::max<std::streamoff>(
                           0, in.tellg() == -1 ? std::streamoff(text.size())
                                               : std::streamoff(in.tellg()))),
                       false);
    if (!std::isfinite(k.taps[i]))
      throw ParseError("kernel file: tap " + std::to_string(i) +
                           " is not finite",
                       0, false);
  }
  if (normalize) detail::rescale_to_unit_sum(k);
  return k;
}

inline ConvolutionKernel load_kernel(const std::string& path, bool normalize) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  try {
    return parse_kernel(text, normalize);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.offset, false);
  }
}

namespace detail {

// Direct spatial convolution, periodic wrap, fixed accumulation order
// (dy outer, dx inner) so the result is bit-reproducible.
inline ImageGrid convolve_periodic(const std::vector<double>& taps,
                                   int radius_x, int radius_y,
                                   const ImageGrid& f) {
  const int w = f.width, h = f.height;
  if (radius_x >= w || radius_y >= h)
    throw DimensionError("kernel radius (" + std::to_string(radius_x) + "," +
                         std::to_string(radius_y) + ") must be < grid size (" +
                         std::to_string(w) + "x" + std::to_string(h) + ")");
  // wrap tables: index by (coord - offset + radius)
  std::vector<int> wrap_col(static_cast<std::size_t>(w) + 2 * radius_x);
  std::vector<int> wrap_row(static_cast<std::size_t>(h) + 2 * radius_y);
  for (int j = 0; j < static_cast<int>(wrap_col.size()); ++j)
    wrap_col[j] = ((j - radius_x) % w + w) % w;
  for (int i = 0; i < static_cast<int>(wrap_row.size()); ++i)
    wrap_row[i] = ((i - radius_y) % h + h) % h;

  const int tw = 2 * radius_x + 1;
  ImageGrid out(w, h);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double acc = 0.0;
      const double* tap_row = taps.data();
      for (int dy = -radius_y; dy <= radius_y; ++dy, tap_row += tw) {
        const double* src =
            &f.values[static_cast<std::size_t>(wrap_row[i - dy + radius_y]) *
                      w];
        // tap index t corresponds to dx = t - radius_x; source column is
        // wrap(j - dx) = wrap_col[j - t + 2*radius_x].
        const int* wc = &wrap_col[j + 2 * radius_x];
        for (int t = 0; t < tw; ++t) acc += tap_row[t] * src[wc[-t]];
      }
      out.values[static_cast<std::size_t>(i) * w + j] = acc;
    }
  }
  return out;
}

}  // namespace detail

/// out(x) = sum_y taps(y) f(x - y), indices wrapped periodically.
inline ImageGrid apply(const ConvolutionKernel& k, const ImageGrid& f) {
  return detail::convolve_periodic(k.taps, k.radius_x, k.radius_y, f);
}

/// Adjoint of apply: convolution with the point-reflected taps, so that
/// <apply(K,a), b> == <a, adjoint(K,b)> for all a, b.
inline ImageGrid adjoint(const ConvolutionKernel& k, const ImageGrid& f) {
  // Reversing the row-major tap array maps (dy,dx) -> (-dy,-dx).
  std::vector<double> flipped(k.taps.rbegin(), k.taps.rend());
  return detail::convolve_periodic(flipped, k.radius_x, k.radius_y, f);
}

}  // namespace ctv
