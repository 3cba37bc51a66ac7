#pragma once

#include <cmath>

#include "ctv/grid.hpp"

namespace ctv {

/// Regularizes the gradient magnitude in the curvature operator: the
/// pointwise normalization divides by sqrt(|grad f|^2 + beta^2), so flat
/// regions stay finite. Default chosen for the [0,255] intensity scale.
struct SmoothingParam {
  double beta = 1e-3;
};

/// Forward differences with a zero last column/row (Neumann boundary):
/// gx(i,j) = f(i,j+1) - f(i,j), gx = 0 at j = width-1; gy analogous.
inline VectorField gradient(const ImageGrid& f) {
  const int w = f.width, h = f.height;
  VectorField g{ImageGrid(w, h), ImageGrid(w, h)};
  for (int i = 0; i < h; ++i) {
    const double* row = &f.values[static_cast<std::size_t>(i) * w];
    double* gx = &g.gx.values[static_cast<std::size_t>(i) * w];
    for (int j = 0; j + 1 < w; ++j) gx[j] = row[j + 1] - row[j];
  }
  for (int i = 0; i + 1 < h; ++i) {
    const double* row = &f.values[static_cast<std::size_t>(i) * w];
    const double* next = row + w;
    double* gy = &g.gy.values[static_cast<std::size_t>(i) * w];
    for (int j = 0; j < w; ++j) gy[j] = next[j] - row[j];
  }
  return g;
}

/// Exact negative adjoint of gradient: <gradient(f), v> == -<f, divergence(v)>
/// for all f and v. Backward differences with the matching boundary stencil;
/// the last column of v.gx (and last row of v.gy) never enters.
inline ImageGrid divergence(const VectorField& v) {
  if (!v.gx.same_shape(v.gy))
    throw DimensionError("divergence: component shapes differ");
  const int w = v.gx.width, h = v.gx.height;
  ImageGrid out(w, h);
  for (int i = 0; i < h; ++i) {
    const double* vx = &v.gx.values[static_cast<std::size_t>(i) * w];
    double* o = &out.values[static_cast<std::size_t>(i) * w];
    if (w > 1) {
      o[0] = vx[0];
      for (int j = 1; j + 1 < w; ++j) o[j] = vx[j] - vx[j - 1];
      o[w - 1] = -vx[w - 2];
    }
  }
  for (int j = 0; j < w; ++j) {
    if (h > 1) {
      out.values[j] += v.gy.values[j];
      for (int i = 1; i + 1 < h; ++i)
        out.values[static_cast<std::size_t>(i) * w + j] +=
            v.gy.values[static_cast<std::size_t>(i) * w + j] -
            v.gy.values[static_cast<std::size_t>(i - 1) * w + j];
      out.values[static_cast<std::size_t>(h - 1) * w + j] -=
          v.gy.values[static_cast<std::size_t>(h - 2) * w + j];
    }
  }
  return out;
}

/// Isotropic TV from a precomputed gradient field.
inline double total_variation(const VectorField& g) {
  double acc = 0.0;
  for (std::size_t i = 0; i < g.gx.values.size(); ++i) {
    const double x = g.gx.values[i], y = g.gy.values[i];
    acc += std::sqrt(x * x + y * y);
  }
  return acc;
}

/// Sum over pixels of the Euclidean norm of the discrete gradient.
inline double total_variation(const ImageGrid& f) {
  return total_variation(gradient(f));
}

/// Differentiable surrogate: sum_x sqrt(|grad f(x)|^2 + beta^2).
inline double smoothed_tv(const ImageGrid& f, SmoothingParam s) {
  if (!(s.beta > 0.0)) throw ParamError("smoothing beta must be positive");
  const VectorField g = gradient(f);
  const double b2 = s.beta * s.beta;
  double acc = 0.0;
  for (std::size_t i = 0; i < g.gx.values.size(); ++i) {
    const double x = g.gx.values[i], y = g.gy.values[i];
    acc += std::sqrt(x * x + y * y + b2);
  }
  return acc;
}

/// Curvature operator from a precomputed gradient:
/// L_beta(f) = -div( grad f / sqrt(|grad f|^2 + beta^2) ).
/// This is the exact gradient of smoothed_tv under this discretization, so
/// f - h*L_beta(f) descends the smoothed TV for small h.
inline ImageGrid curvature(const VectorField& g, SmoothingParam s) {
  if (!(s.beta > 0.0)) throw ParamError("smoothing beta must be positive");
  const int w = g.gx.width, h = g.gx.height;
  VectorField unit{ImageGrid(w, h), ImageGrid(w, h)};
  const double b2 = s.beta * s.beta;
  for (std::size_t i = 0; i < g.gx.values.size(); ++i) {
    const double x = g.gx.values[i], y = g.gy.values[i];
    const double mag = std::sqrt(x * x + y * y + b2);
    unit.gx.values[i] = x / mag;
    unit.gy.values[i] = y / mag;
  }
  ImageGrid out = divergence(unit);
  for (double& v : out.values) v = -v;
  return out;
}

inline ImageGrid curvature(const ImageGrid& f, SmoothingParam s) {
  return curvature(gradient(f), s);
}

}  // namespace ctv
