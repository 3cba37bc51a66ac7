#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ctv/grid.hpp"
#include "ctv/kernel.hpp"
#include "ctv/metrics.hpp"
#include "ctv/variation.hpp"

namespace ctv {

/// All tuning parameters shared by the iterative schemes.
struct SolverConfig {
  double h = 0.1;             // step size
  double lambda = 1.0;        // fidelity multiplier
  double theta = 0.98;        // relaxation base; 1 reproduces classical TV
  double beta = 1e-3;         // curvature smoothing
  double eps_tol = 5e-5;      // stopping tolerance on the residual change
  int max_iter = 3000;
  double diverge_linf = 1e8;  // abort threshold on ||f_k||_inf
  double mu = 1.0;            // penalty weight for the L2/H1 baselines
};

inline void validate(const SolverConfig& cfg) {
  if (!(cfg.h > 0.0) || !std::isfinite(cfg.h))
    throw ParamError("solver step h must be positive");
  // lambda = 0 (pure penalty flow) is admitted; it is useful as a test
  // oracle even though production runs keep lambda > 0.
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda))
    throw ParamError("solver lambda must be nonnegative");
  if (!(cfg.theta > 0.0) || !(cfg.theta <= 1.0))
    throw ParamError("solver theta must be in (0, 1]");
  if (!(cfg.beta > 0.0) || !std::isfinite(cfg.beta))
    throw ParamError("solver beta must be positive");
  if (!(cfg.eps_tol > 0.0) || !std::isfinite(cfg.eps_tol))
    throw ParamError("solver eps_tol must be positive");
  if (cfg.max_iter < 0) throw ParamError("solver max_iter must be >= 0");
  if (!(cfg.diverge_linf > 0.0))
    throw ParamError("solver diverge_linf must be positive");
  if (!(cfg.mu >= 0.0) || !std::isfinite(cfg.mu))
    throw ParamError("solver mu must be nonnegative");
}

enum class Termination { Converged, MaxIter, Diverged };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "Converged";
    case Termination::MaxIter: return "MaxIter";
    case Termination::Diverged: return "Diverged";
  }
  return "?";
}

/// Per-iteration diagnostics row. step_l1 is ||f_{k+1} - f_k||_1 and is 0 at
/// the final row; psnr is present only when a reference image was supplied.
struct TraceRow {
  int k = 0;
  double tv = 0.0;            // TV(f_k)
  double l_norm = 0.0;        // ||L_beta f_k||_1 (baselines: penalty gradient)
  double residual_adj = 0.0;  // ||K*(K f_k - u)||_1
  double step_l1 = 0.0;
  std::optional<double> psnr;
};

struct SolverResult {
  ImageGrid image;
  std::vector<TraceRow> trace;
  Termination termination = Termination::MaxIter;
  int iterations = 0;
  /// ||K*(K f_{k+1} - u) - K*(K f_k - u)||_2 from the last evaluated
  /// stopping test; NaN when no step was taken.
  double last_stop_delta = std::numeric_limits<double>::quiet_NaN();
};

/// Stopping rule: stop once the adjoint residual stops moving,
/// ||r_next - r_prev||_2 <= eps_tol.
inline bool stop_check(const ImageGrid& r_next, const ImageGrid& r_prev,
                       double eps_tol) {
  if (!r_next.same_shape(r_prev))
    throw DimensionError("stop_check: residual shapes differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < r_next.values.size(); ++i) {
    const double d = r_next.values[i] - r_prev.values[i];
    acc += d * d;
  }
  return std::sqrt(acc) <= eps_tol;
}

enum class Penalty { L2, H1 };

namespace detail {

enum class Scheme { ClassicalTv, Ctv, Dgd, BaselineL2, BaselineH1 };

inline bool is_tv_family(Scheme s) {
  return s == Scheme::ClassicalTv || s == Scheme::Ctv || s == Scheme::Dgd;
}

// Regularizer gradient for the scheme: theta_k * L_beta(f) for the TV
// family, mu * P(f) for the baselines. The gradient field is shared with
// the TV diagnostic to avoid recomputing it.
inline ImageGrid penalty_gradient(Scheme s, const ImageGrid& f,
                                  const VectorField& g, double beta) {
  switch (s) {
    case Scheme::ClassicalTv:
    case Scheme::Ctv:
    case Scheme::Dgd:
      return curvature(g, SmoothingParam{beta});
    case Scheme::BaselineL2:
      return 2.0 * f;
    case Scheme::BaselineH1: {
      ImageGrid lap = divergence(g);
      for (double& v : lap.values) v *= -2.0;
      return lap;
    }
  }
  throw ParamError("unknown scheme");
}

// One gradient-descent update, shared by tv_step and the runners so their
// arithmetic matches bit for bit.
inline ImageGrid descend(const ImageGrid& f, double h, double reg_weight,
                         const ImageGrid& reg, double lambda,
                         const ImageGrid& fid) {
  ImageGrid out(f.width, f.height);
  for (std::size_t i = 0; i < f.values.size(); ++i)
    out.values[i] =
        f.values[i] -
        h * (reg_weight * reg.values[i] + lambda * fid.values[i]);
  return out;
}

inline bool guard_fires(const ImageGrid& f, double diverge_linf) {
  double m = 0.0;
  bool finite = true;
  for (double v : f.values) {
    if (!std::isfinite(v)) finite = false;
    m = std::max(m, std::fabs(v));
  }
  return !finite || m > diverge_linf;
}

inline SolverResult run_scheme(Scheme scheme, const ImageGrid& u,
                               const ConvolutionKernel& K,
                               const SolverConfig& cfg, const ImageGrid* ref) {
  validate(cfg);
  if (ref && !ref->same_shape(u))
    throw DimensionError("reference image shape differs from input");

  SolverResult res;
  res.trace.reserve(static_cast<std::size_t>(std::min(cfg.max_iter, 3000)) + 1);

  // Rows are recorded every iteration up to 3000; beyond that, every
  // stride-th iterate (the final row is always recorded).
  const int stride = std::max(1, (cfg.max_iter + 2999) / 3000);

  ImageGrid f = u;                       // f_0 = u
  ImageGrid Kf = apply(K, f);
  ImageGrid raw = Kf - u;                // K f_k - u
  ImageGrid r = adjoint(K, raw);         // K*(K f_k - u)
  double theta_k = 1.0;                  // theta^0
  int k = 0;
  res.termination = Termination::MaxIter;

  while (k < cfg.max_iter) {
    const VectorField g = gradient(f);
    const ImageGrid reg = penalty_gradient(scheme, f, g, cfg.beta);
    const double weight = is_tv_family(scheme) ? theta_k : cfg.mu;
    const ImageGrid& fid = (scheme == Scheme::Dgd) ? raw : r;
    ImageGrid f_next = descend(f, cfg.h, weight, reg, cfg.lambda, fid);

    if (k % stride == 0) {
      TraceRow row;
      row.k = k;
      row.tv = total_variation(g);
      row.l_norm = norm(reg, Norm::L1);
      row.residual_adj = norm(r, Norm::L1);
      row.step_l1 = norm(f_next - f, Norm::L1);
      if (ref) row.psnr = psnr(f, *ref);
      res.trace.push_back(row);
    }

    Kf = apply(K, f_next);
    for (std::size_t i = 0; i < raw.values.size(); ++i)
      raw.values[i] = Kf.values[i] - u.values[i];
    ImageGrid r_next = adjoint(K, raw);
    double delta = 0.0;
    for (std::size_t i = 0; i < r.values.size(); ++i) {
      const double d = r_next.values[i] - r.values[i];
      delta += d * d;
    }
    res.last_stop_delta = std::sqrt(delta);

    f = std::move(f_next);
    r = std::move(r_next);
    // theta_k = theta^k for the relaxed schemes; classical TV keeps 1.
    if (scheme == Scheme::Ctv || scheme == Scheme::Dgd) theta_k *= cfg.theta;
    ++k;

    if (guard_fires(f, cfg.diverge_linf)) {
      res.termination = Termination::Diverged;
      break;
    }
    if (res.last_stop_delta <= cfg.eps_tol) {
      res.termination = Termination::Converged;
      break;
    }
  }

  // Final row describes the last iterate; its step is 0 by convention.
  {
    const VectorField g = gradient(f);
    TraceRow row;
    row.k = k;
    row.tv = total_variation(g);
    row.l_norm = norm(penalty_gradient(scheme, f, g, cfg.beta), Norm::L1);
    row.residual_adj = norm(r, Norm::L1);
    row.step_l1 = 0.0;
    if (ref) row.psnr = psnr(f, *ref);
    res.trace.push_back(row);
  }
  res.image = std::move(f);
  res.iterations = k;
  return res;
}

}  // namespace detail

/// One descent step f - h*(theta_k * L_beta(f) + lambda * K*(K f - u)).
inline ImageGrid tv_step(const ImageGrid& f, const ImageGrid& u,
                         const ConvolutionKernel& K, const SolverConfig& cfg,
                         double theta_k) {
  validate(cfg);
  if (!f.same_shape(u)) throw DimensionError("tv_step: f and u shapes differ");
  if (!(theta_k >= 0.0) || !(theta_k <= 1.0))
    throw ParamError("tv_step: theta_k must be in [0, 1]");
  const ImageGrid reg = curvature(f, SmoothingParam{cfg.beta});
  const ImageGrid r = adjoint(K, apply(K, f) - u);
  return detail::descend(f, cfg.h, theta_k, reg, cfg.lambda, r);
}

/// Classical TV gradient descent: theta_k = 1 at every step.
inline SolverResult run_classical_tv(const ImageGrid& u,
                                     const ConvolutionKernel& K,
                                     const SolverConfig& cfg,
                                     const ImageGrid* ref = nullptr) {
  return detail::run_scheme(detail::Scheme::ClassicalTv, u, K, cfg, ref);
}

/// Controlled TV: the TV term is relaxed by theta_k = theta^k, so the
/// iteration settles on K*(K f - u) = 0 instead of the TV-penalized
/// stationarity condition.
inline SolverResult run_ctv(const ImageGrid& u, const ConvolutionKernel& K,
                            const SolverConfig& cfg,
                            const ImageGrid* ref = nullptr) {
  return detail::run_scheme(detail::Scheme::Ctv, u, K, cfg, ref);
}

/// Direct gradient descent: fidelity term lambda*(K f - u) without the
/// adjoint. Requires the operator's domain and codomain to coincide; known
/// to diverge for some kernels (the guard reports Diverged).
inline SolverResult run_dgd(const ImageGrid& u, const ConvolutionKernel& K,
                            const SolverConfig& cfg,
                            const ImageGrid* ref = nullptr) {
  return detail::run_scheme(detail::Scheme::Dgd, u, K, cfg, ref);
}

/// Gradient descent on mu*P(f) + lambda/2 ||Kf - u||^2 with P the squared
/// L2 norm (P'(f) = 2f) or H1 seminorm (P'(f) = -2 div grad f).
inline SolverResult run_baseline(const ImageGrid& u,
                                 const ConvolutionKernel& K,
                                 const SolverConfig& cfg, Penalty penalty,
                                 const ImageGrid* ref = nullptr) {
  return detail::run_scheme(penalty == Penalty::L2
                                ? detail::Scheme::BaselineL2
                                : detail::Scheme::BaselineH1,
                            u, K, cfg, ref);
}

}  // namespace ctv
