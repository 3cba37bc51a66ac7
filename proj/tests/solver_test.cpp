#include "ctv/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

using namespace ctv;

ImageGrid random_grid(std::mt19937_64& rng, int w, int h, double lo = 0.0,
                      double hi = 255.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  ImageGrid g(w, h);
  for (double& v : g.values) v = dist(rng);
  return g;
}

bool traces_identical(const SolverResult& a, const SolverResult& b) {
  if (a.trace.size() != b.trace.size()) return false;
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    const TraceRow &ra = a.trace[i], &rb = b.trace[i];
    if (ra.k != rb.k || ra.tv != rb.tv || ra.l_norm != rb.l_norm ||
        ra.residual_adj != rb.residual_adj || ra.step_l1 != rb.step_l1)
      return false;
    if (ra.psnr.has_value() != rb.psnr.has_value()) return false;
    if (ra.psnr && *ra.psnr != *rb.psnr) return false;
  }
  return a.image.values == b.image.values && a.iterations == b.iterations &&
         a.termination == b.termination;
}

TEST(Config, Validation) {
  SolverConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  SolverConfig bad = cfg;
  bad.h = 0.0;
  EXPECT_THROW(validate(bad), ParamError);
  bad = cfg;
  bad.theta = 0.0;
  EXPECT_THROW(validate(bad), ParamError);
  bad = cfg;
  bad.theta = 1.5;
  EXPECT_THROW(validate(bad), ParamError);
  bad = cfg;
  bad.beta = -1e-3;
  EXPECT_THROW(validate(bad), ParamError);
  bad = cfg;
  bad.eps_tol = 0.0;
  EXPECT_THROW(validate(bad), ParamError);
  bad = cfg;
  bad.lambda = -1.0;
  EXPECT_THROW(validate(bad), ParamError);
  bad = cfg;
  bad.max_iter = -1;
  EXPECT_THROW(validate(bad), ParamError);
}

TEST(StopCheck, ThresholdComparison) {
  const ImageGrid r = constant(4, 4, 1.0);
  EXPECT_TRUE(stop_check(r, r, 5e-5));

  ImageGrid r2 = r;
  r2.values[0] += 1e-4;  // L2 difference 1e-4
  EXPECT_FALSE(stop_check(r2, r, 5e-5));

  ImageGrid r3 = r;
  r3.values[0] += 4e-5;  // L2 difference 4e-5
  EXPECT_TRUE(stop_check(r3, r, 5e-5));

  EXPECT_THROW(stop_check(r, constant(3, 3, 1.0), 5e-5), DimensionError);
}

TEST(TvStep, FixedPointOnConstants) {
  const ImageGrid u = constant(6, 6, 50.0);
  const SolverConfig cfg;
  const ImageGrid next = tv_step(u, u, identity_kernel(), cfg, 1.0);
  EXPECT_EQ(next.values, u.values);
}

TEST(TvStep, PureRelaxationWhenThetaZero) {
  std::mt19937_64 rng(51);
  const ImageGrid u = random_grid(rng, 5, 5);
  const ImageGrid f = random_grid(rng, 5, 5);
  SolverConfig cfg;
  cfg.h = 0.2;
  cfg.lambda = 1.5;
  const ImageGrid next = tv_step(f, u, identity_kernel(), cfg, 0.0);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double expect =
        f.values[i] - cfg.h * cfg.lambda * (f.values[i] - u.values[i]);
    EXPECT_NEAR(next.values[i], expect, 1e-12);
  }
}

TEST(TvStep, RejectsBadInput) {
  const SolverConfig cfg;
  EXPECT_THROW(tv_step(constant(4, 4, 0.0), constant(5, 4, 0.0),
                       identity_kernel(), cfg, 1.0),
               DimensionError);
  EXPECT_THROW(tv_step(constant(4, 4, 0.0), constant(4, 4, 0.0),
                       identity_kernel(), cfg, 1.5),
               ParamError);
}

TEST(Runners, ConstantInputConvergesImmediately) {
  const ImageGrid u = constant(8, 8, 77.0);
  SolverConfig cfg;
  const SolverResult res = run_classical_tv(u, identity_kernel(), cfg);
  EXPECT_EQ(res.termination, Termination::Converged);
  EXPECT_LE(res.iterations, 1);
  EXPECT_EQ(res.image.values, u.values);
  EXPECT_EQ(res.trace.back().step_l1, 0.0);
}

TEST(Runners, ThetaOneCtvIsBitIdenticalToClassicalTv) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 3; ++trial) {
    const ImageGrid u = random_grid(rng, 12, 10);
    SolverConfig cfg;
    cfg.theta = 1.0;
    cfg.max_iter = 40;
    const ConvolutionKernel K = make_box_kernel(3);
    const SolverResult a = run_ctv(u, K, cfg, &u);
    const SolverResult b = run_classical_tv(u, K, cfg, &u);
    EXPECT_TRUE(traces_identical(a, b));
  }
}

TEST(Runners, IdentityOperatorMakesCtvAndDgdCoincide) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 3; ++trial) {
    const ImageGrid u = random_grid(rng, 9, 11);
    SolverConfig cfg;
    cfg.theta = 0.9;
    cfg.max_iter = 30;
    const SolverResult a = run_ctv(u, identity_kernel(), cfg);
    const SolverResult b = run_dgd(u, identity_kernel(), cfg);
    EXPECT_TRUE(traces_identical(a, b));
  }
}

TEST(Runners, CtvMatchesManualTvStepChain) {
  std::mt19937_64 rng(54);
  const ImageGrid u = random_grid(rng, 8, 8);
  const ConvolutionKernel K = make_gaussian_kernel(0.6);
  SolverConfig cfg;
  cfg.theta = 0.5;
  cfg.max_iter = 4;
  cfg.eps_tol = 1e-300;  // force the full four steps
  const SolverResult res = run_ctv(u, K, cfg);

  ImageGrid f = u;
  double theta_k = 1.0;  // theta^0: first step coincides with classical TV
  for (int k = 0; k < 4; ++k) {
    f = tv_step(f, u, K, cfg, theta_k);
    theta_k *= cfg.theta;
  }
  EXPECT_EQ(res.iterations, 4);
  EXPECT_EQ(res.image.values, f.values);
}

TEST(Runners, DeterministicAcrossRuns) {
  std::mt19937_64 rng(55);
  const ImageGrid u = random_grid(rng, 10, 10);
  const ConvolutionKernel K = make_gaussian_kernel(0.8);
  SolverConfig cfg;
  cfg.max_iter = 25;
  const SolverResult a = run_ctv(u, K, cfg, &u);
  const SolverResult b = run_ctv(u, K, cfg, &u);
  EXPECT_TRUE(traces_identical(a, b));
}

TEST(Runners, TraceRowContract) {
  std::mt19937_64 rng(56);
  const ImageGrid u = random_grid(rng, 10, 10);
  SolverConfig cfg;
  cfg.max_iter = 15;
  cfg.eps_tol = 1e-300;
  const SolverResult res = run_ctv(u, make_box_kernel(3), cfg, &u);
  EXPECT_EQ(res.termination, Termination::MaxIter);
  EXPECT_EQ(res.iterations, 15);
  ASSERT_EQ(res.trace.size(), 16u);
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    const TraceRow& row = res.trace[i];
    EXPECT_EQ(row.k, static_cast<int>(i));
    EXPECT_TRUE(std::isfinite(row.tv));
    EXPECT_TRUE(std::isfinite(row.l_norm));
    EXPECT_TRUE(std::isfinite(row.residual_adj));
    EXPECT_TRUE(std::isfinite(row.step_l1));
    ASSERT_TRUE(row.psnr.has_value());
  }
  EXPECT_EQ(res.trace.back().step_l1, 0.0);
  EXPECT_GT(res.trace.front().step_l1, 0.0);
}

TEST(Runners, TraceStrideForLargeMaxIter) {
  std::mt19937_64 rng(57);
  const ImageGrid u = random_grid(rng, 8, 8);
  SolverConfig cfg;
  cfg.max_iter = 6001;  // stride 3
  cfg.eps_tol = 1e-300;
  const SolverResult res = run_classical_tv(u, make_box_kernel(3), cfg);
  EXPECT_EQ(res.termination, Termination::MaxIter);
  EXPECT_EQ(res.iterations, 6001);
  for (std::size_t i = 0; i + 1 < res.trace.size(); ++i)
    EXPECT_EQ(res.trace[i].k % 3, 0);
  EXPECT_EQ(res.trace.back().k, 6001);
  EXPECT_LE(res.trace.size(), 3003u);
}

TEST(Runners, ZeroMaxIterIsPassthrough) {
  std::mt19937_64 rng(58);
  const ImageGrid u = random_grid(rng, 7, 7);
  SolverConfig cfg;
  cfg.max_iter = 0;
  const SolverResult res = run_ctv(u, make_gaussian_kernel(1.0), cfg);
  EXPECT_EQ(res.termination, Termination::MaxIter);
  EXPECT_EQ(res.iterations, 0);
  EXPECT_EQ(res.image.values, u.values);
  ASSERT_EQ(res.trace.size(), 1u);
  EXPECT_EQ(res.trace[0].k, 0);
  EXPECT_EQ(res.trace[0].step_l1, 0.0);
  EXPECT_TRUE(std::isnan(res.last_stop_delta));
}

TEST(Runners, DivergenceGuardFires) {
  std::mt19937_64 rng(59);
  const ImageGrid u = random_grid(rng, 8, 8);
  SolverConfig cfg;
  cfg.h = 10.0;  // grossly unstable for DGD on a box kernel
  cfg.theta = 0.998;
  cfg.max_iter = 3000;
  cfg.diverge_linf = 1e8;
  const SolverResult res = run_dgd(u, make_box_kernel(3), cfg);
  EXPECT_EQ(res.termination, Termination::Diverged);
  EXPECT_LT(res.iterations, 3000);
  const double final_linf = norm(res.image, Norm::Linf);
  EXPECT_TRUE(!all_finite(res.image) || final_linf > cfg.diverge_linf);
}

TEST(Runners, StopDeltaConsistentWithTermination) {
  std::mt19937_64 rng(60);
  const ImageGrid u = random_grid(rng, 8, 8);
  SolverConfig cfg;
  cfg.max_iter = 2000;
  cfg.eps_tol = 1e-6;
  const SolverResult res = run_baseline(u, identity_kernel(), cfg, Penalty::L2);
  if (res.termination == Termination::Converged)
    EXPECT_LE(res.last_stop_delta, cfg.eps_tol);
  else if (res.termination == Termination::MaxIter)
    EXPECT_GT(res.last_stop_delta, cfg.eps_tol);
}

TEST(Baselines, PureFidelityConvergesToInput) {
  std::mt19937_64 rng(61);
  const ImageGrid u = random_grid(rng, 8, 8);
  SolverConfig cfg;
  cfg.mu = 0.0;
  cfg.max_iter = 3000;
  const SolverResult res =
      run_baseline(u, identity_kernel(), cfg, Penalty::L2);
  EXPECT_EQ(res.termination, Termination::Converged);
  const double err = norm(res.image - u, Norm::Linf);
  EXPECT_LT(err, 1e-3);
}

TEST(Baselines, H1PenaltyVanishesOnConstants) {
  const ImageGrid u = constant(8, 8, 30.0);
  SolverConfig cfg;
  cfg.mu = 5.0;
  const SolverResult res = run_baseline(u, identity_kernel(), cfg, Penalty::H1);
  // Laplacian of a constant is zero, fidelity is zero: u is a fixed point.
  EXPECT_EQ(res.image.values, u.values);
  EXPECT_EQ(res.termination, Termination::Converged);
}

TEST(Baselines, L2PenaltyGeometricDecayWithoutFidelity) {
  std::mt19937_64 rng(62);
  const ImageGrid u = random_grid(rng, 6, 6, 1.0, 255.0);
  SolverConfig cfg;
  cfg.lambda = 0.0;  // pure penalty flow
  cfg.mu = 0.8;
  cfg.h = 0.1;
  cfg.max_iter = 5;
  cfg.eps_tol = 1e-300;
  const SolverResult res = run_baseline(u, identity_kernel(), cfg, Penalty::L2);
  const double factor = std::pow(1.0 - 2.0 * cfg.h * cfg.mu, 5);
  for (std::size_t i = 0; i < u.values.size(); ++i)
    EXPECT_NEAR(res.image.values[i], factor * u.values[i],
                std::fabs(u.values[i]) * 1e-12);
}

}  // namespace
