#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "ctv/grid.hpp"

namespace ctv {

/// Additive white Gaussian noise parameters: standard deviation in
/// intensity units plus the generator seed.
struct NoiseSpec {
  double sigma_n = 0.0;
  std::uint64_t seed = 0;
};

/// Standard normal sampler pinned to one algorithm: Box-Muller over
/// mt19937_64, uniforms taken as the top 53 bits. Seeded runs are
/// reproducible within a build.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform53();  // in (0, 1], keeps log finite
    const double u2 = uniform53();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

 private:
  double uniform53() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;  // [0, 1)
  }

  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// out(x) = f(x) + sigma_n * z(x), z iid standard normal in row-major
/// order. sigma_n = 0 returns the input bit-identically.
inline ImageGrid add_gaussian_noise(const ImageGrid& f,
                                    const NoiseSpec& noise) {
  if (!(noise.sigma_n >= 0.0) || !std::isfinite(noise.sigma_n))
    throw ParamError("noise sigma must be nonnegative and finite");
  if (noise.sigma_n == 0.0) return f;
  GaussianSampler gen(noise.seed);
  ImageGrid out = f;
  for (double& v : out.values) v += noise.sigma_n * gen.next();
  return out;
}

}  // namespace ctv
