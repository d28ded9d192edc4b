#pragma once

#include "retune/core.hpp"
#include "retune/scheme.hpp"

#include <cstdint>

namespace retune {

/// A scheme with parameters, target, and starting point, ready for the estimators.
struct Instance {
  SchemeSpec spec;
  Vec s;
  Vec xbar;
  Vec x0;
};

/// phi(x) = (1 - tau) x + tau theta y with y = 1, theta = 2, tau = 1/2, xbar = 0, x0 = 0.
Instance scalar_instance(int K, int T);

/// Gradient steps on x^T H(theta) x / 2 - b^T x with n states and d parameters,
/// stepsize 2 / (mu + L) at the drawn parameters.
Instance quadratic_instance(std::uint64_t seed, int n, int d, int K, int T);

struct WaveletInstanceOptions {
  Shape shape{8, 8, 1};
  int levels = 2;
  PriorKind kind = PriorKind::Bands;
  /// Peak intensity of the clean image.
  double amplitude = 4.0;
  double noise = 0.5;
  /// Half-width of the uniform draw of every log weight.
  double log_spread = 0.3;
  /// When positive, every detail weight equals this value instead of a random draw.
  double isotropic_weight = 0.0;
};

/// Seeded denoising problem on a synthetic image, with the default stepsize.
Instance wavelet_instance(std::uint64_t seed, int K, int T, const WaveletInstanceOptions& opt = {});

}  // namespace retune
