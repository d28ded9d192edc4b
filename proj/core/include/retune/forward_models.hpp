#pragma once

#include "retune/core.hpp"
#include "retune/random.hpp"

#include <vector>

namespace retune {

/// One tap of a periodic 2-D kernel: output(r, c) += weight * input(r - dy, c - dx).
struct Tap {
  int dy = 0;
  int dx = 0;
  double weight = 0.0;
};

/// Linear forward operator A on planar signals: identity, pixel mask, or
/// per-channel periodic convolution.
class LinearOp {
 public:
  enum class Kind { Identity, Mask, Conv };

  static LinearOp identity(Shape shape);
  /// mask has one entry per pixel of one channel (H * W) and is shared by all channels.
  static LinearOp mask(Shape shape, Vec mask);
  /// kernels[c] holds the taps used on channel c.
  static LinearOp conv(Shape shape, std::vector<std::vector<Tap>> kernels);

  Kind kind() const { return kind_; }
  const Shape& shape() const { return shape_; }
  const Vec& mask_values() const { return mask_; }
  const std::vector<std::vector<Tap>>& kernels() const { return kernels_; }

  Vec apply(const Vec& x) const;
  Vec adjoint(const Vec& r) const;
  Signal apply(const Signal& x) const;
  Signal adjoint(const Signal& r) const;

 private:
  Kind kind_ = Kind::Identity;
  Shape shape_;
  Vec mask_;
  std::vector<std::vector<Tap>> kernels_;
};

struct GramBounds {
  double mu = 0.0;
  double L = 0.0;
};

/// Extreme eigenvalues of A^T A: exact for identity and mask, by DFT of the kernel for conv.
GramBounds gram_bounds(const LinearOp& A);

/// Bernoulli(keep_prob) pixel mask shared across channels.
LinearOp make_inpainting_mask(Shape shape, double keep_prob, Rng& rng);

/// Normalized uniform blur of the given width: horizontal on channel 0,
/// vertical on channel 1, diagonal on channel 2 (cycling for more channels).
LinearOp make_anisotropic_blur(Shape shape, int width);

/// Convolution with a unit impulse on every channel.
LinearOp make_dirac_conv(Shape shape);

}  // namespace retune
