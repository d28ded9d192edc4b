#pragma once

#include "retune/core.hpp"

#include <array>
#include <cstddef>

namespace retune {

enum class Band { H = 0, V = 1, D = 2 };

/// Fixed flat ordering of a multilevel 2-D coefficient set.
///
/// Detail coefficients come first, scale-major (j = 1 is the finest level),
/// then band H, V, D, then channel, then row-major position. The coarsest
/// approximation band follows, one block per channel.
class WaveletLayout {
 public:
  WaveletLayout() = default;
  /// Throws std::invalid_argument unless height and width are divisible by 2^levels.
  WaveletLayout(Shape shape, int levels);

  const Shape& shape() const { return shape_; }
  int levels() const { return levels_; }
  int channels() const { return shape_.channels; }
  int band_height(int j) const { return shape_.height >> j; }
  int band_width(int j) const { return shape_.width >> j; }
  std::size_t band_size(int j) const {
    return static_cast<std::size_t>(band_height(j)) * static_cast<std::size_t>(band_width(j));
  }
  std::size_t band_offset(int j, Band b, int c) const;
  std::size_t approx_offset(int c) const;
  std::size_t detail_size() const { return detail_size_; }
  std::size_t size() const { return shape_.size(); }

  friend bool operator==(const WaveletLayout& a, const WaveletLayout& b) {
    return a.shape_ == b.shape_ && a.levels_ == b.levels_;
  }

 private:
  Shape shape_;
  int levels_ = 0;
  std::size_t detail_size_ = 0;
};

struct WaveletCoeffs {
  WaveletLayout layout;
  Vec data;

  double& at(int j, Band b, int c, int row, int col) {
    return data[static_cast<Eigen::Index>(layout.band_offset(j, b, c) +
                                          static_cast<std::size_t>(row) * layout.band_width(j) + col)];
  }
};

/// The 8-tap orthonormal Daubechies lowpass filter (four vanishing moments).
const std::array<double, 8>& db4_lowpass();

/// Forward periodic orthonormal transform, flat form. x uses the planar Signal layout.
Vec dwt2(const Vec& x, const WaveletLayout& layout);
/// Inverse (= adjoint) transform, flat form.
Vec idwt2(const Vec& w, const WaveletLayout& layout);

WaveletCoeffs dwt2(const Signal& x, int levels);
Signal idwt2(const WaveletCoeffs& w);

/// Per-coefficient weight lambda_j * sqrt(Lambda), with 1 on the approximation band.
Vec theta_diag(const WaveletLayout& layout, const HyperParams& p);

/// Multiplies every coefficient by its weight raised to `power`.
WaveletCoeffs weight_map_apply(const WaveletCoeffs& w, const HyperParams& p, int power);

/// Index into log_Lambda for band b, channel c.
int band_weight_index(PriorKind kind, Band b, int c, int channels);

/// Packs [log_lambda, log_Lambda] into one log-parameter vector and back.
Vec pack_weights(const HyperParams& p);
HyperParams unpack_weights(const Vec& s, int levels, int channels, PriorKind kind);

}  // namespace retune
