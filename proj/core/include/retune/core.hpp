#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace retune {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Image geometry in pixels and channels.
struct Shape {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
           static_cast<std::size_t>(channels);
  }
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// A flat real array with image shape metadata.
///
/// Storage is planar: data[(c * height + row) * width + col]. Construction
/// checks that the length matches the shape and that every entry is finite;
/// the object is immutable afterwards.
class Signal {
 public:
  Signal() = default;
  explicit Signal(Shape shape);
  Signal(Shape shape, Vec data);

  const Shape& shape() const { return shape_; }
  const Vec& data() const { return data_; }
  std::size_t size() const { return shape_.size(); }

  double at(int channel, int row, int col) const {
    return data_[index(channel, row, col)];
  }
  std::size_t index(int channel, int row, int col) const {
    return (static_cast<std::size_t>(channel) * shape_.height + row) * shape_.width + col;
  }

 private:
  Shape shape_;
  Vec data_;
};

enum class PriorKind { BandsChannels, Bands };

/// Number of band weights Lambda for a prior: 3 per band, or 3 * channels when
/// bands and channels are weighted jointly.
int band_weight_count(PriorKind kind, int channels);

/// Log-parameterized hyperparameters. Every effective parameter is exp() of
/// its stored log value, so positivity holds for any real input.
struct HyperParams {
  Vec log_lambda;  // one per scale j = 1..J
  Vec log_Lambda;  // per band (Bands) or per band-channel b * C + c (BandsChannels)
  double log_tau = 0.0;
  double log_sigma = 0.0;
  PriorKind prior_kind = PriorKind::BandsChannels;

  Vec lambda() const { return log_lambda.array().exp(); }
  Vec Lambda() const { return log_Lambda.array().exp(); }
  double tau() const;
  double sigma() const;

  static HyperParams uniform(int levels, int channels, PriorKind kind, double lambda,
                             double Lambda);
};

struct Sample {
  Signal clean;
  Signal observed;
};

/// Supervised pairs (clean, observed) sharing one shape.
struct Dataset {
  std::vector<Sample> pairs;
  std::uint64_t seed = 0;

  std::size_t size() const { return pairs.size(); }
  /// Throws std::invalid_argument if the pairs do not share one shape.
  void validate() const;
};

/// 1/2 ||x - ref||^2, summed sequentially.
double mse_loss(const Signal& x, const Signal& ref);
double mse_loss(const Vec& x, const Vec& ref);

/// x - ref, the exact gradient of mse_loss in its first argument.
Signal loss_gradient(const Signal& x, const Signal& ref);

/// 10 log10(peak^2 n / ||x - ref||^2). Identical inputs return +infinity.
double psnr(const Signal& x, const Signal& ref, double peak = 1.0);
double psnr(const Vec& x, const Vec& ref, double peak = 1.0);

/// d theta / d log(theta) = theta for the packed wavelet weights
/// [lambda_1..lambda_J, Lambda...].
Vec reparam_chain_factor(const HyperParams& p);

/// Same factor for an arbitrary log-parameter vector.
inline Vec reparam_chain_factor(const Vec& log_theta) { return log_theta.array().exp(); }

}  // namespace retune
