#include "retune/core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace retune {

Signal::Signal(Shape shape) : shape_(shape), data_(Vec::Zero(static_cast<Eigen::Index>(shape.size()))) {}

Signal::Signal(Shape shape, Vec data) : shape_(shape), data_(std::move(data)) {
  if (static_cast<std::size_t>(data_.size()) != shape_.size()) {
    throw std::invalid_argument("Signal: data length " + std::to_string(data_.size()) +
                                " does not match shape size " + std::to_string(shape_.size()));
  }
  for (Eigen::Index i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) throw std::invalid_argument("Signal: non-finite entry");
  }
}

int band_weight_count(PriorKind kind, int channels) {
  return kind == PriorKind::Bands ? 3 : 3 * channels;
}

double HyperParams::tau() const { return std::exp(log_tau); }
double HyperParams::sigma() const { return std::exp(log_sigma); }

HyperParams HyperParams::uniform(int levels, int channels, PriorKind kind, double lambda,
                                 double Lambda) {
  HyperParams p;
  p.prior_kind = kind;
  p.log_lambda = Vec::Constant(levels, std::log(lambda));
  p.log_Lambda = Vec::Constant(band_weight_count(kind, channels), std::log(Lambda));
  return p;
}

void Dataset::validate() const {
  if (pairs.empty()) return;
  const Shape ref = pairs.front().clean.shape();
  for (const auto& s : pairs) {
    if (!(s.clean.shape() == ref) || !(s.observed.shape() == ref)) {
      throw std::invalid_argument("Dataset: pairs do not share one shape");
    }
  }
}

namespace {

void require_same_size(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

double squared_distance(const Vec& x, const Vec& ref) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = x[i] - ref[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

double mse_loss(const Vec& x, const Vec& ref) {
  require_same_size(x, ref, "mse_loss");
  return 0.5 * squared_distance(x, ref);
}

double mse_loss(const Signal& x, const Signal& ref) {
  if (!(x.shape() == ref.shape())) throw std::invalid_argument("mse_loss: shape mismatch");
  return mse_loss(x.data(), ref.data());
}

Signal loss_gradient(const Signal& x, const Signal& ref) {
  if (!(x.shape() == ref.shape())) throw std::invalid_argument("loss_gradient: shape mismatch");
  return Signal(x.shape(), x.data() - ref.data());
}

double psnr(const Vec& x, const Vec& ref, double peak) {
  require_same_size(x, ref, "psnr");
  const double err = squared_distance(x, ref);
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak * static_cast<double>(x.size()) / err);
}

double psnr(const Signal& x, const Signal& ref, double peak) {
  if (!(x.shape() == ref.shape())) throw std::invalid_argument("psnr: shape mismatch");
  return psnr(x.data(), ref.data(), peak);
}

Vec reparam_chain_factor(const HyperParams& p) {
  Vec out(p.log_lambda.size() + p.log_Lambda.size());
  out << p.log_lambda, p.log_Lambda;
  return out.array().exp();
}

}  // namespace retune
