#include "retune/models.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace retune {

ScalarStep::ScalarStep(double y, double tau, double x0) : y_(y), tau_(tau), x0_(x0) {
  if (!(tau > 0.0)) throw std::invalid_argument("ScalarStep: stepsize must be positive");
}

Vec ScalarStep::apply(const Vec& x, const Vec& s) const {
  Vec out(1);
  out[0] = (1.0 - tau_) * x[0] + tau_ * std::exp(s[0]) * y_;
  return out;
}

Cotangent ScalarStep::vjp(const Vec& /*x*/, const Vec& s, const Vec& v) const {
  Cotangent c{Vec(1), Vec(1)};
  c.wrt_x[0] = (1.0 - tau_) * v[0];
  c.wrt_theta[0] = tau_ * y_ * v[0] * std::exp(s[0]);
  return c;
}

Vec ScalarStep::jvp(const Vec& /*x*/, const Vec& s, const Vec& dx, const Vec& ds) const {
  Vec out(1);
  out[0] = (1.0 - tau_) * dx[0] + tau_ * y_ * std::exp(s[0]) * ds[0];
  return out;
}

Curvature ScalarStep::curvature(const Vec& /*s*/) const { return {1.0, 1.0, tau_}; }

Vec ScalarStep::initial_state(const Vec& /*s*/) const { return Vec::Constant(1, x0_); }

QuadraticStep::QuadraticStep(Mat H0, std::vector<Mat> G, Vec b, double tau, Vec x0)
    : H0_(std::move(H0)), G_(std::move(G)), b_(std::move(b)), tau_(tau), x0_(std::move(x0)) {
  const Eigen::Index n = b_.size();
  if (H0_.rows() != n || H0_.cols() != n) throw std::invalid_argument("QuadraticStep: H0 shape");
  for (const Mat& g : G_) {
    if (g.rows() != n || g.cols() != n) throw std::invalid_argument("QuadraticStep: G shape");
  }
  if (x0_.size() == 0) x0_ = Vec::Zero(n);
  if (!(tau > 0.0)) throw std::invalid_argument("QuadraticStep: stepsize must be positive");
}

Mat QuadraticStep::hessian(const Vec& s) const {
  Mat H = H0_;
  for (std::size_t i = 0; i < G_.size(); ++i) H += std::exp(s[static_cast<Eigen::Index>(i)]) * G_[i];
  return H;
}

Vec QuadraticStep::apply(const Vec& x, const Vec& s) const {
  return x - tau_ * (hessian(s) * x - b_);
}

Cotangent QuadraticStep::vjp(const Vec& x, const Vec& s, const Vec& v) const {
  Cotangent c;
  c.wrt_x = v - tau_ * (hessian(s).transpose() * v);
  c.wrt_theta.resize(param_size());
  for (int i = 0; i < param_size(); ++i) {
    c.wrt_theta[i] = -tau_ * v.dot(G_[i] * x) * std::exp(s[i]);
  }
  return c;
}

Vec QuadraticStep::jvp(const Vec& x, const Vec& s, const Vec& dx, const Vec& ds) const {
  Vec out = dx - tau_ * (hessian(s) * dx);
  for (int i = 0; i < param_size(); ++i) out -= tau_ * std::exp(s[i]) * ds[i] * (G_[i] * x);
  return out;
}

Curvature QuadraticStep::curvature(const Vec& s) const {
  Eigen::SelfAdjointEigenSolver<Mat> es(hessian(s), Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff(), tau_};
}

Vec QuadraticStep::initial_state(const Vec& /*s*/) const { return x0_; }

StepsizeQuadraticStep::StepsizeQuadraticStep(Mat H, Vec b, Vec x0)
    : H_(std::move(H)), b_(std::move(b)), x0_(std::move(x0)) {
  if (H_.rows() != b_.size() || H_.cols() != b_.size()) {
    throw std::invalid_argument("StepsizeQuadraticStep: H shape");
  }
  if (x0_.size() == 0) x0_ = Vec::Zero(b_.size());
}

Vec StepsizeQuadraticStep::apply(const Vec& x, const Vec& s) const {
  return x - std::exp(s[0]) * (H_ * x - b_);
}

Cotangent StepsizeQuadraticStep::vjp(const Vec& x, const Vec& s, const Vec& v) const {
  const double th = std::exp(s[0]);
  Cotangent c{v - th * (H_.transpose() * v), Vec(1)};
  c.wrt_theta[0] = -v.dot(H_ * x - b_) * th;
  return c;
}

Vec StepsizeQuadraticStep::jvp(const Vec& x, const Vec& s, const Vec& dx, const Vec& ds) const {
  const double th = std::exp(s[0]);
  return dx - th * (H_ * dx) - th * ds[0] * (H_ * x - b_);
}

Curvature StepsizeQuadraticStep::curvature(const Vec& s) const {
  Eigen::SelfAdjointEigenSolver<Mat> es(H_, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff(), std::exp(s[0])};
}

Vec StepsizeQuadraticStep::initial_state(const Vec& /*s*/) const { return x0_; }

}  // namespace retune
