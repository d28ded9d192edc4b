#pragma once

#include "retune/scheme.hpp"

#include <vector>

namespace retune {

/// Gradient step on f(x) = (x - theta y)^2 / 2 in one dimension:
/// phi(x) = (1 - tau) x + tau theta y, with s = [log theta].
class ScalarStep final : public StepOperator {
 public:
  ScalarStep(double y, double tau, double x0 = 0.0);

  int state_size() const override { return 1; }
  int param_size() const override { return 1; }
  Vec apply(const Vec& x, const Vec& s) const override;
  Cotangent vjp(const Vec& x, const Vec& s, const Vec& v) const override;
  Vec jvp(const Vec& x, const Vec& s, const Vec& dx, const Vec& ds) const override;
  Curvature curvature(const Vec& s) const override;
  Vec initial_state(const Vec& s) const override;

 private:
  double y_, tau_, x0_;
};

/// Gradient step on the quadratic f(x) = x^T H(theta) x / 2 - b^T x with
/// H(theta) = H0 + sum_i theta_i G_i: phi(x) = x - tau (H(theta) x - b).
class QuadraticStep final : public StepOperator {
 public:
  QuadraticStep(Mat H0, std::vector<Mat> G, Vec b, double tau, Vec x0 = Vec());

  int state_size() const override { return static_cast<int>(b_.size()); }
  int param_size() const override { return static_cast<int>(G_.size()); }
  Vec apply(const Vec& x, const Vec& s) const override;
  Cotangent vjp(const Vec& x, const Vec& s, const Vec& v) const override;
  Vec jvp(const Vec& x, const Vec& s, const Vec& dx, const Vec& ds) const override;
  Curvature curvature(const Vec& s) const override;
  Vec initial_state(const Vec& s) const override;

  Mat hessian(const Vec& s) const;
  const Vec& b() const { return b_; }
  double tau() const { return tau_; }

 private:
  Mat H0_;
  std::vector<Mat> G_;
  Vec b_;
  double tau_;
  Vec x0_;
};

/// Gradient step whose stepsize is the parameter: phi(x) = x - theta (H x - b), s = [log theta].
class StepsizeQuadraticStep final : public StepOperator {
 public:
  StepsizeQuadraticStep(Mat H, Vec b, Vec x0 = Vec());

  int state_size() const override { return static_cast<int>(b_.size()); }
  int param_size() const override { return 1; }
  Vec apply(const Vec& x, const Vec& s) const override;
  Cotangent vjp(const Vec& x, const Vec& s, const Vec& v) const override;
  Vec jvp(const Vec& x, const Vec& s, const Vec& dx, const Vec& ds) const override;
  Curvature curvature(const Vec& s) const override;
  Vec initial_state(const Vec& s) const override;

  const Mat& H() const { return H_; }

 private:
  Mat H_;
  Vec b_;
  Vec x0_;
};

/// Linear map x -> x with no parameter dependence (one dummy parameter).
class IdentityStep final : public StepOperator {
 public:
  explicit IdentityStep(int n) : n_(n) {}

  int state_size() const override { return n_; }
  int param_size() const override { return 1; }
  Vec apply(const Vec& x, const Vec&) const override { return x; }
  Cotangent vjp(const Vec&, const Vec& s, const Vec& v) const override {
    return {v, Vec::Zero(s.size())};
  }
  Vec jvp(const Vec&, const Vec&, const Vec& dx, const Vec&) const override { return dx; }
  Curvature curvature(const Vec&) const override { return {0.0, 0.0, 1.0}; }
  Vec initial_state(const Vec&) const override { return Vec::Zero(n_); }

 private:
  int n_;
};

}  // namespace retune
