#include "retune/diff.hpp"

#include "retune/random.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace retune {

Cotangent step_vjp(const StepOperator& step, const Vec& x, const Vec& s, const Vec& v) {
  return step.vjp(x, s, v);
}

Cotangent block_vjp(const StepOperator& step, const std::vector<Vec>& trajectory, const Vec& s,
                    const Vec& v) {
  if (trajectory.size() < 2) throw std::invalid_argument("block_vjp: trajectory needs K >= 1");
  Cotangent acc{v, Vec::Zero(s.size())};
  for (std::size_t k = trajectory.size() - 1; k-- > 0;) {
    Cotangent c = step.vjp(trajectory[k], s, acc.wrt_x);
    acc.wrt_theta += c.wrt_theta;
    acc.wrt_x = std::move(c.wrt_x);
  }
  return acc;
}

Vec block_jvp(const StepOperator& step, const std::vector<Vec>& trajectory, const Vec& s,
              const Vec& dx, const Vec& ds) {
  if (trajectory.size() < 2) throw std::invalid_argument("block_jvp: trajectory needs K >= 1");
  Vec t = dx;
  for (std::size_t k = 0; k + 1 < trajectory.size(); ++k) t = step.jvp(trajectory[k], s, t, ds);
  return t;
}

Mat dense_state_jacobian(const SchemeSpec& spec, const Vec& x, const Vec& s) {
  spec.validate();
  const int n = spec.step->state_size();
  if (n > 512) throw std::length_error("dense_state_jacobian: state size exceeds 512");
  const auto traj = unroll_K(spec, x, s);
  Mat J(n, n);
  for (int i = 0; i < n; ++i) {
    J.row(i) = block_vjp(*spec.step, traj, s, Vec::Unit(n, i)).wrt_x.transpose();
  }
  return J;
}

Mat theta_jacobian(const SchemeSpec& spec, const Vec& x, const Vec& s, ParamSpace space) {
  spec.validate();
  const int n = spec.step->state_size();
  const int d = spec.step->param_size();
  const auto traj = unroll_K(spec, x, s);
  const Vec zero = Vec::Zero(n);
  Mat M(n, d);
  for (int i = 0; i < d; ++i) {
    Vec ds = Vec::Unit(d, i);
    if (space == ParamSpace::Theta) ds[i] = std::exp(-s[i]);
    M.col(i) = block_jvp(*spec.step, traj, s, zero, ds);
  }
  return M;
}

double sensitivity_norm(const SchemeSpec& spec, const Vec& x, const Vec& s) {
  const long n = spec.step->state_size();
  const long d = spec.step->param_size();
  if (n * d <= 65536) {
    const Mat M = theta_jacobian(spec, x, s, ParamSpace::Theta);
    Eigen::JacobiSVD<Mat> svd(M);
    return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  }
  return sensitivity_norm_power(spec, x, s);
}

double sensitivity_norm_power(const SchemeSpec& spec, const Vec& x, const Vec& s,
                              const PowerIterationOptions& opt) {
  spec.validate();
  const int n = spec.step->state_size();
  const int d = spec.step->param_size();
  const auto traj = unroll_K(spec, x, s);
  const Vec inv_theta = (-s).array().exp();
  const Vec zero = Vec::Zero(n);
  Rng rng(opt.seed);
  Vec w(d);
  for (int i = 0; i < d; ++i) w[i] = rng.normal();
  w.normalize();
  double sigma = 0.0;
  for (int it = 0; it < opt.iterations; ++it) {
    const Vec Mw = block_jvp(*spec.step, traj, s, zero, w.cwiseProduct(inv_theta));
    const double next = Mw.norm();
    if (next == 0.0) return 0.0;
    Vec MtMw = block_vjp(*spec.step, traj, s, Mw).wrt_theta.cwiseProduct(inv_theta);
    const double nrm = MtMw.norm();
    if (nrm == 0.0) return next;
    w = MtMw / nrm;
    if (it > 0 && std::abs(next - sigma) <= opt.tol * next) {
      sigma = next;
      break;
    }
    sigma = next;
  }
  return block_jvp(*spec.step, traj, s, zero, w.cwiseProduct(inv_theta)).norm();
}

Vec to_theta_space(const Vec& g_log, const Vec& s) {
  return g_log.cwiseProduct((-s).array().exp().matrix());
}

Vec fd_gradient(const std::function<double(const Vec&)>& F, const Vec& s, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
  Vec g(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    Vec sp = s, sm = s;
    sp[i] += h;
    sm[i] -= h;
    g[i] = (F(sp) - F(sm)) / (2.0 * h);
  }
  return g;
}

Vec fd_hypergrad(const SchemeSpec& spec, const Vec& s, const Vec& xbar, double h) {
  auto F = [&](const Vec& t) {
    const Vec xh = fixed_point_solve(spec, t, 1e-12).x;
    return 0.5 * (spec.step->readout(xh, t) - xbar).squaredNorm();
  };
  return fd_gradient(F, s, h);
}

}  // namespace retune
