#include "retune/hypergrad.hpp"

#include <Eigen/LU>

#include <stdexcept>

namespace retune {

double outer_loss(const StepOperator& step, const Vec& x, const Vec& s, const Vec& xbar) {
  return 0.5 * (step.readout(x, s) - xbar).squaredNorm();
}

Cotangent outer_loss_grad(const StepOperator& step, const Vec& x, const Vec& s, const Vec& xbar) {
  return step.readout_vjp(x, s, step.readout(x, s) - xbar);
}

namespace {

Hypergradient pull_back(const SchemeSpec& spec, const Vec& s, const Vec& at, const Vec& v,
                        const Vec& direct) {
  const auto traj = unroll_K(spec, at, s);
  return {block_vjp(*spec.step, traj, s, v).wrt_theta, direct};
}

}  // namespace

Hypergradient g_deq_exact(const SchemeSpec& spec, const Vec& s, const Vec& xbar, const Vec& x_hat) {
  const Mat J = dense_state_jacobian(spec, x_hat, s);
  const Cotangent dl = outer_loss_grad(*spec.step, x_hat, s, xbar);
  const Mat A = Mat::Identity(J.rows(), J.cols()) - J.transpose();
  Eigen::FullPivLU<Mat> lu(A);
  if (!lu.isInvertible()) throw std::runtime_error("g_deq_exact: I - J is singular");
  const Vec w = lu.solve(dl.wrt_x);
  return pull_back(spec, s, x_hat, w, dl.wrt_theta);
}

Hypergradient g_deq_exact(const SchemeSpec& spec, const Vec& s, const Vec& xbar) {
  return g_deq_exact(spec, s, xbar, fixed_point_solve(spec, s, 1e-12).x);
}

Hypergradient g_neumann(const SchemeSpec& spec, const Vec& s, const Vec& xbar, const Vec& x_hat,
                        int P) {
  if (P < 0) throw std::invalid_argument("g_neumann: order must be >= 0");
  const auto traj = unroll_K(spec, x_hat, s);
  const Cotangent dl = outer_loss_grad(*spec.step, x_hat, s, xbar);
  Vec term = dl.wrt_x;
  Vec v = dl.wrt_x;
  for (int p = 1; p <= P; ++p) {
    term = block_vjp(*spec.step, traj, s, term).wrt_x;
    v += term;
  }
  return {block_vjp(*spec.step, traj, s, v).wrt_theta, dl.wrt_theta};
}

Hypergradient g_jfb(const SchemeSpec& spec, const Vec& s, const Vec& xbar, const Vec& x_hat) {
  const Cotangent dl = outer_loss_grad(*spec.step, x_hat, s, xbar);
  return pull_back(spec, s, x_hat, dl.wrt_x, dl.wrt_theta);
}

Hypergradient g_trunc(const SchemeSpec& spec, const Vec& s, const Vec& xbar, const Vec& x0) {
  const auto traj = unroll_K(spec, x0, s);
  const Cotangent dl = outer_loss_grad(*spec.step, traj.back(), s, xbar);
  return {block_vjp(*spec.step, traj, s, dl.wrt_x).wrt_theta, dl.wrt_theta};
}

Hypergradient g_retune(const SchemeSpec& spec, const Vec& s, const Vec& xbar, const Vec& x0) {
  const RestartResult r = restart_T(spec, x0, s);
  const auto traj = unroll_K(spec, r.x_prev, s);
  const Cotangent dl = outer_loss_grad(*spec.step, traj.back(), s, xbar);
  return {block_vjp(*spec.step, traj, s, dl.wrt_x).wrt_theta, dl.wrt_theta};
}

}  // namespace retune
