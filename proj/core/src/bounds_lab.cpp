#include "retune/bounds_lab.hpp"

#include "retune/random.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace retune {

namespace {

double spectral_norm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues()[0];
}

SchemeSpec with_T(const SchemeSpec& spec, int T) {
  SchemeSpec out = spec;
  out.T = T;
  return out;
}

}  // namespace

MatrixBoundCheck lemma_a1_check(const Mat& H) {
  if (H.rows() != H.cols()) throw std::invalid_argument("lemma_a1_check: H must be square");
  MatrixBoundCheck r;
  r.omega = spectral_norm(H);
  if (!(r.omega < 1.0)) throw std::domain_error("lemma_a1_check: ||H||_2 must be < 1");
  const Mat I = Mat::Identity(H.rows(), H.cols());
  const Mat inv = Eigen::FullPivLU<Mat>(I - H).inverse();
  r.lhs = spectral_norm(I - inv);
  r.bound = r.omega / (1.0 - r.omega);
  return r;
}

Lemma1Check lemma1_bound(const SchemeSpec& spec, const Vec& s, const Vec& xbar, const Vec& x_hat) {
  Lemma1Check c;
  const Hypergradient g = g_deq_exact(spec, s, xbar, x_hat);
  const Hypergradient gjf = g_jfb(spec, s, xbar, x_hat);
  c.err = to_theta_space(g.implicit - gjf.implicit, s).norm();
  c.delta_K = certificate(spec, s).delta_K;
  c.grad_norm = outer_loss_grad(*spec.step, x_hat, s, xbar).wrt_x.norm();
  c.sens_norm = sensitivity_norm(spec, x_hat, s);
  c.bound = c.delta_K / (1.0 - c.delta_K) * c.grad_norm * c.sens_norm;
  return c;
}

double estimate_L_theta(const SchemeSpec& spec, const Vec& s, const Vec& x_hat,
                        const LThetaOptions& opt) {
  if (!(opt.radius > 0.0)) throw std::invalid_argument("estimate_L_theta: radius must be positive");
  const int n = spec.step->state_size();
  Rng rng(opt.seed);
  std::vector<Vec> dirs;
  for (int i = 0; i < opt.samples; ++i) {
    Vec d(n);
    for (int k = 0; k < n; ++k) d[k] = rng.normal();
    dirs.push_back(d.normalized());
  }
  const Mat M0 = theta_jacobian(spec, x_hat, s, ParamSpace::Theta);
  double best = 0.0;
  for (int m = opt.min_exponent; std::ldexp(1.0, m) <= opt.radius; ++m) {
    const double r = std::ldexp(1.0, m);
    for (const Vec& d : dirs) {
      const Mat M = theta_jacobian(spec, x_hat + r * d, s, ParamSpace::Theta);
      best = std::max(best, spectral_norm(M - M0) / r);
    }
  }
  return best;
}

double corollary_bound(const SchemeSpec& spec, const Vec& s, const Vec& xbar, const Vec& x0,
                       const Vec& x_hat, int T, double L_theta) {
  const double delta = certificate(spec, s).delta_K;
  const double grad = outer_loss_grad(*spec.step, x_hat, s, xbar).wrt_x.norm();
  const double gain = spec.step->readout_gain(s);
  const RestartResult r = restart_T(with_T(spec, T), x0, s);
  const double s_hat = sensitivity_norm(spec, x_hat, s);
  const double s_prev = sensitivity_norm(spec, r.x_prev, s);
  return delta / (1.0 - delta) * grad * s_hat +
         std::pow(delta, T) * (x0 - x_hat).norm() * (gain * gain * s_prev + L_theta * grad);
}

Theorem2Report theorem2_report(const SchemeSpec& spec, const Vec& s, const Vec& xbar,
                               const Vec& x0, const Vec& x_hat, const std::vector<int>& Ts,
                               const LThetaOptions& opt) {
  Theorem2Report rep;
  const StepOperator& step = *spec.step;
  rep.delta_K = certificate(spec, s).delta_K;
  rep.dist0 = (x_hat - x0).norm();
  LThetaOptions o = opt;
  if (!(o.radius > 0.0)) o.radius = 0.1 * rep.dist0;
  rep.radius = o.radius;
  rep.samples = o.samples;
  rep.L_theta = o.radius > 0.0 ? estimate_L_theta(spec, s, x_hat, o) : 0.0;

  const Vec g = to_theta_space(g_deq_exact(spec, s, xbar, x_hat).implicit, s);
  const Vec gjf = to_theta_space(g_jfb(spec, s, xbar, x_hat).implicit, s);
  const Vec dl_hat = outer_loss_grad(step, x_hat, s, xbar).wrt_x;
  const double grad = dl_hat.norm();
  const double gain = step.readout_gain(s);
  const double hess = gain * gain;
  const double s_hat = sensitivity_norm(spec, x_hat, s);
  const double d = rep.delta_K;
  const double term1 = d / (1.0 - d) * grad * s_hat;

  for (int T : Ts) {
    const SchemeSpec spT = with_T(spec, T);
    const RestartResult r = restart_T(spT, x0, s);
    const Vec gr = to_theta_space(g_retune(spT, s, xbar, x0).implicit, s);
    const double s_prev = sensitivity_norm(spec, r.x_prev, s);
    const double dT = std::pow(d, T);

    // The readout is linear in the state, so the loss Hessian acts as R^T R.
    const Vec e = r.x_last - x_hat;
    const Vec hess_e = step.readout_vjp(x_hat, s, step.readout(e, s)).wrt_x;
    const Vec remainder = outer_loss_grad(step, r.x_last, s, xbar).wrt_x - dl_hat - hess_e;

    // Part of the Jacobian mismatch at x_{K(T-1)} that the sampled L_theta term misses.
    const auto traj_hat = unroll_K(spec, x_hat, s);
    const auto traj_prev = unroll_K(spec, r.x_prev, s);
    const Vec jac_diff = to_theta_space(block_vjp(step, traj_prev, s, dl_hat).wrt_theta -
                                            block_vjp(step, traj_hat, s, dl_hat).wrt_theta,
                                        s);

    Theorem2Row row;
    row.T = T;
    row.err = (g - gr).norm();
    row.err_jf_r = (gjf - gr).norm();
    row.term1 = term1;
    row.term2 = dT * rep.L_theta * rep.dist0 * grad;
    row.term3 = dT * rep.dist0 * hess * s_prev;
    row.term4 = remainder.norm() * s_prev;
    row.jacobian_excess = std::max(0.0, jac_diff.norm() - dT * rep.L_theta * rep.dist0 * grad);
    row.bound = row.term1 + row.term2 + row.term3;
    row.corollary = term1 + dT * rep.dist0 * (hess * s_prev + rep.L_theta * grad);
    row.residual = row.term4 + row.jacobian_excess;
    row.asymptotic = row.residual < 0.1 * row.bound;
    rep.rows.push_back(row);
  }
  return rep;
}

RateFit rate_fit(const std::vector<double>& errors, const std::vector<double>& xs) {
  if (errors.size() != xs.size()) throw std::invalid_argument("rate_fit: length mismatch");
  if (errors.size() < 4) throw std::invalid_argument("rate_fit: need at least 4 points");
  const double n = static_cast<double>(errors.size());
  double mx = 0.0, my = 0.0;
  std::vector<double> ys;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i])) {
      throw std::invalid_argument("rate_fit: errors must be positive and finite");
    }
    ys.push_back(std::log(errors[i]));
    mx += xs[i];
    my += ys.back();
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("rate_fit: abscissae are constant");
  if (syy == 0.0) throw std::invalid_argument("rate_fit: series is constant");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double e = ys[i] - (f.intercept + f.slope * xs[i]);
    ss_res += e * e;
  }
  f.r2 = 1.0 - ss_res / syy;
  return f;
}

HypergradReport hypergrad_report(const SchemeSpec& spec, const Vec& s, const Vec& xbar,
                                 const Vec& x0, int P, const LThetaOptions& opt,
                                 double solve_tol) {
  HypergradReport rep;
  rep.P = P;
  const Vec x_hat = fixed_point_solve(spec, s, x0, solve_tol).x;
  rep.g_deq = g_deq_exact(spec, s, xbar, x_hat);
  rep.g_neumann = g_neumann(spec, s, xbar, x_hat, P);
  rep.g_jfb = g_jfb(spec, s, xbar, x_hat);
  rep.g_trunc = g_trunc(spec, s, xbar, x0);
  rep.g_retune = g_retune(spec, s, xbar, x0);
  rep.theta_deq = rep.g_deq.theta_space(s);
  rep.theta_neumann = rep.g_neumann.theta_space(s);
  rep.theta_jfb = rep.g_jfb.theta_space(s);
  rep.theta_trunc = rep.g_trunc.theta_space(s);
  rep.theta_retune = rep.g_retune.theta_space(s);
  const Vec g = rep.g_deq.implicit_theta(s);
  rep.err_jfb = (g - rep.g_jfb.implicit_theta(s)).norm();
  rep.err_retune = (g - rep.g_retune.implicit_theta(s)).norm();
  rep.err_neumann = (g - rep.g_neumann.implicit_theta(s)).norm();
  rep.bound_lemma1 = lemma1_bound(spec, s, xbar, x_hat).bound;
  const Theorem2Report t2 = theorem2_report(spec, s, xbar, x0, x_hat, {spec.T}, opt);
  rep.bound_theorem2 = t2.rows.front().bound;
  return rep;
}

}  // namespace retune
