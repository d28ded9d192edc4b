#pragma once

#include "retune/diff.hpp"
#include "retune/scheme.hpp"

namespace retune {

/// A hypergradient in log space, split into the part pulled back through the
/// scheme and the part from the readout's explicit dependence on the parameters.
struct Hypergradient {
  Vec implicit;
  Vec direct;

  Vec log_space() const { return implicit + direct; }
  Vec theta_space(const Vec& s) const { return to_theta_space(log_space(), s); }
  Vec implicit_theta(const Vec& s) const { return to_theta_space(implicit, s); }
};

/// 1/2 ||readout(x) - xbar||^2.
double outer_loss(const StepOperator& step, const Vec& x, const Vec& s, const Vec& xbar);
/// Gradient of outer_loss in the state (wrt_x) and its explicit log-parameter part (wrt_theta).
Cotangent outer_loss_grad(const StepOperator& step, const Vec& x, const Vec& s, const Vec& xbar);

/// Exact implicit hypergradient at the fixed point: solves (I - J^T) w = dL
/// with J = d_x Phi_K(x_hat) by dense LU. Throws std::runtime_error if I - J is singular.
Hypergradient g_deq_exact(const SchemeSpec& spec, const Vec& s, const Vec& xbar, const Vec& x_hat);
Hypergradient g_deq_exact(const SchemeSpec& spec, const Vec& s, const Vec& xbar);

/// Neumann series of order P with repeated VJPs.
Hypergradient g_neumann(const SchemeSpec& spec, const Vec& s, const Vec& xbar, const Vec& x_hat,
                        int P);

/// Jacobian-free gradient at the fixed point.
Hypergradient g_jfb(const SchemeSpec& spec, const Vec& s, const Vec& xbar, const Vec& x_hat);

/// Full backpropagation through the K steps of one block from x0.
Hypergradient g_trunc(const SchemeSpec& spec, const Vec& s, const Vec& xbar, const Vec& x0);

/// T - 1 blocks without differentiation, then backpropagation through the last block.
Hypergradient g_retune(const SchemeSpec& spec, const Vec& s, const Vec& xbar, const Vec& x0);

/// Per-parameter values of all estimators and their errors (theta space; the
/// errors compare the implicit parts, which carry every difference between estimators).
struct HypergradReport {
  int P = 0;
  Hypergradient g_deq, g_neumann, g_jfb, g_trunc, g_retune;
  Vec theta_deq, theta_neumann, theta_jfb, theta_trunc, theta_retune;
  double err_jfb = 0.0;
  double err_retune = 0.0;
  double err_neumann = 0.0;
  double bound_lemma1 = 0.0;
  double bound_theorem2 = 0.0;
};

}  // namespace retune
