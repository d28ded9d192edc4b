#pragma once

#include "retune/hypergrad.hpp"
#include "retune/scheme.hpp"

#include <cstdint>
#include <vector>

namespace retune {

struct MatrixBoundCheck {
  double lhs = 0.0;    // ||I - (I - H)^-1||_2
  double bound = 0.0;  // omega / (1 - omega)
  double omega = 0.0;  // ||H||_2
  bool holds(double slack = 1e-9) const { return lhs <= bound + slack; }
};

/// Throws std::domain_error when ||H||_2 >= 1.
MatrixBoundCheck lemma_a1_check(const Mat& H);

struct Lemma1Check {
  double err = 0.0;    // ||g - g^JF||_2, theta space
  double bound = 0.0;  // delta/(1-delta) ||dL(x_hat)|| ||d_theta Phi_K(x_hat)||
  double delta_K = 0.0;
  double grad_norm = 0.0;
  double sens_norm = 0.0;
  bool holds(double slack = 1e-12) const { return err <= bound * (1.0 + slack) + slack; }
};

Lemma1Check lemma1_bound(const SchemeSpec& spec, const Vec& s, const Vec& xbar, const Vec& x_hat);

struct LThetaOptions {
  double radius = 0.0;  // <= 0 selects 0.1 ||x_hat - x0||
  int samples = 32;
  std::uint64_t seed = 11;
  int min_exponent = -24;
};

/// Largest sampled ||d_theta Phi_K(x) - d_theta Phi_K(x_hat)||_2 / ||x - x_hat||
/// over points x_hat + 2^m d with 2^m <= radius along seeded unit directions d.
/// The probe set only grows with the radius, so the estimate is monotone in it.
double estimate_L_theta(const SchemeSpec& spec, const Vec& s, const Vec& x_hat,
                        const LThetaOptions& opt);

/// One row of the restart-error table.
struct Theorem2Row {
  int T = 0;
  double err = 0.0;       // ||g - g^R||, implicit parts, theta space
  double err_jf_r = 0.0;  // ||g^JF - g^R||
  double term1 = 0.0;     // delta/(1-delta) ||dL(x_hat)|| ||d_theta Phi_K(x_hat)||
  double term2 = 0.0;     // delta^T L_theta ||x_hat - x0|| ||dL(x_hat)||
  double term3 = 0.0;     // delta^T ||x_hat - x0|| ||d_xx L|| ||d_theta Phi_K(x_{K(T-1)})||
  double term4 = 0.0;     // measured second-order remainder times ||d_theta Phi_K(x_{K(T-1)})||
  /// Measured ||(d_theta Phi_K(x_{K(T-1)}) - d_theta Phi_K(x_hat))^T dL(x_hat)|| in excess of term2.
  double jacobian_excess = 0.0;
  double residual = 0.0;  // term4 + jacobian_excess: what the first-order terms leave out
  double bound = 0.0;     // term1 + term2 + term3
  double corollary = 0.0;
  bool asymptotic = false;  // residual below 10% of bound
};

struct Theorem2Report {
  double delta_K = 0.0;
  double L_theta = 0.0;
  double radius = 0.0;
  int samples = 0;
  double dist0 = 0.0;  // ||x_hat - x0||
  std::vector<Theorem2Row> rows;
};

/// Evaluates the restart error and its bound for each T in Ts. x_hat must be
/// the fixed point of spec.
Theorem2Report theorem2_report(const SchemeSpec& spec, const Vec& s, const Vec& xbar,
                               const Vec& x0, const Vec& x_hat, const std::vector<int>& Ts,
                               const LThetaOptions& opt = {});

/// delta/(1-delta) ||dL(x_hat)|| S(x_hat) + delta^T ||x0 - x_hat|| (h^2 S(x_{K(T-1)}) + L_theta ||dL(x_hat)||),
/// where h is the readout gain. For an identity readout ||dL(x_hat)|| = ||x_hat - xbar|| and h = 1.
double corollary_bound(const SchemeSpec& spec, const Vec& s, const Vec& xbar, const Vec& x0,
                       const Vec& x_hat, int T, double L_theta);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares of log(err) against xs. Throws std::invalid_argument for fewer
/// than 4 points, non-positive errors, or a degenerate series.
RateFit rate_fit(const std::vector<double>& errors, const std::vector<double>& xs);

/// All five estimators at one parameter point, with errors and bounds filled in.
HypergradReport hypergrad_report(const SchemeSpec& spec, const Vec& s, const Vec& xbar,
                                 const Vec& x0, int P, const LThetaOptions& opt = {},
                                 double solve_tol = 1e-12);

}  // namespace retune
