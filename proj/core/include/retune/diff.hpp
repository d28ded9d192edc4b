#pragma once

#include "retune/scheme.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace retune {

/// (v^T d_x phi, v^T d_s phi) for one elementary step.
Cotangent step_vjp(const StepOperator& step, const Vec& x, const Vec& s, const Vec& v);

/// Reverse sweep over a stored block trajectory x_0..x_K: returns
/// (v^T d_x Phi_K(x_0), v^T d_s Phi_K(x_0)).
Cotangent block_vjp(const StepOperator& step, const std::vector<Vec>& trajectory, const Vec& s,
                    const Vec& v);

/// Forward sweep: d Phi_K(x_0) applied to (dx, ds).
Vec block_jvp(const StepOperator& step, const std::vector<Vec>& trajectory, const Vec& s,
              const Vec& dx, const Vec& ds);

/// d_x Phi_K(x) as an n x n matrix, one VJP per row. Throws std::length_error for n > 512.
Mat dense_state_jacobian(const SchemeSpec& spec, const Vec& x, const Vec& s);

enum class ParamSpace { Log, Theta };

/// d_theta Phi_K(x) as an n x d matrix, one JVP per column.
Mat theta_jacobian(const SchemeSpec& spec, const Vec& x, const Vec& s,
                   ParamSpace space = ParamSpace::Theta);

/// Spectral norm of d_theta Phi_K(x) (theta space). Uses the dense build when
/// n * d <= 65536 and power iteration otherwise.
double sensitivity_norm(const SchemeSpec& spec, const Vec& x, const Vec& s);

struct PowerIterationOptions {
  int iterations = 20;
  double tol = 1e-6;
  std::uint64_t seed = 7;
};

/// Largest singular value of d_theta Phi_K(x) by power iteration on the VJP/JVP pair.
double sensitivity_norm_power(const SchemeSpec& spec, const Vec& x, const Vec& s,
                              const PowerIterationOptions& opt = {});

/// Log-space gradient to theta space: divides by theta = exp(s).
Vec to_theta_space(const Vec& g_log, const Vec& s);

/// Central differences (F(s + h e_i) - F(s - h e_i)) / 2h.
Vec fd_gradient(const std::function<double(const Vec&)>& F, const Vec& s, double h = 1e-6);

/// Central-difference hypergradient of s -> 1/2 ||readout(x_hat_s) - xbar||^2
/// with x_hat from fixed_point_solve at tol 1e-12.
Vec fd_hypergrad(const SchemeSpec& spec, const Vec& s, const Vec& xbar, double h = 1e-6);

}  // namespace retune
