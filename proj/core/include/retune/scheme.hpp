#pragma once

#include "retune/core.hpp"

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

namespace retune {

/// Adjoint pair produced by pulling a cotangent back through a map.
/// wrt_theta is expressed in the log parameterization.
struct Cotangent {
  Vec wrt_x;
  Vec wrt_theta;
};

/// Strong convexity and smoothness constants of the data term together with
/// the stepsize in use; they determine the per-step Lipschitz factor.
struct Curvature {
  double mu = 0.0;
  double L = 0.0;
  double tau = 0.0;
};

/// An elementary step x -> phi(x, theta) with theta = exp(s), together with
/// its derivatives. Implementations bind the observation they act on.
class StepOperator {
 public:
  virtual ~StepOperator() = default;

  virtual int state_size() const = 0;
  virtual int param_size() const = 0;

  virtual Vec apply(const Vec& x, const Vec& s) const = 0;
  /// (v^T d_x phi, v^T d_s phi) at (x, s).
  virtual Cotangent vjp(const Vec& x, const Vec& s, const Vec& v) const = 0;
  /// d_x phi dx + d_s phi ds at (x, s).
  virtual Vec jvp(const Vec& x, const Vec& s, const Vec& dx, const Vec& ds) const = 0;

  virtual Curvature curvature(const Vec& s) const = 0;
  virtual Vec initial_state(const Vec& s) const = 0;

  /// Image-space estimate read from a state. Identity unless overridden.
  virtual Vec readout(const Vec& x, const Vec& /*s*/) const { return x; }
  virtual Cotangent readout_vjp(const Vec& /*x*/, const Vec& s, const Vec& v) const {
    return {v, Vec::Zero(s.size())};
  }
  /// Spectral norm of d readout / dx (so the MSE Hessian in state space has norm gain^2).
  virtual double readout_gain(const Vec& /*s*/) const { return 1.0; }
  /// Distance from the step's nondifferentiable set; infinity for smooth steps.
  virtual double kink_margin(const Vec& /*x*/, const Vec& /*s*/) const {
    return std::numeric_limits<double>::infinity();
  }
};

using StepPtr = std::shared_ptr<const StepOperator>;

/// K elementary steps per block, T restarted blocks.
struct SchemeSpec {
  StepPtr step;
  int K = 1;
  int T = 1;

  void validate() const;
};

struct LipschitzCert {
  double mu = 0.0;
  double L = 0.0;
  double omega = 1.0;
  double delta_K = 1.0;

  bool contractive() const { return delta_K < 1.0; }
};

/// max{|1 - tau mu|, |1 - tau L|}. Throws std::domain_error unless 0 < tau < 2/L.
double lipschitz_omega(double tau, double mu, double L);
/// Same formula without the range check.
double omega_value(double tau, double mu, double L);

/// 2 / (mu + L).
double optimal_tau(double mu, double L);

LipschitzCert certificate(const SchemeSpec& spec, const Vec& s);

/// States x_0 .. x_K of one block.
std::vector<Vec> unroll_K(const SchemeSpec& spec, const Vec& x0, const Vec& s);
Vec apply_block(const SchemeSpec& spec, const Vec& x0, const Vec& s);

struct RestartResult {
  Vec x_prev;  // x_{K(T-1)}
  Vec x_last;  // x_{KT}
};

/// T successive blocks from x0.
RestartResult restart_T(const SchemeSpec& spec, const Vec& x0, const Vec& s);
/// All block boundary states x_0, x_K, ..., x_{KT}.
std::vector<Vec> restart_path(const SchemeSpec& spec, const Vec& x0, const Vec& s);

struct FixedPointResult {
  Vec x;
  long steps = 0;
  double last_increment = 0.0;
};

/// Banach-Picard iteration of the block until the a posteriori estimate
/// guarantees ||x - x_hat|| <= tol. Throws std::domain_error without a
/// contraction certificate and std::runtime_error past max_steps elementary steps.
FixedPointResult fixed_point_solve(const SchemeSpec& spec, const Vec& s, double tol = 1e-10,
                                   long max_steps = 1000000);
FixedPointResult fixed_point_solve(const SchemeSpec& spec, const Vec& s, const Vec& x0,
                                   double tol, long max_steps = 1000000);

/// Largest ||Phi_K(a) - Phi_K(b)|| / ||a - b|| over seeded pairs a, b drawn
/// around `center` with Gaussian perturbations of size `scale`.
double sampled_lipschitz(const SchemeSpec& spec, const Vec& s, const Vec& center, int pairs,
                         std::uint64_t seed, double scale = 1.0);

/// Uncertified Picard iteration stopped on ||x_{t+1} - x_t|| <= tol.
FixedPointResult picard_solve(const SchemeSpec& spec, const Vec& s, const Vec& x0, double tol,
                              long max_steps = 1000000);

}  // namespace retune
