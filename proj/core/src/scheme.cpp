#include "retune/scheme.hpp"

#include "retune/random.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace retune {

void SchemeSpec::validate() const {
  if (!step) throw std::invalid_argument("SchemeSpec: missing step operator");
  if (K < 1 || T < 1) throw std::invalid_argument("SchemeSpec: K and T must be >= 1");
}

double omega_value(double tau, double mu, double L) {
  return std::max(std::abs(1.0 - tau * mu), std::abs(1.0 - tau * L));
}

double lipschitz_omega(double tau, double mu, double L) {
  if (!(tau > 0.0) || !(tau < 2.0 / L)) {
    throw std::domain_error("lipschitz_omega: stepsize " + std::to_string(tau) +
                            " outside (0, 2/L)");
  }
  return omega_value(tau, mu, L);
}

double optimal_tau(double mu, double L) { return 2.0 / (mu + L); }

LipschitzCert certificate(const SchemeSpec& spec, const Vec& s) {
  spec.validate();
  const Curvature c = spec.step->curvature(s);
  LipschitzCert cert;
  cert.mu = c.mu;
  cert.L = c.L;
  cert.omega = omega_value(c.tau, c.mu, c.L);
  cert.delta_K = std::pow(cert.omega, spec.K);
  return cert;
}

std::vector<Vec> unroll_K(const SchemeSpec& spec, const Vec& x0, const Vec& s) {
  spec.validate();
  std::vector<Vec> traj;
  traj.reserve(static_cast<std::size_t>(spec.K) + 1);
  traj.push_back(x0);
  for (int k = 0; k < spec.K; ++k) traj.push_back(spec.step->apply(traj.back(), s));
  return traj;
}

Vec apply_block(const SchemeSpec& spec, const Vec& x0, const Vec& s) {
  spec.validate();
  Vec x = x0;
  for (int k = 0; k < spec.K; ++k) x = spec.step->apply(x, s);
  return x;
}

RestartResult restart_T(const SchemeSpec& spec, const Vec& x0, const Vec& s) {
  spec.validate();
  RestartResult r{x0, x0};
  for (int t = 0; t < spec.T; ++t) {
    r.x_prev = r.x_last;
    r.x_last = apply_block(spec, r.x_prev, s);
  }
  return r;
}

std::vector<Vec> restart_path(const SchemeSpec& spec, const Vec& x0, const Vec& s) {
  spec.validate();
  std::vector<Vec> path{x0};
  for (int t = 0; t < spec.T; ++t) path.push_back(apply_block(spec, path.back(), s));
  return path;
}

FixedPointResult fixed_point_solve(const SchemeSpec& spec, const Vec& s, double tol,
                                   long max_steps) {
  return fixed_point_solve(spec, s, spec.step->initial_state(s), tol, max_steps);
}

FixedPointResult fixed_point_solve(const SchemeSpec& spec, const Vec& s, const Vec& x0,
                                   double tol, long max_steps) {
  const LipschitzCert cert = certificate(spec, s);
  if (!cert.contractive()) {
    throw std::domain_error("fixed_point_solve: block is not certified contractive (delta_K = " +
                            std::to_string(cert.delta_K) + ")");
  }
  const double d = cert.delta_K;
  // ||x_{t+1} - x_hat|| <= d / (1 - d) ||x_{t+1} - x_t||
  const double stop = d > 0.0 ? tol * (1.0 - d) / d : std::numeric_limits<double>::infinity();
  FixedPointResult r{x0, 0, 0.0};
  while (true) {
    if (r.steps + spec.K > max_steps) {
      throw std::runtime_error("fixed_point_solve: iteration cap exceeded");
    }
    Vec next = apply_block(spec, r.x, s);
    r.steps += spec.K;
    r.last_increment = (next - r.x).norm();
    r.x = std::move(next);
    if (r.last_increment <= stop) return r;
  }
}

double sampled_lipschitz(const SchemeSpec& spec, const Vec& s, const Vec& center, int pairs,
                         std::uint64_t seed, double scale) {
  spec.validate();
  Rng rng(seed);
  double best = 0.0;
  for (int i = 0; i < pairs; ++i) {
    Vec a = center, b = center;
    for (Eigen::Index k = 0; k < center.size(); ++k) {
      a[k] += scale * rng.normal();
      b[k] += scale * rng.normal();
    }
    const double d = (a - b).norm();
    if (d == 0.0) continue;
    best = std::max(best, (apply_block(spec, a, s) - apply_block(spec, b, s)).norm() / d);
  }
  return best;
}

FixedPointResult picard_solve(const SchemeSpec& spec, const Vec& s, const Vec& x0, double tol,
                              long max_steps) {
  spec.validate();
  FixedPointResult r{x0, 0, 0.0};
  while (true) {
    if (r.steps + spec.K > max_steps) {
      throw std::runtime_error("picard_solve: iteration cap exceeded");
    }
    Vec next = apply_block(spec, r.x, s);
    r.steps += spec.K;
    r.last_increment = (next - r.x).norm();
    r.x = std::move(next);
    if (r.last_increment <= tol) return r;
  }
}

}  // namespace retune
