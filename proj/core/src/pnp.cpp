#include "retune/pnp.hpp"

#include <cmath>
#include <stdexcept>

namespace retune {

WaveletThresholdDenoiser::WaveletThresholdDenoiser(WaveletLayout layout, PriorKind grouping)
    : layout_(layout), groups_(group_structure(layout, grouping)) {}

Vec WaveletThresholdDenoiser::evaluate(const Vec& x, double sigma) const {
  if (sigma < 0.0) throw std::invalid_argument("WaveletThresholdDenoiser: sigma must be >= 0");
  if (sigma == 0.0) return x;
  return idwt2(prox_group_l21(dwt2(x, layout_), sigma, *groups_), layout_);
}

DenoiserVjp WaveletThresholdDenoiser::vjp(const Vec& x, double sigma, const Vec& v) const {
  if (sigma == 0.0) return {v, 0.0};
  const Vec w = dwt2(x, layout_);
  const Vec dv = dwt2(v, layout_);
  return {idwt2(prox_vjp(w, sigma, dv, *groups_), layout_),
          prox_threshold_vjp(w, sigma, dv, *groups_)};
}

Vec WaveletThresholdDenoiser::jvp(const Vec& x, double sigma, const Vec& dx, double dsigma) const {
  if (sigma == 0.0) return dx;
  const Vec w = dwt2(x, layout_);
  Vec out = prox_vjp(w, sigma, dwt2(dx, layout_), *groups_);
  if (dsigma != 0.0) out += dsigma * prox_threshold_derivative(w, sigma, *groups_);
  return idwt2(out, layout_);
}

double WaveletThresholdDenoiser::kink_margin(const Vec& x, double sigma) const {
  if (sigma == 0.0) return std::numeric_limits<double>::infinity();
  return kink_distance(dwt2(x, layout_), sigma, *groups_);
}

PnPStep::PnPStep(LinearOp A, std::shared_ptr<const Denoiser> denoiser, Vec y)
    : A_(std::move(A)), denoiser_(std::move(denoiser)), y_(std::move(y)), gram_(gram_bounds(A_)) {
  if (!denoiser_) throw std::invalid_argument("PnPStep: missing denoiser");
  if (static_cast<std::size_t>(y_.size()) != A_.shape().size()) {
    throw std::invalid_argument("PnPStep: observation does not match the operator shape");
  }
}

Vec PnPStep::gradient_step(const Vec& x, double tau) const {
  return x - tau * A_.adjoint(A_.apply(x) - y_);
}

Vec PnPStep::apply(const Vec& x, const Vec& s) const {
  return denoiser_->evaluate(gradient_step(x, std::exp(s[1])), std::exp(s[0]));
}

Cotangent PnPStep::vjp(const Vec& x, const Vec& s, const Vec& v) const {
  const double sigma = std::exp(s[0]), tau = std::exp(s[1]);
  const DenoiserVjp d = denoiser_->vjp(gradient_step(x, tau), sigma, v);
  Cotangent c;
  c.wrt_x = d.wrt_x - tau * A_.adjoint(A_.apply(d.wrt_x));
  c.wrt_theta.resize(2);
  c.wrt_theta[0] = d.wrt_sigma * sigma;
  c.wrt_theta[1] = -d.wrt_x.dot(A_.adjoint(A_.apply(x) - y_)) * tau;
  return c;
}

Vec PnPStep::jvp(const Vec& x, const Vec& s, const Vec& dx, const Vec& ds) const {
  const double sigma = std::exp(s[0]), tau = std::exp(s[1]);
  const Vec dz = dx - tau * A_.adjoint(A_.apply(dx)) - tau * ds[1] * A_.adjoint(A_.apply(x) - y_);
  return denoiser_->jvp(gradient_step(x, tau), sigma, dz, sigma * ds[0]);
}

Curvature PnPStep::curvature(const Vec& s) const { return {gram_.mu, gram_.L, std::exp(s[1])}; }

Vec PnPStep::initial_state(const Vec& /*s*/) const { return A_.adjoint(y_); }

double PnPStep::kink_margin(const Vec& x, const Vec& s) const {
  return denoiser_->kink_margin(gradient_step(x, std::exp(s[1])), std::exp(s[0]));
}

Vec pack_sigma_tau(double sigma, double tau) {
  Vec s(2);
  s << std::log(sigma), std::log(tau);
  return s;
}

Signal pnp_step(const Signal& x, const HyperParams& p, const Signal& y, const LinearOp& A,
                const Denoiser& D) {
  if (!(x.shape() == y.shape())) throw std::invalid_argument("pnp_step: shape mismatch");
  const Vec z = x.data() - p.tau() * A.adjoint(A.apply(x.data()) - y.data());
  return Signal(x.shape(), D.evaluate(z, p.sigma()));
}

TrainResult learn_sigma_tau(const TrainConfig& cfg, const Dataset& train, const Dataset& test,
                            const LinearOp& A, std::shared_ptr<const Denoiser> D, double sigma0,
                            double tau0) {
  TrainProblem problem;
  problem.train = train;
  problem.test = test;
  problem.make_step = [A, D](const Vec& y, const Vec&) -> StepPtr {
    return std::make_shared<PnPStep>(A, D, y);
  };
  return retune_train(cfg, problem, pack_sigma_tau(sigma0, tau0));
}

}  // namespace retune
