#pragma once

#include "retune/bilevel.hpp"
#include "retune/forward_models.hpp"
#include "retune/group_norms.hpp"
#include "retune/scheme.hpp"
#include "retune/wavelet.hpp"

#include <memory>
#include <optional>

namespace retune {

struct DenoiserVjp {
  Vec wrt_x;
  double wrt_sigma = 0.0;
};

/// Image denoiser with noise level sigma and its derivatives.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Vec evaluate(const Vec& x, double sigma) const = 0;
  virtual DenoiserVjp vjp(const Vec& x, double sigma, const Vec& v) const = 0;
  virtual Vec jvp(const Vec& x, double sigma, const Vec& dx, double dsigma) const = 0;
  virtual std::optional<double> lipschitz_hint() const { return std::nullopt; }
  virtual double kink_margin(const Vec& /*x*/, double /*sigma*/) const {
    return std::numeric_limits<double>::infinity();
  }
};

/// D^T prox_{sigma ||.||_{2,1}} D with unweighted groups; sigma = 0 is the identity.
class WaveletThresholdDenoiser final : public Denoiser {
 public:
  WaveletThresholdDenoiser(WaveletLayout layout, PriorKind grouping);

  Vec evaluate(const Vec& x, double sigma) const override;
  DenoiserVjp vjp(const Vec& x, double sigma, const Vec& v) const override;
  Vec jvp(const Vec& x, double sigma, const Vec& dx, double dsigma) const override;
  std::optional<double> lipschitz_hint() const override { return 1.0; }
  double kink_margin(const Vec& x, double sigma) const override;

 private:
  WaveletLayout layout_;
  std::shared_ptr<const GroupStructure> groups_;
};

/// x -> D_sigma(x - tau A^T (A x - y)) with s = [log sigma, log tau].
class PnPStep final : public StepOperator {
 public:
  PnPStep(LinearOp A, std::shared_ptr<const Denoiser> denoiser, Vec y);

  int state_size() const override { return static_cast<int>(y_.size()); }
  int param_size() const override { return 2; }
  Vec apply(const Vec& x, const Vec& s) const override;
  Cotangent vjp(const Vec& x, const Vec& s, const Vec& v) const override;
  Vec jvp(const Vec& x, const Vec& s, const Vec& dx, const Vec& ds) const override;
  /// Extreme eigenvalues of A^T A; with a nonexpansive denoiser they bound the step.
  Curvature curvature(const Vec& s) const override;
  /// x_0 = A^T y.
  Vec initial_state(const Vec& s) const override;
  double kink_margin(const Vec& x, const Vec& s) const override;

 private:
  Vec gradient_step(const Vec& x, double tau) const;

  LinearOp A_;
  std::shared_ptr<const Denoiser> denoiser_;
  Vec y_;
  GramBounds gram_;
};

Vec pack_sigma_tau(double sigma, double tau);

/// One PnP step with sigma, tau taken from p.
Signal pnp_step(const Signal& x, const HyperParams& p, const Signal& y, const LinearOp& A,
                const Denoiser& D);

/// Trains theta = (sigma, tau) with the restarted scheme. Each observation
/// uses the same operator A (a mask, blur or the identity).
TrainResult learn_sigma_tau(const TrainConfig& cfg, const Dataset& train, const Dataset& test,
                            const LinearOp& A, std::shared_ptr<const Denoiser> D, double sigma0,
                            double tau0);

}  // namespace retune
