#pragma once

#include "retune/core.hpp"
#include "retune/group_norms.hpp"
#include "retune/scheme.hpp"
#include "retune/wavelet.hpp"

namespace retune {

/// Forward-backward step on weighted wavelet coefficients u = theta * D x:
///
///   phi(u) = prox_{tau ||.||_{2,1}}(u - tau (theta^-2 u - theta^-1 D y))
///
/// The parameter vector is s = [log lambda_1..J, log Lambda...]. The
/// stepsize is fixed when the operator is built, so derivatives treat it as
/// a constant.
class WaveletFBStep final : public StepOperator {
 public:
  WaveletFBStep(WaveletLayout layout, PriorKind kind, const Vec& y, double tau);
  /// Binds tau = default_tau at s.
  static std::shared_ptr<WaveletFBStep> with_default_tau(WaveletLayout layout, PriorKind kind,
                                                         const Vec& y, const Vec& s);

  int state_size() const override { return static_cast<int>(layout_.size()); }
  int param_size() const override { return param_size_; }

  Vec apply(const Vec& u, const Vec& s) const override;
  Cotangent vjp(const Vec& u, const Vec& s, const Vec& v) const override;
  Vec jvp(const Vec& u, const Vec& s, const Vec& du, const Vec& ds) const override;
  Curvature curvature(const Vec& s) const override;
  /// u_0 = D y.
  Vec initial_state(const Vec& s) const override;

  /// x = D^T theta^-1 u.
  Vec readout(const Vec& u, const Vec& s) const override;
  Cotangent readout_vjp(const Vec& u, const Vec& s, const Vec& v) const override;
  double readout_gain(const Vec& s) const override;
  double kink_margin(const Vec& u, const Vec& s) const override;

  /// 1/2 ||D^T theta^-1 u - y||^2 + ||u||_{2,1}.
  double energy(const Vec& u, const Vec& s) const;

  const WaveletLayout& layout() const { return layout_; }
  PriorKind kind() const { return kind_; }
  double tau() const { return tau_; }
  const Vec& dy() const { return dy_; }
  Vec theta(const Vec& s) const;

 private:
  Vec pre_prox(const Vec& u, const Vec& theta) const;
  // Maps per-coefficient d/d(log theta_c) contributions onto s.
  Vec reduce_to_params(const Vec& per_coeff) const;
  Vec expand_params(const Vec& ds) const;

  WaveletLayout layout_;
  PriorKind kind_;
  std::shared_ptr<const GroupStructure> groups_;
  Vec y_;
  Vec dy_;
  double tau_;
  int param_size_;
  std::vector<int> level_of_;   // 0-based level index, -1 on the approximation band
  std::vector<int> weight_of_;  // index into log_Lambda, -1 on the approximation band
};

/// tau* = 2 / (1 / max(theta)^2 + 1 / min(theta)^2), the approximation weight 1 included.
double default_tau(const HyperParams& p);
/// The alternative rule tau = 1.95 / L with L = 1 / min(theta)^2.
double alternative_tau(const HyperParams& p);
/// (mu, L) = (1 / max(theta)^2, 1 / min(theta)^2).
Curvature wavelet_curvature(const HyperParams& p);

/// One step in coefficient form with the default stepsize.
WaveletCoeffs fb_step(const WaveletCoeffs& u, const HyperParams& p, const Signal& y);
/// Same with an explicit stepsize. Throws std::domain_error unless 0 < tau < 2/L.
WaveletCoeffs fb_step(const WaveletCoeffs& u, const HyperParams& p, const Signal& y, double tau);

}  // namespace retune
