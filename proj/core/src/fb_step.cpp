#include "retune/fb_step.hpp"

#include <cmath>
#include <stdexcept>

namespace retune {

namespace {

// Extreme entries of theta_diag, computed from the parameters alone.
std::pair<double, double> theta_range(const HyperParams& p) {
  double lo = 1.0, hi = 1.0;
  for (Eigen::Index j = 0; j < p.log_lambda.size(); ++j) {
    for (Eigen::Index b = 0; b < p.log_Lambda.size(); ++b) {
      const double w = std::exp(p.log_lambda[j] + 0.5 * p.log_Lambda[b]);
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
  }
  return {lo, hi};
}

}  // namespace

Curvature wavelet_curvature(const HyperParams& p) {
  const auto [lo, hi] = theta_range(p);
  Curvature c;
  c.mu = 1.0 / (hi * hi);
  c.L = 1.0 / (lo * lo);
  c.tau = optimal_tau(c.mu, c.L);
  return c;
}

double default_tau(const HyperParams& p) { return wavelet_curvature(p).tau; }

double alternative_tau(const HyperParams& p) { return 1.95 / wavelet_curvature(p).L; }

WaveletFBStep::WaveletFBStep(WaveletLayout layout, PriorKind kind, const Vec& y, double tau)
    : layout_(layout),
      kind_(kind),
      groups_(group_structure(layout, kind)),
      y_(y),
      dy_(dwt2(y, layout)),
      tau_(tau),
      param_size_(layout.levels() + band_weight_count(kind, layout.channels())) {
  if (!(tau > 0.0)) throw std::invalid_argument("WaveletFBStep: stepsize must be positive");
  const int C = layout.channels();
  level_of_.assign(layout.size(), -1);
  weight_of_.assign(layout.size(), -1);
  for (int j = 1; j <= layout.levels(); ++j) {
    const std::size_t bs = layout.band_size(j);
    for (Band b : {Band::H, Band::V, Band::D}) {
      for (int c = 0; c < C; ++c) {
        const std::size_t off = layout.band_offset(j, b, c);
        const int wi = band_weight_index(kind, b, c, C);
        for (std::size_t k = 0; k < bs; ++k) {
          level_of_[off + k] = j - 1;
          weight_of_[off + k] = wi;
        }
      }
    }
  }
}

std::shared_ptr<WaveletFBStep> WaveletFBStep::with_default_tau(WaveletLayout layout,
                                                               PriorKind kind, const Vec& y,
                                                               const Vec& s) {
  const HyperParams p = unpack_weights(s, layout.levels(), layout.channels(), kind);
  return std::make_shared<WaveletFBStep>(layout, kind, y, default_tau(p));
}

Vec WaveletFBStep::theta(const Vec& s) const {
  if (s.size() != param_size_) throw std::invalid_argument("WaveletFBStep: parameter length mismatch");
  Vec th = Vec::Ones(state_size());
  const Eigen::Index J = layout_.levels();
  for (Eigen::Index i = 0; i < th.size(); ++i) {
    if (level_of_[i] >= 0) th[i] = std::exp(s[level_of_[i]] + 0.5 * s[J + weight_of_[i]]);
  }
  return th;
}

Vec WaveletFBStep::pre_prox(const Vec& u, const Vec& th) const {
  return u - tau_ * (u.cwiseQuotient(th.cwiseProduct(th)) - dy_.cwiseQuotient(th));
}

Vec WaveletFBStep::reduce_to_params(const Vec& per_coeff) const {
  Vec g = Vec::Zero(param_size_);
  const Eigen::Index J = layout_.levels();
  for (Eigen::Index i = 0; i < per_coeff.size(); ++i) {
    if (level_of_[i] < 0) continue;
    g[level_of_[i]] += per_coeff[i];
    g[J + weight_of_[i]] += 0.5 * per_coeff[i];
  }
  return g;
}

Vec WaveletFBStep::expand_params(const Vec& ds) const {
  Vec d = Vec::Zero(state_size());
  const Eigen::Index J = layout_.levels();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (level_of_[i] >= 0) d[i] = ds[level_of_[i]] + 0.5 * ds[J + weight_of_[i]];
  }
  return d;
}

Vec WaveletFBStep::apply(const Vec& u, const Vec& s) const {
  return prox_group_l21(pre_prox(u, theta(s)), tau_, *groups_);
}

Cotangent WaveletFBStep::vjp(const Vec& u, const Vec& s, const Vec& v) const {
  const Vec th = theta(s);
  const Vec inv2 = th.cwiseProduct(th).cwiseInverse();
  const Vec w = prox_vjp(pre_prox(u, th), tau_, v, *groups_);
  Cotangent out;
  out.wrt_x = w - tau_ * inv2.cwiseProduct(w);
  // d z_c / d log theta_c = tau (2 u_c / theta_c^2 - d_c / theta_c)
  const Vec dz = tau_ * (2.0 * u.cwiseProduct(inv2) - dy_.cwiseQuotient(th));
  out.wrt_theta = reduce_to_params(w.cwiseProduct(dz));
  return out;
}

Vec WaveletFBStep::jvp(const Vec& u, const Vec& s, const Vec& du, const Vec& ds) const {
  const Vec th = theta(s);
  const Vec inv2 = th.cwiseProduct(th).cwiseInverse();
  const Vec dz_dlog = tau_ * (2.0 * u.cwiseProduct(inv2) - dy_.cwiseQuotient(th));
  const Vec dz = du - tau_ * inv2.cwiseProduct(du) + dz_dlog.cwiseProduct(expand_params(ds));
  return prox_vjp(pre_prox(u, th), tau_, dz, *groups_);
}

Curvature WaveletFBStep::curvature(const Vec& s) const {
  const Vec th = theta(s);
  Curvature c;
  c.mu = 1.0 / (th.maxCoeff() * th.maxCoeff());
  c.L = 1.0 / (th.minCoeff() * th.minCoeff());
  c.tau = tau_;
  return c;
}

Vec WaveletFBStep::initial_state(const Vec& /*s*/) const { return dy_; }

Vec WaveletFBStep::readout(const Vec& u, const Vec& s) const {
  return idwt2(u.cwiseQuotient(theta(s)), layout_);
}

Cotangent WaveletFBStep::readout_vjp(const Vec& u, const Vec& s, const Vec& v) const {
  const Vec th = theta(s);
  const Vec dv = dwt2(v, layout_);
  Cotangent out;
  out.wrt_x = dv.cwiseQuotient(th);
  // d (u_c / theta_c) / d log theta_c = -u_c / theta_c
  out.wrt_theta = reduce_to_params(-dv.cwiseProduct(u).cwiseQuotient(th));
  return out;
}

double WaveletFBStep::readout_gain(const Vec& s) const { return 1.0 / theta(s).minCoeff(); }

double WaveletFBStep::kink_margin(const Vec& u, const Vec& s) const {
  return kink_distance(pre_prox(u, theta(s)), tau_, *groups_);
}

double WaveletFBStep::energy(const Vec& u, const Vec& s) const {
  const Vec r = readout(u, s) - y_;
  return 0.5 * r.squaredNorm() + group_norm(u, *groups_);
}

WaveletCoeffs fb_step(const WaveletCoeffs& u, const HyperParams& p, const Signal& y, double tau) {
  if (!(u.layout.shape() == y.shape())) throw std::invalid_argument("fb_step: shape mismatch");
  const Vec s = pack_weights(p);
  WaveletFBStep step(u.layout, p.prior_kind, y.data(), tau);
  const Curvature c = step.curvature(s);
  lipschitz_omega(step.tau(), c.mu, c.L);  // range check
  return {u.layout, step.apply(u.data, s)};
}

WaveletCoeffs fb_step(const WaveletCoeffs& u, const HyperParams& p, const Signal& y) {
  return fb_step(u, p, y, default_tau(p));
}

}  // namespace retune
