#include "retune/instances.hpp"

#include "retune/data.hpp"
#include "retune/fb_step.hpp"
#include "retune/models.hpp"
#include "retune/random.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace retune {

Instance scalar_instance(int K, int T) {
  Instance inst;
  inst.spec = SchemeSpec{std::make_shared<ScalarStep>(1.0, 0.5, 0.0), K, T};
  inst.s = Vec::Constant(1, std::log(2.0));
  inst.xbar = Vec::Zero(1);
  inst.x0 = Vec::Zero(1);
  return inst;
}

Instance quadratic_instance(std::uint64_t seed, int n, int d, int K, int T) {
  Rng rng(seed);
  auto gaussian = [&rng](int r, int c) {
    Mat M(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) M(i, j) = rng.normal();
    return M;
  };
  const Mat Q = gaussian(n, n);
  const Mat H0 = Q * Q.transpose() / n + Mat::Identity(n, n);
  std::vector<Mat> G;
  for (int i = 0; i < d; ++i) {
    const Mat R = gaussian(n, 2);
    G.push_back(R * R.transpose() / n);
  }
  Vec b(n), xbar(n), s(d);
  for (int i = 0; i < n; ++i) b[i] = rng.normal();
  for (int i = 0; i < n; ++i) xbar[i] = rng.normal();
  for (int i = 0; i < d; ++i) s[i] = rng.uniform(-0.5, 0.5);

  Mat H = H0;
  for (int i = 0; i < d; ++i) H += std::exp(s[i]) * G[static_cast<std::size_t>(i)];
  const Eigen::SelfAdjointEigenSolver<Mat> es(H);
  const double tau = optimal_tau(es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff());

  Instance inst;
  inst.spec = SchemeSpec{std::make_shared<QuadraticStep>(H0, G, b, tau, Vec::Zero(n)), K, T};
  inst.s = s;
  inst.xbar = xbar;
  inst.x0 = Vec::Zero(n);
  return inst;
}

Instance wavelet_instance(std::uint64_t seed, int K, int T, const WaveletInstanceOptions& opt) {
  Rng rng(seed);
  const Signal clean = synth_image(opt.shape, rng);
  const Signal scaled(opt.shape, opt.amplitude * clean.data());
  const Signal y = add_channel_noise(
      scaled, std::vector<double>(static_cast<std::size_t>(opt.shape.channels), opt.noise), rng);

  const WaveletLayout layout(opt.shape, opt.levels);
  HyperParams p = HyperParams::uniform(opt.levels, opt.shape.channels, opt.kind, 1.0, 1.0);
  if (opt.isotropic_weight > 0.0) {
    p.log_lambda.setConstant(std::log(opt.isotropic_weight));
  } else {
    for (Eigen::Index i = 0; i < p.log_lambda.size(); ++i) {
      p.log_lambda[i] = rng.uniform(-opt.log_spread, opt.log_spread);
    }
    for (Eigen::Index i = 0; i < p.log_Lambda.size(); ++i) {
      p.log_Lambda[i] = rng.uniform(-opt.log_spread, opt.log_spread);
    }
  }
  const Vec s = pack_weights(p);

  Instance inst;
  const auto step = WaveletFBStep::with_default_tau(layout, opt.kind, y.data(), s);
  inst.spec = SchemeSpec{step, K, T};
  inst.s = s;
  inst.xbar = scaled.data();
  inst.x0 = step->initial_state(s);
  return inst;
}

}  // namespace retune
