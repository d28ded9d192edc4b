#include "retune/data.hpp"
#include "retune/diff.hpp"
#include "retune/fb_step.hpp"
#include "retune/pnp.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace retune {
namespace {

using testing::random_signal;
using testing::random_vec;
using testing::rel_err;

const Shape kShape{8, 8, 3};

std::shared_ptr<const Denoiser> denoiser(PriorKind kind = PriorKind::Bands) {
  return std::make_shared<WaveletThresholdDenoiser>(WaveletLayout(kShape, 2), kind);
}

TEST(Denoiser, ZeroSigmaIsIdentity) {
  Rng rng(1);
  const Vec x = random_vec(rng, 192);
  EXPECT_EQ(denoiser()->evaluate(x, 0.0), x);
  EXPECT_THROW(denoiser()->evaluate(x, -1.0), std::invalid_argument);
}

TEST(Denoiser, IsNonexpansive) {
  Rng rng(2);
  const auto D = denoiser(PriorKind::BandsChannels);
  for (int t = 0; t < 50; ++t) {
    const Vec a = random_vec(rng, 192), b = random_vec(rng, 192);
    const double sigma = rng.uniform(0.01, 2.0);
    EXPECT_LE((D->evaluate(a, sigma) - D->evaluate(b, sigma)).norm(), (a - b).norm() * (1 + 1e-12));
  }
}

TEST(PnPStep, ZeroSigmaUnitTauIdentityReturnsObservation) {
  Rng rng(3);
  const Signal y = random_signal(rng, kShape);
  const Signal x = random_signal(rng, kShape);
  HyperParams p = HyperParams::uniform(2, 3, PriorKind::Bands, 1.0, 1.0);
  p.log_tau = 0.0;
  // log_sigma cannot encode 0; a tiny sigma leaves the gradient step untouched.
  p.log_sigma = std::log(1e-300);
  const Signal out = pnp_step(x, p, y, LinearOp::identity(kShape), *denoiser());
  EXPECT_LE((out.data() - y.data()).norm(), 1e-12);
}

TEST(PnPStep, FixedPointMatchesWaveletScheme) {
  // With A = I the PnP fixed point minimizes 1/2||x - y||^2 + (sigma/tau)||D x||_{2,1}.
  Rng rng(4);
  const Signal y = random_signal(rng, kShape);
  const double sigma = 0.15, tau = 0.7;
  auto pnp = std::make_shared<PnPStep>(LinearOp::identity(kShape), denoiser(), y.data());
  const Vec s_pnp = pack_sigma_tau(sigma, tau);
  const Vec x_pnp = fixed_point_solve(SchemeSpec{pnp, 1, 1}, s_pnp, 1e-13).x;

  const WaveletLayout layout(kShape, 2);
  const Vec s_w = pack_weights(HyperParams::uniform(2, 3, PriorKind::Bands, sigma / tau, 1.0));
  auto fb = WaveletFBStep::with_default_tau(layout, PriorKind::Bands, y.data(), s_w);
  const Vec u = fixed_point_solve(SchemeSpec{fb, 1, 1}, s_w, 1e-13).x;
  EXPECT_LE((fb->readout(u, s_w) - x_pnp).norm(), 1e-8);
}

TEST(PnPStep, SampledLipschitzBelowCertificate) {
  Rng rng(5);
  const Signal y = random_signal(rng, kShape);
  for (const LinearOp& A : {LinearOp::identity(kShape), make_anisotropic_blur(kShape, 3)}) {
    auto step = std::make_shared<PnPStep>(A, denoiser(), A.apply(y.data()));
    for (double tau : {0.3, 0.9, 1.5}) {
      const Vec s = pack_sigma_tau(0.1, tau);
      const SchemeSpec spec{step, 2, 1};
      const LipschitzCert cert = certificate(spec, s);
      EXPECT_LE(sampled_lipschitz(spec, s, step->initial_state(s), 20, 11), cert.delta_K * (1 + 1e-12));
    }
  }
}

TEST(PnPStep, DerivativesMatchFiniteDifferences) {
  Rng rng(6);
  Rng mrng(60);
  const LinearOp A = make_inpainting_mask(kShape, 0.7, mrng);
  const Signal y = random_signal(rng, kShape);
  auto step = std::make_shared<PnPStep>(A, denoiser(PriorKind::BandsChannels), A.apply(y.data()));
  const Vec s = pack_sigma_tau(0.2, 0.8);
  int checked = 0;
  for (int t = 0; t < 20 && checked < 5; ++t) {
    const Vec x = random_vec(rng, 192);
    if (step->kink_margin(x, s) < 1e-3) continue;
    ++checked;
    const Vec v = random_vec(rng, 192), dx = random_vec(rng, 192), ds = random_vec(rng, 2);
    const double h = 1e-6;
    const double fd_x = v.dot(step->apply(x + h * dx, s) - step->apply(x - h * dx, s)) / (2 * h);
    const double fd_s = v.dot(step->apply(x, s + h * ds) - step->apply(x, s - h * ds)) / (2 * h);
    const Cotangent c = step->vjp(x, s, v);
    EXPECT_LE(rel_err(c.wrt_x.dot(dx), fd_x), 1e-5);
    EXPECT_LE(rel_err(c.wrt_theta.dot(ds), fd_s), 1e-5);
    EXPECT_NEAR(v.dot(step->jvp(x, s, dx, ds)), c.wrt_x.dot(dx) + c.wrt_theta.dot(ds),
                1e-10 * (1 + std::abs(fd_x) + std::abs(fd_s)));
  }
  EXPECT_EQ(checked, 5);
}

TEST(PnPStep, RejectsMismatchedObservation) {
  EXPECT_THROW(PnPStep(LinearOp::identity(kShape), denoiser(), Vec::Zero(10)), std::invalid_argument);
  EXPECT_THROW(PnPStep(LinearOp::identity(kShape), nullptr, Vec::Zero(192)), std::invalid_argument);
}

TEST(PnPStep, SmallSigmaApproachesLeastSquares) {
  // As sigma -> 0 the identity-operator fixed point tends to y.
  Rng rng(7);
  const Signal y = random_signal(rng, kShape);
  auto step = std::make_shared<PnPStep>(LinearOp::identity(kShape), denoiser(), y.data());
  double prev = 1e9;
  for (double sigma : {0.3, 0.1, 0.03, 0.01, 0.001}) {
    const Vec s = pack_sigma_tau(sigma, 1.0);
    const double d = (fixed_point_solve(SchemeSpec{step, 1, 1}, s, 1e-12).x - y.data()).norm();
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(LearnSigmaTau, DeterministicAndKeepsPositiveParameters) {
  Rng rng(8);
  const LinearOp A = make_inpainting_mask(kShape, 0.8, rng);
  const Dataset train = make_restoration_dataset(4, kShape, A, 0.05, 1);
  const Dataset test = make_restoration_dataset(2, kShape, A, 0.05, 2);
  TrainConfig cfg;
  cfg.K = 3;
  cfg.T = 2;
  cfg.epochs = 2;
  cfg.require_certificate = false;
  const TrainResult a = learn_sigma_tau(cfg, train, test, A, denoiser(), 0.05, 1.0);
  const TrainResult b = learn_sigma_tau(cfg, train, test, A, denoiser(), 0.05, 1.0);
  ASSERT_EQ(a.history.size(), 2u);
  EXPECT_EQ(a.s_final, b.s_final);
  EXPECT_TRUE(std::isfinite(a.s_final[0]) && std::isfinite(a.s_final[1]));
  for (const auto& row : a.history) EXPECT_TRUE(std::isfinite(row.test_psnr_mean));
  EXPECT_NE(a.s_final, pack_sigma_tau(0.05, 1.0));
}

}  // namespace
}  // namespace retune
