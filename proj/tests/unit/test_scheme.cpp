#include "retune/fb_step.hpp"
#include "retune/instances.hpp"
#include "retune/models.hpp"
#include "retune/scheme.hpp"
#include "test_support.hpp"

#include <Eigen/Cholesky>
#include <gtest/gtest.h>

#include <cmath>

namespace retune {
namespace {

using testing::random_vec;

TEST(LipschitzOmega, ClosedForms) {
  EXPECT_DOUBLE_EQ(lipschitz_omega(0.5, 1.0, 3.0), 0.5);
  EXPECT_DOUBLE_EQ(optimal_tau(1.0, 3.0), 0.5);
  EXPECT_DOUBLE_EQ(lipschitz_omega(optimal_tau(1.0, 3.0), 1.0, 3.0), (3.0 - 1.0) / (3.0 + 1.0));
  EXPECT_GT(lipschitz_omega(1e-9, 1.0, 3.0), 1.0 - 1e-8);
  EXPECT_LT(lipschitz_omega(1e-9, 1.0, 3.0), 1.0);
  EXPECT_THROW(lipschitz_omega(0.0, 1.0, 3.0), std::domain_error);
  EXPECT_THROW(lipschitz_omega(2.0 / 3.0, 1.0, 3.0), std::domain_error);
}

TEST(DefaultTau, ClosedForms) {
  EXPECT_DOUBLE_EQ(default_tau(HyperParams::uniform(2, 1, PriorKind::Bands, 1.0, 1.0)), 1.0);
  // Detail weights 2, approximation weight 1: mu = 1/4, L = 1.
  const HyperParams p = HyperParams::uniform(2, 1, PriorKind::Bands, 2.0, 1.0);
  EXPECT_NEAR(default_tau(p), 1.6, 1e-15);
  EXPECT_NEAR(alternative_tau(p), 1.95, 1e-15);
}

TEST(DefaultTau, OptimalRuleBeatsAlternative) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    HyperParams p = HyperParams::uniform(2, 3, PriorKind::BandsChannels, 1.0, 1.0);
    p.log_lambda = random_vec(rng, 2, 0.5);
    p.log_Lambda = random_vec(rng, 9, 0.5);
    const Curvature c = wavelet_curvature(p);
    ASSERT_LT(lipschitz_omega(default_tau(p), c.mu, c.L),
              lipschitz_omega(alternative_tau(p), c.mu, c.L));
  }
}

TEST(SchemeSpec, Validation) {
  const auto step = std::make_shared<ScalarStep>(1.0, 0.5);
  EXPECT_THROW((SchemeSpec{step, 0, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((SchemeSpec{step, 1, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((SchemeSpec{nullptr, 1, 1}.validate()), std::invalid_argument);
}

TEST(ScalarModel, BlockAndRestartClosedForms) {
  const double tau = 0.5, theta = 2.0, y = 1.0;
  for (int K : {1, 2, 5})
    for (int T : {1, 2, 3, 7}) {
      Instance inst = scalar_instance(K, T);
      const RestartResult r = restart_T(inst.spec, inst.x0, inst.s);
      const double expect = (1.0 - std::pow(1.0 - tau, K * T)) * theta * y;
      EXPECT_NEAR(r.x_last[0], expect, 1e-12);
      const double prev = (1.0 - std::pow(1.0 - tau, K * (T - 1))) * theta * y;
      EXPECT_NEAR(r.x_prev[0], prev, 1e-12);
      // Phi_K(x) = (1 - tau)^K x + (1 - (1 - tau)^K) theta y from a nonzero start.
      const Vec x = Vec::Constant(1, -0.7);
      EXPECT_NEAR(apply_block(inst.spec, x, inst.s)[0],
                  std::pow(1 - tau, K) * -0.7 + (1 - std::pow(1 - tau, K)) * theta * y, 1e-12);
    }
}

TEST(ScalarModel, FixedPointAndCertificate) {
  const Instance inst = scalar_instance(2, 1);
  const LipschitzCert c = certificate(inst.spec, inst.s);
  EXPECT_DOUBLE_EQ(c.omega, 0.5);
  EXPECT_DOUBLE_EQ(c.delta_K, 0.25);
  const FixedPointResult fp = fixed_point_solve(inst.spec, inst.s, 1e-13);
  EXPECT_NEAR(fp.x[0], 2.0, 1e-13);
  const RestartResult r = restart_T(SchemeSpec{inst.spec.step, 2, 5}, fp.x, inst.s);
  EXPECT_NEAR(r.x_last[0], 2.0, 1e-13);
  EXPECT_LE(std::abs(r.x_last[0] - 2.0), std::abs(fp.x[0] - 2.0));
}

TEST(Restart, SingleRestartReturnsStartAndBlock) {
  const Instance inst = wavelet_instance(3, 4, 1);
  const RestartResult r = restart_T(inst.spec, inst.x0, inst.s);
  EXPECT_EQ(r.x_prev, inst.x0);
  EXPECT_EQ(r.x_last, apply_block(inst.spec, inst.x0, inst.s));
  const auto path = restart_path(SchemeSpec{inst.spec.step, 4, 3}, inst.x0, inst.s);
  ASSERT_EQ(path.size(), 4u);
  EXPECT_EQ(path[3], restart_T(SchemeSpec{inst.spec.step, 4, 3}, inst.x0, inst.s).x_last);
}

TEST(Unroll, KeepsTheWholeTrajectory) {
  const Instance inst = wavelet_instance(4, 3, 1);
  const auto traj = unroll_K(inst.spec, inst.x0, inst.s);
  ASSERT_EQ(traj.size(), 4u);
  EXPECT_EQ(traj[0], inst.x0);
  for (int k = 1; k <= 3; ++k) EXPECT_EQ(traj[k], inst.spec.step->apply(traj[k - 1], inst.s));
}

TEST(FixedPoint, QuadraticMatchesDenseSolve) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Instance inst = quadratic_instance(seed, 6, 2, 3, 1);
    const auto& q = dynamic_cast<const QuadraticStep&>(*inst.spec.step);
    const Vec direct = q.hessian(inst.s).ldlt().solve(q.b());
    const FixedPointResult fp = fixed_point_solve(inst.spec, inst.s, 1e-12);
    EXPECT_LE((fp.x - direct).norm(), 1e-8);
  }
}

TEST(FixedPoint, RefusesWithoutCertificateAndRespectsCap) {
  const SchemeSpec id{std::make_shared<IdentityStep>(3), 1, 1};
  EXPECT_THROW(fixed_point_solve(id, Vec::Zero(1), 1e-10), std::domain_error);
  const SchemeSpec slow{std::make_shared<ScalarStep>(1.0, 1e-6), 1, 1};
  EXPECT_THROW(fixed_point_solve(slow, Vec::Zero(1), 1e-12, 1000), std::runtime_error);
}

TEST(FixedPoint, WaveletPosterioriErrorWithinTolerance) {
  const Instance inst = wavelet_instance(5, 2, 1);
  const Vec ref = fixed_point_solve(inst.spec, inst.s, inst.x0, 1e-14).x;
  const Vec loose = fixed_point_solve(inst.spec, inst.s, inst.x0, 1e-6).x;
  EXPECT_LE((loose - ref).norm(), 1e-6);
}

TEST(FbStep, FixedPointIsInvariant) {
  const Instance inst = wavelet_instance(6, 1, 1);
  const auto& step = dynamic_cast<const WaveletFBStep&>(*inst.spec.step);
  const Vec u_hat = fixed_point_solve(inst.spec, inst.s, inst.x0, 1e-14).x;
  EXPECT_LE((step.apply(u_hat, inst.s) - u_hat).cwiseAbs().maxCoeff(), 1e-12);

  const HyperParams p = unpack_weights(inst.s, 2, 1, PriorKind::Bands);
  const Signal y(Shape{8, 8, 1}, idwt2(step.dy(), step.layout()));
  const WaveletCoeffs u{step.layout(), u_hat};
  EXPECT_LE((fb_step(u, p, y).data - u_hat).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FbStep, ThresholdRegionMapsDetailsToZero) {
  Rng rng(7);
  const WaveletLayout L(Shape{8, 8, 1}, 2);
  const HyperParams p = HyperParams::uniform(2, 1, PriorKind::Bands, 1.0, 1.0);
  const Signal y(Shape{8, 8, 1});
  const double tau = 0.9;
  // After the gradient step (1 - tau) u the group norms stay below tau.
  const WaveletCoeffs u{L, random_vec(rng, 64, 1.0).cwiseMax(-2.0).cwiseMin(2.0)};
  const WaveletCoeffs out = fb_step(u, p, y, tau);
  const auto d = static_cast<Eigen::Index>(L.detail_size());
  EXPECT_EQ(out.data.head(d), Vec::Zero(d));
  EXPECT_LE((out.data.tail(64 - d) - (1 - tau) * u.data.tail(64 - d)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(FbStep, RejectsStepsizeOutOfRange) {
  const WaveletLayout L(Shape{8, 8, 1}, 2);
  const HyperParams p = HyperParams::uniform(2, 1, PriorKind::Bands, 0.5, 1.0);  // L = 4
  const WaveletCoeffs u{L, Vec::Zero(64)};
  EXPECT_THROW(fb_step(u, p, Signal(Shape{8, 8, 1}), 0.5), std::domain_error);
  EXPECT_NO_THROW(fb_step(u, p, Signal(Shape{8, 8, 1}), 0.49));
}

TEST(FbStep, EnergyDecreasesMonotonically) {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const Instance inst = wavelet_instance(100 + i, 1, 1);
    const auto& step = dynamic_cast<const WaveletFBStep&>(*inst.spec.step);
    Vec u = random_vec(rng, 64, 3.0);
    double e = step.energy(u, inst.s);
    for (int k = 0; k < 10; ++k) {
      u = step.apply(u, inst.s);
      const double next = step.energy(u, inst.s);
      ASSERT_LE(next, e + 1e-12 * std::abs(e)) << "instance " << i << " step " << k;
      e = next;
    }
  }
}

TEST(Certificate, SampledQuotientBelowDeltaK) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (int K : {1, 2, 4}) {
      const Instance inst = wavelet_instance(seed, K, 1);
      const double dK = certificate(inst.spec, inst.s).delta_K;
      ASSERT_LT(dK, 1.0);
      EXPECT_LE(sampled_lipschitz(inst.spec, inst.s, inst.x0, 100, seed), dK + 1e-9);
    }
  }
}

TEST(Restart, TheoremOneEnvelope) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance inst = wavelet_instance(seed, 2, 20);
    const double dK = certificate(inst.spec, inst.s).delta_K;
    const Vec x_hat = fixed_point_solve(inst.spec, inst.s, inst.x0, 1e-14).x;
    const auto path = restart_path(inst.spec, inst.x0, inst.s);
    const double d0 = (inst.x0 - x_hat).norm();
    for (int t = 0; t <= 20; ++t) {
      ASSERT_LE((path[t] - x_hat).norm(), std::pow(dK, t) * d0 + 1e-9);
    }
  }
}

TEST(PicardSolve, StopsOnIncrement) {
  const Instance inst = scalar_instance(1, 1);
  const FixedPointResult r = picard_solve(inst.spec, inst.s, inst.x0, 1e-12);
  EXPECT_LE(r.last_increment, 1e-12);
  EXPECT_NEAR(r.x[0], 2.0, 1e-11);
}

}  // namespace
}  // namespace retune
