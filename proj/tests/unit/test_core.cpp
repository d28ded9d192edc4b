#include "retune/core.hpp"
#include "retune/diff.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace retune {
namespace {

using testing::random_vec;

TEST(Signal, RejectsLengthMismatchAndNonFinite) {
  EXPECT_THROW(Signal(Shape{2, 2, 1}, Vec::Zero(3)), std::invalid_argument);
  Vec bad = Vec::Zero(4);
  bad[2] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Signal(Shape{2, 2, 1}, bad), std::invalid_argument);
}

TEST(Signal, PlanarIndexing) {
  Vec d(12);
  for (int i = 0; i < 12; ++i) d[i] = i;
  const Signal s(Shape{2, 2, 3}, d);
  EXPECT_EQ(s.at(1, 0, 1), 5.0);
  EXPECT_EQ(s.at(2, 1, 0), 10.0);
}

TEST(MseLoss, ClosedForms) {
  const Shape sh{1, 2, 1};
  const Signal x(sh, Vec::Unit(2, 0));
  const Signal zero(sh);
  EXPECT_EQ(mse_loss(x, x), 0.0);
  EXPECT_DOUBLE_EQ(mse_loss(x, zero), 0.5);
  EXPECT_THROW(mse_loss(x, Signal(Shape{2, 1, 1})), std::invalid_argument);
}

TEST(MseLoss, MatchesDirectSummation) {
  Rng rng(3);
  const Vec x = random_vec(rng, 16), r = random_vec(rng, 16);
  double acc = 0.0;
  for (int i = 0; i < 16; ++i) acc += 0.5 * (x[i] - r[i]) * (x[i] - r[i]);
  EXPECT_NEAR(mse_loss(x, r), acc, 1e-12);
  EXPECT_GE(mse_loss(x, r), 0.0);
}

TEST(LossGradient, ClosedFormAndFiniteDifference) {
  const Shape sh{1, 2, 1};
  const Signal g = loss_gradient(Signal(sh, Vec{{3.0, 1.0}}), Signal(sh, Vec{{1.0, 1.0}}));
  EXPECT_EQ(g.data(), (Vec{{2.0, 0.0}}));

  Rng rng(5);
  const Vec x = random_vec(rng, 16), r = random_vec(rng, 16);
  const Vec fd = fd_gradient([&](const Vec& z) { return mse_loss(z, r); }, x, 1e-6);
  const Vec exact = loss_gradient(Signal(Shape{4, 4, 1}, x), Signal(Shape{4, 4, 1}, r)).data();
  EXPECT_LE(testing::rel_err(fd, exact), 1e-8);
}

TEST(Psnr, ClosedForms) {
  const Vec ref = Vec::Zero(100);
  Vec x = Vec::Constant(100, 0.1);  // mean squared error 0.01
  EXPECT_NEAR(psnr(x, ref), 20.0, 1e-12);
  EXPECT_NEAR(psnr(Vec::Ones(100), ref), 0.0, 1e-12);
  const double p1 = psnr(x, ref);
  const double p2 = psnr(Vec(x * std::sqrt(2.0)), ref);
  EXPECT_NEAR(p1 - p2, 10.0 * std::log10(2.0), 1e-12);
  EXPECT_TRUE(std::isinf(psnr(ref, ref)));
}

TEST(Reparam, ChainFactorIsTheta) {
  HyperParams p = HyperParams::uniform(2, 3, PriorKind::Bands, 1.0, 1.0);
  EXPECT_NEAR(reparam_chain_factor(p)[0], 1.0, 1e-15);
  p.log_lambda[0] = std::log(2.0);
  EXPECT_NEAR(reparam_chain_factor(p)[0], 2.0, 1e-15);

  // d/d(log lambda) of lambda^2 at lambda = 3 is 2 * 3^2.
  const Vec s{{std::log(3.0)}};
  const Vec fd = fd_gradient([](const Vec& z) { return std::exp(2.0 * z[0]); }, s, 1e-6);
  EXPECT_NEAR(fd[0], 18.0, 1e-6);
  EXPECT_NEAR(2.0 * 3.0 * reparam_chain_factor(s)[0], 18.0, 1e-12);
}

TEST(Reparam, PositivityForAnyLogValue) {
  for (double v : {-700.0, -5.0, 0.0, 5.0, 700.0}) {
    HyperParams p = HyperParams::uniform(1, 1, PriorKind::Bands, 1.0, 1.0);
    p.log_lambda[0] = v;
    p.log_tau = v;
    EXPECT_GT(p.lambda()[0], 0.0);
    EXPECT_GT(p.tau(), 0.0);
  }
}

TEST(Dataset, ValidateRejectsMixedShapes) {
  Dataset d;
  d.pairs.push_back({Signal(Shape{2, 2, 1}), Signal(Shape{2, 2, 1})});
  EXPECT_NO_THROW(d.validate());
  d.pairs.push_back({Signal(Shape{2, 2, 1}), Signal(Shape{4, 1, 1})});
  EXPECT_THROW(d.validate(), std::invalid_argument);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.normal(), b.normal());
  EXPECT_NE(Rng::mix(1, 2), Rng::mix(1, 3));
}

}  // namespace
}  // namespace retune
