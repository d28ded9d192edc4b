#include "retune/forward_models.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

namespace retune {
namespace {

using testing::random_signal;
using testing::random_vec;

const Shape kShape{8, 8, 3};

std::vector<LinearOp> all_kinds() {
  Rng rng(9);
  return {LinearOp::identity(kShape), make_inpainting_mask(kShape, 0.3, rng),
          make_anisotropic_blur(kShape, 5), make_dirac_conv(kShape),
          LinearOp::conv(kShape, {{{0, 0, 0.5}, {1, 2, -0.3}}, {{-1, 0, 1.0}}, {{3, -2, 0.25}}})};
}

Mat dense(const LinearOp& A) {
  const auto n = static_cast<Eigen::Index>(A.shape().size());
  Mat M(n, n);
  for (Eigen::Index i = 0; i < n; ++i) M.col(i) = A.apply(Vec(Vec::Unit(n, i)));
  return M;
}

TEST(LinearOp, TrivialCases) {
  Rng rng(1);
  const Signal x = random_signal(rng, kShape);
  EXPECT_EQ(LinearOp::identity(kShape).apply(x).data(), x.data());
  EXPECT_EQ(LinearOp::identity(kShape).adjoint(x).data(), x.data());
  const LinearOp zero = LinearOp::mask(kShape, Vec::Zero(64));
  EXPECT_EQ(zero.apply(x).data(), Vec::Zero(192));
  EXPECT_LE((make_dirac_conv(kShape).apply(x).data() - x.data()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(LinearOp, MaskIsSelfAdjointAndBinary) {
  Rng rng(2);
  const LinearOp A = make_inpainting_mask(kShape, 0.5, rng);
  for (Eigen::Index i = 0; i < A.mask_values().size(); ++i) {
    EXPECT_TRUE(A.mask_values()[i] == 0.0 || A.mask_values()[i] == 1.0);
  }
  const Vec r = random_vec(rng, 192);
  EXPECT_EQ(A.adjoint(r), A.apply(r));
  EXPECT_THROW(LinearOp::mask(kShape, Vec::Constant(64, 0.5)), std::invalid_argument);
}

TEST(LinearOp, AdjointDotProductAllKinds) {
  Rng rng(3);
  for (const LinearOp& A : all_kinds()) {
    for (int i = 0; i < 100; ++i) {
      const Vec x = random_vec(rng, 192), r = random_vec(rng, 192);
      ASSERT_NEAR(A.apply(x).dot(r), x.dot(A.adjoint(r)), 1e-10);
    }
  }
}

TEST(LinearOp, ShapeMismatchThrows) {
  EXPECT_THROW(LinearOp::identity(kShape).apply(Vec::Zero(5)), std::invalid_argument);
}

TEST(LinearOp, BlurKernelsAreNormalizedAndOriented) {
  const LinearOp A = make_anisotropic_blur(kShape, 5);
  for (const auto& k : A.kernels()) {
    double sum = 0.0;
    for (const Tap& t : k) sum += t.weight;
    EXPECT_NEAR(sum, 1.0, 1e-15);
  }
  for (const Tap& t : A.kernels()[0]) EXPECT_EQ(t.dy, 0);
  for (const Tap& t : A.kernels()[1]) EXPECT_EQ(t.dx, 0);
  for (const Tap& t : A.kernels()[2]) EXPECT_EQ(t.dx, t.dy);
}

TEST(GramBounds, ClosedForms) {
  const GramBounds id = gram_bounds(LinearOp::identity(kShape));
  EXPECT_EQ(id.mu, 1.0);
  EXPECT_EQ(id.L, 1.0);
  Vec m = Vec::Ones(64);
  m[10] = 0.0;
  const GramBounds gm = gram_bounds(LinearOp::mask(kShape, m));
  EXPECT_EQ(gm.mu, 0.0);
  EXPECT_EQ(gm.L, 1.0);
}

TEST(GramBounds, WidthTwoKernelOnLengthFour) {
  // h = (1/2, 1/2): hhat(f) = (1 + e^{-i pi f / 2}) / 2, so |hhat|^2 ranges over [0, 1].
  const Shape sh{1, 4, 1};
  const LinearOp A = LinearOp::conv(sh, {{{0, 0, 0.5}, {0, 1, 0.5}}});
  const GramBounds g = gram_bounds(A);
  EXPECT_NEAR(g.L, 1.0, 1e-15);
  EXPECT_NEAR(g.mu, 0.0, 1e-15);
}

TEST(GramBounds, MatchDenseEigenvalues) {
  for (const LinearOp& A : all_kinds()) {
    const Mat M = dense(A);
    const Eigen::SelfAdjointEigenSolver<Mat> es(M.transpose() * M);
    const GramBounds g = gram_bounds(A);
    EXPECT_NEAR(g.L, es.eigenvalues().maxCoeff(), 1e-10);
    EXPECT_NEAR(g.mu, es.eigenvalues().minCoeff(), 1e-10);
  }
}

TEST(GramBounds, RayleighQuotientsAndPowerIteration) {
  Rng rng(4);
  for (const LinearOp& A : all_kinds()) {
    const GramBounds g = gram_bounds(A);
    for (int i = 0; i < 100; ++i) {
      const Vec x = random_vec(rng, 192);
      const double q = A.apply(x).squaredNorm();
      ASSERT_LE(q, g.L * x.squaredNorm() * (1 + 1e-12));
      ASSERT_GE(q, g.mu * x.squaredNorm() * (1 - 1e-12));
    }
    Vec v = random_vec(rng, 192).normalized();
    double lam = 0.0;
    for (int it = 0; it < 5000; ++it) {
      const Vec w = A.adjoint(A.apply(v));
      const double next = v.dot(w);
      v = w.normalized();
      if (std::abs(next - lam) <= 1e-12 * next) {
        lam = next;
        break;
      }
      lam = next;
    }
    EXPECT_LE(std::abs(lam - g.L), 1e-6 * g.L);
  }
}

}  // namespace
}  // namespace retune
