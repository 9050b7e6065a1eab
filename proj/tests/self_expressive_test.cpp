// Copyright 2026 The fusesc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include <gtest/gtest.h>

#include <fusesc/adam.hpp>
#include <fusesc/self_expressive.hpp>

#include "test_util.hpp"

namespace fusesc {
namespace {

using testing::random_matrix;

double loop_se_loss(const Matrix& f, const Matrix& c, double lambda) {
  double l1 = 0.0, rec = 0.0;
  for (Index i = 0; i < c.rows(); ++i)
    for (Index j = 0; j < c.cols(); ++j) l1 += std::abs(c(i, j));
  for (Index r = 0; r < f.rows(); ++r) {
    for (Index j = 0; j < f.cols(); ++j) {
      double fc = 0.0;
      for (Index k = 0; k < f.cols(); ++k) fc += f(r, k) * c(k, j);
      rec += (f(r, j) - fc) * (f(r, j) - fc);
    }
  }
  return l1 + lambda * rec;
}

TEST(SeLoss, OrthogonalUnitSamples) {
  const Matrix f = Matrix::Identity(2, 2);
  EXPECT_DOUBLE_EQ(se_loss(f, Matrix::Zero(2, 2), 1.0), 2.0);
  EXPECT_DOUBLE_EQ(se_loss(f, Matrix::Identity(2, 2), 1.0), 2.0);
}

TEST(SeLoss, MatchesLoopOracle) {
  std::mt19937_64 rng(17);
  const Matrix f = random_matrix(4, 6, rng);
  const Matrix c = random_matrix(6, 6, rng);
  EXPECT_NEAR(se_loss(f, c, 0.8), loop_se_loss(f, c, 0.8), 1e-12);
}

TEST(SeLoss, ShapeMismatch) {
  EXPECT_THROW(se_loss(Matrix::Ones(3, 4), Matrix::Ones(3, 3), 1.0), ShapeError);
}

TEST(TotalLoss, ZeroCoefficients) {
  std::mt19937_64 rng(18);
  const Matrix fa = random_matrix(4, 5, rng), fs = random_matrix(3, 5, rng);
  SelfExpressiveState s{Matrix::Zero(5, 5), Matrix::Zero(5, 5), 0.5, 2.0};
  EXPECT_NEAR(total_loss(fa, fs, s).total(), 0.5 * fa.squaredNorm() + 2.0 * fs.squaredNorm(), 1e-12);
}

TEST(TotalLoss, OppositeCoefficientsCancelFusedTerm) {
  std::mt19937_64 rng(20);
  const Matrix ca = random_matrix(5, 5, rng);
  SelfExpressiveState s{ca, -ca, 1.0, 1.0};
  EXPECT_EQ(total_loss(random_matrix(3, 5, rng), random_matrix(2, 5, rng), s).l1_fused, 0.0);
}

TEST(TotalLoss, BreakdownMatchesIndependentTerms) {
  std::mt19937_64 rng(19);
  const Matrix fa = random_matrix(4, 8, rng), fs = random_matrix(3, 8, rng);
  SelfExpressiveState s{random_matrix(8, 8, rng), random_matrix(8, 8, rng), 1.3, 0.4};
  const auto b = total_loss(fa, fs, s);
  const double expected = loop_se_loss(fa, s.c_a, s.lambda1) + loop_se_loss(fs, s.c_s, s.lambda2) +
                          loop_se_loss(Matrix::Zero(1, 8), s.c_a + s.c_s, 0.0);
  EXPECT_NEAR(b.total(), expected, 1e-12);
  EXPECT_NEAR(b.l1_content + b.recon_content + b.l1_structure + b.recon_structure + b.l1_fused,
              b.total(), 1e-12);
}

TEST(TotalLoss, ShapeMismatch) {
  SelfExpressiveState s{Matrix::Zero(4, 4), Matrix::Zero(3, 3), 1.0, 1.0};
  EXPECT_THROW(total_loss(Matrix::Ones(2, 4), Matrix::Ones(2, 4), s), ShapeError);
}

TEST(TotalLossGrad, ClosedFormAtZero) {
  SelfExpressiveState s{Matrix::Zero(2, 2), Matrix::Zero(2, 2), 1.0, 1.0};
  const auto g = total_loss_grad(Matrix::Identity(2, 2), Matrix::Identity(2, 2), s);
  EXPECT_TRUE(g.c_a == -2.0 * Matrix::Identity(2, 2));
}

TEST(TotalLossGrad, OnlySignTermsWithoutReconstruction) {
  std::mt19937_64 rng(21);
  SelfExpressiveState s{random_matrix(5, 5, rng), random_matrix(5, 5, rng), 0.0, 0.0};
  const auto g = total_loss_grad(random_matrix(3, 5, rng), random_matrix(2, 5, rng), s);
  EXPECT_TRUE(g.c_a == sign0(s.c_a) + sign0(s.fused()));
  EXPECT_TRUE(g.c_s == sign0(s.c_s) + sign0(s.fused()));
  EXPECT_TRUE(g.f_s.isZero(0.0));
}

TEST(TotalLossGrad, MatchesFiniteDifferences) {
  std::mt19937_64 rng(23);
  const Index n = 7;
  Matrix fa = random_matrix(4, n, rng);
  Matrix fs = random_matrix(3, n, rng);
  SelfExpressiveState s{testing::random_offzero(n, n, rng, 0.05),
                        testing::random_offzero(n, n, rng, 0.05), 0.9, 1.1};
  // Nudge fused entries off zero as well.
  for (Index i = 0; i < s.c_s.size(); ++i) {
    if (std::abs(s.c_a.data()[i] + s.c_s.data()[i]) < 0.05) s.c_s.data()[i] += 0.2;
  }
  const auto g = total_loss_grad(fa, fs, s);
  const std::function<double()> loss = [&] { return total_loss(fa, fs, s).total(); };
  EXPECT_LE(testing::max_relative_error(g.c_a, testing::central_difference(s.c_a, loss, 1e-4)), 1e-4);
  EXPECT_LE(testing::max_relative_error(g.c_s, testing::central_difference(s.c_s, loss, 1e-4)), 1e-4);
  EXPECT_LE(testing::max_relative_error(g.f_s, testing::central_difference(fs, loss, 1e-4)), 1e-4);
}

TEST(ContentLoss, EqualsContentTermsOnly) {
  std::mt19937_64 rng(24);
  const Matrix fa = random_matrix(4, 6, rng);
  SelfExpressiveState s{random_matrix(6, 6, rng), random_matrix(6, 6, rng), 1.5, 1.0};
  const auto b = content_loss(fa, s);
  EXPECT_FALSE(b.has_structure);
  EXPECT_EQ(b.total(), b.l1_content + b.recon_content);
  EXPECT_NEAR(b.total(), se_loss(fa, s.c_a, 1.5), 1e-12);
  const std::function<double()> loss = [&] { return content_loss(fa, s).total(); };
  s.c_a = testing::random_offzero(6, 6, rng, 0.05);
  EXPECT_LE(testing::max_relative_error(content_loss_grad(fa, s),
                                        testing::central_difference(s.c_a, loss, 1e-4)),
            1e-4);
}

TEST(AdamStep, FirstStepMovesByLearningRate) {
  for (double gval : {3.0, -0.02, 1e4}) {
    Matrix p = Matrix::Constant(1, 1, 0.5);
    AdamState st;
    adam_step(p, Matrix::Constant(1, 1, gval), st, 1e-3);
    EXPECT_NEAR(std::abs(p(0, 0) - 0.5), 1e-3, 1e-8);
    EXPECT_EQ(sign0(0.5 - p(0, 0)), sign0(gval));
    EXPECT_EQ(st.step, 1);
  }
}

TEST(AdamStep, ZeroGradientLeavesParameters) {
  std::mt19937_64 rng(25);
  Matrix p = random_matrix(3, 4, rng);
  const Matrix start = p;
  AdamState st;
  for (int i = 0; i < 50; ++i) adam_step(p, Matrix::Zero(3, 4), st, 0.1);
  EXPECT_TRUE(p == start);
  EXPECT_EQ(st.step, 50);
}

TEST(AdamStep, ScalarQuadraticDescends) {
  Matrix x = Matrix::Ones(1, 1);
  AdamState st;
  double prev = 1.0;
  for (int i = 0; i < 3; ++i) {
    adam_step(x, 2.0 * x, st, 0.1);
    EXPECT_LT(std::abs(x(0, 0)), prev);
    prev = std::abs(x(0, 0));
  }
}

TEST(AdamStep, NonFiniteGradientNamesParameter) {
  Matrix p = Matrix::Zero(2, 2);
  Matrix g = Matrix::Zero(2, 2);
  g(1, 0) = std::numeric_limits<double>::infinity();
  AdamState st;
  try {
    adam_step(p, g, st, 0.1, "C_A");
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("C_A"), std::string::npos);
  }
  EXPECT_EQ(st.step, 0);
  EXPECT_TRUE(p.isZero(0.0));
}

}  // namespace
}  // namespace fusesc
