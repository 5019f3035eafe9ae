#include <gtest/gtest.h>

#include <cmath>

#include "pcad/c3l/c3l.hpp"
#include "pcad/common/error.hpp"
#include "pcad/ggd/decoder.hpp"
#include "pcad/nn/ops.hpp"
#include "support/oracles.hpp"

using namespace pcad;
using namespace pcad::c3l;
using nn::Matrix;
using nn::Tensor;

namespace {

Eigen::RowVectorXd unit(Rng& rng, int d) {
  Eigen::RowVectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.normal();
  return v / v.norm();
}

}  // namespace

TEST(Buffer, Fifo) {
  ContrastBuffer b(2);
  const Eigen::RowVector2d e0(1, 0), e1(0, 1), e2(-1, 0);
  b.push(Eigen::RowVectorXd(e0), 1);
  b.push(Eigen::RowVectorXd(e1), 2);
  b.push(Eigen::RowVectorXd(e2), 3);
  ASSERT_EQ(b.size(), 2);
  EXPECT_EQ(b.at(0).category, 2);
  EXPECT_EQ(b.at(0).z, Eigen::RowVectorXd(e1));
  EXPECT_EQ(b.at(1).z, Eigen::RowVectorXd(e2));
}

TEST(Buffer, DefaultCapacity) {
  ContrastBuffer b;
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    b.push(unit(rng, 4), 1);
    EXPECT_EQ(b.size(), std::min(i + 1, 64));
  }
}

TEST(Buffer, RejectsNonUnit) {
  ContrastBuffer b;
  EXPECT_THROW(b.push(Eigen::RowVectorXd(Eigen::RowVector2d(1, 1)), 1), InvalidArgument);
  EXPECT_THROW(ContrastBuffer(0), InvalidArgument);
}

TEST(Buffer, StoresSnapshot) {
  ContrastBuffer b;
  Tensor z = Tensor::parameter((Matrix(1, 2) << 0.6, 0.8).finished());
  b.push(z, 2);
  z.mutable_value()(0, 0) = 5.0;
  EXPECT_EQ(b.at(0).z(0), 0.6);
}

TEST(Scl, SkipsWithoutPositives) {
  ContrastBuffer b;
  const Tensor z = Tensor::constant((Matrix(1, 2) << 1, 0).finished());
  EXPECT_FALSE(scl_loss(z, 1, b, 0.07).has_value());
  b.push(Eigen::RowVectorXd(Eigen::RowVector2d(0, 1)), 2);
  EXPECT_FALSE(scl_loss(z, 1, b, 0.07).has_value());
}

TEST(Scl, Examples) {
  ContrastBuffer b;
  const Tensor z = Tensor::constant((Matrix(1, 2) << 1, 0).finished());
  b.push(Eigen::RowVectorXd(Eigen::RowVector2d(1, 0)), 1);
  EXPECT_NEAR(scl_loss(z, 1, b, 0.07)->item(), 0.0, 1e-15);
  b.push(Eigen::RowVectorXd(Eigen::RowVector2d(0, 1)), 2);
  const double expect = std::log(1.0 + std::exp(-1.0));
  EXPECT_NEAR(scl_loss(z, 1, b, 1.0)->item(), expect, 1e-15);
  EXPECT_NEAR(expect, 0.3133, 5e-5);
}

TEST(Scl, MatchesBruteForce) {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    ContrastBuffer b;
    for (int i = 0; i < 6; ++i) b.push(unit(rng, 5), 1 + static_cast<int>(rng.index(3)));
    const Eigen::RowVectorXd zv = unit(rng, 5);
    const int cat = b.at(0).category;
    const double tau = t % 2 ? 0.07 : 0.5;
    const auto loss = scl_loss(Tensor::constant(zv), cat, b, tau);
    ASSERT_TRUE(loss.has_value());
    EXPECT_NEAR(loss->item(), pcad::testing::brute_scl(zv, cat, b, tau), 1e-10) << t;
  }
}

TEST(Scl, GradientsAndDetachedBuffer) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    ContrastBuffer b;
    for (int i = 0; i < 6; ++i) b.push(unit(rng, 4), 1 + static_cast<int>(rng.index(2)));
    const int cat = b.at(1).category;
    Tensor z = Tensor::parameter(unit(rng, 4));
    EXPECT_TRUE(pcad::testing::check_gradients([&] { return *scl_loss(z, cat, b, 0.3); }, {z}).ok()) << t;
    const Tensor loss = *scl_loss(z, cat, b, 0.3);
    ASSERT_EQ(loss.node()->parents.size(), 1u);
    EXPECT_EQ(loss.node()->parents[0].get(), z.node());
  }
}

TEST(Scl, GradientThroughNormalizedEmbedding) {
  Rng rng(4);
  ContrastBuffer b;
  for (int i = 0; i < 6; ++i) b.push(unit(rng, 4), 1 + i % 2);
  Tensor raw = Tensor::parameter(pcad::testing::random_matrix(1, 4, rng));
  auto loss = [&] { return *scl_loss(nn::l2_normalize_rows(raw), 2, b, 0.07); };
  EXPECT_TRUE(pcad::testing::check_gradients(loss, {raw}).ok());
}

TEST(C3lTotal, Examples) {
  LossWeights w{0.001, 0.01, 0.001};
  EXPECT_NEAR(c3l_total(1.0, 1.0, 1.0, w), 0.012, 1e-15);
  EXPECT_EQ(c3l_total(3.0, 2.0, 1.0, LossWeights{0, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(c3l_total(std::optional<double>(), 4.0, std::optional<double>(), LossWeights{1, 0.5, 1}), 2.0);
  EXPECT_THROW(c3l_total(1.0, 1.0, 1.0, LossWeights{-1, 0, 0}), InvalidArgument);
  const auto one = [](double v) { return Tensor::constant(Matrix::Constant(1, 1, v)); };
  EXPECT_NEAR(c3l_total(one(1), one(1), one(1), w).item(), 0.012, 1e-15);
  const std::optional<Tensor> none;
  EXPECT_EQ(c3l_total(none, none, none, w).item(), 0.0);
}

TEST(TotalLoss, SumOfComponents) {
  const Tensor c3l = Tensor::constant(Matrix::Constant(1, 1, 0.012));
  const Tensor rec = ggd::rec_loss(Tensor::constant((Matrix(1, 2) << 1, 1).finished()), Tensor::constant(Matrix::Zero(1, 2)));
  EXPECT_DOUBLE_EQ(rec.item(), 2.0);
  EXPECT_DOUBLE_EQ(ggd::total_loss(c3l, rec).item(), 2.012);
  const Tensor zero = Tensor::constant(Matrix::Zero(1, 1));
  EXPECT_EQ(ggd::total_loss(zero, zero).item(), 0.0);
}
