#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "pcad/common/error.hpp"
#include "pcad/ggd/decoder.hpp"
#include "pcad/ggd/eigen3x3.hpp"
#include "pcad/nn/ops.hpp"
#include "support/oracles.hpp"

using namespace pcad;
using namespace pcad::ggd;
using pcad::testing::check_gradients;
using pcad::testing::random_matrix;

namespace {

Points sphere_shell(int n, Rng& rng) {
  Points p(n, 3);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d v(rng.normal(), rng.normal(), rng.normal());
    p.row(i) = v.normalized().transpose();
  }
  return p;
}

Points wavy_surface(int n, Rng& rng) {
  Points p(n, 3);
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1);
    p.row(i) << x, y, 0.2 * std::sin(3 * x) * std::cos(2 * y);
  }
  return p;
}

struct Decoder {
  nn::ParamStore store;
  GgdParams params;
  Decoder(std::uint64_t seed, int d, int heads, nn::Guidance guidance = nn::Guidance::bias) {
    Rng rng(seed);
    GgdParams::Shape s;
    s.width = d;
    s.embed_dim = 6;
    s.heads = heads;
    s.ffn_hidden = 10;
    s.bias_hidden = 5;
    s.guidance = guidance;
    params = GgdParams::create(store, "ggd", s, rng);
  }
};

}  // namespace

TEST(Eigen3, MatchesDenseSolver) {
  Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Matrix3d a = random_matrix(3, 3, rng);
    const Eigen::Matrix3d m = a * a.transpose() + (t % 3 == 0 ? Eigen::Matrix3d::Zero() : Eigen::Matrix3d(a + a.transpose()));
    const SymmetricEigen3 mine = eigen_symmetric3(m);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> ref(m);
    EXPECT_LT((mine.values - ref.eigenvalues()).cwiseAbs().maxCoeff(), 1e-8) << t;
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(std::abs(mine.vectors.col(i).dot(ref.eigenvectors().col(i))), 1.0, 1e-8) << t;
      EXPECT_LT((m * mine.vectors.col(i) - mine.values(i) * mine.vectors.col(i)).norm(), 1e-10);
    }
  }
}

TEST(Eigen3, DiagonalAndRepeated) {
  const SymmetricEigen3 e = eigen_symmetric3(Eigen::Vector3d(3, 1, 2).asDiagonal());
  EXPECT_EQ(e.values, Eigen::Vector3d(1, 2, 3));
  const SymmetricEigen3 i = eigen_symmetric3(Eigen::Matrix3d::Identity() * 2.0);
  EXPECT_EQ(i.values, Eigen::Vector3d::Constant(2.0));
}

TEST(Geometry, PlanarPatch) {
  Rng rng(2);
  Eigen::Matrix3d R;
  Points flat(300, 3);
  for (int i = 0; i < 300; ++i) flat.row(i) << rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0;
  const Points tilted = pcad::testing::rigid_motion(flat, rng, &R);
  std::vector<int> all(300);
  for (int i = 0; i < 300; ++i) all[i] = i;
  const LocalFrame f = local_frame(tilted, all);
  EXPECT_LE(f.curvature, 1e-6);
  EXPECT_NEAR(std::abs(f.normal.dot(R.col(2))), 1.0, 1e-9);
  EXPECT_GE(f.normal.z(), 0.0);
}

TEST(Geometry, SphereShellCurvature) {
  Rng rng(3);
  const Points shell = sphere_shell(2000, rng);
  std::vector<int> all(2000);
  for (int i = 0; i < 2000; ++i) all[i] = i;
  EXPECT_NEAR(local_frame(shell, all).curvature, 1.0 / 3.0, 0.02);
}

TEST(Geometry, CanonicalSign) {
  EXPECT_EQ(canonical_sign(Vec3(0.1, 0.2, -0.3)), Vec3(-0.1, -0.2, 0.3));
  EXPECT_EQ(canonical_sign(Vec3(-1, 0.5, 0)), Vec3(1, -0.5, 0));
  EXPECT_EQ(canonical_sign(Vec3(0, -1, 0)), Vec3(0, 1, 0));
}

TEST(Geometry, UnsignedAngle) {
  EXPECT_NEAR(unsigned_angle(Vec3::UnitZ(), -Vec3::UnitZ()), 0.0, 1e-12);
  EXPECT_NEAR(unsigned_angle(Vec3::UnitZ(), Vec3::UnitX()), std::numbers::pi / 2, 1e-12);
}

TEST(Geometry, RadiusFallback) {
  Points p(5, 3);
  p << 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 3, 5, 5, 5;
  bool fb = false;
  // Only two points lie within radius 1, so the three nearest are used.
  EXPECT_EQ(radius_neighborhood(p, Vec3::Zero(), 1.0, &fb), (std::vector<int>{0, 1, 2}));
  EXPECT_TRUE(fb);
  EXPECT_EQ(radius_neighborhood(p, Vec3::Zero(), 2.0, &fb), (std::vector<int>{0, 1, 2}));
  EXPECT_FALSE(fb);
}

TEST(Geometry, DescriptorBoundsAndFallbackFlag) {
  Rng rng(4);
  const PointCloud cloud(pcad::testing::random_points(400, rng));
  const GroupSet gs = build_groups(cloud, 32, 16);
  for (const GeoDescriptor& d : compute_geo_descriptors(cloud, gs)) {
    EXPECT_GE(d.curvature, 0.0);
    EXPECT_LE(d.curvature, 1.0 / 3.0);
    EXPECT_NEAR(d.normal.norm(), 1.0, 1e-6);
    EXPECT_GE(d.v_norm, 0.0);
    EXPECT_LE(d.v_norm, std::numbers::pi / 2 + 1e-12);
  }
  const auto tiny = compute_geo_descriptors(cloud, std::vector<int>{0, 5}, 1e-9);
  EXPECT_TRUE(tiny[0].fallback);
  EXPECT_THROW(compute_geo_descriptors(cloud, std::vector<int>{400}, 0.1), InvalidArgument);
}

TEST(Geometry, RigidMotionInvariance) {
  Rng rng(5);
  const PointCloud cloud(wavy_surface(600, rng));
  const GroupSet gs = build_groups(cloud, 24, 16);
  const auto ref = compute_geo_descriptors(cloud, gs.center_indices, gs.adaptive_radius);
  for (int t = 0; t < 10; ++t) {
    Eigen::Matrix3d R;
    const PointCloud moved(pcad::testing::rigid_motion(cloud.points, rng, &R));
    const auto got = compute_geo_descriptors(moved, gs.center_indices, gs.adaptive_radius);
    for (std::size_t m = 0; m < ref.size(); ++m) {
      EXPECT_NEAR(got[m].curvature, ref[m].curvature, 1e-6);
      EXPECT_NEAR(got[m].v_norm, ref[m].v_norm, 1e-6);
      EXPECT_NEAR(got[m].v_curv, ref[m].v_curv, 1e-6);
      EXPECT_NEAR(std::abs(got[m].normal.dot(R * ref[m].normal)), 1.0, 1e-6);
    }
  }
}

TEST(GeoBias, IdenticalDescriptorsGiveIdenticalBias) {
  Decoder dec(6, 8, 2);
  std::vector<GeoDescriptor> d(5);
  for (auto& x : d) {
    x.v_norm = 0.3;
    x.v_curv = 0.01;
  }
  const Matrix s = standardized_variations(d);
  EXPECT_EQ(s, Matrix::Zero(5, 2));
  const Matrix b = geo_bias(d, dec.params).value();
  ASSERT_EQ(b.rows(), 1);
  ASSERT_EQ(b.cols(), 5);
  EXPECT_EQ(b, Matrix::Constant(1, 5, b(0, 0)));
}

TEST(GeoBias, ZeroWeightsGiveBiasTerm) {
  Decoder dec(7, 8, 2);
  dec.params.bias_mlp.first.weight.mutable_value().setZero();
  dec.params.bias_mlp.second.weight.mutable_value().setZero();
  dec.params.bias_mlp.second.bias.mutable_value().setConstant(0.25);
  Rng rng(8);
  EXPECT_EQ(geo_bias(random_matrix(4, 2, rng), dec.params.bias_mlp).value(), Matrix::Constant(1, 4, 0.25));
}

TEST(GeoBias, Standardization) {
  Rng rng(9);
  std::vector<GeoDescriptor> d(50);
  for (auto& x : d) {
    x.v_norm = rng.uniform(0, 1);
    x.v_curv = rng.uniform(0, 0.1);
  }
  const Matrix s = standardized_variations(d);
  EXPECT_LT(s.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(s.col(0).squaredNorm() / 50.0, 1.0, 1e-9);
}

TEST(GeoBias, GoldenVector) {
  Decoder dec(42, 8, 2);
  Matrix s(3, 2);
  s << -1.0, 0.5, 0.0, -1.2, 1.0, 0.7;
  const Matrix b = geo_bias(s, dec.params.bias_mlp).value();
  Matrix golden(1, 3);
  golden << -1.132077073040697, -0.86767382428933859, 0.035831426119569021;
  EXPECT_LT((b - golden).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BiasedAttention, TwoKeyExample) {
  std::vector<Matrix> w;
  const Tensor q = Tensor::constant(Matrix::Ones(1, 8));
  const Tensor k = Tensor::constant(Matrix::Ones(2, 8));
  const Tensor bias = Tensor::constant((Matrix(1, 2) << std::log(2.0), 0.0).finished());
  biased_attention(q, k, k, bias, Tensor::constant(Matrix::Ones(1, 1)), 8, &w);
  for (const Matrix& h : w) {
    EXPECT_NEAR(h(0, 0), 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(h(0, 1), 1.0 / 3.0, 1e-15);
  }
}

TEST(BiasedAttention, ZeroBetaAndShiftInvariance) {
  Rng rng(10);
  const Tensor q = Tensor::constant(random_matrix(4, 16, rng));
  const Tensor k = Tensor::constant(random_matrix(7, 16, rng));
  const Tensor v = Tensor::constant(random_matrix(7, 16, rng));
  const Matrix b = random_matrix(1, 7, rng);
  const Tensor beta0 = Tensor::constant(Matrix::Zero(1, 1));
  const Matrix plain = nn::multi_head_attention(q, k, v, 8).value();
  EXPECT_EQ(biased_attention(q, k, v, Tensor::constant(b), beta0, 8).value(), plain);
  const Tensor beta = Tensor::constant(Matrix::Constant(1, 1, 1.5));
  const Matrix a = biased_attention(q, k, v, Tensor::constant(b), beta, 8).value();
  const Matrix shifted = biased_attention(q, k, v, Tensor::constant(b.array() + 3.25), beta, 8).value();
  EXPECT_LT((a - shifted).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Decode, ShapesAndSingleGroup) {
  Decoder dec(11, 8, 2);
  Rng rng(12);
  const Tensor z = Tensor::constant(random_matrix(1, 6, rng));
  const Tensor out = decode(z, Tensor::constant(random_matrix(1, 8, rng)), Tensor::constant(random_matrix(1, 1, rng)),
                            random_matrix(1, 3, rng), dec.params);
  EXPECT_EQ(out.rows(), 1);
  EXPECT_EQ(out.cols(), 8);
  EXPECT_THROW(decode(z, Tensor::constant(random_matrix(2, 8, rng)), Tensor::constant(random_matrix(1, 3, rng)),
                      random_matrix(2, 3, rng), dec.params),
               InvalidArgument);
}

TEST(Decode, IdenticalBranchesGiveIdenticalHalves) {
  Decoder dec(13, 8, 2);
  DecoderBlock& b = dec.params.blocks[0];
  b.branches[1].wq.weight.mutable_value() = b.branches[0].wq.weight.value();
  b.branches[1].wk.weight.mutable_value() = b.branches[0].wk.weight.value();
  b.branches[1].wv.weight.mutable_value() = b.branches[0].wv.weight.value();
  b.branches[1].wo.weight.mutable_value() = b.branches[0].wo.weight.value();
  for (auto br : {&AttentionBranch::wq, &AttentionBranch::wk, &AttentionBranch::wv, &AttentionBranch::wo}) {
    (b.branches[1].*br).bias.mutable_value() = (b.branches[0].*br).bias.value();
  }
  // With ffn1 reading only the second half, then only the first, the outputs agree.
  Rng rng(14);
  const Tensor z = Tensor::constant(random_matrix(1, 6, rng));
  const Tensor base = Tensor::constant(random_matrix(5, 8, rng));
  const Tensor bias = Tensor::constant(random_matrix(1, 5, rng));
  const Matrix centers = random_matrix(5, 3, rng);
  const Matrix w = b.ffn1.weight.value();
  b.ffn1.weight.mutable_value().bottomRows(8).setZero();
  const Matrix first = decode(z, base, bias, centers, dec.params).value();
  b.ffn1.weight.mutable_value() = w;
  b.ffn1.weight.mutable_value().bottomRows(8) = w.topRows(8);
  b.ffn1.weight.mutable_value().topRows(8).setZero();
  const Matrix second = decode(z, base, bias, centers, dec.params).value();
  EXPECT_LT((first - second).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Decode, ZeroBetaEqualsUnguided) {
  Decoder biased(15, 8, 2);
  Decoder plain(15, 8, 2, nn::Guidance::none);
  biased.params.beta.mutable_value().setZero();
  Rng rng(16);
  const Tensor z = Tensor::constant(random_matrix(1, 6, rng));
  const Tensor base = Tensor::constant(random_matrix(5, 8, rng));
  const Matrix centers = random_matrix(5, 3, rng);
  EXPECT_EQ(decode(z, base, Tensor::constant(random_matrix(1, 5, rng)), centers, biased.params).value(),
            decode(z, base, Tensor(), centers, plain.params).value());
}

TEST(Decode, GoldenMatrix) {
  Decoder dec(42, 4, 2);
  Matrix base(2, 4), centers(2, 3), z(1, 6), bias(1, 2);
  base << 0.1, -0.2, 0.3, 0.4, -0.5, 0.6, 0.0, 0.2;
  centers << 0.1, 0.2, 0.3, -0.1, 0.0, 0.25;
  z << 0.5, -0.5, 0.5, -0.5, 0.0, 0.0;
  bias << 0.3, -0.7;
  const Matrix out =
      decode(Tensor::constant(z), Tensor::constant(base), Tensor::constant(bias), centers, dec.params).value();
  Matrix golden(2, 4);
  golden << 5.6946601950345414e-07, 1.4326919741390335e-07, -6.3429578330193766e-07, 6.354516429930265e-07,
      5.6946599014331087e-07, 1.4326920828641236e-07, -6.3429571526723945e-07, 6.354516184235722e-07;
  // Small-scale initialization keeps the output near zero, so compare relatively.
  EXPECT_LT((out - golden).norm(), 1e-10 * golden.norm());
}

TEST(Decode, Gradients) {
  Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    Decoder dec(100 + t, 4, 2);
    pcad::testing::randomize(dec.store, rng, 0.5);
    dec.params.beta = Tensor::parameter(Matrix::Constant(1, 1, 0.9));
    Tensor z = Tensor::parameter(random_matrix(1, 6, rng));
    Tensor base = Tensor::parameter(random_matrix(3, 4, rng));
    const Matrix desc = random_matrix(3, 2, rng);
    const Matrix centers = random_matrix(3, 3, rng);
    const Tensor target = Tensor::constant(random_matrix(3, 4, rng));
    auto loss = [&] {
      const Tensor bias = geo_bias(desc, dec.params.bias_mlp);
      return rec_loss(decode(z, base, bias, centers, dec.params), target);
    };
    EXPECT_TRUE(check_gradients(loss, {z, base, dec.params.beta, dec.params.bias_mlp.first.weight,
                                       dec.params.blocks[0].ffn1.weight})
                    .ok())
        << t;
    // The output bias shifts every logit equally, so its gradient vanishes.
    EXPECT_LT(dec.params.bias_mlp.second.bias.grad().norm(), 1e-12);
  }
}

TEST(RecLoss, ExamplesAndGradient) {
  Rng rng(18);
  const Matrix f = random_matrix(4, 3, rng);
  EXPECT_EQ(rec_loss(Tensor::constant(f), Tensor::constant(f)).item(), 0.0);
  const Matrix r = random_matrix(4, 3, rng);
  const double base = rec_loss(Tensor::constant(f + r), Tensor::constant(f)).item();
  EXPECT_NEAR(rec_loss(Tensor::constant(f + 3.0 * r), Tensor::constant(f)).item(), 9.0 * base, 1e-12);
  for (int t = 0; t < 20; ++t) {
    Tensor pred = Tensor::parameter(random_matrix(3, 5, rng));
    Tensor target = Tensor::parameter(random_matrix(3, 5, rng));
    EXPECT_TRUE(check_gradients([&] { return rec_loss(pred, target); }, {pred}).ok());
    target.zero_grad();
    nn::backward(rec_loss(pred, target));
    EXPECT_EQ(target.grad(), Matrix::Zero(3, 5));
  }
}
