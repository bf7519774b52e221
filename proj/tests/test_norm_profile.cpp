#include <random>

#include <gtest/gtest.h>

#include "hypl2/norm_profile.hpp"

using namespace hypl2;

namespace {

const double kGolden2 = (3 + std::sqrt(5.0)) / 2;

NormProfile exp_split(double a = 1.0) {
  return NormProfile::exponential_split(Mat::Identity(2, 1), Mat(Mat::Identity(2, 2).col(1)), a);
}

NormProfile cat_profile() { return NormProfile::periodic_pa(validate_symplectic(IntMatrix{{2, 1}, {1, 1}}), Mat::Identity(2, 2)); }

Vec cat_unstable() {
  Vec v(2);
  v << (1 + std::sqrt(5.0)) / 2, 1.0;  // eigenvector of [[2,1],[1,1]] for (3+sqrt5)/2
  return v.normalized();
}

}  // namespace

TEST(Gram, Examples) {
  auto p = exp_split();
  const Mat g = p.gram(0.7);
  EXPECT_NEAR(g(0, 0), std::exp(1.4), 1e-12);
  EXPECT_NEAR(g(1, 1), std::exp(-1.4), 1e-12);
  EXPECT_NEAR(g(0, 1), 0.0, 1e-15);

  auto q = NormProfile::polynomial(Vec::Ones(1), Vec::Ones(1));
  EXPECT_NEAR(q.gram(3.0)(0, 0), 4.0, 1e-14);

  Mat expected(2, 2);
  expected << 5, 3, 3, 2;
  EXPECT_LT((cat_profile().gram(1.0) - expected).norm(), 1e-12);
}

TEST(Gram, OutOfRangeAndCorruptSamples) {
  auto s = NormProfile::sampled({0.0, 1.0}, {Mat::Identity(2, 2), 2 * Mat::Identity(2, 2)});
  EXPECT_THROW(s.gram(1.5), Error);
  Mat bad(2, 2);
  bad << 1, 2, 2, 1;
  try {
    NormProfile::sampled({0.0}, {bad});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
  }
  auto ext = NormProfile::sampled({0.0, 1.0}, {Mat::Identity(2, 2), 2 * Mat::Identity(2, 2)}, true);
  EXPECT_NEAR(ext.gram(2.0)(0, 0), 4.0, 1e-12);  // log-linear extrapolation
}

TEST(Gram, SampledReproducesKnotsAndIsSPD) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> gauss;
  std::vector<double> t;
  std::vector<Mat> g;
  for (int i = 0; i < 6; ++i) {
    Mat a = Mat::NullaryExpr(3, 3, [&] { return gauss(rng); });
    t.push_back(0.5 * i);
    g.push_back(a * a.transpose() + 0.1 * Mat::Identity(3, 3));
  }
  auto p = NormProfile::sampled(t, g);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(p.gram(t[i]), g[i]);
  for (double s = 0; s <= 2.5; s += 0.01) EXPECT_TRUE(cholesky_ok(p.gram(s)));
}

TEST(Norm, Examples) {
  auto p = exp_split();
  EXPECT_EQ(p.norm(1.0, Vec::Zero(2)), 0.0);
  EXPECT_NEAR(p.norm(2.0, Vec::Unit(2, 0)), std::exp(2.0), 1e-12);
  EXPECT_THROW(p.norm(1.0, Vec::Zero(3)), Error);

  auto c = cat_profile();
  const Vec v = cat_unstable();
  const double n0 = c.norm(0.0, v);
  for (int n = 1; n <= 12; ++n) EXPECT_NEAR(c.norm(n, v) / (std::pow(kGolden2, n) * n0), 1.0, 1e-9);
}

TEST(Norm, HomogeneousAndPeriodic) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unif(0.0, 6.0);
  std::normal_distribution<double> gauss;
  auto c = cat_profile();
  const Mat phi = c.periodic()->phi;
  for (int i = 0; i < 200; ++i) {
    const double t = unif(rng);
    Vec v(2);
    v << gauss(rng), gauss(rng);
    const double alpha = gauss(rng);
    EXPECT_NEAR(c.norm(t, alpha * v), std::abs(alpha) * c.norm(t, v), 1e-12 * c.norm(t, v) * (1 + std::abs(alpha)));
    EXPECT_NEAR(c.norm(t + 1, v) / c.norm(t, phi * v), 1.0, 1e-9);
    EXPECT_TRUE(cholesky_ok(c.gram(t)));
  }
  std::vector<double> grid;
  for (double t = 0; t < 5; t += 0.125) grid.push_back(t);
  EXPECT_LT(c.periodicity_defect(grid), 1e-10);
}

TEST(Norm, TransferMatchesFactors) {
  auto c = cat_profile();
  for (double t1 : {0.3, 1.7, 2.0}) {
    const double t2 = t1 + 0.45;
    const Mat direct = c.factor(t2) * c.factor(t1).inverse();
    EXPECT_LT((c.transfer(t1, t2) - direct).norm(), 1e-9 * direct.norm());
  }
}

TEST(Periodic, RefusesJordanBlock) {
  EXPECT_THROW(NormProfile::periodic_pa(validate_symplectic(IntMatrix{{1, 1}, {0, 1}}), Mat::Identity(2, 2)), Error);
}

TEST(ClassifyGrowth, Examples) {
  auto e = classify_growth(exp_split(), Vec::Unit(2, 0), 0.0, 10.0);
  EXPECT_NEAR(e.exponent_estimate, 1.0, 0.01);

  auto q = NormProfile::polynomial(Vec::Ones(1), Vec::Ones(1));
  const double s1 = classify_growth(q, Vec::Ones(1), 10, 20).exponent_estimate;
  const double s2 = classify_growth(q, Vec::Ones(1), 100, 200).exponent_estimate;
  EXPECT_LT(s2, s1);
  EXPECT_LT(s2, 0.01);

  auto c = classify_growth(cat_profile(), cat_unstable(), 0.0, 20.0);
  EXPECT_NEAR(c.exponent_estimate, std::log(kGolden2), 0.02);

  EXPECT_THROW(classify_growth(q, Vec::Ones(1), 0.0, 0.5), Error);
}

TEST(SplitHypothesis, Examples) {
  std::vector<double> grid;
  for (double s = 0; s <= 10; s += 0.5) grid.push_back(s);
  auto p = exp_split();
  const Mat ep = Mat::Identity(2, 2).col(0), em = Mat::Identity(2, 2).col(1);
  EXPECT_TRUE(verify_split_hypothesis(p, ep, em, 0.9, 0.9, 1 / 0.9, grid).holds);
  // at s1 = s2 the contracting inequality needs c- >= 1
  auto tight = verify_split_hypothesis(p, ep, em, 0.9, 0.9, 0.9, grid);
  EXPECT_FALSE(tight.holds);
  EXPECT_FALSE(tight.worst.plus_side);
  EXPECT_EQ(tight.worst.s1, tight.worst.s2);
  EXPECT_FALSE(verify_split_hypothesis(p, ep, em, 1.1, 1.0, 1.0, grid).holds);

  auto q = NormProfile::polynomial(Vec::Ones(1), Vec::Ones(1));
  auto r = verify_split_hypothesis(q, Mat::Ones(1, 1), Mat(1, 0), 0.1, 1.0, 1.0, grid);
  EXPECT_FALSE(r.holds);
  EXPECT_TRUE(r.worst.plus_side);
  EXPECT_LT(r.worst.margin, 0.0);
  EXPECT_GT(r.worst.s1, r.worst.s2);
}

TEST(SplitHypothesis, UnitCircleDirectionsBreakIt) {
  IntMatrix m = symplectic_direct_sum(IntMatrix{{2, 1}, {1, 1}}, IntMatrix{{0, -1}, {1, 0}});
  auto p = NormProfile::periodic_pa(validate_symplectic(m), Mat::Identity(4, 4));
  const auto& split = p.periodic()->split;
  std::vector<double> grid;
  for (double s = 0; s <= 6; s += 0.25) grid.push_back(s);
  const double a = 0.5 * std::log(kGolden2);
  // expanding and contracting alone do not span
  auto r1 = verify_split_hypothesis(p, split.pairs[0].basis_plus, split.pairs[0].basis_minus, a, 0.5, 2.0, grid);
  EXPECT_FALSE(r1.spans);
  EXPECT_FALSE(r1.holds);
  // putting E0 into E+ violates growth on E0 directions
  Mat ep(4, 3);
  ep << split.pairs[0].basis_plus, split.e0_basis;
  auto r2 = verify_split_hypothesis(p, ep, split.pairs[0].basis_minus, a, 0.5, 2.0, grid);
  EXPECT_TRUE(r2.spans);
  EXPECT_FALSE(r2.holds);
  EXPECT_TRUE(r2.worst.plus_side);
  EXPECT_LT((split.e0_basis * (split.e0_basis.transpose() * r2.worst.direction) - r2.worst.direction).norm(), 0.5);
}
