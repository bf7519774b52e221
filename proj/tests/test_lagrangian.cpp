#include <random>

#include <gtest/gtest.h>

#include "hypl2/lagrangian.hpp"

using namespace hypl2;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

const IntMatrix kCat{{2, 1}, {1, 1}};

SymplecticMatrix hyperbolic(int g) {
  IntMatrix m = kCat;
  const IntMatrix extra[] = {IntMatrix{{3, 1}, {2, 1}}, IntMatrix{{5, 2}, {2, 1}}};
  for (int i = 1; i < g; ++i) m = symplectic_direct_sum(m, extra[(i - 1) % 2]);
  return validate_symplectic(m);
}

Mat a_cycles(int g) {
  Mat a = Mat::Zero(2 * g, g);
  a.topRows(g) = Mat::Identity(g, g);
  return a;
}

Mat random_invertible(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  for (;;) {
    Mat m = Mat::NullaryExpr(n, n, [&] { return gauss(rng); });
    if (std::abs(m.determinant()) > 0.1) return m;
  }
}

}  // namespace

TEST(Space, FormIsAntisymmetricAndNondegenerate) {
  SymplecticSpace v({{2, 1}, {1, -1}, {3, 1}});
  EXPECT_EQ(v.dim(), 12);
  EXPECT_EQ(v.half_dim(), 6);
  EXPECT_LT((v.form() + v.form().transpose()).norm(), 1e-15);
  EXPECT_EQ(numerical_rank(v.form()), 12);
  EXPECT_EQ(code_of([] { SymplecticSpace({{1, 0}}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { SymplecticSpace({{0, 1}}); }), ErrorCode::InvalidArgument);
}

TEST(Lagrangian, Examples) {
  for (int g = 1; g <= 3; ++g) {
    EXPECT_TRUE(is_lagrangian(Subspace(a_cycles(g)), SymplecticSpace({{g, 1}})));
    Mat diag(4 * g, 2 * g);
    diag << Mat::Identity(2 * g, 2 * g), Mat::Identity(2 * g, 2 * g);
    EXPECT_TRUE(is_lagrangian(Subspace(diag), SymplecticSpace({{g, 1}, {g, -1}})));
    EXPECT_FALSE(is_lagrangian(Subspace(diag), SymplecticSpace({{g, 1}, {g, 1}})));
    // isotropic but too small
    EXPECT_FALSE(is_lagrangian(Subspace(a_cycles(g).leftCols(g - 1 > 0 ? g - 1 : 0)), SymplecticSpace({{g, 1}})));
  }
  EXPECT_EQ(code_of([] { is_lagrangian(Subspace(a_cycles(2)), SymplecticSpace({{1, 1}})); }), ErrorCode::DimensionMismatch);
}

TEST(Lagrangian, PreservedBySymplecticMaps) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 40; ++t) {
    const std::size_t g = 1 + t % 3;
    const Mat a = random_symplectic_word(g, 8, rng).to_double();
    const Mat b = random_symplectic_word(g, 8, rng).to_double();
    const auto n = static_cast<Eigen::Index>(2 * g);
    SymplecticSpace v({{static_cast<int>(g), 1}, {static_cast<int>(g), -1}});
    Mat t2 = Mat::Zero(2 * n, 2 * n);
    t2.topLeftCorner(n, n) = a;
    t2.bottomRightCorner(n, n) = b;
    Mat diag(2 * n, n);
    diag << Mat::Identity(n, n), Mat::Identity(n, n);
    EXPECT_TRUE(is_lagrangian(Subspace(t2 * diag), v, 1e-10));
    EXPECT_TRUE(is_lagrangian(Subspace(a * a_cycles(static_cast<int>(g))), SymplecticSpace({{static_cast<int>(g), 1}}), 1e-10));
  }
}

TEST(Intersect, ProductCoreExamples) {
  for (int g : {1, 2, 3}) {
    const auto cover = product_core(hyperbolic(g), false);
    const auto dbl = product_core(hyperbolic(g), true);
    EXPECT_TRUE(is_lagrangian(cover.l1, cover.space, 1e-10));
    EXPECT_TRUE(is_lagrangian(cover.l2, cover.space, 1e-10));
    EXPECT_TRUE(is_lagrangian(dbl.l2, dbl.space, 1e-10));
    EXPECT_EQ(intersect(cover.l1, cover.l2).dim(), 0);
    EXPECT_EQ(intersect(dbl.l1, dbl.l2).dim(), g);
  }
}

TEST(Intersect, Idempotent) {
  const auto c = product_core(hyperbolic(2), false);
  const Subspace s = intersect(c.l1, c.l1);
  EXPECT_EQ(s.dim(), c.l1.dim());
  EXPECT_TRUE(s.contains(c.l1));
  EXPECT_TRUE(c.l1.contains(s));
}

TEST(Intersect, GrassmannIdentity) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss;
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 7;
    // a shared part of random size forces nontrivial intersections
    const int k = static_cast<int>(rng() % n), ra = k + static_cast<int>(rng() % (n - k + 1)),
              rb = k + static_cast<int>(rng() % (n - k + 1));
    const Mat shared = Mat::NullaryExpr(n, k, [&] { return gauss(rng); });
    Mat ga(n, ra), gb(n, rb);
    ga << shared, Mat::NullaryExpr(n, ra - k, [&] { return gauss(rng); });
    gb << shared, Mat::NullaryExpr(n, rb - k, [&] { return gauss(rng); });
    const Subspace a(ga), b(gb);
    EXPECT_EQ(intersect(a, b).dim() + sum(a, b).dim(), a.dim() + b.dim());
  }
}

TEST(Intersect, LagrangianBounds) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 50; ++t) {
    const std::size_t g = 1 + t % 3;
    const Mat a = random_symplectic_word(g, 10, rng).to_double();
    const Mat b = random_symplectic_word(g, 10, rng).to_double();
    const Mat base = a_cycles(static_cast<int>(g));
    const int d = intersect(Subspace(a * base), Subspace(b * base)).dim();
    EXPECT_GE(d, 0);
    EXPECT_LE(d, static_cast<int>(g));
  }
  const auto cover = product_core(hyperbolic(3), false), dbl = product_core(hyperbolic(3), true);
  EXPECT_EQ(intersect(cover.l1, cover.l2).dim(), 0);
  EXPECT_EQ(intersect(dbl.l1, dbl.l2).dim(), 3);
}

TEST(ReducedH1, ProductCore) {
  for (int g : {2, 3}) {
    const auto cover = product_core(hyperbolic(g), false);
    const auto dbl = product_core(hyperbolic(g), true);
    const auto rc = reduced_h1_dim(cover.interior_map, cover.l1, cover.l2, true);
    const auto rd = reduced_h1_dim(dbl.interior_map, dbl.l1, dbl.l2, true);
    EXPECT_EQ(rc.dim, 0);
    EXPECT_EQ(rd.dim, g);
    EXPECT_EQ(rd.interior_rank, 0);
    EXPECT_EQ(rd.intersection_dim, g);
  }
}

TEST(ReducedH1, AttestationFromEndVerdicts) {
  const auto cat = validate_symplectic(kCat);
  const auto end = end_verdict(NormProfile::periodic_pa(cat, Mat::Identity(2, 2)));
  ASSERT_EQ(end.verdict, EndVerdict::ClosedImage);
  EXPECT_TRUE(closed_image_attested({end, end}));
  EXPECT_FALSE(closed_image_attested({}));
  EndResult unknown;
  EXPECT_FALSE(closed_image_attested({end, unknown}));
  const auto c = product_core(cat, false);
  EXPECT_EQ(reduced_h1_dim(c.interior_map, c.l1, c.l2, closed_image_attested({end, end})).dim, 0);
  EXPECT_EQ(code_of([&] { reduced_h1_dim(c.interior_map, c.l1, c.l2, closed_image_attested({end, unknown})); }),
            ErrorCode::PreconditionNotAttested);
}

TEST(ReducedH1, RankAdditivity) {
  for (int k = 1; k <= 4; ++k) {
    const Subspace a(Mat::Identity(4, 2)), b(Mat::Identity(4, 4).rightCols(2));
    EXPECT_EQ(reduced_h1_dim(Mat::Identity(k, k), a, b, true).dim, k);
  }
}

TEST(ReducedH1, BasisChangeInvariant) {
  std::mt19937_64 rng(21);
  for (int g : {2, 3}) {
    for (bool doubled : {false, true}) {
      const auto c = product_core(hyperbolic(g), doubled);
      const int ref = reduced_h1_dim(c.interior_map, c.l1, c.l2, true).dim;
      for (int t = 0; t < 5; ++t) {
        const Mat im = random_invertible(2 * g, rng) * Mat::Identity(2 * g, 3) * random_invertible(3, rng);
        const Subspace l1(c.l1.basis() * random_invertible(c.l1.dim(), rng));
        const Subspace l2(c.l2.basis() * random_invertible(c.l2.dim(), rng));
        EXPECT_EQ(reduced_h1_dim(c.interior_map, l1, l2, true).dim, ref);
        EXPECT_EQ(reduced_h1_dim(im, c.l1, c.l2, true).dim, ref + 3);
      }
    }
  }
}

TEST(GeomFinite, Rank) {
  EXPECT_EQ(geom_finite_reduced_h1(Mat::Zero(3, 4)), 0);
  EXPECT_EQ(geom_finite_reduced_h1(Mat::Identity(5, 5)), 5);
  EXPECT_EQ(geom_finite_reduced_h1((Mat(2, 2) << 1, 1, 1, 1).finished()), 1);
}

TEST(ProductCore, RejectsUnitCircleSpectrum) {
  EXPECT_EQ(code_of([] { product_core(validate_symplectic(IntMatrix{{0, -1}, {1, 0}}), false); }),
            ErrorCode::InvalidArgument);
}
