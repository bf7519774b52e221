#include <random>

#include <gtest/gtest.h>

#include "hypl2/mapping_torus.hpp"

using namespace hypl2;

namespace {

FiberAutomorphism surface(const IntMatrix& m) { return FiberAutomorphism::surface(validate_symplectic(m)); }
const IntMatrix kCat{{2, 1}, {1, 1}};
const IntMatrix kRot{{0, -1}, {1, 0}};

}  // namespace

TEST(Wang, IdentityFiber) {
  for (std::size_t g = 1; g <= 3; ++g) {
    auto phi = surface(IntMatrix::identity(2 * g));
    auto d = wang_dims(phi, 1, {1.0, 0.0});
    EXPECT_EQ(d.coker_dim, 1);
    EXPECT_EQ(d.ker_dim, static_cast<int>(2 * g));
    EXPECT_EQ(d.h_dim, static_cast<int>(2 * g + 1));
    d = wang_dims(phi, 1, {0.0, 1.0});
    EXPECT_EQ(d.h_dim, 0);
    // degrees 0 and 3 of a 3-manifold
    EXPECT_EQ(wang_dims(phi, 0, {1.0, 0.0}).h_dim, 1);
    EXPECT_EQ(wang_dims(phi, 3, {1.0, 0.0}).h_dim, 1);
  }
}

TEST(Wang, CatMap) {
  auto phi = surface(kCat);
  auto d = wang_dims(phi, 1, {1.0, 0.0});
  EXPECT_EQ(d.coker_dim, 1);
  EXPECT_EQ(d.ker_dim, 0);
  EXPECT_EQ(d.h_dim, 1);
}

TEST(Wang, Errors) {
  auto phi = surface(kCat);
  try {
    wang_dims(phi, 1, {1.1, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotUnitModulus);
  }
  try {
    wang_dims(phi, 5, {1.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegreeOutOfRange);
  }
  EXPECT_THROW(FiberAutomorphism({IntMatrix{{2}}}), Error);
}

TEST(Exceptional, Examples) {
  auto r = reduced_l2_vanishes(surface(IntMatrix::identity(4)), 1);
  EXPECT_TRUE(r.vanishes);
  ASSERT_EQ(r.exceptional_lambdas.size(), 1u);
  EXPECT_EQ(r.exceptional_lambdas[0].lambda.value, std::complex<double>(1.0, 0.0));
  EXPECT_EQ(r.exceptional_lambdas[0].dims.h_dim, 5);

  r = reduced_l2_vanishes(surface(kCat), 1);
  ASSERT_EQ(r.exceptional_lambdas.size(), 1u);
  EXPECT_EQ(r.exceptional_lambdas[0].lambda.value, std::complex<double>(1.0, 0.0));
  EXPECT_EQ(r.exceptional_lambdas[0].dims.h_dim, 1);

  r = reduced_l2_vanishes(surface(kCat).restricted_to(1), 1);
  EXPECT_TRUE(r.exceptional_lambdas.empty());
}

TEST(Exceptional, RotationBlockGivesConjugatePair) {
  auto phi = surface(symplectic_direct_sum(kCat, kRot));
  auto r = reduced_l2_vanishes(phi, 1);
  // lambda = -i, 1, i
  ASSERT_EQ(r.exceptional_lambdas.size(), 3u);
  EXPECT_NEAR(r.exceptional_lambdas[0].lambda.value.imag(), -1.0, 1e-14);
  EXPECT_NEAR(r.exceptional_lambdas[2].lambda.value.imag(), 1.0, 1e-14);
  EXPECT_EQ(r.exceptional_lambdas[0].dims.h_dim, r.exceptional_lambdas[2].dims.h_dim);
  EXPECT_EQ(r.exceptional_lambdas[2].dims.ker_dim, 1);
  EXPECT_TRUE(r.exceptional_lambdas[2].lambda.exact());
}

TEST(Exceptional, ConjugateSymmetryAndInverseInvariance) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t g = 1 + trial % 3;
    auto phi = FiberAutomorphism::surface(random_symplectic_word(g, 10, rng));
    auto r = reduced_l2_vanishes(phi, 1);
    auto ri = reduced_l2_vanishes(phi.inverse(), 1);
    int total = 0, total_inv = 0;
    for (const auto& e : r.exceptional_lambdas) {
      total += e.dims.h_dim;
      const auto conj = wang_dims(phi, 1, std::conj(e.lambda.value));
      EXPECT_EQ(conj.h_dim, e.dims.h_dim);
    }
    for (const auto& e : ri.exceptional_lambdas) total_inv += e.dims.h_dim;
    EXPECT_EQ(total, total_inv);
  }
}

TEST(ZeroInSpectrum, Examples) {
  EXPECT_FALSE(zero_in_spectrum_unreduced(surface(kCat), 1));
  EXPECT_TRUE(zero_in_spectrum_unreduced(surface(IntMatrix::identity(2)), 1));
  EXPECT_TRUE(zero_in_spectrum_unreduced(surface(symplectic_direct_sum(kCat, kRot)), 1));
  // the image-closure side sees phi_0 = [1]
  EXPECT_TRUE(zero_in_spectrum_image_closure(surface(kCat), 1));
}

TEST(ZeroInSpectrum, ConsistentWithSymplecticCore) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto m = random_symplectic_word(1 + trial % 3, 12, rng);
    EXPECT_EQ(zero_in_spectrum_unreduced(FiberAutomorphism::surface(m), 1), has_unit_circle_eigenvalue(m).verdict);
  }
}
