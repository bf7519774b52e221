#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "hypl2/zorich.hpp"

using namespace hypl2;
using detail::Mp;

namespace {

const double kPhi = (1 + std::sqrt(5.0)) / 2;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;  // sentinel: nothing thrown
}

QuadraticSurd q(long long a, long long b, long long den = 1) { return {Rational(a, den), Rational(b, den)}; }

const QuadraticSurd kP = QuadraticSurd(Rational(3, 10));

std::vector<ReturnLoopRecord> golden_loops(long long n, ReturnPolicy policy) {
  const auto g = golden_rotation();
  return return_loops(g, kP, QuadraticSurd(0), g.lengths()[0], n, policy);
}

// Rotation x -> frac(x + alpha), alpha = 2 - phi, in 200-digit floats: an
// independent orbit for the 2-IET.
struct RotationOracle {
  struct Return {
    long long iterations;
    long long v1;
  };
  static std::vector<Return> first_returns(int n) {
    detail::PrecisionScope scope(200);
    const Mp s5 = sqrt(Mp(5));
    const Mp alpha = (Mp(3) - s5) / 2, first = (s5 - 1) / 2;
    Mp x = Mp(3) / 10;
    long long it = 0, v1 = 0;
    std::vector<Return> out;
    while (static_cast<int>(out.size()) < n) {
      if (x < first) ++v1;
      x += alpha;
      if (x >= 1) x -= 1;
      ++it;
      if (x < first) out.push_back({it, v1});
    }
    return out;
  }
  // continued-fraction denominators of alpha
  static std::vector<long long> convergent_denominators(int count) {
    detail::PrecisionScope scope(200);
    Mp x = (Mp(3) - sqrt(Mp(5))) / 2;
    long long q0 = 1, q1 = 0;  // q_{-1}, q_{-2}
    std::vector<long long> out;
    for (int k = 0; k < count; ++k) {
      const Mp inv = 1 / x;
      const long long a = static_cast<long long>(floor(inv));
      x = inv - a;
      const long long qn = a * q0 + q1;
      out.push_back(qn);
      q1 = q0;
      q0 = qn;
    }
    return out;
  }
};

double angle_to(const Mat& basis, const Vec& v) {
  const Mat qb = orthonormal_range(basis);
  const Vec u = v.normalized();
  return (u - qb * (qb.transpose() * u)).norm();
}

}  // namespace

TEST(Iet, GoldenFirstStepIsRotation) {
  const auto g = golden_rotation();
  EXPECT_EQ(g.iterate(QuadraticSurd(0)), q(3, -1, 2));  // 2 - phi
  const auto s = g.step(q(3, -1, 2));
  EXPECT_EQ(s.interval, 0);
  EXPECT_EQ(s.x, q(3, -1, 2) + q(3, -1, 2));
}

TEST(Iet, RationalThreeInterval) {
  IntervalExchange<Rational> t({Rational(1, 3), Rational(1, 2), Rational(1, 6)}, {3, 2, 1});
  EXPECT_EQ(t.iterate(Rational(1, 10)), Rational(23, 30));
  EXPECT_EQ(t.iterate(Rational(1, 2)), Rational(1, 3));
  EXPECT_EQ(t.iterate(Rational(9, 10)), Rational(1, 15));
}

TEST(Iet, IsAPiecewiseIsometricBijection) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + trial % 4;
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 1);
    std::vector<Rational> len;
    for (;;) {
      std::shuffle(perm.begin(), perm.end(), rng);
      bool ok = true;
      for (int k = 1; k < m && ok; ++k) ok = *std::max_element(perm.begin(), perm.begin() + k) != k;
      if (ok) break;
    }
    std::vector<long long> w(m);
    long long tot = 0;
    for (auto& x : w) tot += (x = 1 + static_cast<long long>(rng() % 9));
    for (auto x : w) len.emplace_back(x, tot);
    IntervalExchange<Rational> t(len, perm);
    // images of the subintervals tile [0, 1)
    std::vector<std::pair<Rational, Rational>> img;
    for (int i = 0; i < m; ++i) img.push_back({t.left(i) + t.translation(i), t.left(i) + t.translation(i) + len[i]});
    std::sort(img.begin(), img.end());
    EXPECT_EQ(img.front().first, 0);
    for (int i = 1; i < m; ++i) EXPECT_EQ(img[i].first, img[i - 1].second);
    EXPECT_EQ(img.back().second, 1);
  }
}

TEST(Iet, Rejections) {
  EXPECT_EQ(code_of([] { IntervalExchange<Rational>({Rational(1, 2), Rational(1, 2)}, {1, 2}); }), ErrorCode::Reducible);
  EXPECT_EQ(code_of([] { IntervalExchange<Rational>({Rational(1, 2), Rational(1, 3)}, {2, 1}); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { IntervalExchange<Rational>({Rational(1, 2), Rational(1, 2)}, {2, 2}); }),
            ErrorCode::InvalidArgument);
  const auto g = golden_rotation();
  EXPECT_EQ(code_of([&] { g.iterate(q(-1, 1, 2)); }), ErrorCode::BoundaryHit);
  EXPECT_EQ(code_of([&] { g.iterate(QuadraticSurd(1)); }), ErrorCode::OutOfRange);
}

TEST(Iet, BoundaryHit) {
  IntervalExchange<Rational> t({Rational(1, 3), Rational(1, 2), Rational(1, 6)}, {3, 2, 1});
  EXPECT_EQ(code_of([&] { t.iterate(Rational(1, 3)); }), ErrorCode::BoundaryHit);
  EXPECT_EQ(code_of([&] { t.iterate(Rational(5, 6)); }), ErrorCode::BoundaryHit);
  const auto gf = golden_rotation_float();
  EXPECT_EQ(code_of([&] { gf.iterate(gf.left(1)); }), ErrorCode::BoundaryHit);
}

TEST(Loops, MatchDirectSimulation) {
  const auto loops = golden_loops(2000, ReturnPolicy::First);
  const auto ref = RotationOracle::first_returns(2000);
  ASSERT_EQ(loops.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    EXPECT_EQ(loops[i].iterations, ref[i].iterations);
    EXPECT_EQ(loops[i].visits[0], ref[i].v1);
    EXPECT_EQ(loops[i].visits[1], ref[i].iterations - ref[i].v1);
  }
}

TEST(Loops, ClosestReturnsAreConvergentDenominators) {
  const auto loops = golden_loops(10000, ReturnPolicy::Closest);
  const auto den = RotationOracle::convergent_denominators(30);
  ASSERT_GE(loops.size(), 15u);
  for (const auto& r : loops) EXPECT_NE(std::find(den.begin(), den.end(), r.iterations), den.end()) << r.iterations;
  // Fibonacci visit pattern: (F_k, F_{k-1}) when the return time is F_{k+1}
  for (std::size_t i = 2; i < loops.size(); ++i) {
    EXPECT_EQ(loops[i].visits[0], loops[i - 1].visits[0] + loops[i - 2].visits[0]);
    EXPECT_EQ(loops[i].visits[1], loops[i - 1].visits[0]);
  }
}

TEST(Loops, SingleReturn) {
  const auto loops = golden_loops(1, ReturnPolicy::First);
  ASSERT_EQ(loops.size(), 1u);
  EXPECT_EQ(loops[0].visits[0] + loops[0].visits[1], loops[0].iterations);
}

TEST(Loops, RecordInvariants) {
  for (auto policy : {ReturnPolicy::First, ReturnPolicy::Closest}) {
    const auto loops = golden_loops(3000, policy);
    for (std::size_t i = 0; i < loops.size(); ++i) {
      EXPECT_EQ(loops[i].visits[0] + loops[i].visits[1], loops[i].iterations);
      if (i > 0) {
        EXPECT_GE(loops[i].visits[0], loops[i - 1].visits[0]);
        EXPECT_GE(loops[i].visits[1], loops[i - 1].visits[1]);
        EXPECT_GT(loops[i].n, loops[i - 1].n);
      }
    }
  }
}

TEST(Loops, NormGrowsLinearly) {
  const auto loops = golden_loops(10000, ReturnPolicy::First);
  const double ratio = loops.back().norm_h / static_cast<double>(loops.back().iterations);
  EXPECT_NEAR(ratio, std::hypot(kPhi - 1, 2 - kPhi), 1e-3);
}

TEST(Loops, Errors) {
  const auto g = golden_rotation();
  // 2 phi - 3 is mapped onto the discontinuity phi - 1
  EXPECT_EQ(code_of([&] { return_loops(g, q(-2, 1), QuadraticSurd(0), g.lengths()[0], 5); }), ErrorCode::BoundaryHit);
  EXPECT_EQ(code_of([&] { return_loops(g, kP, kP, kP + QuadraticSurd(Rational(1, 1000000)), 5, ReturnPolicy::First, 50); }),
            ErrorCode::NoReturnWithinBudget);
  EXPECT_EQ(code_of([&] { return_loops(g, kP, QuadraticSurd(0), QuadraticSurd(Rational(9, 10)), 5); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { return_loops(g, kP, QuadraticSurd(0), QuadraticSurd(Rational(1, 10)), 5); }),
            ErrorCode::OutOfRange);
}

TEST(Loops, QuadraticAndFloatModesAgree) {
  const auto g = golden_rotation();
  const auto gf = golden_rotation_float();
  const auto a = return_loops(g, kP, QuadraticSurd(0), g.lengths()[0], 62000);
  const auto b = return_loops(gf, Quad("0.3"), Quad(0), gf.lengths()[0], 62000);
  ASSERT_GE(a.back().iterations, 100000);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i].visits, b[i].visits) << i;
}

TEST(Exponent, GoldenTopDirection) {
  const auto loops = golden_loops(10000, ReturnPolicy::First);
  const auto e = exponent_of((Vec(2) << 1, 0).finished(), loops);
  EXPECT_NEAR(e.limsup, 1.0, 0.05);
  EXPECT_NEAR(e.regression, 1.0, 0.05);
}

TEST(Exponent, GoldenAnnihilatorOnClosestReturns) {
  const auto loops = golden_loops(10000, ReturnPolicy::Closest);
  const auto e = exponent_of((Vec(2) << 1, -kPhi).finished(), loops, {.min_loops = 10});
  EXPECT_NEAR(e.limsup, -1.0, 0.1);
}

TEST(Exponent, AnnihilatorIsBoundedOnAllReturns) {
  // every first return: |f(h_n)| stays bounded, so the rate tends to zero
  const auto loops = golden_loops(10000, ReturnPolicy::First);
  const auto e = exponent_of((Vec(2) << 1, -kPhi).finished(), loops);
  EXPECT_NEAR(e.limsup, 0.0, 0.1);
}

TEST(Exponent, NeverAboveOneForUnitCovectors) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  for (auto policy : {ReturnPolicy::First, ReturnPolicy::Closest}) {
    const auto loops = golden_loops(3000, policy);
    for (int t = 0; t < 10; ++t) {
      const Vec f = Vec::NullaryExpr(2, [&] { return gauss(rng); }).normalized();
      EXPECT_LE(exponent_of(f, loops, {.min_loops = 10}).limsup, 1.0 + 1e-12);
    }
  }
}

TEST(Exponent, EquivalentNormsAgree) {
  const auto first = golden_loops(10000, ReturnPolicy::First);
  const auto closest = golden_loops(10000, ReturnPolicy::Closest);
  const Vec top = (Vec(2) << 1, 0).finished(), low = (Vec(2) << 1, -kPhi).finished();
  for (auto norm : {LoopNorm::Sum, LoopNorm::Max}) {
    EXPECT_LT(std::abs(exponent_of(top, first).limsup - exponent_of(top, first, {.norm = norm}).limsup), 0.05);
    EXPECT_LT(std::abs(exponent_of(low, closest, {.min_loops = 10}).limsup -
                       exponent_of(low, closest, {.min_loops = 10, .norm = norm}).limsup),
              0.05);
  }
}

TEST(Exponent, Errors) {
  std::vector<ReturnLoopRecord> flat;
  for (int k = 1; k <= 200; ++k) flat.push_back({k, {BigInt(k), BigInt(0)}, static_cast<double>(k), k});
  EXPECT_EQ(code_of([&] { exponent_of((Vec(2) << 0, 1).finished(), flat); }), ErrorCode::AllZeroEvaluations);
  EXPECT_EQ(code_of([&] { exponent_of((Vec(2) << 1, 0).finished(), golden_loops(50, ReturnPolicy::First)); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { exponent_of(Vec::Zero(2), flat); }), ErrorCode::InvalidArgument);
}

TEST(Filtration, GoldenRotation) {
  const auto f = filtration(golden_loops(10000, ReturnPolicy::Closest), {.min_loops = 10});
  ASSERT_EQ(f.strata.size(), 2u);
  EXPECT_NEAR(f.strata[0].theta, -1.0, 0.1);
  EXPECT_NEAR(f.strata[1].theta, 1.0, 1e-12);
  EXPECT_EQ(f.strata[0].dim, 1);
  EXPECT_EQ(f.chain[0].cols(), 1);
  EXPECT_EQ(f.chain[1].cols(), 2);
  EXPECT_LT(angle_to(f.chain[0], (Vec(2) << 1, -kPhi).finished()), 1e-6);
  EXPECT_EQ(f.dim_f0(), 1);
  EXPECT_LE(f.pairing_defect, 0.1);
}

TEST(Filtration, NestedExhaustiveNormalised) {
  for (const IntMatrix& m : {IntMatrix{{2, 1}, {1, 1}}, symplectic_direct_sum(IntMatrix{{2, 1}, {1, 1}}, IntMatrix{{3, 1}, {2, 1}}),
                             symplectic_direct_sum(IntMatrix{{2, 1}, {1, 1}}, IntMatrix::identity(2))}) {
    IntMatrix b = IntMatrix::identity(m.rows());
    for (std::size_t i = 0; i + 1 < m.rows(); ++i) b(i, i + 1) = 3 + static_cast<long long>(i);
    b(m.rows() - 1, 0) = 2;
    const auto f = filtration(synthetic_loops(m, b, 150));
    EXPECT_DOUBLE_EQ(f.exponents.front(), 1.0);
    for (double t : f.exponents) {
      EXPECT_LE(t, 1.0 + 1e-12);
      EXPECT_GE(t, -1.0 - 0.1);
    }
    for (std::size_t s = 1; s < f.chain.size(); ++s) {
      EXPECT_GT(f.chain[s].cols(), f.chain[s - 1].cols());
      EXPECT_EQ(numerical_rank((Mat(m.rows(), f.chain[s].cols() + f.chain[s - 1].cols()) << f.chain[s], f.chain[s - 1]).finished()),
                f.chain[s].cols());
    }
    EXPECT_EQ(f.chain.back().cols(), static_cast<Eigen::Index>(m.rows()));
    EXPECT_LE(f.pairing_defect, 0.1);
  }
}

TEST(Filtration, CatStrataAreTransposeEigenspaces) {
  const IntMatrix cat{{2, 1}, {1, 1}};
  const auto f = filtration(synthetic_loops(cat, IntMatrix{{1, 2}, {-3, 1}}, 200));
  ASSERT_EQ(f.strata.size(), 2u);
  EXPECT_NEAR(f.strata[0].theta, -1.0, 0.05);
  const Mat mt = cat.to_double().transpose();
  const Vec c = f.strata[0].basis.col(0);
  EXPECT_LT(angle_to(c, mt * c), 1e-9);
  EXPECT_NEAR(std::abs(c.dot(mt * c)), (3 - std::sqrt(5.0)) / 2, 1e-9);
}

TEST(Filtration, UnreachedDimensionsAreUnresolved) {
  std::vector<ReturnLoopRecord> flat;
  for (int k = 1; k <= 200; ++k) flat.push_back({k, {BigInt(2 * k), BigInt(k)}, std::sqrt(5.0) * k, k});
  EXPECT_EQ(code_of([&] { filtration(flat); }), ErrorCode::UnresolvedStrata);
}

TEST(Gap, Examples) {
  const auto golden = filtration(golden_loops(10000, ReturnPolicy::Closest), {.min_loops = 10});
  auto d = gap_decision(golden, 1);
  EXPECT_TRUE(d.gap_predicted);
  EXPECT_EQ(d.dim_f0, 1);
  EXPECT_TRUE(d.conjectural);
  EXPECT_TRUE(gap_decision(golden, 1, Mat::Identity(2, 2)).gap_predicted);

  const IntMatrix cat{{2, 1}, {1, 1}};
  auto two = pa_cross_check(validate_symplectic(symplectic_direct_sum(cat, IntMatrix{{3, 1}, {2, 1}})));
  d = gap_decision(two.filtration, 2);
  EXPECT_EQ(d.dim_f0, 2);
  EXPECT_TRUE(d.gap_predicted);
  auto with_e0 = pa_cross_check(validate_symplectic(symplectic_direct_sum(cat, IntMatrix::identity(2))));
  d = gap_decision(with_e0.filtration, 2);
  EXPECT_EQ(d.dim_f0, 3);
  EXPECT_FALSE(d.gap_predicted);

  EXPECT_EQ(code_of([&] { gap_decision(golden, 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { gap_decision(golden, 1, Mat::Identity(3, 2)); }), ErrorCode::DimensionMismatch);
}

TEST(PaCrossCheck, Examples) {
  const IntMatrix cat{{2, 1}, {1, 1}};
  auto r = pa_cross_check(validate_symplectic(cat));
  EXPECT_TRUE(r.agrees);
  EXPECT_EQ(r.recovered_dims, (std::vector<int>{1, 1}));

  r = pa_cross_check(validate_symplectic(symplectic_direct_sum(cat, IntMatrix{{3, 1}, {2, 1}})));
  EXPECT_TRUE(r.agrees);
  EXPECT_EQ(r.recovered_dims, (std::vector<int>{1, 1, 1, 1}));
  EXPECT_LE(r.max_exponent_error, 0.05);

  r = pa_cross_check(validate_symplectic(symplectic_direct_sum(cat, IntMatrix::identity(2))));
  EXPECT_TRUE(r.agrees);
  EXPECT_EQ(r.recovered_dims, (std::vector<int>{1, 2, 1}));
  EXPECT_LE(r.filtration.pairing_defect, 0.1);
}

TEST(PaCrossCheck, RandomHyperbolicWords) {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int t = 0; t < 200 && checked < 6; ++t) {
    const auto m = random_symplectic_word(2, 10, rng);
    if (has_unit_circle_eigenvalue(m).verdict) continue;
    const auto split = eigen_split(m);
    if (split.pairs.size() < 2) continue;
    const double l1 = std::log(split.pairs[0].lambda), l2 = std::log(split.pairs[1].lambda);
    if (l2 / l1 < 1.3 || l1 < 0.3 || std::log10(split.pairs[1].lambda) * 300 > 2000) continue;
    ++checked;
    const auto r = pa_cross_check(m);
    EXPECT_TRUE(r.agrees) << "err " << r.max_exponent_error << " sub " << r.subspace_defect << " dims "
                          << r.recovered_dims.size() << "/" << r.expected_dims.size();
  }
  EXPECT_GE(checked, 3);
}

TEST(PaCrossCheck, Errors) {
  EXPECT_EQ(code_of([] { pa_cross_check(validate_symplectic(IntMatrix{{0, -1}, {1, 0}})); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { pa_cross_check(validate_symplectic(IntMatrix{{1, 1}, {0, 1}})); }), ErrorCode::InvalidArgument);
  PaCrossCheckOptions none;
  none.max_attempts = 0;
  EXPECT_EQ(code_of([&] { pa_cross_check(validate_symplectic(IntMatrix{{2, 1}, {1, 1}}), none); }),
            ErrorCode::GenericityFailure);
}
