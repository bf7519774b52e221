#pragma once

// Cohomology of a mapping torus with coefficients in the flat line bundle
// E_lambda, via the Wang sequence, and the Floquet decisions built on it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "hypl2/error.hpp"
#include "hypl2/exact.hpp"
#include "hypl2/linalg.hpp"
#include "hypl2/symplectic.hpp"

namespace hypl2 {

/// The maps phi_p^* on H^p(F; R). degree_maps[i] acts in degree
/// first_degree + i; every other degree is a zero space.
struct FiberAutomorphism {
  std::vector<IntMatrix> degree_maps;
  std::size_t first_degree = 0;

  FiberAutomorphism() = default;
  explicit FiberAutomorphism(std::vector<IntMatrix> maps, std::size_t first = 0)
      : degree_maps(std::move(maps)), first_degree(first) {
    for (const auto& m : degree_maps) {
      require(m.square(), ErrorCode::NotSquare, "degree map must be square");
      const BigInt d = determinant(m);
      require(d == 1 || d == -1, ErrorCode::NotInvertible, "degree map is not invertible over the integers");
    }
  }

  /// Closed oriented surface: phi_0 = phi_2 = [1], phi_1 symplectic.
  static FiberAutomorphism surface(const SymplecticMatrix& phi1) {
    return FiberAutomorphism({IntMatrix{{1}}, phi1.entries(), IntMatrix{{1}}});
  }

  /// Only the given degree is kept.
  FiberAutomorphism restricted_to(std::size_t p) const {
    return FiberAutomorphism({map(p)}, p);
  }

  std::size_t top_degree() const { return first_degree + degree_maps.size() - 1; }

  /// phi_p^*, or the empty matrix when H^p(F) = 0.
  IntMatrix map(std::size_t p) const {
    if (p < first_degree || p > top_degree()) return IntMatrix(0, 0);
    return degree_maps[p - first_degree];
  }

  FiberAutomorphism inverse() const {
    std::vector<IntMatrix> inv;
    for (const auto& m : degree_maps) inv.push_back(integer_inverse(m));
    return FiberAutomorphism(std::move(inv), first_degree);
  }
};

/// A unit-modulus lambda. When exact, it is the root_index-th root (ordered
/// by argument in (-pi, pi]) on the unit circle of the integer polynomial.
struct UnitLambda {
  std::complex<double> value;
  std::optional<std::vector<BigInt>> poly;
  int root_index = -1;

  bool exact() const { return poly.has_value(); }
  bool is_real_one() const { return value == std::complex<double>(1.0, 0.0); }
  bool is_real_minus_one() const { return value == std::complex<double>(-1.0, 0.0); }
};

inline UnitLambda unit_lambda(std::complex<double> z) {
  require(std::abs(std::abs(z) - 1.0) <= 1e-12, ErrorCode::NotUnitModulus,
          "|lambda| - 1 = " + std::to_string(std::abs(z) - 1.0));
  return UnitLambda{z, std::nullopt, -1};
}

namespace detail {

inline std::vector<BigInt> integer_scaled(const std::vector<Rational>& p) {
  BigInt l = 1;
  for (const auto& c : p) l = boost::multiprecision::lcm(l, boost::multiprecision::denominator(c));
  std::vector<BigInt> out;
  for (const auto& c : p) out.push_back(boost::multiprecision::numerator(Rational(c * l)));
  return out;
}

/// Distinct unit-circle roots of an integer polynomial, sorted by argument,
/// polished by Newton and cross-checked against the exact count.
inline std::vector<std::complex<double>> unit_roots_sorted(const std::vector<BigInt>& poly) {
  const auto sqf = squarefree_part(poly);
  const auto sqf_int = integer_scaled(sqf);
  const int expected = unit_circle_roots(sqf_int).distinct();
  std::vector<std::complex<double>> roots;
  if (expected == 0) return roots;
  const int d = degree(sqf);
  Mat companion = Mat::Zero(d, d);
  for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) companion(i, d - 1) = -sqf[static_cast<std::size_t>(i)].convert_to<double>();
  Eigen::EigenSolver<Mat> es(companion, false);
  std::vector<std::pair<double, std::complex<double>>> candidates;
  for (int i = 0; i < d; ++i) {
    const auto z = refine_root(sqf, es.eigenvalues()(i));
    candidates.push_back({std::abs(std::abs(z) - 1.0), z});
  }
  std::sort(candidates.begin(), candidates.end(), [](auto& a, auto& b) { return a.first < b.first; });
  for (int i = 0; i < expected; ++i) {
    auto z = candidates[static_cast<std::size_t>(i)].second;
    z /= std::abs(z);
    if (std::abs(z.imag()) < 1e-14) z = {z.real() > 0 ? 1.0 : -1.0, 0.0};
    roots.push_back(z);
  }
  require(expected == d || candidates[static_cast<std::size_t>(expected)].first > 1e-9, ErrorCode::ToleranceConflict,
          "numerical roots do not separate from the unit circle");
  std::sort(roots.begin(), roots.end(), [](auto a, auto b) { return std::arg(a) < std::arg(b); });
  return roots;
}

/// dim Ker(I - lambda^{-1} A) over C.
inline int twisted_kernel_dim(const IntMatrix& a, const UnitLambda& lambda) {
  const std::size_t n = a.rows();
  if (n == 0) return 0;
  if (lambda.is_real_one() || lambda.is_real_minus_one()) {
    // exact: I - lambda^{-1} A = I -/+ A
    IntMatrix b = IntMatrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) b(i, j) += lambda.is_real_one() ? -a(i, j) : a(i, j);
    return static_cast<int>(n - exact_rank(b));
  }
  Eigen::MatrixXcd b = Eigen::MatrixXcd::Identity(n, n) - (1.0 / lambda.value) * a.to_double().cast<std::complex<double>>();
  return static_cast<int>(n) - numerical_rank(b, 1e-10);
}

}  // namespace detail

struct WangDims {
  int coker_dim = 0;
  int ker_dim = 0;
  int h_dim = 0;
};

/// dim H^p(MT; E_lambda) = dim Coker(I - lambda^{-1} phi_{p-1}) + dim Ker(I - lambda^{-1} phi_p).
inline WangDims wang_dims(const FiberAutomorphism& phi, int p, const UnitLambda& lambda) {
  require(p >= 0 && static_cast<std::size_t>(p) <= phi.top_degree() + 1, ErrorCode::DegreeOutOfRange,
          "degree " + std::to_string(p));
  require(std::abs(std::abs(lambda.value) - 1.0) <= 1e-12, ErrorCode::NotUnitModulus, "lambda off the unit circle");
  WangDims d;
  if (p >= 1) d.coker_dim = detail::twisted_kernel_dim(phi.map(static_cast<std::size_t>(p - 1)), lambda);
  d.ker_dim = detail::twisted_kernel_dim(phi.map(static_cast<std::size_t>(p)), lambda);
  d.h_dim = d.coker_dim + d.ker_dim;
  return d;
}

inline WangDims wang_dims(const FiberAutomorphism& phi, int p, std::complex<double> lambda) {
  return wang_dims(phi, p, unit_lambda(lambda));
}

struct ExceptionalLambda {
  UnitLambda lambda;
  WangDims dims;
};

struct ReducedL2Report {
  bool vanishes = true;
  std::vector<ExceptionalLambda> exceptional_lambdas;  // sorted by argument
};

/// The reduced L2 cohomology of the cyclic cover always vanishes; what is
/// computed is the finite set of lambda with H^p(MT; E_lambda) != 0.
inline ReducedL2Report reduced_l2_vanishes(const FiberAutomorphism& phi, int p) {
  require(p >= 0 && static_cast<std::size_t>(p) <= phi.top_degree() + 1, ErrorCode::DegreeOutOfRange,
          "degree " + std::to_string(p));
  ReducedL2Report report;
  std::vector<UnitLambda> candidates;
  for (int q : {p - 1, p}) {
    if (q < 0) continue;
    const IntMatrix m = phi.map(static_cast<std::size_t>(q));
    if (m.rows() == 0) continue;
    const auto poly = characteristic_polynomial(m);
    const auto sqf = detail::integer_scaled(squarefree_part(poly));
    const auto roots = detail::unit_roots_sorted(poly);
    for (std::size_t i = 0; i < roots.size(); ++i) {
      bool dup = false;
      for (const auto& c : candidates)
        if (std::abs(c.value - roots[i]) < 1e-9) dup = true;
      if (!dup) candidates.push_back(UnitLambda{roots[i], sqf, static_cast<int>(i)});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const UnitLambda& a, const UnitLambda& b) { return std::arg(a.value) < std::arg(b.value); });
  for (const auto& l : candidates) {
    const WangDims d = wang_dims(phi, p, l);
    if (d.h_dim != 0) report.exceptional_lambdas.push_back({l, d});
  }
  return report;
}

/// 0 in the spectrum of delta d on Lambda^p / Ker(d) of the cyclic cover:
/// phi_p^* has a unit-modulus eigenvalue. Exact.
inline bool zero_in_spectrum_unreduced(const FiberAutomorphism& phi, int p) {
  require(p >= 0, ErrorCode::DegreeOutOfRange, "negative degree");
  const IntMatrix m = phi.map(static_cast<std::size_t>(p));
  if (m.rows() == 0) return false;
  return unit_circle_roots(characteristic_polynomial(m)).any();
}

/// The companion condition on the closure of the image of d, which goes
/// through Coker(I - lambda^{-1} phi_{p-1}); reported separately.
inline bool zero_in_spectrum_image_closure(const FiberAutomorphism& phi, int p) {
  require(p >= 0, ErrorCode::DegreeOutOfRange, "negative degree");
  if (p == 0) return false;
  return zero_in_spectrum_unreduced(phi, p - 1);
}

}  // namespace hypl2
