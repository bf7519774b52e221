#pragma once

// Integer symplectic matrices: validation, characteristic polynomials,
// certified unit-circle eigenvalue detection, and the growth decomposition
// of H^1 into E_0 (unit modulus) and expanding/contracting pairs.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hypl2/error.hpp"
#include "hypl2/exact.hpp"
#include "hypl2/linalg.hpp"

namespace hypl2 {

/// J = [[0, I_g], [-I_g, 0]].
inline IntMatrix standard_symplectic_form(std::size_t g) {
  IntMatrix j(2 * g, 2 * g);
  for (std::size_t i = 0; i < g; ++i) {
    j(i, g + i) = 1;
    j(g + i, i) = -1;
  }
  return j;
}

class SymplecticMatrix {
 public:
  std::size_t genus() const noexcept { return genus_; }
  std::size_t dim() const noexcept { return 2 * genus_; }
  const IntMatrix& entries() const noexcept { return entries_; }
  Mat to_double() const { return entries_.to_double(); }

  /// M^{-1} = -J M^T J, exact.
  SymplecticMatrix inverse() const {
    const IntMatrix j = standard_symplectic_form(genus_);
    IntMatrix inv = j * entries_.transpose() * j;
    for (std::size_t r = 0; r < inv.rows(); ++r)
      for (std::size_t c = 0; c < inv.cols(); ++c) inv(r, c) = -inv(r, c);
    return SymplecticMatrix(genus_, std::move(inv));
  }

  friend SymplecticMatrix operator*(const SymplecticMatrix& a, const SymplecticMatrix& b) {
    require(a.genus_ == b.genus_, ErrorCode::DimensionMismatch, "genus mismatch in product");
    return SymplecticMatrix(a.genus_, a.entries_ * b.entries_);
  }

  bool operator==(const SymplecticMatrix& o) const = default;

 private:
  SymplecticMatrix(std::size_t g, IntMatrix m) : genus_(g), entries_(std::move(m)) {}
  friend SymplecticMatrix validate_symplectic(const IntMatrix& entries);

  std::size_t genus_ = 0;
  IntMatrix entries_;
};

inline SymplecticMatrix validate_symplectic(const IntMatrix& entries) {
  require(entries.square(), ErrorCode::NotSquare,
          std::to_string(entries.rows()) + "x" + std::to_string(entries.cols()) + " matrix");
  require(entries.rows() % 2 == 0 && entries.rows() > 0, ErrorCode::OddDimension,
          "dimension " + std::to_string(entries.rows()));
  const std::size_t g = entries.rows() / 2;
  const IntMatrix j = standard_symplectic_form(g);
  require(entries.transpose() * j * entries == j, ErrorCode::NotSymplectic, "M^T J M != J");
  // MᵀJM = J already forces det = ±1; Sp(2g) is connected so it is +1.
  require(determinant(entries) == 1, ErrorCode::NotSymplectic, "det(M) != 1");
  return SymplecticMatrix(g, entries);
}

/// Characteristic polynomial det(xI - M), lowest degree first, monic.
struct CharPoly {
  std::vector<BigInt> coeffs;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  bool palindromic() const { return is_palindromic(coeffs); }
  std::string str() const { return poly_to_string(coeffs); }
};

/// Faddeev-LeVerrier; every division by k is exact over the integers.
inline std::vector<BigInt> characteristic_polynomial(const IntMatrix& a) {
  require(a.square(), ErrorCode::NotSquare, "characteristic polynomial of non-square matrix");
  const std::size_t n = a.rows();
  std::vector<BigInt> c(n + 1);
  c[n] = 1;
  IntMatrix mk(n, n);  // M_0 = 0
  const IntMatrix id = IntMatrix::identity(n);
  for (std::size_t k = 1; k <= n; ++k) {
    IntMatrix scaled = id;
    for (std::size_t i = 0; i < n; ++i) scaled(i, i) = c[n - k + 1];
    mk = a * mk + scaled;
    BigInt tr = (a * mk).trace();
    c[n - k] = -tr / static_cast<long long>(k);
  }
  return c;
}

/// Symplectic direct sum: blocks A (genus ga) and B (genus gb) placed so the
/// result preserves the standard form of genus ga + gb. Coordinates are
/// (a-part of A, a-part of B, b-part of A, b-part of B).
inline IntMatrix symplectic_direct_sum(const IntMatrix& a, const IntMatrix& b) {
  require(a.square() && b.square() && a.rows() % 2 == 0 && b.rows() % 2 == 0, ErrorCode::OddDimension,
          "direct sum needs even square blocks");
  const std::size_t ga = a.rows() / 2, gb = b.rows() / 2, g = ga + gb;
  auto place_a = [&](std::size_t i) { return i < ga ? i : g + (i - ga); };
  auto place_b = [&](std::size_t i) { return i < gb ? ga + i : g + ga + (i - gb); };
  IntMatrix m(2 * g, 2 * g);
  for (std::size_t i = 0; i < 2 * ga; ++i)
    for (std::size_t j = 0; j < 2 * ga; ++j) m(place_a(i), place_a(j)) = a(i, j);
  for (std::size_t i = 0; i < 2 * gb; ++i)
    for (std::size_t j = 0; j < 2 * gb; ++j) m(place_b(i), place_b(j)) = b(i, j);
  return m;
}

inline CharPoly char_poly(const SymplecticMatrix& m) { return CharPoly{characteristic_polynomial(m.entries())}; }

enum class UnitCircleBranch { RootAtPlusOne, RootAtMinusOne, SturmCount, None };

inline std::string to_string(UnitCircleBranch b) {
  switch (b) {
    case UnitCircleBranch::RootAtPlusOne: return "root_at_plus_one";
    case UnitCircleBranch::RootAtMinusOne: return "root_at_minus_one";
    case UnitCircleBranch::SturmCount: return "sturm_count";
    case UnitCircleBranch::None: return "none";
  }
  return "none";
}

struct UnitCircleCertificate {
  UnitCircleBranch branch = UnitCircleBranch::None;
  int sturm_count = 0;  // distinct real roots of the trace polynomial in (-2, 2)
  int mult_plus_one = 0;
  int mult_minus_one = 0;
};

struct UnitCircleVerdict {
  bool verdict = false;
  UnitCircleCertificate certificate;
};

/// Exact decision for an arbitrary integer polynomial; the certificate records
/// the first branch that fired.
inline UnitCircleVerdict unit_circle_verdict(const std::vector<BigInt>& poly) {
  const UnitCircleRoots roots = unit_circle_roots(poly);
  UnitCircleVerdict v;
  v.certificate.sturm_count = roots.sturm_count;
  v.certificate.mult_plus_one = roots.mult_plus_one;
  v.certificate.mult_minus_one = roots.mult_minus_one;
  if (roots.mult_plus_one > 0) v.certificate.branch = UnitCircleBranch::RootAtPlusOne;
  else if (roots.mult_minus_one > 0) v.certificate.branch = UnitCircleBranch::RootAtMinusOne;
  else if (roots.sturm_count > 0) v.certificate.branch = UnitCircleBranch::SturmCount;
  v.verdict = roots.any();
  return v;
}

inline UnitCircleVerdict has_unit_circle_eigenvalue(const SymplecticMatrix& m) {
  return unit_circle_verdict(char_poly(m).coeffs);
}

/// Number of unit-modulus roots counted with multiplicity (Yun squarefree
/// decomposition, then a distinct count on each factor).
inline int unit_circle_multiplicity(const std::vector<BigInt>& poly) {
  auto to_integer = [](const std::vector<Rational>& p) {
    BigInt l = 1;
    for (const auto& c : p) l = boost::multiprecision::lcm(l, boost::multiprecision::denominator(c));
    std::vector<BigInt> out;
    for (const auto& c : p) out.push_back(boost::multiprecision::numerator(Rational(c * l)));
    return out;
  };
  auto p = to_rational(poly);
  trim(p);
  auto dp = derivative(p);
  auto a = poly_gcd(p, dp);
  auto b = poly_div(p, a);
  auto c = poly_div(dp, a);
  auto d = c;
  {
    auto db = derivative(b);
    for (std::size_t i = 0; i < std::max(d.size(), db.size()); ++i) {
      if (i >= d.size()) d.push_back(0);
      if (i < db.size()) d[i] -= db[i];
    }
    trim(d);
  }
  int total = 0;
  int i = 1;
  while (degree(b) >= 1) {
    auto factor = poly_gcd(b, d);
    if (degree(factor) >= 1) total += i * unit_circle_roots(to_integer(factor)).distinct();
    b = poly_div(b, factor);
    c = poly_div(d, factor);
    auto db = derivative(b);
    d = c;
    for (std::size_t k = 0; k < std::max(d.size(), db.size()); ++k) {
      if (k >= d.size()) d.push_back(0);
      if (k < db.size()) d[k] -= db[k];
    }
    trim(d);
    ++i;
  }
  return total;
}

/// Polishes a numerical root by Newton's method on the squarefree part of the
/// integer polynomial, so that repeated roots converge to machine precision.
inline std::complex<double> refine_root(const std::vector<Rational>& squarefree, std::complex<double> z0) {
  using C = std::complex<long double>;
  std::vector<long double> c;
  for (const auto& q : squarefree) c.push_back(q.convert_to<long double>());
  std::vector<long double> dc;
  for (std::size_t i = 1; i < c.size(); ++i) dc.push_back(c[i] * static_cast<long double>(i));
  auto eval = [](const std::vector<long double>& p, C x) {
    C acc = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
    return acc;
  };
  C z(z0.real(), z0.imag());
  for (int it = 0; it < 60; ++it) {
    C d = eval(dc, z);
    if (std::abs(d) == 0) break;
    C step = eval(c, z) / d;
    z -= step;
    if (std::abs(step) <= 1e-18L * std::max<long double>(1, std::abs(z))) break;
  }
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

/// Eigenvalues of an integer matrix, each polished against the squarefree part
/// of its characteristic polynomial.
inline std::vector<std::complex<double>> refined_eigenvalues(const IntMatrix& m) {
  if (m.rows() == 0) return {};
  Eigen::EigenSolver<Mat> es(m.to_double(), false);
  const auto sqf = squarefree_part(characteristic_polynomial(m));
  std::vector<std::complex<double>> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(refine_root(sqf, es.eigenvalues()(i)));
  return out;
}

struct EigenPair {
  double lambda = 0.0;  // modulus > 1; the partner modulus 1/lambda is implicit
  int dim = 0;
  Mat basis_plus;   // real invariant subspace for modulus lambda
  Mat basis_minus;  // real invariant subspace for modulus 1/lambda
  bool real_positive = true;  // all eigenvalues in the group are real and positive
};

struct EigenSplit {
  int e0_dim = 0;
  std::vector<EigenPair> pairs;  // sorted by increasing lambda
  Mat e0_basis;
  bool semisimple_on_circle = true;
};

namespace detail {

struct Cluster {
  std::complex<double> value;
  int multiplicity = 0;
};

inline std::vector<Cluster> cluster_eigenvalues(const std::vector<std::complex<double>>& ev, double tol) {
  std::vector<Cluster> out;
  for (const auto& z : ev) {
    bool placed = false;
    for (auto& c : out)
      if (std::abs(c.value - z) <= tol * std::max(1.0, std::abs(z))) {
        ++c.multiplicity;
        placed = true;
        break;
      }
    if (!placed) out.push_back({z, 1});
  }
  return out;
}

/// The k right singular vectors with the smallest singular values.
inline Mat smallest_right_singular(const Mat& a, int k) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(k);
}

/// Real invariant subspace of a group of eigenvalue clusters (conjugates
/// listed once with positive imaginary part).
inline Mat invariant_subspace(const Mat& m, const std::vector<Cluster>& group) {
  const Eigen::Index n = m.rows();
  const Mat id = Mat::Identity(n, n);
  Mat cols(n, 0);
  for (const auto& c : group) {
    Mat factor;
    int k = 0;
    if (std::abs(c.value.imag()) <= 1e-12 * std::max(1.0, std::abs(c.value))) {
      factor = m - c.value.real() * id;
      k = c.multiplicity;
    } else {
      factor = m * m - 2.0 * c.value.real() * m + std::norm(c.value) * id;
      k = 2 * c.multiplicity;
    }
    Mat power = id;
    for (int i = 0; i < c.multiplicity; ++i) power = power * factor;
    power /= std::max(1.0, power.norm());
    Mat basis = smallest_right_singular(power, k);
    Mat joined(n, cols.cols() + basis.cols());
    joined << cols, basis;
    cols = joined;
  }
  return orthonormal_range(cols, 1e-8);
}

}  // namespace detail

/// Numerical eigenstructure grouped by modulus, cross-checked against the
/// exact unit-circle certificate.
inline EigenSplit eigen_split(const SymplecticMatrix& m, double tol = 1e-6) {
  require(tol > 0, ErrorCode::InvalidArgument, "tol must be positive");
  const Mat md = m.to_double();
  const auto poly = char_poly(m).coeffs;
  const auto ev = refined_eigenvalues(m.entries());

  std::vector<std::complex<double>> unit, outside, inside;
  for (const auto& z : ev) {
    const double r = std::abs(z);
    if (std::abs(r - 1.0) <= tol) unit.push_back(z);
    else if (r > 1.0) outside.push_back(z);
    else inside.push_back(z);
  }

  const int exact_unit = unit_circle_multiplicity(poly);
  if (static_cast<int>(unit.size()) != exact_unit)
    fail(ErrorCode::ToleranceConflict, "numeric grouping finds " + std::to_string(unit.size()) +
                                           " unit-modulus eigenvalues, exact count is " + std::to_string(exact_unit));
  require(outside.size() == inside.size(), ErrorCode::ToleranceConflict, "expanding/contracting counts differ");

  auto upper_half = [](const std::vector<detail::Cluster>& cs) {
    std::vector<detail::Cluster> out;
    for (const auto& c : cs)
      if (c.value.imag() >= -1e-12 * std::max(1.0, std::abs(c.value))) out.push_back(c);
    return out;
  };

  EigenSplit split;
  split.e0_dim = static_cast<int>(unit.size());
  const auto unit_clusters = detail::cluster_eigenvalues(unit, 1e-7);
  split.e0_basis = unit.empty() ? Mat(md.rows(), 0) : detail::invariant_subspace(md, upper_half(unit_clusters));
  for (const auto& c : unit_clusters) {
    Eigen::MatrixXcd shifted = md.cast<std::complex<double>>();
    shifted.diagonal().array() -= c.value;
    const int geometric = static_cast<int>(md.rows()) - numerical_rank(shifted, 1e-9);
    if (geometric < c.multiplicity) split.semisimple_on_circle = false;
  }

  // group |λ| > 1 by modulus
  auto clusters_out = detail::cluster_eigenvalues(outside, 1e-7);
  auto clusters_in = detail::cluster_eigenvalues(inside, 1e-7);
  std::vector<double> moduli;
  for (const auto& c : clusters_out) {
    const double r = std::abs(c.value);
    bool seen = false;
    for (double x : moduli)
      if (std::abs(x - r) <= tol * r) seen = true;
    if (!seen) moduli.push_back(r);
  }
  std::sort(moduli.begin(), moduli.end());
  for (double rho : moduli) {
    EigenPair pair;
    pair.lambda = rho;
    std::vector<detail::Cluster> plus, minus;
    for (const auto& c : clusters_out)
      if (std::abs(std::abs(c.value) - rho) <= tol * rho) {
        pair.dim += c.multiplicity;
        if (std::abs(c.value.imag()) > 1e-12 * rho || c.value.real() < 0) pair.real_positive = false;
        plus.push_back(c);
      }
    for (const auto& c : clusters_in)
      if (std::abs(std::abs(c.value) * rho - 1.0) <= tol) minus.push_back(c);
    pair.basis_plus = detail::invariant_subspace(md, upper_half(plus));
    pair.basis_minus = detail::invariant_subspace(md, upper_half(minus));
    require(pair.basis_plus.cols() == pair.dim && pair.basis_minus.cols() == pair.dim, ErrorCode::ToleranceConflict,
            "invariant subspace dimension mismatch for modulus " + std::to_string(rho));
    split.pairs.push_back(std::move(pair));
  }
  return split;
}

// ---------------------------------------------------------------------------
// Generators of Sp(2g, Z), used for randomised testing and by callers that
// want to build monodromies as words.

inline std::vector<SymplecticMatrix> symplectic_generators(std::size_t g) {
  std::vector<IntMatrix> gens;
  const std::size_t n = 2 * g;
  auto transvection = [&](std::size_t i, std::size_t j, bool upper) {
    IntMatrix m = IntMatrix::identity(n);
    // [[I, B], [0, I]] with B = E_ij + E_ji (or E_ii), or its transpose
    if (upper) {
      m(i, g + j) += 1;
      if (i != j) m(j, g + i) += 1;
    } else {
      m(g + i, j) += 1;
      if (i != j) m(g + j, i) += 1;
    }
    return m;
  };
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = i; j < g; ++j) {
      gens.push_back(transvection(i, j, true));
      gens.push_back(transvection(i, j, false));
    }
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < g; ++j) {
      if (i == j) continue;
      // [[A, 0], [0, A^{-T}]] with A = I + E_ij
      IntMatrix m = IntMatrix::identity(n);
      m(i, j) = 1;
      m(g + j, g + i) = -1;
      gens.push_back(m);
    }
  std::vector<SymplecticMatrix> out;
  for (const auto& m : gens) {
    auto s = validate_symplectic(m);
    out.push_back(s);
    out.push_back(s.inverse());
  }
  return out;
}

/// Random word of length in [1, max_len] in the standard generators.
template <class Rng>
SymplecticMatrix random_symplectic_word(std::size_t g, int max_len, Rng& rng) {
  const auto gens = symplectic_generators(g);
  std::uniform_int_distribution<int> len_dist(1, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, gens.size() - 1);
  SymplecticMatrix m = validate_symplectic(IntMatrix::identity(2 * g));
  const int len = len_dist(rng);
  for (int i = 0; i < len; ++i) m = m * gens[pick(rng)];
  return m;
}

}  // namespace hypl2
