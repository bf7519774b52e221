#pragma once

// Exact integer/rational matrices and univariate polynomials.
//
// Polynomials are stored lowest-degree first: coeffs[i] multiplies x^i.
// Trailing zeros are always trimmed, so the zero polynomial is empty.

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include "hypl2/error.hpp"

namespace hypl2 {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  IntMatrix(std::initializer_list<std::initializer_list<long long>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      require(r.size() == cols_, ErrorCode::InvalidArgument, "ragged matrix literal");
      for (long long v : r) data_.emplace_back(v);
    }
  }

  static IntMatrix identity(std::size_t n) {
    IntMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  static IntMatrix from_rows(const std::vector<std::vector<BigInt>>& rows) {
    IntMatrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < m.rows_; ++i) {
      require(rows[i].size() == m.cols_, ErrorCode::NotSquare, "ragged matrix rows");
      for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  BigInt& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const BigInt& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  bool operator==(const IntMatrix& o) const = default;

  IntMatrix transpose() const {
    IntMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
    require(a.cols_ == b.rows_, ErrorCode::DimensionMismatch, "matrix product shape");
    IntMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const BigInt& aik = a(i, k);
        if (aik == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend IntMatrix operator+(IntMatrix a, const IntMatrix& b) {
    require(a.rows_ == b.rows_ && a.cols_ == b.cols_, ErrorCode::DimensionMismatch, "matrix sum shape");
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] += b.data_[i];
    return a;
  }

  friend IntMatrix operator-(IntMatrix a, const IntMatrix& b) {
    require(a.rows_ == b.rows_ && a.cols_ == b.cols_, ErrorCode::DimensionMismatch, "matrix difference shape");
    for (std::size_t i = 0; i < a.data_.size(); ++i) a.data_[i] -= b.data_[i];
    return a;
  }

  BigInt trace() const {
    BigInt t = 0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  Eigen::MatrixXd to_double() const {
    Eigen::MatrixXd m(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) m(i, j) = static_cast<double>((*this)(i, j));
    return m;
  }

  BigInt max_abs() const {
    BigInt m = 0;
    for (const auto& v : data_) m = std::max<BigInt>(m, abs(v));
    return m;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<BigInt> data_;
};

inline IntMatrix block_diag(const IntMatrix& a, const IntMatrix& b) {
  IntMatrix m(a.rows() + b.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) m(a.rows() + i, a.cols() + j) = b(i, j);
  return m;
}

/// Fraction-free Gaussian elimination (Bareiss). Exact determinant.
inline BigInt determinant(const IntMatrix& m) {
  require(m.square(), ErrorCode::NotSquare, "determinant of non-square matrix");
  const std::size_t n = m.rows();
  if (n == 0) return 1;
  IntMatrix a = m;
  BigInt prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && a(p, k) == 0) ++p;
      if (p == n) return 0;
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

/// Exact rank over the rationals.
inline std::size_t exact_rank(const IntMatrix& m) {
  std::vector<std::vector<Rational>> a(m.rows(), std::vector<Rational>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) a[i][j] = Rational(m(i, j));
  std::size_t rank = 0;
  for (std::size_t col = 0; col < m.cols() && rank < m.rows(); ++col) {
    std::size_t piv = rank;
    while (piv < m.rows() && a[piv][col] == 0) ++piv;
    if (piv == m.rows()) continue;
    std::swap(a[piv], a[rank]);
    for (std::size_t i = rank + 1; i < m.rows(); ++i) {
      if (a[i][col] == 0) continue;
      Rational f = a[i][col] / a[rank][col];
      for (std::size_t j = col; j < m.cols(); ++j) a[i][j] -= f * a[rank][j];
    }
    ++rank;
  }
  return rank;
}

/// Inverse of a unimodular integer matrix; NotInvertible otherwise.
inline IntMatrix integer_inverse(const IntMatrix& m) {
  require(m.square(), ErrorCode::NotSquare, "inverse of non-square matrix");
  const std::size_t n = m.rows();
  std::vector<std::vector<Rational>> a(n, std::vector<Rational>(2 * n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = Rational(m(i, j));
    a[i][n + i] = 1;
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] == 0) ++piv;
    require(piv < n, ErrorCode::NotInvertible, "singular matrix");
    std::swap(a[piv], a[col]);
    const Rational d = a[col][col];
    for (auto& v : a[col]) v /= d;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || a[i][col] == 0) continue;
      const Rational f = a[i][col];
      for (std::size_t j = 0; j < 2 * n; ++j) a[i][j] -= f * a[col][j];
    }
  }
  IntMatrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Rational& v = a[i][n + j];
      require(boost::multiprecision::denominator(v) == 1, ErrorCode::NotInvertible, "inverse is not integral");
      inv(i, j) = boost::multiprecision::numerator(v);
    }
  return inv;
}

// ---------------------------------------------------------------------------
// Polynomials

template <class T>
void trim(std::vector<T>& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

template <class T>
int degree(const std::vector<T>& p) {
  return static_cast<int>(p.size()) - 1;
}

template <class T>
T evaluate(const std::vector<T>& p, const T& x) {
  T acc = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

inline std::vector<Rational> to_rational(const std::vector<BigInt>& p) {
  std::vector<Rational> r(p.begin(), p.end());
  return r;
}

template <class T>
std::vector<T> derivative(const std::vector<T>& p) {
  std::vector<T> d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<long long>(i));
  trim(d);
  return d;
}

/// Remainder of a / b over the rationals.
inline std::vector<Rational> poly_rem(std::vector<Rational> a, const std::vector<Rational>& b) {
  require(!b.empty(), ErrorCode::InvalidArgument, "division by zero polynomial");
  trim(a);
  while (a.size() >= b.size() && !a.empty()) {
    Rational f = a.back() / b.back();
    std::size_t shift = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= f * b[i];
    a.pop_back();
    trim(a);
  }
  return a;
}

/// Quotient of a / b over the rationals (remainder discarded).
inline std::vector<Rational> poly_div(std::vector<Rational> a, const std::vector<Rational>& b) {
  require(!b.empty(), ErrorCode::InvalidArgument, "division by zero polynomial");
  trim(a);
  if (a.size() < b.size()) return {};
  std::vector<Rational> q(a.size() - b.size() + 1);
  while (a.size() >= b.size() && !a.empty()) {
    Rational f = a.back() / b.back();
    std::size_t shift = a.size() - b.size();
    q[shift] = f;
    for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= f * b[i];
    a.pop_back();
    trim(a);
  }
  trim(q);
  return q;
}

inline std::vector<Rational> make_monic(std::vector<Rational> p) {
  trim(p);
  if (p.empty()) return p;
  Rational lead = p.back();
  for (auto& c : p) c /= lead;
  return p;
}

inline std::vector<Rational> poly_gcd(std::vector<Rational> a, std::vector<Rational> b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    auto r = poly_rem(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return make_monic(a);
}

/// Coefficients reversed: x^deg p(1/x).
template <class T>
std::vector<T> reciprocal(std::vector<T> p) {
  trim(p);
  std::reverse(p.begin(), p.end());
  trim(p);
  return p;
}

template <class T>
bool is_palindromic(const std::vector<T>& p) {
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i)
    if (p[i] != p[n - 1 - i]) return false;
  return true;
}

inline int sign_of(const Rational& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

/// Sturm chain p, p', -rem(...), ... with each member scaled by a positive
/// constant (sign-preserving normalisation keeps the rationals small).
inline std::vector<std::vector<Rational>> sturm_chain(const std::vector<Rational>& p) {
  std::vector<std::vector<Rational>> chain;
  auto normalise = [](std::vector<Rational> q) {
    trim(q);
    if (q.empty()) return q;
    Rational s = q.back() < 0 ? Rational(-q.back()) : q.back();
    for (auto& c : q) c /= s;
    return q;
  };
  chain.push_back(normalise(p));
  if (chain.back().empty()) return chain;
  auto d = normalise(derivative(chain.back()));
  if (d.empty()) return chain;
  chain.push_back(d);
  while (true) {
    auto r = poly_rem(chain[chain.size() - 2], chain.back());
    if (r.empty()) break;
    for (auto& c : r) c = -c;
    chain.push_back(normalise(r));
  }
  return chain;
}

inline int sign_variations(const std::vector<std::vector<Rational>>& chain, const Rational& x) {
  int variations = 0;
  int last = 0;
  for (const auto& q : chain) {
    int s = sign_of(evaluate(q, x));
    if (s == 0) continue;
    if (last != 0 && s != last) ++variations;
    last = s;
  }
  return variations;
}

/// Number of distinct real roots in (a, b]; exact.
inline int count_real_roots(const std::vector<Rational>& p, const Rational& a, const Rational& b) {
  auto chain = sturm_chain(p);
  if (chain.front().empty()) return 0;
  return sign_variations(chain, a) - sign_variations(chain, b);
}

/// Exact multiplicity of the root x = r (r = ±1) and the cofactor.
inline int divide_out_root(std::vector<Rational>& p, const Rational& r) {
  int mult = 0;
  const std::vector<Rational> lin{-r, Rational(1)};
  while (!p.empty() && evaluate(p, r) == 0) {
    p = poly_div(p, lin);
    ++mult;
  }
  return mult;
}

/// For a palindromic polynomial r of even degree 2d, returns q of degree d
/// with r(x) = x^d q(x + 1/x). Uses x^j + x^-j = D_j(x + 1/x) with
/// D_0 = 2, D_1 = y, D_j = y D_{j-1} - D_{j-2}.
inline std::vector<Rational> trace_polynomial(const std::vector<Rational>& r) {
  require(r.size() % 2 == 1, ErrorCode::InvalidArgument, "trace_polynomial needs even degree");
  require(is_palindromic(r), ErrorCode::InvalidArgument, "trace_polynomial needs palindromic input");
  const std::size_t d = (r.size() - 1) / 2;
  std::vector<Rational> q(d + 1);
  q[0] = r[d];
  std::vector<Rational> dm2{Rational(2)};
  std::vector<Rational> dm1{Rational(0), Rational(1)};
  for (std::size_t j = 1; j <= d; ++j) {
    std::vector<Rational> dj;
    if (j == 1) {
      dj = dm1;
    } else {
      dj.assign(j + 1, Rational(0));
      for (std::size_t i = 0; i < dm1.size(); ++i) dj[i + 1] += dm1[i];
      for (std::size_t i = 0; i < dm2.size(); ++i) dj[i] -= dm2[i];
      dm2 = dm1;
      dm1 = dj;
    }
    for (std::size_t i = 0; i < dj.size(); ++i) q[i] += r[d + j] * dj[i];
  }
  trim(q);
  return q;
}

/// Where the roots of an integer polynomial on the unit circle come from.
struct UnitCircleRoots {
  int mult_plus_one = 0;     // multiplicity of x = 1
  int mult_minus_one = 0;    // multiplicity of x = -1
  int sturm_count = 0;       // distinct non-real roots on the circle, counted in conjugate pairs
  int distinct() const { return (mult_plus_one > 0) + (mult_minus_one > 0) + 2 * sturm_count; }
  bool any() const { return distinct() > 0; }
};

/// Exact count of distinct roots on |x| = 1 of an integer polynomial.
///
/// Unit-circle roots of p are common roots of p and its reciprocal, so we
/// reduce to g = gcd(p, p*), strip x = ±1, and count real roots of the
/// trace polynomial of g in (-2, 2) with a Sturm chain.
inline UnitCircleRoots unit_circle_roots(const std::vector<BigInt>& coeffs) {
  auto p = to_rational(coeffs);
  trim(p);
  require(!p.empty(), ErrorCode::InvalidArgument, "zero polynomial");
  // strip roots at zero, they have no reciprocal partner
  while (p.size() > 1 && p.front() == 0) p.erase(p.begin());
  UnitCircleRoots out;
  std::vector<Rational> g = poly_gcd(p, reciprocal(p));
  out.mult_plus_one = divide_out_root(p, Rational(1));
  out.mult_minus_one = divide_out_root(p, Rational(-1));
  divide_out_root(g, Rational(1));
  divide_out_root(g, Rational(-1));
  if (g.size() <= 1) return out;
  // With x = ±1 gone, g* = ±g forces the + sign and even degree.
  g = make_monic(g);
  require(is_palindromic(g) && g.size() % 2 == 1, ErrorCode::InvalidArgument,
          "reciprocal factor is not palindromic after removing x = ±1");
  auto q = trace_polynomial(g);
  out.sturm_count = count_real_roots(q, Rational(-2), Rational(2));
  // x = 1 / -1 correspond to y = 2 / -2, excluded above, so (-2, 2] == (-2, 2).
  return out;
}

/// Squarefree part p / gcd(p, p') (monic, rational coefficients).
inline std::vector<Rational> squarefree_part(const std::vector<BigInt>& coeffs) {
  auto p = to_rational(coeffs);
  trim(p);
  auto g = poly_gcd(p, derivative(p));
  return make_monic(poly_div(p, g));
}

inline std::string poly_to_string(const std::vector<BigInt>& p) {
  std::string s;
  for (int i = degree(p); i >= 0; --i) {
    const BigInt& c = p[static_cast<std::size_t>(i)];
    if (c == 0) continue;
    if (!s.empty()) s += c > 0 ? " + " : " - ";
    else if (c < 0) s += "-";
    BigInt a = abs(c);
    if (a != 1 || i == 0) s += a.str();
    if (i >= 1) s += "x";
    if (i >= 2) s += "^" + std::to_string(i);
  }
  return s.empty() ? "0" : s;
}

}  // namespace hypl2
