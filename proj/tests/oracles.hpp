#pragma once

// Independent reference computations used only by the tests.

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include "hypl2/exact.hpp"

namespace oracle {

using HP = boost::multiprecision::cpp_bin_float_50;

// Eigenvalue moduli at 50 digits. Jordan blocks on the circle split roots by
// about sqrt(eps), which is far below 1e-9 at this precision.
inline std::vector<double> eigen_moduli(const hypl2::IntMatrix& m) {
  using MatHP = Eigen::Matrix<HP, Eigen::Dynamic, Eigen::Dynamic>;
  MatHP a(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) a(i, j) = HP(m(i, j));
  Eigen::EigenSolver<MatHP> es(a, false);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const auto z = es.eigenvalues()(i);
    out.push_back(static_cast<double>(boost::multiprecision::sqrt(z.real() * z.real() + z.imag() * z.imag())));
  }
  return out;
}

inline bool any_unit_modulus(const hypl2::IntMatrix& m, double tol = 1e-9) {
  for (double r : eigen_moduli(m))
    if (std::abs(r - 1.0) < tol) return true;
  return false;
}

// Characteristic polynomial by cofactor expansion (small matrices only).
inline std::vector<hypl2::BigInt> cofactor_charpoly(const hypl2::IntMatrix& m) {
  using P = std::vector<hypl2::BigInt>;
  const std::size_t n = m.rows();
  std::vector<std::vector<P>> a(n, std::vector<P>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      a[i][j] = P{-m(i, j)};
      if (i == j) a[i][j].push_back(1);
    }
  auto mul = [](const P& x, const P& y) {
    P z(x.size() + y.size() - 1);
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < y.size(); ++j) z[i + j] += x[i] * y[j];
    return z;
  };
  auto add = [](P x, const P& y, int s) {
    if (x.size() < y.size()) x.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) x[i] += s * y[i];
    return x;
  };
  std::function<P(std::vector<std::size_t>, std::vector<std::size_t>)> det =
      [&](std::vector<std::size_t> rows, std::vector<std::size_t> cols) -> P {
    if (rows.size() == 1) return a[rows[0]][cols[0]];
    P acc{0};
    std::vector<std::size_t> sub_rows(rows.begin() + 1, rows.end());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::vector<std::size_t> sub_cols;
      for (std::size_t k = 0; k < cols.size(); ++k)
        if (k != c) sub_cols.push_back(cols[k]);
      acc = add(acc, mul(a[rows[0]][cols[c]], det(sub_rows, sub_cols)), c % 2 == 0 ? 1 : -1);
    }
    return acc;
  };
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  P p = det(idx, idx);
  hypl2::trim(p);
  return p;
}

}  // namespace oracle
