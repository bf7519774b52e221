#pragma once

// Small dense linear-algebra helpers on top of Eigen.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "hypl2/error.hpp"

namespace hypl2 {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline double relative_threshold(const Mat& a, double rel) {
  if (a.size() == 0) return 0.0;
  return rel * std::max(1.0, a.norm());
}

inline int numerical_rank(const Mat& a, double rel = 1e-10) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  const double thr = relative_threshold(a, rel);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > thr) ++r;
  return r;
}

inline int numerical_rank(const Eigen::MatrixXcd& a, double rel) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  const double thr = rel * a.norm();
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > thr) ++r;
  return r;
}

/// Orthonormal basis (columns) of the column space.
inline Mat orthonormal_range(const Mat& a, double rel = 1e-10) {
  if (a.cols() == 0 || a.rows() == 0) return Mat(a.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU);
  const double thr = relative_threshold(a, rel);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > thr) ++r;
  return svd.matrixU().leftCols(r);
}

/// Orthonormal basis (columns) of the null space.
inline Mat null_space(const Mat& a, double rel = 1e-10) {
  const Eigen::Index n = a.cols();
  if (a.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const double thr = relative_threshold(a, rel);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > thr) ++r;
  return svd.matrixV().rightCols(n - r);
}

/// Symmetric function of an SPD (or symmetric) matrix via its eigen-decomposition.
template <class F>
Mat symmetric_apply(const Mat& s, F&& f) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s + s.transpose()));
  Vec d = es.eigenvalues().unaryExpr(f);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

inline Mat spd_sqrt(const Mat& s) {
  return symmetric_apply(s, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

inline Mat spd_inv_sqrt(const Mat& s) {
  return symmetric_apply(s, [](double x) { return 1.0 / std::sqrt(x); });
}

inline Mat spd_log(const Mat& s) {
  return symmetric_apply(s, [](double x) { return std::log(x); });
}

inline Mat sym_exp(const Mat& s) {
  return symmetric_apply(s, [](double x) { return std::exp(x); });
}

inline bool cholesky_ok(const Mat& g) {
  Eigen::LLT<Mat> llt(g);
  return llt.info() == Eigen::Success;
}

/// Least-squares line y = intercept + slope x with coefficient of determination.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::InvalidArgument, "fit_line needs >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0 && syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

/// Composite trapezoid rule on an arbitrary grid.
inline double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
  return s;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

}  // namespace hypl2
