#pragma once

// The operator d/dt : Gamma(H^1) -> Gamma'(H^1) over a norm profile.
//
// Gamma' is L^2([0,inf), <.,.>_t dt); Gamma is the subspace with d/dt in
// Gamma', carrying the graph norm. On a grid t_0 < ... < t_N the node values
// are whitened as x_k = sqrt(w_k) F(t_k) u_k (w_k trapezoid weights) and the
// midpoint difference quotients as y_k = sqrt(h_k) F(m_k) (u_{k+1} - u_k) / h_k,
// so that y = A x with block rows [-P_k, Q_k].

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hypl2/error.hpp"
#include "hypl2/linalg.hpp"
#include "hypl2/norm_profile.hpp"

namespace hypl2 {

// ---------------------------------------------------------------------------
// Paths

struct WeightedPath {
  std::vector<double> grid;
  std::vector<Vec> values;

  /// sum_k w_k values_k^T G(t_k) values_k with trapezoid weights.
  double weighted_norm_sq(const NormProfile& profile) const {
    std::vector<double> f;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double n = profile.norm(grid[k], values[k]);
      f.push_back(n * n);
    }
    return trapezoid(grid, f);
  }
};

using PathFunction = std::function<Vec(double)>;

inline std::vector<double> uniform_grid(double t_max, double density) {
  require(t_max > 0 && density > 0, ErrorCode::InvalidArgument, "grid needs positive length and density");
  const auto n = static_cast<std::size_t>(std::llround(t_max * density));
  require(n >= 2, ErrorCode::GridTooCoarse, "fewer than two grid intervals");
  return linspace(0.0, t_max, n + 1);
}

inline std::vector<double> trapezoid_weights(const std::vector<double>& t) {
  std::vector<double> w(t.size(), 0.0);
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double h = t[k + 1] - t[k];
    w[k] += 0.5 * h;
    w[k + 1] += 0.5 * h;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Discretised derivative

class DiscretizedDerivative {
 public:
  DiscretizedDerivative(const NormProfile& profile, std::vector<double> grid)
      : profile_(&profile), grid_(std::move(grid)) {
    require(grid_.size() >= 3, ErrorCode::GridTooCoarse, "need at least two intervals");
    for (std::size_t k = 1; k < grid_.size(); ++k)
      require(grid_[k] > grid_[k - 1], ErrorCode::InvalidArgument, "grid must increase strictly");
    const auto w = trapezoid_weights(grid_);
    for (std::size_t k = 0; k + 1 < grid_.size(); ++k) {
      const double h = grid_[k + 1] - grid_[k];
      const double m = 0.5 * (grid_[k] + grid_[k + 1]);
      p_.push_back(profile.transfer(grid_[k], m) / (std::sqrt(h) * std::sqrt(w[k])));
      q_.push_back(profile.transfer(grid_[k + 1], m) / (std::sqrt(h) * std::sqrt(w[k + 1])));
    }
  }

  const std::vector<double>& grid() const noexcept { return grid_; }
  int dim() const noexcept { return profile_->dim(); }
  std::size_t intervals() const noexcept { return grid_.size() - 1; }

  /// Difference quotients (u_{k+1} - u_k) / h_k at the midpoints.
  std::vector<Vec> apply(const std::vector<Vec>& u) const {
    require(u.size() == grid_.size(), ErrorCode::DimensionMismatch, "path length does not match grid");
    std::vector<Vec> out;
    for (std::size_t k = 0; k + 1 < grid_.size(); ++k) out.push_back((u[k + 1] - u[k]) / (grid_[k + 1] - grid_[k]));
    return out;
  }

  /// The whitened operator as a dense matrix (tests and small problems).
  Mat dense_whitened() const {
    const int n = dim();
    const auto N = static_cast<Eigen::Index>(intervals());
    Mat a = Mat::Zero(N * n, (N + 1) * n);
    for (Eigen::Index k = 0; k < N; ++k) {
      a.block(k * n, k * n, n, n) = -p_[static_cast<std::size_t>(k)];
      a.block(k * n, (k + 1) * n, n, n) = q_[static_cast<std::size_t>(k)];
    }
    return a;
  }

  /// Smallest singular value of the whitened operator on the orthogonal
  /// complement of its kernel (the constant paths): sqrt(lambda_min(A A^T)).
  double sigma_min() const {
    const int n = dim();
    const std::size_t N = intervals();
    // blocks of A A^T
    std::vector<Mat> diag(N), upper(N > 0 ? N - 1 : 0);
    for (std::size_t k = 0; k < N; ++k) diag[k] = p_[k] * p_[k].transpose() + q_[k] * q_[k].transpose();
    for (std::size_t k = 0; k + 1 < N; ++k) upper[k] = -q_[k] * p_[k + 1].transpose();

    // block Cholesky of the tridiagonal matrix
    std::vector<Eigen::LLT<Mat>> schur(N);
    schur[0].compute(diag[0]);
    for (std::size_t k = 1; k < N; ++k) {
      require(schur[k - 1].info() == Eigen::Success, ErrorCode::NotPositiveDefinite, "A A^T not positive definite");
      schur[k].compute(diag[k] - upper[k - 1].transpose() * schur[k - 1].solve(upper[k - 1]));
    }
    require(schur[N - 1].info() == Eigen::Success, ErrorCode::NotPositiveDefinite, "A A^T not positive definite");

    const auto rows = static_cast<Eigen::Index>(N) * n;
    auto solve = [&](const Mat& b) {
      Mat y = b;
      for (std::size_t k = 1; k < N; ++k) {
        const auto r = static_cast<Eigen::Index>(k) * n;
        y.middleRows(r, n) -= upper[k - 1].transpose() * schur[k - 1].solve(y.middleRows(r - n, n));
      }
      Mat x(rows, b.cols());
      for (std::size_t kk = N; kk-- > 0;) {
        const auto r = static_cast<Eigen::Index>(kk) * n;
        Mat rhs = y.middleRows(r, n);
        if (kk + 1 < N) rhs -= upper[kk] * x.middleRows(r + n, n);
        x.middleRows(r, n) = schur[kk].solve(rhs);
      }
      return x;
    };
    auto multiply = [&](const Mat& x) {
      Mat y(rows, x.cols());
      for (std::size_t k = 0; k < N; ++k) {
        const auto r = static_cast<Eigen::Index>(k) * n;
        y.middleRows(r, n) = diag[k] * x.middleRows(r, n);
        if (k > 0) y.middleRows(r, n) += upper[k - 1].transpose() * x.middleRows(r - n, n);
        if (k + 1 < N) y.middleRows(r, n) += upper[k] * x.middleRows(r + n, n);
      }
      return y;
    };

    // subspace inverse iteration with Rayleigh-Ritz
    const Eigen::Index p = std::min<Eigen::Index>(rows, n + 3);
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss;
    Mat x = Mat::NullaryExpr(rows, p, [&] { return gauss(rng); });
    double theta = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 500; ++it) {
      Mat y = solve(x);
      Eigen::HouseholderQR<Mat> qr(y);
      Mat q = qr.householderQ() * Mat::Identity(rows, p);
      Mat h = q.transpose() * multiply(q);
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.transpose()));
      const double next = es.eigenvalues()(0);
      x = q * es.eigenvectors();
      if (std::abs(next - theta) <= 1e-13 * std::abs(next)) {
        theta = next;
        break;
      }
      theta = next;
    }
    return std::sqrt(std::max(theta, 0.0));
  }

  /// Same quantity measured against the graph norm on the domain.
  static double graph_norm_value(double sigma) { return sigma / std::sqrt(1.0 + sigma * sigma); }

 private:
  const NormProfile* profile_;
  std::vector<double> grid_;
  std::vector<Mat> p_, q_;
};

// ---------------------------------------------------------------------------
// Kernel

enum class KernelClass { Kernel, Divergent, Indeterminate };

inline std::string to_string(KernelClass c) {
  switch (c) {
    case KernelClass::Kernel: return "kernel";
    case KernelClass::Divergent: return "divergent";
    case KernelClass::Indeterminate: return "indeterminate";
  }
  return "?";
}

struct KernelDirection {
  Vec v;
  double mu = 0.0;  // integral over [T/2, T] divided by integral over [0, T/2]
  KernelClass cls = KernelClass::Indeterminate;
};

struct KernelResult {
  Mat basis;
  std::vector<KernelDirection> directions;
  double joint_mu = 0.0;
  bool indeterminate = false;
  double t_max = 0.0;
};

namespace detail {

/// log of int_a^b ||v||_t^2 dt by the trapezoid rule in scaled form.
inline double log_sq_integral(const NormProfile& profile, const Vec& v, double a, double b, double step) {
  const auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((b - a) / step)));
  const auto t = linspace(a, b, n + 1);
  std::vector<double> l;
  for (double s : t) l.push_back(2.0 * profile.log_norm(s, v));
  const double m = *std::max_element(l.begin(), l.end());
  std::vector<double> f;
  for (double x : l) f.push_back(std::exp(x - m));
  return m + std::log(trapezoid(t, f));
}

inline Mat gram_integral(const NormProfile& profile, const Mat& k, double a, double b, double step) {
  const auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((b - a) / step)));
  const auto t = linspace(a, b, n + 1);
  Mat acc = Mat::Zero(k.cols(), k.cols());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double w = (i == 0 || i + 1 == t.size() ? 0.5 : 1.0) * (t[1] - t[0]);
    Mat fk(k.rows(), k.cols());
    for (Eigen::Index j = 0; j < k.cols(); ++j) fk.col(j) = profile.image(t[i], k.col(j));
    acc += w * fk.transpose() * fk;
  }
  return acc;
}

}  // namespace detail

/// Classifies the natural directions of the profile by comparing the square
/// integral over [T/2, T] with the one over [0, T/2]: ratio < tol means the
/// direction is square integrable, ratio >= divergent_threshold means it is
/// not, anything between is Indeterminate. The accepted directions are then
/// checked jointly through the generalised eigenproblem of the two integrals.
inline KernelResult kernel_analysis(const NormProfile& profile, double t_max = 50.0, double tol = 0.05,
                                    double divergent_threshold = 0.3, double step = 0.05) {
  require(t_max > 0 && tol > 0 && tol < divergent_threshold, ErrorCode::InvalidArgument, "bad kernel thresholds");
  KernelResult out;
  out.t_max = std::min(t_max, profile.horizon());
  const double half = 0.5 * out.t_max;
  const Mat nb = profile.natural_basis();
  std::vector<Vec> accepted;
  for (Eigen::Index j = 0; j < nb.cols(); ++j) {
    KernelDirection d;
    d.v = nb.col(j).normalized();
    d.mu = std::exp(detail::log_sq_integral(profile, d.v, half, out.t_max, step) -
                    detail::log_sq_integral(profile, d.v, 0.0, half, step));
    if (d.mu < tol) {
      d.cls = KernelClass::Kernel;
      accepted.push_back(d.v);
    } else if (d.mu >= divergent_threshold) {
      d.cls = KernelClass::Divergent;
    } else {
      d.cls = KernelClass::Indeterminate;
      out.indeterminate = true;
    }
    out.directions.push_back(std::move(d));
  }
  Mat k(profile.dim(), static_cast<Eigen::Index>(accepted.size()));
  for (std::size_t j = 0; j < accepted.size(); ++j) k.col(static_cast<Eigen::Index>(j)) = accepted[j];
  if (k.cols() > 0) {
    k = orthonormal_range(k, 1e-10);
    const Mat a1 = detail::gram_integral(profile, k, 0.0, half, step);
    const Mat a2 = detail::gram_integral(profile, k, half, out.t_max, step);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(a2, a1, Eigen::EigenvaluesOnly);
    out.joint_mu = es.eigenvalues().maxCoeff();
    if (out.joint_mu >= tol) out.indeterminate = true;
  }
  out.basis = k;
  return out;
}

/// Basis of the constant solutions lying in Gamma'; Indeterminate when any
/// direction cannot be classified at this horizon.
inline Mat kernel(const NormProfile& profile, double t_max = 50.0, double tol = 0.05) {
  const KernelResult r = kernel_analysis(profile, t_max, tol);
  if (r.indeterminate) {
    std::string msg = "partial integrals do not separate at T = " + std::to_string(r.t_max) + ":";
    for (const auto& d : r.directions) msg += " " + std::to_string(d.mu);
    fail(ErrorCode::Indeterminate, msg);
  }
  return r.basis;
}

// ---------------------------------------------------------------------------
// Explicit solution under a split

struct SplitSpec {
  Mat e_plus;
  Mat e_minus;
  double a = 1.0;
  double c_plus = 1.0;
  double c_minus = 1.0;
};

struct SplitSolution {
  WeightedPath w;
  double residual = 0.0;      // Gamma' norm of (dw/dt - v) at midpoints
  double w_norm = 0.0;        // Gamma' norm of w including the tail estimate
  double tail_estimate = 0.0; // contribution of [T, inf) to ||w||^2
  SplitCheck hypothesis;
};

inline std::vector<double> default_split_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 80; ++i) g.push_back(0.25 * i);
  return g;
}

namespace detail {

/// Decay rate kappa of log|f| over the last tenth of the grid (f ~ e^{-kappa t}).
inline std::optional<double> tail_decay_rate(const std::vector<double>& t, const std::vector<double>& logf) {
  // fit the suffix maximum so oscillation zeros do not drag the slope
  std::vector<double> x, y;
  const double start = t.front() + 0.8 * (t.back() - t.front());
  double run = -INFINITY;
  for (std::size_t i = t.size(); i-- > 0 && t[i] >= start;) {
    run = std::max(run, logf[i]);
    if (std::isfinite(run)) {
      x.push_back(t[i]);
      y.push_back(run);
    }
  }
  if (x.size() < 2) return std::nullopt;
  return -fit_line(x, y).slope;
}

}  // namespace detail

/// w(t) = -int_t^inf v_+(s) ds + int_0^t v_-(s) ds, so dw/dt = v. The growing
/// component is integrated in from infinity, the decaying one out from zero.
inline SplitSolution solve_split(const NormProfile& profile, const SplitSpec& split, const PathFunction& v,
                                 const std::vector<double>& grid,
                                 const std::vector<double>& verify_grid = default_split_grid()) {
  SplitSolution out;
  out.hypothesis = verify_split_hypothesis(profile, split.e_plus, split.e_minus, split.a, split.c_plus, split.c_minus,
                                           verify_grid);
  if (!out.hypothesis.holds)
    fail(ErrorCode::SplitHypothesisUnverified,
         "split inequality fails at s1 = " + std::to_string(out.hypothesis.worst.s1) +
             ", s2 = " + std::to_string(out.hypothesis.worst.s2) + " (margin " +
             std::to_string(out.hypothesis.worst.margin) + ")");
  require(grid.size() >= 3, ErrorCode::GridTooCoarse, "grid too short");
  const int n = profile.dim();
  const int kp = static_cast<int>(split.e_plus.cols());
  Mat basis(n, n);
  basis << split.e_plus, split.e_minus;
  const Mat coords = basis.inverse();

  const std::size_t N = grid.size();
  std::vector<Vec> vp(N), vm(N);
  for (std::size_t k = 0; k < N; ++k) {
    const Vec val = v(grid[k]);
    require(val.size() == n, ErrorCode::DimensionMismatch, "path value has wrong dimension");
    const Vec y = coords * val;
    vp[k] = split.e_plus * y.head(kp);
    vm[k] = split.e_minus * y.tail(n - kp);
  }

  // tail of int_T^inf v_+ by exponential extrapolation
  Vec tail = Vec::Zero(n);
  if (vp.back().norm() > 0) {
    std::vector<double> lf;
    for (const auto& x : vp) lf.push_back(x.norm() > 0 ? std::log(x.norm()) : -INFINITY);
    const auto kappa = detail::tail_decay_rate(grid, lf);
    if (!kappa || *kappa <= 0) fail(ErrorCode::TailNotIntegrable, "growing component does not decay at the horizon");
    tail = vp.back() / *kappa;
  }

  std::vector<Vec> from_inf(N, Vec::Zero(n)), from_zero(N, Vec::Zero(n));
  from_inf[N - 1] = tail;
  for (std::size_t k = N - 1; k-- > 0;)
    from_inf[k] = from_inf[k + 1] + 0.5 * (grid[k + 1] - grid[k]) * (vp[k] + vp[k + 1]);
  for (std::size_t k = 1; k < N; ++k)
    from_zero[k] = from_zero[k - 1] + 0.5 * (grid[k] - grid[k - 1]) * (vm[k] + vm[k - 1]);

  out.w.grid = grid;
  for (std::size_t k = 0; k < N; ++k) out.w.values.push_back(-from_inf[k] + from_zero[k]);

  double res = 0.0;
  for (std::size_t k = 0; k + 1 < N; ++k) {
    const double h = grid[k + 1] - grid[k];
    const double m = 0.5 * (grid[k] + grid[k + 1]);
    const Vec diff = (out.w.values[k + 1] - out.w.values[k]) / h - v(m);
    const double nrm = profile.norm(m, diff);
    res += h * nrm * nrm;
  }
  out.residual = std::sqrt(res);

  std::vector<double> sq, lsq;
  for (std::size_t k = 0; k < N; ++k) {
    const double nrm = profile.norm(grid[k], out.w.values[k]);
    sq.push_back(nrm * nrm);
    lsq.push_back(nrm > 0 ? 2.0 * std::log(nrm) : -INFINITY);
  }
  double total = trapezoid(grid, sq);
  if (sq.back() > 0) {
    const auto kappa = detail::tail_decay_rate(grid, lsq);
    if (!kappa || *kappa <= 0) fail(ErrorCode::TailNotIntegrable, "||w||_t^2 does not decay at the horizon");
    out.tail_estimate = sq.back() / *kappa;
    total += out.tail_estimate;
  }
  out.w_norm = std::sqrt(total);
  return out;
}

// ---------------------------------------------------------------------------
// Volterra operators under an exponential weight

enum class VolterraSide { Upper, Lower };

struct VolterraReport {
  double max_ratio = 0.0;
  double bound = 0.0;  // 1 / (c a)
  int trials = 0;
};

struct VolterraOptions {
  double step = 0.0;         // 0: chosen from a
  double support_max = 20.0; // supports live in [0, support_max]
  double shift = 0.0;        // translate every support by this amount
  unsigned seed = 1;
};

/// Weight with the constant c: ||v||_t = m(t) e^{at} (upper, growth,
/// operator int_t^inf) or e^{-at} / m(t) (lower, decay, operator int_0^t),
/// where m oscillates in [c, 1]. The operator bound is 1 / (c a) in both cases.
inline double volterra_weight(double t, double a, double c, VolterraSide side) {
  const double m = c + (1.0 - c) * 0.5 * (1.0 + std::cos(2.0 * M_PI * t));
  return side == VolterraSide::Upper ? m * std::exp(a * t) : std::exp(-a * t) / m;
}

/// Largest ||O f|| / ||f|| over random compactly supported f, by dense
/// quadrature. Norms are computed relative to the weight at the support start
/// so that large shifts do not overflow.
inline VolterraReport volterra_norm_check(double a, double c, VolterraSide side, int trials,
                                          const VolterraOptions& opt = {}) {
  require(a > 0 && c > 0 && c <= 1 && trials > 0, ErrorCode::InvalidArgument, "need a > 0, 0 < c <= 1, trials > 0");
  VolterraReport rep;
  rep.bound = 1.0 / (c * a);
  rep.trials = trials;
  const double h = opt.step > 0 ? opt.step : 0.005 * std::min(1.0, 1.0 / a);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss;

  for (int trial = 0; trial < trials; ++trial) {
    const double len = 0.5 + unif(rng) * 0.5 * opt.support_max;
    const double s0 = opt.shift + unif(rng) * (opt.support_max - len);
    const int bumps = 1 + static_cast<int>(unif(rng) * 6);
    std::vector<double> centre, width, amp;
    for (int b = 0; b < bumps; ++b) {
      width.push_back(0.05 * len + unif(rng) * 0.5 * len);
      centre.push_back(s0 + unif(rng) * len);
      amp.push_back(gauss(rng));
    }
    auto f = [&](double t) {
      if (t <= s0 || t >= s0 + len) return 0.0;
      double s = 0.0;
      for (int b = 0; b < bumps; ++b) {
        const double x = (t - centre[static_cast<std::size_t>(b)]) / width[static_cast<std::size_t>(b)];
        s += amp[static_cast<std::size_t>(b)] * std::exp(-x * x);
      }
      const double u = (t - s0) / len;  // smooth cutoff to keep f compactly supported
      return s * std::exp(-1.0 / (u * (1.0 - u)) + 4.0);
    };
    // t range: Of lives on [0, s0+len] (upper) or [s0, inf) (lower)
    const double t_end = side == VolterraSide::Upper ? s0 + len : s0 + len + 40.0 / a;
    const auto n = static_cast<std::size_t>(std::ceil(t_end / h));
    const auto t = linspace(0.0, t_end, n + 1);
    std::vector<double> fv(t.size()), of(t.size(), 0.0);
    for (std::size_t i = 0; i < t.size(); ++i) fv[i] = f(t[i]);
    if (side == VolterraSide::Upper) {
      for (std::size_t i = t.size() - 1; i-- > 0;) of[i] = of[i + 1] + 0.5 * (t[i + 1] - t[i]) * (fv[i] + fv[i + 1]);
    } else {
      for (std::size_t i = 1; i < t.size(); ++i) of[i] = of[i - 1] + 0.5 * (t[i] - t[i - 1]) * (fv[i] + fv[i - 1]);
    }
    // weights relative to e^{+-a s0}
    std::vector<double> num(t.size()), den(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double m = c + (1.0 - c) * 0.5 * (1.0 + std::cos(2.0 * M_PI * t[i]));
      const double w = side == VolterraSide::Upper ? m * std::exp(a * (t[i] - s0)) : std::exp(-a * (t[i] - s0)) / m;
      num[i] = of[i] * of[i] * w * w;
      den[i] = fv[i] * fv[i] * w * w;
    }
    const double d = trapezoid(t, den);
    if (d <= 0) continue;
    rep.max_ratio = std::max(rep.max_ratio, std::sqrt(trapezoid(t, num) / d));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Non-surjectivity witness for polynomially bounded scalar weights

struct Lemma7Row {
  double T = 0.0;
  double min_norm = 0.0;  // min_c || c + int_0^t g ||_{L^2(h dt), [0, T]}
};

struct Lemma7Result {
  WeightedPath g;
  double norm_g_sq = 0.0;  // ||g||^2 in L^2(h dt) over [0, inf)
  double norm_g = 0.0;
  std::vector<Lemma7Row> divergence_table;
  bool strictly_increasing = false;
};

/// g(t) = (2+t)^{-1/2} (log(2+t))^{-3/4} h(t)^{-1/2}; the shift 1 -> 2 keeps
/// g square integrable at t = 0 without touching the tail.
inline double lemma7_g(double t, double h) {
  return std::pow(2.0 + t, -0.5) * std::pow(std::log(2.0 + t), -0.75) / std::sqrt(h);
}

inline Lemma7Result lemma7_witness(const std::function<double(double)>& h, double envelope_c, double t0 = 10.0,
                                   int doublings = 4, double step = 0.01) {
  require(envelope_c > 0 && t0 > 0 && doublings >= 1 && step > 0, ErrorCode::InvalidArgument, "bad witness options");
  const double t_last = t0 * std::pow(2.0, doublings);
  const auto grid = linspace(0.0, t_last, static_cast<std::size_t>(std::ceil(t_last / step)) + 1);
  std::vector<double> hv;
  for (double t : grid) {
    const double x = h(t);
    if (!(x * envelope_c * (1.0 + t) >= 1.0 - 1e-12) || !(x <= envelope_c * (1.0 + t) * (1.0 + 1e-12)))
      fail(ErrorCode::WeightEnvelopeViolated, "h(" + std::to_string(t) + ") = " + std::to_string(x));
    hv.push_back(x);
  }
  Lemma7Result out;
  out.g.grid = grid;
  std::vector<double> gv;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    gv.push_back(lemma7_g(grid[i], hv[i]));
    out.g.values.push_back(Vec::Constant(1, gv.back()));
  }

  // ||g||^2 = int g^2 h dt; in u = log(2+t) the integrand is g^2 h (2+t)
  {
    const double u0 = std::log(2.0), u1 = 40.0;
    const std::size_t n = 400000;
    const auto u = linspace(u0, u1, n + 1);
    std::vector<double> f;
    for (double x : u) {
      const double t = std::exp(x) - 2.0;
      const double g = lemma7_g(t, h(t));
      f.push_back(g * g * h(t) * (2.0 + t));
    }
    double s = trapezoid(u, f);
    // power-law tail A u^{-p} fitted on the last decade of u
    std::vector<double> lx, ly;
    for (std::size_t i = n - n / 10; i <= n; i += n / 100) {
      lx.push_back(std::log(u[i]));
      ly.push_back(std::log(f[i]));
    }
    const LineFit fit = fit_line(lx, ly);
    const double p = -fit.slope;
    if (p <= 1.0) fail(ErrorCode::TailNotIntegrable, "||g||^2 tail exponent " + std::to_string(p));
    s += f.back() * u1 / (p - 1.0);
    out.norm_g_sq = s;
    out.norm_g = std::sqrt(s);
  }

  // G(t) = int_0^t g, then min over c of || c + G ||_{L^2(h dt), [0, T]}
  std::vector<double> big_g(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) big_g[i] = big_g[i - 1] + 0.5 * (grid[i] - grid[i - 1]) * (gv[i] + gv[i - 1]);
  double previous = -1.0;
  out.strictly_increasing = true;
  for (int d = 0; d <= doublings; ++d) {
    const double T = t0 * std::pow(2.0, d);
    std::size_t end = 0;
    while (end + 1 < grid.size() && grid[end + 1] <= T + 1e-12) ++end;
    std::vector<double> t(grid.begin(), grid.begin() + static_cast<long>(end) + 1);
    std::vector<double> fh, fgh;
    for (std::size_t i = 0; i <= end; ++i) {
      fh.push_back(hv[i]);
      fgh.push_back(big_g[i] * hv[i]);
    }
    const double cstar = -trapezoid(t, fgh) / trapezoid(t, fh);
    std::vector<double> sq;
    for (std::size_t i = 0; i <= end; ++i) sq.push_back((cstar + big_g[i]) * (cstar + big_g[i]) * hv[i]);
    const double val = std::sqrt(trapezoid(t, sq));
    out.divergence_table.push_back({T, val});
    if (!(val > previous)) out.strictly_increasing = false;
    previous = val;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Smallest singular value scan

enum class ScanVerdict { ClosedImageLikely, NotClosedLikely, Inconclusive };

inline std::string to_string(ScanVerdict v) {
  switch (v) {
    case ScanVerdict::ClosedImageLikely: return "ClosedImageLikely";
    case ScanVerdict::NotClosedLikely: return "NotClosedLikely";
    case ScanVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct ScanResult {
  std::vector<double> T;
  std::vector<double> sigma;      // graph-norm value
  std::vector<double> sigma_raw;  // L^2 -> L^2 value
  double beta = 0.0;
  double r2 = 0.0;
  double refinement_change = 0.0;
  ScanVerdict verdict = ScanVerdict::Inconclusive;
};

struct ScanThresholds {
  double stability = 0.10;        // relative spread allowed across the top half
  double floor_fraction = 0.5;    // floor must stay above this fraction of the first value
  double beta_max = -0.5;
  double r2_min = 0.9;
  double refinement = 0.10;       // GridTooCoarse above this relative change
};

inline ScanResult sigma_min_scan(const NormProfile& profile, const std::vector<double>& t_list, double density = 10.0,
                                 const ScanThresholds& thr = {}, bool check_refinement = true) {
  require(t_list.size() >= 2, ErrorCode::InvalidArgument, "need at least two horizons");
  for (std::size_t i = 1; i < t_list.size(); ++i)
    require(t_list[i] > t_list[i - 1], ErrorCode::InvalidArgument, "horizons must increase");
  require(t_list.back() <= profile.horizon(), ErrorCode::OutOfRange, "horizon beyond sampled profile");
  ScanResult out;
  out.T = t_list;
  std::vector<std::future<double>> jobs;
  for (double T : t_list)
    jobs.push_back(std::async(std::launch::async, [&profile, T, density] {
      return DiscretizedDerivative(profile, uniform_grid(T, density)).sigma_min();
    }));
  for (auto& j : jobs) {
    const double s = j.get();
    out.sigma_raw.push_back(s);
    out.sigma.push_back(DiscretizedDerivative::graph_norm_value(s));
  }
  if (check_refinement) {
    // raw sigma: the graph-norm value saturates at 1 and would hide a coarse grid
    const double fine = DiscretizedDerivative(profile, uniform_grid(t_list.front(), 2 * density)).sigma_min();
    out.refinement_change = std::abs(fine - out.sigma_raw.front()) / out.sigma_raw.front();
    if (out.refinement_change > thr.refinement)
      fail(ErrorCode::GridTooCoarse, "refinement moves sigma_min by " + std::to_string(100 * out.refinement_change) + "%");
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    lx.push_back(std::log(t_list[i]));
    ly.push_back(std::log(out.sigma[i]));
  }
  const LineFit fit = fit_line(lx, ly);
  out.beta = fit.slope;
  out.r2 = fit.r2;
  const std::size_t top = t_list.size() / 2;
  const double hi = *std::max_element(out.sigma.begin() + static_cast<long>(top), out.sigma.end());
  const double lo = *std::min_element(out.sigma.begin() + static_cast<long>(top), out.sigma.end());
  const double floor = *std::min_element(out.sigma.begin(), out.sigma.end());
  if (hi <= (1.0 + thr.stability) * lo && floor >= thr.floor_fraction * out.sigma.front())
    out.verdict = ScanVerdict::ClosedImageLikely;
  else if (out.beta <= thr.beta_max && out.r2 >= thr.r2_min)
    out.verdict = ScanVerdict::NotClosedLikely;
  else
    out.verdict = ScanVerdict::Inconclusive;
  return out;
}

// ---------------------------------------------------------------------------
// Verdicts

enum class EndVerdict { ClosedImage, NotClosedImage, Inconclusive };

inline std::string to_string(EndVerdict v) {
  switch (v) {
    case EndVerdict::ClosedImage: return "ClosedImage";
    case EndVerdict::NotClosedImage: return "NotClosedImage";
    case EndVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct EnvelopeCheck {
  Vec direction;
  double c_half = 0.0;  // smallest C that works on [0, T/2]
  double c_full = 0.0;  // smallest C that works on [0, T]
  bool holds = false;
};

/// Smallest C (over rescalings of v) with 1/(C sqrt(1+t)) <= ||v||_t <= C sqrt(1+t)
/// on [0, T], evaluated on [0, T/2] and [0, T]; the envelope is taken to hold
/// when C has stopped growing.
inline EnvelopeCheck envelope_check(const NormProfile& profile, const Vec& v, double T, double step = 0.05,
                                    double growth_tol = 0.02) {
  EnvelopeCheck out;
  out.direction = v;
  double log_a = -INFINITY, log_b = INFINITY;  // log max ||v||/sqrt(1+t), log min ||v|| sqrt(1+t)
  const auto n = static_cast<std::size_t>(std::ceil(T / step));
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = T * static_cast<double>(i) / static_cast<double>(n);
    const double ln = profile.log_norm(t, v);
    const double half_log = 0.5 * std::log1p(t);
    log_a = std::max(log_a, ln - half_log);
    log_b = std::min(log_b, ln + half_log);
    if (2 * i <= n) out.c_half = std::exp(0.5 * (log_a - log_b));
  }
  out.c_full = std::exp(0.5 * (log_a - log_b));
  out.holds = out.c_full <= (1.0 + growth_tol) * out.c_half;
  return out;
}

struct EndOptions {
  std::optional<SplitSpec> split;
  std::vector<double> split_grid = default_split_grid();
  double envelope_horizon = 200.0;
  std::vector<double> t_list{10, 20, 40, 80};
  double density = 10.0;
  double kernel_t_max = 50.0;
  double kernel_tol = 0.05;
  bool always_scan = false;
};

struct EndEvidence {
  int branch = 0;  // 1 split, 2 envelope, 3 scan
  bool heuristic = false;
  std::optional<SplitSpec> split;
  std::optional<SplitCheck> split_check;
  std::vector<EnvelopeCheck> envelopes;
  std::optional<ScanResult> scan;
  KernelResult kernel;
  std::string note;
};

struct EndResult {
  EndVerdict verdict = EndVerdict::Inconclusive;
  EndEvidence evidence;
};

/// Split constants measured on [0, window]: c+ from the smallest and c- from
/// the largest normalised ratio over grid pairs, each with 10% slack.
inline SplitSpec estimate_split(const NormProfile& profile, const Mat& e_plus, const Mat& e_minus, double a,
                                double window = 2.0, double step = 0.125) {
  SplitSpec s{e_plus, e_minus, a, 1.0, 1.0};
  std::vector<double> grid;
  for (double t = 0; t <= window + 1e-12; t += step) grid.push_back(t);
  auto extreme = [&](const Mat& e, bool plus) {
    double best = plus ? INFINITY : -INFINITY;
    for (Eigen::Index j = 0; j < e.cols(); ++j) {
      const Vec v = e.col(j).normalized();
      std::vector<double> ln;
      for (double t : grid) ln.push_back(profile.log_norm(t, v));
      for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t k = 0; k <= i; ++k) {
          const double ds = grid[i] - grid[k];
          const double r = plus ? ln[i] - ln[k] - a * ds : ln[i] - ln[k] + a * ds;
          best = plus ? std::min(best, r) : std::max(best, r);
        }
    }
    return best;
  };
  if (e_plus.cols() > 0) s.c_plus = 0.9 * std::exp(extreme(e_plus, true));
  if (e_minus.cols() > 0) s.c_minus = std::exp(extreme(e_minus, false)) / 0.9;
  return s;
}

/// Split read off the profile when it carries one: the exponential split
/// itself, or the expanding/contracting blocks of a monodromy with E_0 = 0.
inline std::optional<SplitSpec> auto_split(const NormProfile& profile) {
  if (const auto* d = profile.exponential()) {
    const Mat ep = d->basis.leftCols(d->plus_dim);
    const Mat em = d->basis.rightCols(d->basis.cols() - d->plus_dim);
    return estimate_split(profile, ep, em, 0.9 * d->a);
  }
  if (const auto* d = profile.periodic()) {
    if (d->split.e0_dim != 0 || d->split.pairs.empty()) return std::nullopt;
    std::vector<Mat> plus, minus;
    double rate = INFINITY;
    Eigen::Index kp = 0, km = 0;
    for (const auto& b : d->blocks) {
      if (b.log_modulus > 0) kp += b.basis.cols();
      if (b.log_modulus < 0) km += b.basis.cols();
      rate = std::min(rate, std::abs(b.log_modulus));
    }
    Mat ep(profile.dim(), kp), em(profile.dim(), km);
    Eigen::Index ip = 0, im = 0;
    for (const auto& b : d->blocks) {
      if (b.log_modulus > 0) {
        ep.middleCols(ip, b.basis.cols()) = b.basis;
        ip += b.basis.cols();
      } else {
        em.middleCols(im, b.basis.cols()) = b.basis;
        im += b.basis.cols();
      }
    }
    return estimate_split(profile, ep, em, 0.9 * rate);
  }
  return std::nullopt;
}

inline EndResult end_verdict(const NormProfile& profile, const EndOptions& opt = {}) {
  EndResult out;
  auto& ev = out.evidence;
  ev.kernel = kernel_analysis(profile, opt.kernel_t_max, opt.kernel_tol);

  // branch 1: split hypothesis
  ev.split = opt.split ? opt.split : auto_split(profile);
  if (ev.split) {
    ev.split_check = verify_split_hypothesis(profile, ev.split->e_plus, ev.split->e_minus, ev.split->a,
                                             ev.split->c_plus, ev.split->c_minus, opt.split_grid);
    if (ev.split_check->holds) {
      out.verdict = EndVerdict::ClosedImage;
      ev.branch = 1;
      ev.note = "exponential split verified; d/dt is onto";
    }
  }

  // branch 2: sqrt(1+t) envelope on some natural direction
  if (ev.branch == 0) {
    const double T = std::min(opt.envelope_horizon, profile.horizon());
    const Mat nb = profile.natural_basis();
    for (Eigen::Index j = 0; j < nb.cols(); ++j) {
      ev.envelopes.push_back(envelope_check(profile, nb.col(j).normalized(), T));
      if (ev.envelopes.back().holds && ev.branch == 0) {
        out.verdict = EndVerdict::NotClosedImage;
        ev.branch = 2;
        ev.note = "a direction stays within C sqrt(1+t) envelopes; d/dt is not onto";
      }
    }
  }

  // branch 3: singular value scan
  if (ev.branch == 0 || opt.always_scan) {
    ev.scan = sigma_min_scan(profile, opt.t_list, opt.density);
    if (ev.branch == 0) {
      ev.branch = 3;
      ev.heuristic = true;
      switch (ev.scan->verdict) {
        case ScanVerdict::ClosedImageLikely: out.verdict = EndVerdict::ClosedImage; break;
        case ScanVerdict::NotClosedLikely: out.verdict = EndVerdict::NotClosedImage; break;
        case ScanVerdict::Inconclusive: out.verdict = EndVerdict::Inconclusive; break;
      }
      ev.note = "heuristic: sigma_min scan " + to_string(ev.scan->verdict);
    }
  }
  return out;
}

enum class EndType { GeometricallyFinite, Degenerate };

struct EndSpec {
  EndType type = EndType::GeometricallyFinite;
  std::optional<NormProfile> profile;
  EndOptions options;
  std::string name;
};

struct ManifoldReport {
  std::optional<bool> zero_in_spectrum;  // empty when inconclusive
  std::string reason;
  std::vector<std::optional<EndResult>> ends;
  bool zero_in_function_spectrum = false;  // geometrically infinite <=> some degenerate end
};

inline ManifoldReport manifold_verdict(const std::vector<EndSpec>& ends, bool inj_radius_positive) {
  require(!ends.empty(), ErrorCode::EmptyEndList, "no ends given");
  ManifoldReport rep;
  bool any_gf = false, any_inconclusive = false, any_not_closed = false;
  for (const auto& e : ends) {
    if (e.type == EndType::GeometricallyFinite) {
      any_gf = true;
      rep.ends.emplace_back(std::nullopt);
      continue;
    }
    rep.zero_in_function_spectrum = true;
    require(e.profile.has_value(), ErrorCode::InvalidArgument, "degenerate end '" + e.name + "' needs a profile");
    if (!inj_radius_positive) {
      rep.ends.emplace_back(std::nullopt);
      continue;
    }
    EndResult r = end_verdict(*e.profile, e.options);
    any_not_closed |= r.verdict == EndVerdict::NotClosedImage;
    any_inconclusive |= r.verdict == EndVerdict::Inconclusive;
    rep.ends.emplace_back(std::move(r));
  }
  if (!inj_radius_positive) {
    rep.zero_in_spectrum = true;
    rep.reason = "injectivity radius tends to zero: essential spectrum on 1-forms is [0, inf)";
  } else if (any_gf) {
    rep.zero_in_spectrum = true;
    rep.reason = "a geometrically finite end contributes essential spectrum [0, inf)";
  } else if (any_not_closed) {
    rep.zero_in_spectrum = true;
    rep.reason = "an end has d/dt without closed image";
  } else if (any_inconclusive) {
    rep.zero_in_spectrum = std::nullopt;
    rep.reason = "an end verdict is inconclusive";
  } else {
    rep.zero_in_spectrum = false;
    rep.reason = "every end is degenerate with d/dt of closed image";
  }
  return rep;
}

}  // namespace hypl2
