#pragma once

// Families t -> G(t) of inner products on H^1(S; R), in four flavours:
// an exact exponential split, a periodic family driven by a monodromy,
// per-direction power laws, and sampled Gram matrices.
//
// Every kind exposes a factor F(t) with G(t) = F(t)^T F(t) and a transfer
// F(t2) F(t1)^{-1} that never forms the (often ill-conditioned) G itself.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "hypl2/error.hpp"
#include "hypl2/linalg.hpp"
#include "hypl2/symplectic.hpp"

namespace hypl2 {

enum class ProfileKind { ExponentialSplit, PeriodicPA, Polynomial, Sampled };

inline std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::ExponentialSplit: return "ExponentialSplit";
    case ProfileKind::PeriodicPA: return "PeriodicPA";
    case ProfileKind::Polynomial: return "Polynomial";
    case ProfileKind::Sampled: return "Sampled";
  }
  return "?";
}

struct ExponentialSplitData {
  Mat basis;       // [E+ | E-]
  Mat basis_inv;
  int plus_dim = 0;
  double a = 1.0;
  double c_plus = 1.0;
  double c_minus = 1.0;
};

/// One invariant block of the monodromy: phi B = B A with B orthonormal.
struct InvariantBlock {
  Mat basis;
  Mat action;
  Mat action_inv;
  double log_modulus = 0.0;  // log|lambda| shared by the block
};

struct PeriodicData {
  Mat phi;
  Mat g0;
  Mat g0_sqrt;
  Mat g0_inv_sqrt;
  Mat log_step;  // L = log(G0^{-1/2} G1 G0^{-1/2})
  std::vector<InvariantBlock> blocks;  // contracting, then unit, then expanding
  Mat coords;    // inverse of the concatenated block bases
  EigenSplit split;
};

struct PolynomialData {
  Vec coeff;
  Vec power;
  Mat basis;
  Mat basis_inv;
  double envelope = 0.0;  // stated C, 0 when not given
};

struct SampledData {
  std::vector<double> t;
  std::vector<Mat> gram;
  std::vector<Mat> log_gram;
  bool extrapolate = false;
};

class NormProfile {
 public:
  static NormProfile exponential_split(const Mat& e_plus, const Mat& e_minus, double a, double c_plus = 1.0,
                                       double c_minus = 1.0) {
    require(e_plus.rows() == e_minus.rows(), ErrorCode::DimensionMismatch, "E+ and E- live in different spaces");
    require(a > 0 && c_plus > 0 && c_minus > 0, ErrorCode::InvalidArgument, "rate and constants must be positive");
    const Eigen::Index n = e_plus.rows();
    require(e_plus.cols() + e_minus.cols() == n, ErrorCode::DimensionMismatch, "dim E+ + dim E- != n");
    ExponentialSplitData d;
    d.basis.resize(n, n);
    d.basis << e_plus, e_minus;
    require(numerical_rank(d.basis, 1e-12) == n, ErrorCode::InvalidArgument, "E+ and E- do not span");
    d.basis_inv = d.basis.inverse();
    d.plus_dim = static_cast<int>(e_plus.cols());
    d.a = a;
    d.c_plus = c_plus;
    d.c_minus = c_minus;
    return NormProfile(static_cast<int>(n), std::move(d));
  }

  static NormProfile periodic_pa(const SymplecticMatrix& phi, const Mat& g0, double tol = 1e-6) {
    const Eigen::Index n = static_cast<Eigen::Index>(phi.dim());
    require(g0.rows() == n && g0.cols() == n, ErrorCode::DimensionMismatch, "G(0) has the wrong size");
    require(cholesky_ok(g0), ErrorCode::NotPositiveDefinite, "G(0) is not positive definite");
    PeriodicData d;
    d.split = eigen_split(phi, tol);
    require(d.split.semisimple_on_circle, ErrorCode::InvalidArgument,
            "monodromy has a Jordan block on the unit circle; periodic profile undefined");
    d.phi = phi.to_double();
    d.g0 = 0.5 * (g0 + g0.transpose());
    d.g0_sqrt = spd_sqrt(d.g0);
    d.g0_inv_sqrt = spd_inv_sqrt(d.g0);
    const Mat g1 = d.phi.transpose() * d.g0 * d.phi;
    d.log_step = spd_log(d.g0_inv_sqrt * g1 * d.g0_inv_sqrt);

    auto add_block = [&](const Mat& b, double logmod) {
      if (b.cols() == 0) return;
      InvariantBlock blk;
      blk.basis = b;
      blk.action = b.transpose() * d.phi * b;
      blk.action_inv = blk.action.inverse();
      blk.log_modulus = logmod;
      d.blocks.push_back(std::move(blk));
    };
    for (auto it = d.split.pairs.rbegin(); it != d.split.pairs.rend(); ++it) add_block(it->basis_minus, -std::log(it->lambda));
    add_block(d.split.e0_basis, 0.0);
    for (const auto& p : d.split.pairs) add_block(p.basis_plus, std::log(p.lambda));
    Mat all(n, n);
    Eigen::Index col = 0;
    for (const auto& b : d.blocks) {
      all.middleCols(col, b.basis.cols()) = b.basis;
      col += b.basis.cols();
    }
    require(col == n && numerical_rank(all, 1e-10) == n, ErrorCode::ToleranceConflict,
            "invariant blocks do not span");
    d.coords = all.inverse();
    return NormProfile(static_cast<int>(n), std::move(d));
  }

  /// Squared norm h_i(t) = coeff_i (1+t)^power_i along column i of basis.
  static NormProfile polynomial(const Vec& coeff, const Vec& power, const Mat& basis = Mat(), double envelope = 0.0) {
    require(coeff.size() == power.size() && coeff.size() > 0, ErrorCode::DimensionMismatch, "coeff/power size");
    require((coeff.array() > 0).all(), ErrorCode::InvalidArgument, "coefficients must be positive");
    PolynomialData d;
    d.coeff = coeff;
    d.power = power;
    const Eigen::Index n = coeff.size();
    d.basis = basis.size() == 0 ? Mat(Mat::Identity(n, n)) : basis;
    require(d.basis.rows() == n && d.basis.cols() == n, ErrorCode::DimensionMismatch, "basis size");
    require(numerical_rank(d.basis, 1e-12) == n, ErrorCode::InvalidArgument, "basis is singular");
    d.basis_inv = d.basis.inverse();
    d.envelope = envelope;
    return NormProfile(static_cast<int>(n), std::move(d));
  }

  static NormProfile constant(int n) { return polynomial(Vec::Ones(n), Vec::Zero(n)); }

  static NormProfile sampled(std::vector<double> t, std::vector<Mat> gram, bool extrapolate = false) {
    require(!t.empty() && t.size() == gram.size(), ErrorCode::DimensionMismatch, "times and Grams differ in count");
    for (std::size_t i = 1; i < t.size(); ++i)
      require(t[i] > t[i - 1], ErrorCode::InvalidArgument, "sample times must increase strictly");
    const Eigen::Index n = gram.front().rows();
    SampledData d;
    for (std::size_t i = 0; i < gram.size(); ++i) {
      const Mat& g = gram[i];
      require(g.rows() == n && g.cols() == n, ErrorCode::DimensionMismatch, "Gram " + std::to_string(i) + " size");
      require((g - g.transpose()).norm() <= 1e-12 * std::max(1.0, g.norm()), ErrorCode::NotPositiveDefinite,
              "Gram " + std::to_string(i) + " is not symmetric");
      require(cholesky_ok(g), ErrorCode::NotPositiveDefinite, "Gram " + std::to_string(i) + " is not positive definite");
      d.log_gram.push_back(spd_log(g));
    }
    d.t = std::move(t);
    d.gram = std::move(gram);
    d.extrapolate = extrapolate;
    return NormProfile(static_cast<int>(n), std::move(d));
  }

  int dim() const noexcept { return dim_; }
  ProfileKind kind() const noexcept { return static_cast<ProfileKind>(data_.index()); }

  const ExponentialSplitData* exponential() const { return std::get_if<ExponentialSplitData>(&data_); }
  const PeriodicData* periodic() const { return std::get_if<PeriodicData>(&data_); }
  const PolynomialData* poly() const { return std::get_if<PolynomialData>(&data_); }
  const SampledData* samples() const { return std::get_if<SampledData>(&data_); }

  /// Largest time the profile is defined at (infinity unless sampled without
  /// extrapolation).
  double horizon() const {
    if (const auto* s = samples(); s && !s->extrapolate) return s->t.back();
    return std::numeric_limits<double>::infinity();
  }

  /// F(t) with G(t) = F^T F.
  Mat factor(double t) const {
    check_time(t);
    return std::visit([&](const auto& d) { return factor_impl(d, t); }, data_);
  }

  Mat gram(double t) const {
    check_time(t);
    if (const auto* s = samples()) {
      for (std::size_t i = 0; i < s->t.size(); ++i)
        if (s->t[i] == t) return s->gram[i];
    }
    const Mat f = factor(t);
    Mat g = f.transpose() * f;
    return 0.5 * (g + g.transpose());
  }

  /// F(t2) F(t1)^{-1}.
  Mat transfer(double t1, double t2) const {
    return std::visit([&](const auto& d) { return transfer_impl(d, t1, t2); }, data_);
  }

  /// F(t) v; for a periodic profile the invariant-block components are
  /// propagated separately.
  Vec image(double t, const Vec& v) const {
    require(v.size() == dim_, ErrorCode::DimensionMismatch, "vector has dimension " + std::to_string(v.size()));
    check_time(t);
    if (const auto* p = periodic()) return image_impl(*p, t, v);
    return factor(t) * v;
  }

  double norm(double t, const Vec& v) const {
    require(v.size() == dim_, ErrorCode::DimensionMismatch, "vector has dimension " + std::to_string(v.size()));
    if (v.isZero(0)) return 0.0;
    return std::exp(log_norm(t, v));
  }

  /// log of the norm; stays finite where the norm itself would overflow.
  double log_norm(double t, const Vec& v) const {
    require(v.size() == dim_, ErrorCode::DimensionMismatch, "vector has dimension " + std::to_string(v.size()));
    check_time(t);
    return std::visit([&](const auto& d) { return log_norm_impl(d, t, v); }, data_);
  }

  /// Directions in which the profile is naturally diagonal, as columns: the
  /// split basis, the invariant blocks of the monodromy, the power-law basis,
  /// or generalised eigenvectors of (G_last, G_first).
  Mat natural_basis() const {
    return std::visit([&](const auto& d) { return natural_basis_impl(d); }, data_);
  }

  /// max_t ||G(t+1) - phi^T G(t) phi|| / ||G(t)|| over the given times.
  double periodicity_defect(const std::vector<double>& times) const {
    const auto* d = periodic();
    require(d != nullptr, ErrorCode::InvalidArgument, "not a periodic profile");
    double worst = 0.0;
    for (double t : times) {
      const Mat g = gram(t);
      const Mat g1 = gram(t + 1.0);
      worst = std::max(worst, (g1 - d->phi.transpose() * g * d->phi).norm() / g.norm());
    }
    return worst;
  }

 private:
  using Data = std::variant<ExponentialSplitData, PeriodicData, PolynomialData, SampledData>;

  NormProfile(int n, Data d) : dim_(n), data_(std::move(d)) {}

  void check_time(double t) const {
    require(std::isfinite(t) && t >= 0.0, ErrorCode::OutOfRange, "time " + std::to_string(t));
    if (const auto* s = samples()) {
      require(s->extrapolate || (t >= s->t.front() && t <= s->t.back()), ErrorCode::OutOfRange,
              "time " + std::to_string(t) + " outside sampled range");
    }
  }

  // -- exponential split
  static Vec split_diag(const ExponentialSplitData& d, double t) {
    Vec diag(d.basis.cols());
    for (Eigen::Index i = 0; i < diag.size(); ++i)
      diag(i) = i < d.plus_dim ? d.c_plus * std::exp(d.a * t) : d.c_minus * std::exp(-d.a * t);
    return diag;
  }
  static Mat factor_impl(const ExponentialSplitData& d, double t) { return split_diag(d, t).asDiagonal() * d.basis_inv; }
  static Mat transfer_impl(const ExponentialSplitData& d, double t1, double t2) {
    Vec diag(d.basis.cols());
    for (Eigen::Index i = 0; i < diag.size(); ++i) diag(i) = std::exp((i < d.plus_dim ? d.a : -d.a) * (t2 - t1));
    return diag.asDiagonal();
  }
  static double log_norm_impl(const ExponentialSplitData& d, double t, const Vec& v) {
    const Vec y = d.basis_inv * v;
    std::vector<double> terms;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y(i) == 0) continue;
      const double logc = std::log(i < d.plus_dim ? d.c_plus : d.c_minus);
      terms.push_back(2.0 * (logc + (i < d.plus_dim ? d.a : -d.a) * t + std::log(std::abs(y(i)))));
    }
    return 0.5 * log_sum_exp(terms);
  }
  static Mat natural_basis_impl(const ExponentialSplitData& d) { return d.basis; }

  // -- periodic
  static Mat phi_power(const PeriodicData& d, long n) {
    const Eigen::Index dim = d.phi.rows();
    Mat out = Mat::Zero(dim, dim);
    Eigen::Index row = 0;
    for (const auto& b : d.blocks) {
      const Eigen::Index k = b.basis.cols();
      Mat p = Mat::Identity(k, k);
      Mat base = n >= 0 ? b.action : b.action_inv;
      for (long e = std::labs(n); e > 0; e >>= 1) {
        if (e & 1) p = p * base;
        base = base * base;
      }
      out += b.basis * p * d.coords.middleRows(row, k);
      row += k;
    }
    return out;
  }
  static Mat fractional_factor(const PeriodicData& d, double s) {
    return sym_exp(0.5 * s * d.log_step) * d.g0_sqrt;
  }
  static Mat fractional_factor_inv(const PeriodicData& d, double s) {
    return d.g0_inv_sqrt * sym_exp(-0.5 * s * d.log_step);
  }
  static Mat factor_impl(const PeriodicData& d, double t) {
    const double n = std::floor(t);
    return fractional_factor(d, t - n) * phi_power(d, static_cast<long>(n));
  }
  static Mat transfer_impl(const PeriodicData& d, double t1, double t2) {
    const double n1 = std::floor(t1), n2 = std::floor(t2);
    return fractional_factor(d, t2 - n2) * phi_power(d, static_cast<long>(n2 - n1)) * fractional_factor_inv(d, t1 - n1);
  }
  // Block coordinates below 64 eps of the largest are rounding noise; left in,
  // an expanding block would swamp a contracting vector after a few dozen periods.
  static double log_norm_impl(const PeriodicData& d, double t, const Vec& v) {
    return std::log(image_impl(d, t, v).norm());
  }
  static Vec image_impl(const PeriodicData& d, double t, const Vec& v) {
    const double n = std::floor(t);
    Vec c = d.coords * v;
    const double cut = 64.0 * std::numeric_limits<double>::epsilon() * c.cwiseAbs().maxCoeff();
    Vec w = Vec::Zero(v.size());
    Eigen::Index row = 0;
    for (const auto& b : d.blocks) {
      const Eigen::Index k = b.basis.cols();
      Vec cb = c.segment(row, k);
      row += k;
      if (cb.cwiseAbs().maxCoeff() <= cut) continue;
      Mat base = b.action;
      for (long e = static_cast<long>(n); e > 0; e >>= 1) {
        if (e & 1) cb = base * cb;
        base = base * base;
      }
      w += b.basis * cb;
    }
    return fractional_factor(d, t - n) * w;
  }
  static Mat natural_basis_impl(const PeriodicData& d) {
    Mat all(d.phi.rows(), d.phi.cols());
    Eigen::Index col = 0;
    for (const auto& b : d.blocks) {
      all.middleCols(col, b.basis.cols()) = b.basis;
      col += b.basis.cols();
    }
    return all;
  }

  // -- polynomial
  static Vec poly_sqrt_h(const PolynomialData& d, double t) {
    Vec s(d.coeff.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::sqrt(d.coeff(i) * std::pow(1.0 + t, d.power(i)));
    return s;
  }
  static Mat factor_impl(const PolynomialData& d, double t) { return poly_sqrt_h(d, t).asDiagonal() * d.basis_inv; }
  static Mat transfer_impl(const PolynomialData& d, double t1, double t2) {
    Vec r(d.coeff.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = std::pow((1.0 + t2) / (1.0 + t1), 0.5 * d.power(i));
    return r.asDiagonal();
  }
  static double log_norm_impl(const PolynomialData& d, double t, const Vec& v) {
    return std::log((factor_impl(d, t) * v).norm());
  }
  static Mat natural_basis_impl(const PolynomialData& d) { return d.basis; }

  // -- sampled
  static Mat log_gram_at(const SampledData& d, double t) {
    if (d.t.size() == 1) return d.log_gram.front();
    std::size_t i = 0;
    if (t >= d.t.back()) i = d.t.size() - 2;
    else if (t > d.t.front()) i = static_cast<std::size_t>(std::upper_bound(d.t.begin(), d.t.end(), t) - d.t.begin()) - 1;
    const double theta = (t - d.t[i]) / (d.t[i + 1] - d.t[i]);
    return (1.0 - theta) * d.log_gram[i] + theta * d.log_gram[i + 1];
  }
  static Mat factor_impl(const SampledData& d, double t) { return sym_exp(0.5 * log_gram_at(d, t)); }
  static Mat transfer_impl(const SampledData& d, double t1, double t2) {
    return sym_exp(0.5 * log_gram_at(d, t2)) * sym_exp(-0.5 * log_gram_at(d, t1));
  }
  static double log_norm_impl(const SampledData& d, double t, const Vec& v) {
    return std::log((factor_impl(d, t) * v).norm());
  }
  static Mat natural_basis_impl(const SampledData& d) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(d.gram.back(), d.gram.front());
    Mat v = es.eigenvectors();
    for (Eigen::Index j = 0; j < v.cols(); ++j) v.col(j).normalize();
    return v;
  }

  static double log_sum_exp(const std::vector<double>& x) {
    if (x.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(x.begin(), x.end());
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
  }

  int dim_ = 0;
  Data data_;
};

// ---------------------------------------------------------------------------

struct GrowthFit {
  double exponent_estimate = 0.0;
  double r2 = 0.0;
};

/// Least-squares slope of log ||v||_t on [t0, t1] sampled every step.
inline GrowthFit classify_growth(const NormProfile& profile, const Vec& v, double t0, double t1, double step = 0.1) {
  require(step > 0 && t0 >= 0 && t1 - t0 >= 10.0 * step, ErrorCode::DegenerateWindow,
          "window [" + std::to_string(t0) + ", " + std::to_string(t1) + "] shorter than 10 steps");
  require(!v.isZero(0), ErrorCode::DegenerateWindow, "zero vector has no growth rate");
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / step + 1e-9)) + 1;
  std::vector<double> ts, ys;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + step * static_cast<double>(i);
    ts.push_back(t);
    ys.push_back(profile.log_norm(t, v));
  }
  const LineFit f = fit_line(ts, ys);
  return {f.slope, f.r2};
}

struct SplitWitness {
  bool plus_side = true;  // which inequality failed
  double s1 = 0.0;
  double s2 = 0.0;
  Vec direction;
  double margin = 0.0;  // log-scale slack, negative when violated
};

struct SplitCheck {
  bool holds = false;
  bool spans = false;
  SplitWitness worst;
};

/// Checks ||v+||_{s1} >= c+ e^{a(s1-s2)} ||v+||_{s2} and
/// ||v-||_{s1} <= c- e^{-a(s1-s2)} ||v-||_{s2} for all grid pairs s1 >= s2,
/// on the basis columns of E+/E- plus `random_directions` random unit
/// combinations of each.
inline SplitCheck verify_split_hypothesis(const NormProfile& profile, const Mat& e_plus, const Mat& e_minus, double a,
                                          double c_plus, double c_minus, const std::vector<double>& grid,
                                          int random_directions = 8, unsigned seed = 1) {
  require(e_plus.rows() == profile.dim() && e_minus.rows() == profile.dim(), ErrorCode::DimensionMismatch,
          "split dimension does not match profile");
  require(a > 0 && c_plus > 0 && c_minus > 0, ErrorCode::InvalidArgument, "split constants must be positive");
  SplitCheck out;
  Mat both(profile.dim(), e_plus.cols() + e_minus.cols());
  both << e_plus, e_minus;
  out.spans = numerical_rank(both, 1e-10) == profile.dim();
  out.worst.margin = std::numeric_limits<double>::infinity();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  auto directions = [&](const Mat& e) {
    std::vector<Vec> dirs;
    for (Eigen::Index j = 0; j < e.cols(); ++j) dirs.push_back(e.col(j).normalized());
    if (e.cols() > 1)
      for (int k = 0; k < random_directions; ++k) {
        Vec c(e.cols());
        for (Eigen::Index j = 0; j < c.size(); ++j) c(j) = gauss(rng);
        dirs.push_back((e * c).normalized());
      }
    return dirs;
  };

  auto scan = [&](const Mat& e, bool plus) {
    for (const Vec& v : directions(e)) {
      std::vector<double> ln;
      for (double s : grid) ln.push_back(profile.log_norm(s, v));
      for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j) {
          const double ds = grid[i] - grid[j];
          if (ds < 0) continue;
          const double margin = plus ? (ln[i] - ln[j]) - a * ds - std::log(c_plus)
                                     : std::log(c_minus) - a * ds - (ln[i] - ln[j]);
          if (margin < out.worst.margin) out.worst = {plus, grid[i], grid[j], v, margin};
        }
    }
  };
  if (e_plus.cols() > 0) scan(e_plus, true);
  if (e_minus.cols() > 0) scan(e_minus, false);
  out.holds = out.spans && out.worst.margin >= -1e-12;
  return out;
}

}  // namespace hypl2
