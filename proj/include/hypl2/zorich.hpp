#pragma once

// Interval exchanges, first-return homology vectors and the Lyapunov
// filtration read off from functional growth along them.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "hypl2/exact.hpp"
#include "hypl2/linalg.hpp"
#include "hypl2/symplectic.hpp"

namespace hypl2 {

/// a + b sqrt(5) with rational a, b; exact order and additive arithmetic.
class QuadraticSurd {
 public:
  QuadraticSurd() = default;
  QuadraticSurd(Rational a, Rational b = 0) : a_(std::move(a)), b_(std::move(b)) {}
  QuadraticSurd(long long a) : a_(a) {}

  static QuadraticSurd golden() { return {Rational(1, 2), Rational(1, 2)}; }

  const Rational& rational_part() const { return a_; }
  const Rational& surd_part() const { return b_; }

  int sign() const {
    const int sa = sign_of(a_), sb = sign_of(b_);
    if (sb == 0) return sa;
    if (sa == 0 || sa == sb) return sb;
    // opposite signs: compare a^2 with 5 b^2
    const Rational d = a_ * a_ - 5 * b_ * b_;
    return sign_of(d) * sa;
  }

  long double approx() const {
    return static_cast<long double>(a_) + static_cast<long double>(b_) * std::sqrt(5.0L);
  }

  friend QuadraticSurd operator+(const QuadraticSurd& x, const QuadraticSurd& y) { return {x.a_ + y.a_, x.b_ + y.b_}; }
  friend QuadraticSurd operator-(const QuadraticSurd& x, const QuadraticSurd& y) { return {x.a_ - y.a_, x.b_ - y.b_}; }
  QuadraticSurd operator-() const { return {-a_, -b_}; }
  QuadraticSurd& operator+=(const QuadraticSurd& y) { return *this = *this + y; }
  QuadraticSurd& operator-=(const QuadraticSurd& y) { return *this = *this - y; }

  friend bool operator==(const QuadraticSurd& x, const QuadraticSurd& y) { return x.a_ == y.a_ && x.b_ == y.b_; }
  friend bool operator<(const QuadraticSurd& x, const QuadraticSurd& y) { return (x - y).sign() < 0; }
  friend bool operator<=(const QuadraticSurd& x, const QuadraticSurd& y) { return (x - y).sign() <= 0; }
  friend bool operator>(const QuadraticSurd& x, const QuadraticSurd& y) { return y < x; }
  friend bool operator>=(const QuadraticSurd& x, const QuadraticSurd& y) { return y <= x; }

  std::string str() const { return a_.str() + "+" + b_.str() + "*sqrt5"; }

 private:
  Rational a_ = 0;
  Rational b_ = 0;
};

inline QuadraticSurd abs(const QuadraticSurd& x) { return x.sign() < 0 ? -x : x; }

using Quad = boost::multiprecision::cpp_bin_float_quad;

template <class R>
struct IetNumber;

template <>
struct IetNumber<Rational> {
  static constexpr bool exact = true;
  static long double approx(const Rational& x) { return static_cast<long double>(x); }
};

template <>
struct IetNumber<QuadraticSurd> {
  static constexpr bool exact = true;
  static long double approx(const QuadraticSurd& x) { return x.approx(); }
};

template <>
struct IetNumber<Quad> {
  static constexpr bool exact = false;
  static long double approx(const Quad& x) { return static_cast<long double>(x); }
  // distance to a discontinuity below which an orbit point is not trusted
  static Quad guard() { return Quad("1e-24"); }
};

template <class R>
class IntervalExchange {
 public:
  struct Step {
    R x;
    int interval = 0;  // 0-based subinterval the input point lay in
  };

  /// permutation[i] is the 1-based position of subinterval i+1 after the exchange.
  IntervalExchange(std::vector<R> lengths, std::vector<int> permutation)
      : lengths_(std::move(lengths)), perm_(std::move(permutation)) {
    const std::size_t m = lengths_.size();
    require(m >= 1 && perm_.size() == m, ErrorCode::DimensionMismatch, "lengths and permutation differ in size");
    std::vector<bool> seen(m, false);
    for (int p : perm_) {
      require(p >= 1 && p <= static_cast<int>(m) && !seen[p - 1], ErrorCode::InvalidArgument,
              "permutation is not a bijection on {1..m}");
      seen[p - 1] = true;
    }
    R total = 0;
    for (const R& l : lengths_) {
      require(l > R(0), ErrorCode::InvalidArgument, "subinterval lengths must be positive");
      total += l;
    }
    if constexpr (IetNumber<R>::exact) {
      require(total == R(1), ErrorCode::InvalidArgument, "lengths do not sum to 1");
    } else {
      require(std::fabs(static_cast<double>(total - R(1))) <= 1e-14, ErrorCode::InvalidArgument,
              "lengths do not sum to 1 within 1e-14");
    }
    for (std::size_t k = 1; k < m; ++k) {
      int top = 0;
      for (std::size_t i = 0; i < k; ++i) top = std::max(top, perm_[i]);
      require(top != static_cast<int>(k), ErrorCode::Reducible,
              "permutation preserves {1.." + std::to_string(k) + "}");
    }
    left_.assign(m, R(0));
    for (std::size_t i = 1; i < m; ++i) left_[i] = left_[i - 1] + lengths_[i - 1];
    shift_.assign(m, R(0));
    for (std::size_t i = 0; i < m; ++i) {
      R image_left = 0;
      for (std::size_t j = 0; j < m; ++j)
        if (perm_[j] < perm_[i]) image_left += lengths_[j];
      shift_[i] = image_left - left_[i];
    }
  }

  int m() const { return static_cast<int>(lengths_.size()); }
  const std::vector<R>& lengths() const { return lengths_; }
  const std::vector<int>& permutation() const { return perm_; }
  const R& left(int i) const { return left_[i]; }
  const R& translation(int i) const { return shift_[i]; }

  Step step(const R& x) const {
    require(x >= R(0) && x < R(1), ErrorCode::OutOfRange, "point outside [0, 1)");
    int i = m() - 1;
    while (i > 0 && x < left_[i]) --i;
    if constexpr (IetNumber<R>::exact) {
      if (i > 0 && x == left_[i]) fail(ErrorCode::BoundaryHit, "point is the discontinuity " + std::to_string(i));
    } else {
      const R g = IetNumber<R>::guard();
      for (int j = 1; j < m(); ++j)
        if (abs(x - left_[j]) < g) fail(ErrorCode::BoundaryHit, "point within guard of discontinuity " + std::to_string(j));
      if (R(1) - x < g) fail(ErrorCode::BoundaryHit, "point within guard of 1");
    }
    return {x + shift_[i], i};
  }

  R iterate(const R& x) const { return step(x).x; }

 private:
  std::vector<R> lengths_;
  std::vector<int> perm_;
  std::vector<R> left_;
  std::vector<R> shift_;
};

/// Golden rotation as a 2-IET: lengths (phi - 1, 2 - phi), swapped.
inline IntervalExchange<QuadraticSurd> golden_rotation() {
  return {{QuadraticSurd(Rational(-1, 2), Rational(1, 2)), QuadraticSurd(Rational(3, 2), Rational(-1, 2))}, {2, 1}};
}

inline IntervalExchange<Quad> golden_rotation_float() {
  const Quad s5 = boost::multiprecision::sqrt(Quad(5));
  return {{(s5 - 1) / 2, (Quad(3) - s5) / 2}, {2, 1}};
}

// ---------------------------------------------------------------------------
// return loops

enum class ReturnPolicy { First, Closest };

inline std::string to_string(ReturnPolicy p) { return p == ReturnPolicy::First ? "first" : "closest"; }

struct ReturnLoopRecord {
  long long n = 0;            // index among all returns to I
  std::vector<BigInt> visits;  // cumulative visits per subinterval
  double norm_h = 0.0;
  long long iterations = 0;
};

inline double euclidean_norm(const std::vector<BigInt>& v) {
  long double s = 0;
  for (const auto& x : v) {
    const auto d = static_cast<long double>(x);
    s += d * d;
  }
  return static_cast<double>(std::sqrt(s));
}

/// First returns of the orbit of p to I = [lo, hi) inside the first
/// subinterval. With ReturnPolicy::Closest only the returns that come closer
/// to p than every earlier one are kept.
template <class R>
std::vector<ReturnLoopRecord> return_loops(const IntervalExchange<R>& iet, const R& p, const R& lo, const R& hi,
                                           long long n_returns, ReturnPolicy policy = ReturnPolicy::First,
                                           long long max_iterations = 100000000) {
  require(n_returns >= 1, ErrorCode::InvalidArgument, "need at least one return");
  require(lo >= R(0) && lo < hi && hi <= iet.lengths()[0], ErrorCode::InvalidArgument,
          "I must be a subinterval of the first subinterval");
  require(p >= lo && p < hi, ErrorCode::OutOfRange, "p does not lie in I");
  std::vector<ReturnLoopRecord> out;
  std::vector<BigInt> visits(iet.m(), 0);
  std::vector<long long> counts(iet.m(), 0);
  R x = p;
  std::optional<R> best;
  long long returns = 0, it = 0;
  while (returns < n_returns) {
    if (it >= max_iterations)
      fail(ErrorCode::NoReturnWithinBudget, "iteration cap " + std::to_string(max_iterations) + " reached after " +
                                                std::to_string(returns) + " returns");
    const auto st = iet.step(x);
    ++counts[st.interval];
    ++it;
    x = st.x;
    if (x >= lo && x < hi) {
      ++returns;
      bool keep = policy == ReturnPolicy::First;
      if (!keep) {
        const R d = abs(x - p);
        if (!best || d < *best) {
          best = d;
          keep = true;
        }
      }
      if (keep) {
        ReturnLoopRecord r;
        r.n = returns;
        for (int i = 0; i < iet.m(); ++i) visits[i] = counts[i];
        r.visits = visits;
        r.norm_h = euclidean_norm(visits);
        r.iterations = it;
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// exponents

enum class LoopNorm { Euclidean, Sum, Max };

struct ExponentOptions {
  std::size_t min_loops = 100;
  LoopNorm norm = LoopNorm::Euclidean;
  // drop loops with log|h| above (1 - holdout) log|h_N|; the flag is fitted there
  double holdout = 0.0;
};

struct ExponentEstimate {
  double limsup = 0.0;      // max of log|f(h_n)| / log|h_n| over the tail
  double regression = 0.0;  // slope of log|f(h_n)| against log|h_n| on the same tail
  double spread = 0.0;
  std::size_t evaluated = 0;
};

namespace detail {

using Mp = boost::multiprecision::mpfr_float;
using MpVec = std::vector<Mp>;

class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned digits) : old_(Mp::default_precision()) { Mp::default_precision(digits); }
  ~PrecisionScope() { Mp::default_precision(old_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned old_;
};

// norm_h overflows a double for long synthetic orbits; bit lengths do not
inline unsigned digits_for(const std::vector<ReturnLoopRecord>& loops) {
  std::size_t bits = 1;
  for (const auto& r : loops)
    for (const auto& x : r.visits)
      if (x != 0) bits = std::max<std::size_t>(bits, boost::multiprecision::msb(abs(x)) + 1);
  return static_cast<unsigned>(std::max(50.0, 2.2 * 0.30103 * static_cast<double>(bits) + 40.0));
}

inline Mp to_mp(const BigInt& v) { return Mp(v.str()); }

inline std::vector<MpVec> loops_mp(const std::vector<ReturnLoopRecord>& loops) {
  std::vector<MpVec> h;
  h.reserve(loops.size());
  for (const auto& r : loops) {
    MpVec v;
    for (const auto& x : r.visits) v.push_back(to_mp(x));
    h.push_back(std::move(v));
  }
  return h;
}

inline double log_loop_norm(const std::vector<BigInt>& v, LoopNorm kind) {
  Mp acc = 0;
  for (const auto& x : v) {
    const Mp d = abs(to_mp(x));
    switch (kind) {
      case LoopNorm::Euclidean: acc += d * d; break;
      case LoopNorm::Sum: acc += d; break;
      case LoopNorm::Max: acc = std::max(acc, d); break;
    }
  }
  if (acc == 0) return -INFINITY;
  const Mp l = log(acc);
  return static_cast<double>(kind == LoopNorm::Euclidean ? l / 2 : l);
}

inline Mp dot(const MpVec& a, const MpVec& b) {
  Mp s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline ExponentEstimate exponent_mp(const MpVec& f, const std::vector<MpVec>& h, const std::vector<double>& log_h,
                                    const ExponentOptions& opt, double ceiling = INFINITY) {
  require(h.size() >= opt.min_loops, ErrorCode::InvalidArgument,
          "exponent estimate needs at least " + std::to_string(opt.min_loops) + " loops, got " + std::to_string(h.size()));
  const double top = std::min(ceiling, *std::max_element(log_h.begin(), log_h.end()));
  std::vector<std::size_t> cand;
  for (std::size_t n = 0; n < h.size(); ++n)
    if (log_h[n] > 0 && log_h[n] <= (1.0 - opt.holdout) * top + 1e-12) cand.push_back(n);
  std::vector<double> x, y;
  bool any_nonzero = false;
  for (std::size_t k = 0; k < cand.size(); ++k) {
    const Mp v = dot(f, h[cand[k]]);
    if (v == 0) continue;
    any_nonzero = true;
    if (k < cand.size() / 2) continue;
    x.push_back(log_h[cand[k]]);
    y.push_back(static_cast<double>(log(abs(v))));
  }
  if (!any_nonzero || x.empty()) fail(ErrorCode::AllZeroEvaluations, "functional vanishes on every evaluated loop");
  ExponentEstimate e;
  e.evaluated = x.size();
  e.limsup = -INFINITY;
  for (std::size_t i = 0; i < x.size(); ++i) e.limsup = std::max(e.limsup, y[i] / x[i]);
  e.regression = x.size() >= 2 ? fit_line(x, y).slope : e.limsup;
  e.spread = std::abs(e.limsup - e.regression);
  return e;
}

}  // namespace detail

/// limsup of log|f(h_n)| / log|h_n| along the loops.
inline ExponentEstimate exponent_of(const Vec& f, const std::vector<ReturnLoopRecord>& loops,
                                    const ExponentOptions& opt = {}) {
  require(!loops.empty(), ErrorCode::InvalidArgument, "no loops");
  require(f.size() == static_cast<Eigen::Index>(loops.front().visits.size()), ErrorCode::DimensionMismatch,
          "covector dimension differs from the loop dimension");
  require(!f.isZero(0), ErrorCode::InvalidArgument, "zero covector");
  detail::PrecisionScope scope(detail::digits_for(loops));
  const auto h = detail::loops_mp(loops);
  std::vector<double> lh;
  for (const auto& r : loops) lh.push_back(detail::log_loop_norm(r.visits, opt.norm));
  detail::MpVec fm;
  for (Eigen::Index i = 0; i < f.size(); ++i) fm.emplace_back(f(i));
  return detail::exponent_mp(fm, h, lh, opt);
}

// ---------------------------------------------------------------------------
// filtration

struct FiltrationStratum {
  double theta = 0.0;  // normalised exponent
  int dim = 0;
  Mat basis;  // covectors new at this level
};

struct LyapunovFiltration {
  std::vector<FiltrationStratum> strata;  // increasing theta
  std::vector<Mat> chain;                 // chain[s] spans strata 0..s
  Mat covectors;                          // flag covectors, fastest first
  std::vector<double> exponents;          // normalised, same order
  std::vector<ExponentEstimate> estimates;
  double top_raw = 0.0;
  double pairing_defect = 0.0;  // max |theta_s + theta_{S-1-s}|
  double tol_cluster = 0.1;

  int dim_at_most(double theta) const {
    int d = 0;
    for (const auto& s : strata)
      if (s.theta <= theta) d += s.dim;
    return d;
  }
  int dim_f0() const { return dim_at_most(tol_cluster); }
  Mat f0_basis() const {
    Mat out(covectors.rows(), 0);
    for (std::size_t s = 0; s < strata.size(); ++s)
      if (strata[s].theta <= tol_cluster) out = chain[s];
    return out;
  }
};

struct FiltrationOptions {
  double tol_cluster = 0.1;
  std::size_t min_loops = 100;
  double holdout = 0.15;
  double flag_window = 0.25;  // fraction of loops searched for each new direction
};

/// Growth flag by deflation: the fastest direction is the largest loop, the
/// next is the largest residual after projecting it out, and so on. The flag
/// covectors are evaluated on held-out loops and normalised by the top rate.
inline LyapunovFiltration filtration(const std::vector<ReturnLoopRecord>& loops, const FiltrationOptions& opt = {}) {
  require(!loops.empty(), ErrorCode::InvalidArgument, "no loops");
  const std::size_t m = loops.front().visits.size();
  require(m >= 2, ErrorCode::InvalidArgument, "filtration needs m >= 2");
  require(loops.size() >= opt.min_loops, ErrorCode::InvalidArgument,
          "filtration needs at least " + std::to_string(opt.min_loops) + " loops");
  using detail::Mp;
  detail::PrecisionScope scope(detail::digits_for(loops));
  const auto h = detail::loops_mp(loops);
  std::vector<double> lh;
  for (const auto& r : loops) lh.push_back(detail::log_loop_norm(r.visits, LoopNorm::Euclidean));

  const std::size_t start = loops.size() - std::max<std::size_t>(1, static_cast<std::size_t>(opt.flag_window * loops.size()));
  auto res = h;
  std::vector<detail::MpVec> q;
  std::vector<std::size_t> fitted_at;
  Mp scale = 0;
  for (const auto& v : h) scale = std::max(scale, sqrt(detail::dot(v, v)));
  // loops are exact integers, so only working precision limits a residual
  const Mp negligible = scale * pow(Mp(10), -static_cast<int>(0.9 * Mp::default_precision()));
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t best = start;
    Mp best_norm = -1;
    for (std::size_t n = start; n < res.size(); ++n) {
      const Mp nn = sqrt(detail::dot(res[n], res[n]));
      if (nn > best_norm) {
        best_norm = nn;
        best = n;
      }
    }
    if (best_norm <= negligible)
      fail(ErrorCode::UnresolvedStrata, "loops span only " + std::to_string(j) + " of " + std::to_string(m) + " dimensions");
    detail::MpVec d = res[best];
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qq : q) {
        const Mp c = detail::dot(qq, d);
        for (std::size_t i = 0; i < m; ++i) d[i] -= c * qq[i];
      }
    const Mp nd = sqrt(detail::dot(d, d));
    for (auto& x : d) x /= nd;
    for (auto& r : res) {
      const Mp c = detail::dot(d, r);
      for (std::size_t i = 0; i < m; ++i) r[i] -= c * d[i];
    }
    q.push_back(std::move(d));
    fitted_at.push_back(best);
  }

  LyapunovFiltration out;
  out.tol_cluster = opt.tol_cluster;
  out.covectors = Mat(m, m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i) out.covectors(i, j) = static_cast<double>(q[j][i]);
  ExponentOptions eo;
  eo.min_loops = opt.min_loops;
  // a covector is only accurate on loops well before every fit that shaped it
  double ceiling = INFINITY;
  for (std::size_t j = 0; j < m; ++j) {
    eo.holdout = j == 0 ? 0.0 : opt.holdout;
    out.estimates.push_back(detail::exponent_mp(q[j], h, lh, eo, ceiling));
    ceiling = std::min(ceiling, lh[fitted_at[j]]);
  }
  // the tail slope, not the limsup: the latter carries a log|f| / log|h| offset
  // that is still ~0.1 at |h| ~ 1e4
  out.top_raw = out.estimates.front().regression;
  require(out.top_raw > 0, ErrorCode::UnresolvedStrata, "top growth rate is not positive");
  for (const auto& e : out.estimates) out.exponents.push_back(e.regression / out.top_raw);
  for (std::size_t j = 1; j < m; ++j)
    require(out.exponents[j] <= out.exponents[j - 1] + opt.tol_cluster, ErrorCode::UnresolvedStrata,
            "flag exponents out of order at position " + std::to_string(j));

  // clusters, fastest first
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end)
  for (std::size_t j = 0; j < m; ++j) {
    if (j > 0 && out.exponents[j - 1] - out.exponents[j] <= opt.tol_cluster) groups.back().second = j + 1;
    else groups.push_back({j, j + 1});
  }
  for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
    FiltrationStratum s;
    double sum = 0;
    for (std::size_t j = it->first; j < it->second; ++j) sum += out.exponents[j];
    s.dim = static_cast<int>(it->second - it->first);
    s.theta = sum / s.dim;
    s.basis = out.covectors.middleCols(it->first, s.dim);
    out.chain.push_back(out.covectors.rightCols(m - it->first));
    out.strata.push_back(std::move(s));
  }
  for (std::size_t s = 0; s < out.strata.size(); ++s)
    out.pairing_defect =
        std::max(out.pairing_defect, std::abs(out.strata[s].theta + out.strata[out.strata.size() - 1 - s].theta));
  return out;
}

// ---------------------------------------------------------------------------
// spectral-gap rule

struct GapDecision {
  bool gap_predicted = false;
  int dim_f0 = 0;
  int genus = 0;
  bool conjectural = true;  // the rule itself is a conjecture; never certified
};

/// dim F0 == genus. With a projection P (m x 2g, h -> P^T h) the covector
/// filtration is pulled back to H^1 first.
inline GapDecision gap_decision(const LyapunovFiltration& f, int genus, const std::optional<Mat>& projection = std::nullopt) {
  require(genus >= 1, ErrorCode::InvalidArgument, "genus must be at least 1");
  require(!f.strata.empty(), ErrorCode::UnresolvedStrata, "filtration has no strata");
  GapDecision d;
  d.genus = genus;
  if (!projection) {
    d.dim_f0 = f.dim_f0();
  } else {
    const Mat& p = *projection;
    require(p.rows() == f.covectors.rows() && p.cols() == 2 * genus, ErrorCode::DimensionMismatch,
            "projection must be m x 2g");
    const Mat q0 = f.f0_basis();
    const Mat off = p - q0 * (q0.transpose() * p);
    d.dim_f0 = static_cast<int>(p.cols()) - numerical_rank(off, 1e-8);
  }
  d.gap_predicted = d.dim_f0 == genus;
  return d;
}

// ---------------------------------------------------------------------------
// pseudo-Anosov cross-check

struct PaCrossCheck {
  std::vector<double> expected;   // fastest first
  std::vector<double> recovered;  // fastest first
  std::vector<int> expected_dims;   // strata, increasing exponent
  std::vector<int> recovered_dims;  // strata, increasing exponent
  double max_exponent_error = 0.0;  // relative, absolute for a zero exponent
  double subspace_defect = 0.0;
  bool exponents_match = false;
  bool dims_match = false;
  bool subspaces_match = false;
  bool agrees = false;
  int attempts = 0;
  LyapunovFiltration filtration;
};

struct PaCrossCheckOptions {
  int powers = 300;
  unsigned seed = 1;
  double tol_cluster = 0.1;
  double exponent_tol = 0.05;
  double subspace_tol = 1e-6;
  int max_attempts = 20;
};

/// Loops h = M^k b_j over a generic integer basis b_0..b_{m-1}, interleaved in
/// k. A single orbit cannot reach a repeated eigenvalue block (identity on E0),
/// a basis can.
inline std::vector<ReturnLoopRecord> synthetic_loops(const IntMatrix& m, const IntMatrix& basis, int powers) {
  const std::size_t n = m.rows();
  std::vector<ReturnLoopRecord> out;
  IntMatrix cur = basis;
  long long idx = 0;
  for (int k = 0; k <= powers; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      ReturnLoopRecord r;
      r.n = ++idx;
      for (std::size_t i = 0; i < n; ++i) r.visits.push_back(cur(i, j));
      r.norm_h = euclidean_norm(r.visits);
      r.iterations = k;
      out.push_back(std::move(r));
    }
    cur = m * cur;
  }
  return out;
}

inline PaCrossCheck pa_cross_check(const SymplecticMatrix& phi, const PaCrossCheckOptions& opt = {}) {
  const EigenSplit split = eigen_split(phi);
  require(split.semisimple_on_circle, ErrorCode::InvalidArgument, "monodromy has a Jordan block on the unit circle");
  require(!split.pairs.empty(), ErrorCode::InvalidArgument, "no eigenvalue off the unit circle; top rate is zero");
  const auto n = static_cast<Eigen::Index>(phi.dim());
  const double top = std::log(split.pairs.back().lambda);

  // expected flag, fastest first
  std::vector<std::pair<double, Mat>> blocks;
  for (auto it = split.pairs.rbegin(); it != split.pairs.rend(); ++it)
    blocks.push_back({std::log(it->lambda) / top, it->basis_plus});
  if (split.e0_dim > 0) blocks.push_back({0.0, split.e0_basis});
  for (const auto& p : split.pairs) blocks.push_back({-std::log(p.lambda) / top, p.basis_minus});
  Mat all(n, n);
  PaCrossCheck out;
  Eigen::Index col = 0;
  for (const auto& [th, b] : blocks) {
    all.middleCols(col, b.cols()) = b;
    col += b.cols();
    for (Eigen::Index j = 0; j < b.cols(); ++j) out.expected.push_back(th);
  }
  const Mat coords = all.inverse();

  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<int> entry(-9, 9);
  IntMatrix basis(n, n);
  bool generic = false;
  for (out.attempts = 1; out.attempts <= opt.max_attempts && !generic; ++out.attempts) {
    Mat bd(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        const int v = entry(rng);
        basis(i, j) = v;
        bd(i, j) = v;
      }
    const Mat c = coords * bd;
    generic = true;
    for (Eigen::Index k = 1; k <= n && generic; ++k) {
      Eigen::JacobiSVD<Mat> svd(c.topLeftCorner(k, k));
      generic = svd.singularValues()(k - 1) > 1e-6 * std::max(1.0, c.norm());
    }
  }
  --out.attempts;
  if (!generic) fail(ErrorCode::GenericityFailure, "no generic integer basis in " + std::to_string(opt.max_attempts) + " draws");

  FiltrationOptions fo;
  fo.tol_cluster = opt.tol_cluster;
  out.filtration = filtration(synthetic_loops(phi.entries(), basis, opt.powers), fo);
  out.recovered = out.filtration.exponents;

  for (std::size_t j = 0; j < out.expected.size(); ++j) {
    const double e = out.expected[j];
    const double err = e == 0.0 ? std::abs(out.recovered[j]) : std::abs(out.recovered[j] - e) / std::abs(e);
    out.max_exponent_error = std::max(out.max_exponent_error, err);
  }
  out.exponents_match = out.max_exponent_error <= opt.exponent_tol;

  for (std::size_t j = out.expected.size(); j-- > 0;) {
    if (j + 1 < out.expected.size() && std::abs(out.expected[j] - out.expected[j + 1]) < 1e-9) ++out.expected_dims.back();
    else out.expected_dims.push_back(1);
  }
  for (const auto& s : out.filtration.strata) out.recovered_dims.push_back(s.dim);
  out.dims_match = out.expected_dims == out.recovered_dims;

  // each F must annihilate every strictly faster eigen-direction
  if (out.dims_match) {
    const std::size_t S = out.filtration.strata.size();
    for (std::size_t s = 0; s < S; ++s) {
      const Eigen::Index faster = n - out.filtration.chain[s].cols();
      if (faster == 0) continue;
      Mat fast = all.leftCols(faster);
      for (Eigen::Index j = 0; j < fast.cols(); ++j) fast.col(j).normalize();
      out.subspace_defect = std::max(out.subspace_defect, (out.filtration.chain[s].transpose() * fast).cwiseAbs().maxCoeff());
    }
    out.subspaces_match = out.subspace_defect <= opt.subspace_tol;
  }
  out.agrees = out.exponents_match && out.dims_match && out.subspaces_match;
  return out;
}

}  // namespace hypl2
