#pragma once

// Radial 1-forms g(r) dt on a tube around a short geodesic: the
// Sturm-Liouville action, the tube norm and the subtracted quasimodes.

#include <cmath>
#include <complex>
#include <functional>
#include <future>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hypl2/error.hpp"
#include "hypl2/linalg.hpp"

namespace hypl2 {

using Complex = std::complex<double>;
using Profile = std::vector<Complex>;

/// Unit-L2 profile on (0, 1), vanishing to second order at both ends.
class Bump {
 public:
  explicit Bump(std::function<double(double)> shape) : shape_(std::move(shape)) {
    namespace q = boost::math::quadrature;
    const double raw = q::gauss_kronrod<double, 61>::integrate([&](double s) { return sq(shape_(s)); }, 0.0, 1.0, 15, 1e-14);
    require(raw > 0 && std::isfinite(raw), ErrorCode::InvalidArgument, "bump has zero L2 norm");
    scale_ = 1.0 / std::sqrt(raw);
    double peak = 0;
    for (int i = 1; i < 1000; ++i) peak = std::max(peak, std::abs((*this)(i / 1000.0)));
    const double d = 1e-3;
    require(std::abs((*this)(d)) <= 1e-6 * peak && std::abs((*this)(1 - d)) <= 1e-6 * peak, ErrorCode::InvalidArgument,
            "bump does not vanish to second order at the ends of (0, 1)");
    const double check = q::gauss_kronrod<double, 61>::integrate([&](double s) { return sq((*this)(s)); }, 0.0, 1.0, 15, 1e-14);
    require(std::abs(check - 1.0) <= 1e-8, ErrorCode::InvalidArgument, "bump normalisation failed");
  }

  static Bump standard() {
    return Bump([](double s) { return (s <= 0 || s >= 1) ? 0.0 : std::exp(-1.0 / (s * (1.0 - s))); });
  }

  double operator()(double s) const { return (s <= 0 || s >= 1) ? 0.0 : scale_ * shape_(s); }

 private:
  static double sq(double x) { return x * x; }
  std::function<double(double)> shape_;
  double scale_ = 1.0;
};

struct RadialGrid {
  double R = 0.0;
  std::vector<double> r;
  double h() const { return r[1] - r[0]; }
};

inline RadialGrid radial_grid(double R, int cells) {
  require(R > 0, ErrorCode::InvalidArgument, "tube radius must be positive");
  require(cells >= 8, ErrorCode::GridTooCoarse, "need at least 8 cells");
  return {R, linspace(0.0, R, static_cast<std::size_t>(cells) + 1)};
}

/// -(1/tanh r) (tanh(r) g')' by conservative centred differences; zero at the
/// two end nodes.
inline Profile sl_apply(const Profile& g, const RadialGrid& grid) {
  const std::size_t n = grid.r.size();
  require(g.size() == n, ErrorCode::DimensionMismatch, "profile and grid differ in size");
  require(g[0] == 0.0 && g[1] == 0.0, ErrorCode::SupportTouchesOrigin, "profile is nonzero at the first grid nodes");
  const double h = grid.h();
  Profile out(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double tp = std::tanh(grid.r[i] + 0.5 * h), tm = std::tanh(grid.r[i] - 0.5 * h);
    out[i] = -(tp * (g[i + 1] - g[i]) - tm * (g[i] - g[i - 1])) / (h * h * std::tanh(grid.r[i]));
  }
  return out;
}

/// 2 pi l int_0^R |g|^2 tanh(r) dr.
inline double tube_norm_sq(const Profile& g, double l, const RadialGrid& grid) {
  require(g.size() == grid.r.size(), ErrorCode::DimensionMismatch, "profile and grid differ in size");
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::norm(g[i]) * std::tanh(grid.r[i]);
  return 2 * std::numbers::pi * l * trapezoid(grid.r, f);
}

inline double tube_norm(const Profile& g, double l, const RadialGrid& grid) { return std::sqrt(tube_norm_sq(g, l, grid)); }

/// int_0^R g tanh(r) dr, the pairing with dt up to the constant 2 pi l.
inline Complex dt_pairing(const Profile& g, const RadialGrid& grid) {
  std::vector<double> re(g.size()), im(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    re[i] = g[i].real() * std::tanh(grid.r[i]);
    im[i] = g[i].imag() * std::tanh(grid.r[i]);
  }
  return {trapezoid(grid.r, re), trapezoid(grid.r, im)};
}

struct TubeConfig {
  double l = 1e-4;
  double R = 0.0;  // <= 0: use log(1/l) / 2
  double k = 1.0;
  int cells = 4096;
  Bump bump = Bump::standard();

  double radius() const {
    require(l > 0, ErrorCode::InvalidArgument, "core length must be positive");
    const double r = R > 0 ? R : 0.5 * std::log(1.0 / l);
    require(r > 0, ErrorCode::InvalidArgument, "tube radius must be positive (l < 1 for the default radius)");
    return r;
  }
};

/// e^{ikr} phi(r/R) / sqrt(2 pi l R).
inline Profile tube_mode(const TubeConfig& c, double k, const RadialGrid& grid) {
  const double amp = 1.0 / std::sqrt(2 * std::numbers::pi * c.l * grid.R);
  Profile g(grid.r.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = amp * std::polar(1.0, k * grid.r[i]) * c.bump(grid.r[i] / grid.R);
  return g;
}

/// Ratio of the dt-pairings of the k mode and the k = 0 mode (1 at k = 0).
inline Complex subtraction_coefficient(const TubeConfig& c) {
  const RadialGrid grid = radial_grid(c.radius(), c.cells);
  return dt_pairing(tube_mode(c, c.k, grid), grid) / dt_pairing(tube_mode(c, 0.0, grid), grid);
}

struct QuasimodeResult {
  double l = 0, R = 0, k = 0;
  Complex c;
  double abs_c = 0;
  double norm = 0;          // |omega'| by quadrature of the profile
  double norm_expanded = 0;  // int_0^1 |e^{ikRs} - c|^2 phi^2 tanh(Rs) ds, square-rooted
  double residual = 0;      // |(dd* - k^2) omega'|
  double dt_defect = 0;     // |<omega', dt>| relative to |<omega_0, dt>|
};

inline QuasimodeResult quasimode(const TubeConfig& c) {
  require(c.k != 0.0, ErrorCode::ZeroWavenumber, "k = 0 has no subtracted quasimode");
  QuasimodeResult q;
  q.l = c.l;
  q.k = c.k;
  q.R = c.radius();
  const RadialGrid grid = radial_grid(q.R, c.cells);
  const Profile gk = tube_mode(c, c.k, grid), g0 = tube_mode(c, 0.0, grid);
  const Complex p0 = dt_pairing(g0, grid);
  q.c = dt_pairing(gk, grid) / p0;
  q.abs_c = std::abs(q.c);
  Profile w(gk.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = gk[i] - q.c * g0[i];
  q.dt_defect = std::abs(dt_pairing(w, grid)) / std::abs(p0);
  q.norm = tube_norm(w, c.l, grid);

  std::vector<double> s = linspace(0.0, 1.0, static_cast<std::size_t>(c.cells) + 1), f(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double ph = c.bump(s[i]);
    f[i] = std::norm(std::polar(1.0, c.k * q.R * s[i]) - q.c) * ph * ph * std::tanh(q.R * s[i]);
  }
  q.norm_expanded = std::sqrt(trapezoid(s, f));

  const Profile dw = sl_apply(w, grid);
  Profile res(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) res[i] = dw[i] - c.k * c.k * w[i];
  res.front() = res.back() = 0.0;  // w vanishes to all orders at both ends
  q.residual = tube_norm(res, c.l, grid);
  return q;
}

/// Largest relative change of |c|, norm and residual when the grid is doubled.
inline double refinement_change(const TubeConfig& c) {
  const QuasimodeResult a = quasimode(c);
  TubeConfig fine = c;
  fine.cells *= 2;
  const QuasimodeResult b = quasimode(fine);
  auto rel = [](double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-300); };
  return std::max({rel(a.abs_c, b.abs_c), rel(a.norm, b.norm), rel(a.residual, b.residual)});
}

// ---------------------------------------------------------------------------

enum class SpectrumVerdict { Supported, NotSupported };

inline std::string to_string(SpectrumVerdict v) { return v == SpectrumVerdict::Supported ? "supported" : "not_supported"; }

struct TubeTrend {
  double k = 0;
  std::vector<QuasimodeResult> rows;  // in the order of l_list
  bool residual_decreasing = false;
  bool c_decreasing = false;
  bool norm_defect_decreasing = false;
  bool norms_in_band = false;
  bool terminal_below_threshold = false;
  double extrapolated_residual = 0;  // alpha in residual ~ alpha + beta / R
  SpectrumVerdict verdict = SpectrumVerdict::NotSupported;
};

struct TubeScanOptions {
  int cells = 4096;
  double residual_threshold = 0.1;
  double norm_lo = 0.5, norm_hi = 1.5;
};

/// For each k, quasimodes along l_list (expected decreasing). k^2 is reported
/// as supported in the essential spectrum when the residuals fall
/// monotonically, the norms approach 1 and end in [0.5, 1.5], and either the last residual or its
/// 1/R extrapolation is below the threshold.
inline std::vector<TubeTrend> essential_spectrum_scan(const std::vector<double>& k_list, const std::vector<double>& l_list,
                                                      const TubeScanOptions& opt = {}) {
  require(!k_list.empty() && !l_list.empty(), ErrorCode::InvalidArgument, "empty k or l list");
  for (double k : k_list) require(k != 0.0, ErrorCode::ZeroWavenumber, "k = 0 in scan");
  std::vector<std::vector<std::future<QuasimodeResult>>> jobs(k_list.size());
  for (std::size_t a = 0; a < k_list.size(); ++a)
    for (double l : l_list) {
      TubeConfig c;
      c.l = l;
      c.k = k_list[a];
      c.cells = opt.cells;
      jobs[a].push_back(std::async(std::launch::async, [c] { return quasimode(c); }));
    }
  std::vector<TubeTrend> out;
  for (std::size_t a = 0; a < k_list.size(); ++a) {
    TubeTrend t;
    t.k = k_list[a];
    for (auto& j : jobs[a]) t.rows.push_back(j.get());
    t.residual_decreasing = t.c_decreasing = t.norm_defect_decreasing = true;
    t.norms_in_band = true;
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
      const auto& r = t.rows[i];
      const auto& p = t.rows[i - 1];
      t.residual_decreasing = t.residual_decreasing && r.residual < p.residual;
      t.c_decreasing = t.c_decreasing && r.abs_c < p.abs_c;
      t.norm_defect_decreasing = t.norm_defect_decreasing && std::abs(r.norm - 1) < std::abs(p.norm - 1);
    }
    // early members of the sequence may sit outside the band; the limit is what matters
    t.norms_in_band = t.rows.back().norm >= opt.norm_lo && t.rows.back().norm <= opt.norm_hi;
    t.terminal_below_threshold = t.rows.back().residual < opt.residual_threshold;
    if (t.rows.size() >= 2) {
      std::vector<double> x, y;
      for (const auto& r : t.rows) {
        x.push_back(1.0 / r.R);
        y.push_back(r.residual);
      }
      t.extrapolated_residual = fit_line(x, y).intercept;
    } else {
      t.extrapolated_residual = t.rows.back().residual;
    }
    // a negative intercept means the fitted residual reaches zero at finite R
    const bool small = t.terminal_below_threshold || t.extrapolated_residual < opt.residual_threshold;
    t.verdict = (t.residual_decreasing && t.norm_defect_decreasing && t.norms_in_band && small) ? SpectrumVerdict::Supported : SpectrumVerdict::NotSupported;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace hypl2
