#pragma once

// Acceptance checks shared by the acceptance binary and `hypl2 verify`.

#include <chrono>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include "hypl2/lagrangian.hpp"
#include "hypl2/mapping_torus.hpp"
#include "hypl2/tube.hpp"
#include "hypl2/zorich.hpp"

namespace hypl2::verify {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

using Hp = boost::multiprecision::cpp_bin_float_50;

// 50-digit eigenvalues: a Jordan block on the circle moves roots by about
// sqrt(eps), far below the 1e-9 test at this precision
inline bool float_unit_modulus(const IntMatrix& m, double tol = 1e-9) {
  using MatHp = Eigen::Matrix<Hp, Eigen::Dynamic, Eigen::Dynamic>;
  MatHp a(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) a(i, j) = Hp(m(i, j));
  Eigen::EigenSolver<MatHp> es(a, false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const auto z = es.eigenvalues()(i);
    const double r = static_cast<double>(boost::multiprecision::sqrt(z.real() * z.real() + z.imag() * z.imag()));
    if (std::abs(r - 1.0) < tol) return true;
  }
  return false;
}

template <class F>
CriterionResult timed(int id, std::string title, F&& body) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(r);
  } catch (const Error& e) {
    r.pass = false;
    r.detail += std::string(" error ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline std::string fmt(double x) {
  std::ostringstream o;
  o.precision(4);
  o << x;
  return o.str();
}

inline const IntMatrix& cat() {
  static const IntMatrix m{{2, 1}, {1, 1}};
  return m;
}

inline SymplecticMatrix hyperbolic(int g) {
  IntMatrix m = cat();
  const IntMatrix extra[] = {IntMatrix{{3, 1}, {2, 1}}, IntMatrix{{5, 2}, {2, 1}}};
  for (int i = 1; i < g; ++i) m = symplectic_direct_sum(m, extra[(i - 1) % 2]);
  return validate_symplectic(m);
}

}  // namespace detail

inline CriterionResult criterion_1(int words = 1000, unsigned seed = 2024) {
  return detail::timed(1, "exact symplectic decisions", [&](CriterionResult& r) {
    const std::pair<IntMatrix, bool> fixed[] = {{detail::cat(), false},
                                                {IntMatrix{{0, -1}, {1, 0}}, true},
                                                {IntMatrix::identity(2), true},
                                                {IntMatrix{{1, 1}, {0, 1}}, true}};
    bool ok = true;
    for (const auto& [m, want] : fixed) ok = ok && has_unit_circle_eigenvalue(validate_symplectic(m)).verdict == want;
    std::mt19937_64 rng(seed);
    int agree = 0, total = 0, positives = 0;
    for (std::size_t g : {1u, 2u})
      for (int i = 0; i < words; ++i) {
        const auto m = random_symplectic_word(g, 12, rng);
        const bool exact = has_unit_circle_eigenvalue(m).verdict;
        positives += exact;
        agree += exact == detail::float_unit_modulus(m.entries());
        ++total;
      }
    r.pass = ok && agree == total;
    r.detail = std::string("fixed examples ") + (ok ? "ok" : "WRONG") + ", agreement " + std::to_string(agree) + "/" +
               std::to_string(total) + " (" + std::to_string(positives) + " on the circle)";
  });
}

inline CriterionResult criterion_2() {
  return detail::timed(2, "Wang sequence pipeline", [](CriterionResult& r) {
    bool ok = true;
    std::string d;
    for (std::size_t g = 1; g <= 3; ++g) {
      const auto phi = FiberAutomorphism::surface(validate_symplectic(IntMatrix::identity(2 * g)));
      const int h = wang_dims(phi, 1, {1.0, 0.0}).h_dim;
      ok = ok && h == static_cast<int>(2 * g + 1);
      d += "identity g=" + std::to_string(g) + " dim " + std::to_string(h) + "; ";
    }
    const auto phi = FiberAutomorphism::surface(validate_symplectic(detail::cat()));
    const auto rep = reduced_l2_vanishes(phi, 1);
    const bool one = rep.exceptional_lambdas.size() == 1 && rep.exceptional_lambdas[0].lambda.is_real_one() &&
                     rep.exceptional_lambdas[0].dims.h_dim == 1;
    const bool unreduced = zero_in_spectrum_unreduced(phi, 1);
    ok = ok && one && !unreduced;
    d += "cat exceptional set " + std::string(one ? "{1} h_dim 1" : "WRONG") +
         ", zero_in_spectrum_unreduced " + (unreduced ? "true" : "false");
    r.pass = ok;
    r.detail = d;
  });
}

inline CriterionResult criterion_3() {
  return detail::timed(3, "Volterra bounds and split convergence", [](CriterionResult& r) {
    bool ok = true;
    std::string d;
    for (double a : {0.5, 1.0, 2.0}) {
      const auto up = volterra_norm_check(a, 1.0, VolterraSide::Upper, 100);
      const auto lo = volterra_norm_check(a, 1.0, VolterraSide::Lower, 100);
      ok = ok && up.max_ratio <= 1.02 * up.bound && lo.max_ratio <= 1.02 * lo.bound;
      d += "a=" + detail::fmt(a) + " ratio " + detail::fmt(std::max(up.max_ratio, lo.max_ratio) / up.bound) + "; ";
    }
    const auto p = NormProfile::exponential_split(Mat::Identity(2, 2).col(0), Mat::Identity(2, 2).col(1), 0.7);
    const SplitSpec s{Mat::Identity(2, 2).col(0), Mat::Identity(2, 2).col(1), 0.6, 0.9, 1 / 0.9};
    auto v = [](double t) {
      Vec x(2);
      x << std::exp(-1.2 * t) * std::cos(3 * t), std::sin(2 * t) * std::exp(-0.1 * t);
      return x;
    };
    std::vector<double> res;
    for (int n : {400, 800, 1600}) res.push_back(solve_split(p, s, v, linspace(0, 20, n + 1)).residual);
    for (std::size_t i = 1; i < res.size(); ++i) {
      const double rate = std::log2(res[i - 1] / res[i]);
      ok = ok && rate >= 0.9;
      d += "rate " + detail::fmt(rate) + "; ";
    }
    r.pass = ok;
    r.detail = d;
  });
}

inline CriterionResult criterion_4() {
  return detail::timed(4, "closed-range diagnostics", [](CriterionResult& r) {
    const std::vector<double> ts{10, 20, 40, 80};
    bool ok = true;
    std::string d;
    auto clock = [] { return std::chrono::steady_clock::now(); };
    auto secs = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };

    auto t0 = clock();
    const auto c = sigma_min_scan(NormProfile::constant(1), ts, 10);
    // dense SVD oracle per horizon
    std::vector<double> lx, ly;
    double worst = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      DiscretizedDerivative dd(NormProfile::constant(1), uniform_grid(ts[i], 10));
      const double ref = DiscretizedDerivative::graph_norm_value(Eigen::BDCSVD<Mat>(dd.dense_whitened()).singularValues().minCoeff());
      worst = std::max(worst, std::abs(c.sigma[i] / ref - 1));
      lx.push_back(std::log(ts[i]));
      ly.push_back(std::log(ref));
    }
    const double beta_oracle = fit_line(lx, ly).slope;
    ok = ok && std::abs(c.beta + 1) <= 0.15 && std::abs(beta_oracle + 1) <= 0.15 && worst < 1e-6 && secs(t0, clock()) < 60;
    d += "constant beta " + detail::fmt(c.beta) + " (oracle " + detail::fmt(beta_oracle) + "); ";

    t0 = clock();
    const auto e = sigma_min_scan(
        NormProfile::exponential_split(Mat::Identity(2, 2).col(0), Mat::Identity(2, 2).col(1), 1.0), ts, 10);
    bool floor = true;
    for (double s : e.sigma) floor = floor && s >= 0.5 * e.sigma.front();
    ok = ok && floor && secs(t0, clock()) < 60;
    d += "split floor " + std::string(floor ? "held" : "broken") + " (min " +
         detail::fmt(*std::min_element(e.sigma.begin(), e.sigma.end())) + "); ";

    t0 = clock();
    const auto sq = end_verdict(NormProfile::polynomial(Vec::Ones(1), Vec::Ones(1)));
    const bool br2 = sq.verdict == EndVerdict::NotClosedImage && sq.evidence.branch == 2;
    ok = ok && br2 && secs(t0, clock()) < 60;
    d += "sqrt(1+t) " + to_string(sq.verdict) + " via branch " + std::to_string(sq.evidence.branch);
    r.pass = ok;
    r.detail = d;
  });
}

inline CriterionResult criterion_5() {
  return detail::timed(5, "non-surjectivity witness", [](CriterionResult& r) {
    const auto w = lemma7_witness([](double) { return 1.0; }, 1.0);
    const double closed = 2.0 / std::sqrt(std::log(2.0));
    const double rel = std::abs(w.norm_g_sq / closed - 1);
    r.pass = rel <= 0.01 && w.strictly_increasing && w.divergence_table.size() == 5;
    r.detail = "|g|^2 " + detail::fmt(w.norm_g_sq) + " vs " + detail::fmt(closed) + " (rel " + detail::fmt(rel) +
               "), table " + (w.strictly_increasing ? "strictly increasing" : "NOT increasing");
  });
}

inline CriterionResult criterion_6() {
  return detail::timed(6, "product-core reduced H1", [](CriterionResult& r) {
    bool ok = true;
    std::string d;
    for (int g : {2, 3}) {
      const auto phi = detail::hyperbolic(g);
      const auto end = end_verdict(NormProfile::periodic_pa(phi, Mat::Identity(2 * g, 2 * g)));
      const bool attested = closed_image_attested({end, end});
      const auto cover = product_core(phi, false), dbl = product_core(phi, true);
      const int a = reduced_h1_dim(cover.interior_map, cover.l1, cover.l2, attested).dim;
      const int b = reduced_h1_dim(dbl.interior_map, dbl.l1, dbl.l2, attested).dim;
      ok = ok && a == 0 && b == g;
      d += "g=" + std::to_string(g) + " cover " + std::to_string(a) + " double " + std::to_string(b) + "; ";
    }
    r.pass = ok;
    r.detail = d;
  });
}

inline CriterionResult criterion_7(unsigned seed = 1) {
  return detail::timed(7, "Zorich filtration", [&](CriterionResult& r) {
    const auto g = golden_rotation();
    const auto loops = return_loops(g, QuadraticSurd(Rational(3, 10)), QuadraticSurd(0), g.lengths()[0], 10000,
                                    ReturnPolicy::Closest);
    const auto f = filtration(loops, {.min_loops = 10});
    const double phi = (1 + std::sqrt(5.0)) / 2;
    bool ok = f.strata.size() == 2 && std::abs(f.strata[0].theta + 1) <= 0.1 && std::abs(f.strata[1].theta - 1) <= 0.1 &&
              f.dim_f0() == 1 && gap_decision(f, 1).gap_predicted;
    std::string d = "golden thetas";
    for (const auto& s : f.strata) d += " " + detail::fmt(s.theta);
    if (!f.strata.empty()) {
      // F_{-1} is the line of (1, -phi)
      const Vec want = (Vec(2) << 1, -phi).finished().normalized();
      const double off = (want - f.chain[0] * (f.chain[0].transpose() * want)).norm();
      ok = ok && off < 1e-6;
    }
    d += ", dim F0 " + std::to_string(f.dim_f0()) + "; ";
    PaCrossCheckOptions opt;
    opt.seed = seed;
    const std::pair<const char*, IntMatrix> cases[] = {
        {"cat", detail::cat()}, {"cat+[[3,1],[2,1]]", symplectic_direct_sum(detail::cat(), IntMatrix{{3, 1}, {2, 1}})}};
    for (const auto& [name, m] : cases) {
      const auto pc = pa_cross_check(validate_symplectic(m), opt);
      ok = ok && pc.exponents_match && pc.dims_match && pc.max_exponent_error <= 0.05;
      d += std::string(name) + " err " + detail::fmt(pc.max_exponent_error) + (pc.dims_match ? " dims ok; " : " dims WRONG; ");
    }
    r.pass = ok;
    r.detail = d;
  });
}

inline CriterionResult criterion_8() {
  return detail::timed(8, "tube quasimodes", [](CriterionResult& r) {
    std::vector<QuasimodeResult> rows;
    double refine = 0;
    for (double l : {1e-4, 1e-6, 1e-8}) {
      TubeConfig c;
      c.l = l;
      c.k = 1.0;
      rows.push_back(quasimode(c));
      refine = std::max(refine, refinement_change(c));
    }
    bool mono = true;
    for (std::size_t i = 1; i < rows.size(); ++i)
      mono = mono && rows[i].abs_c < rows[i - 1].abs_c && std::abs(rows[i].norm - 1) < std::abs(rows[i - 1].norm - 1) &&
             rows[i].residual < rows[i - 1].residual;
    const auto& f = rows.back();
    const bool terminal = f.abs_c < 0.05 && std::abs(f.norm - 1) < 0.05 && f.residual < 0.1;
    r.pass = mono && terminal && refine < 0.05;
    r.detail = std::string("monotone ") + (mono ? "yes" : "no") + ", final |c| " + detail::fmt(f.abs_c) +
               " |norm-1| " + detail::fmt(std::abs(f.norm - 1)) + " residual " + detail::fmt(f.residual) +
               " (need < 0.05, 0.05, 0.1), refinement " + detail::fmt(refine);
  });
}

/// The subset replayed by `hypl2 verify`.
inline std::vector<CriterionResult> replay(unsigned seed = 1) {
  return {criterion_1(), criterion_2(), criterion_6(), criterion_7(seed), criterion_8()};
}

}  // namespace hypl2::verify
