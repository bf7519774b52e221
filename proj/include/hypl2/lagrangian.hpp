#pragma once

// Symplectic linear algebra on H^1 of a boundary: Lagrangian checks,
// intersections and the reduced L2 H^1 dimension count.

#include <string>
#include <vector>

#include "hypl2/derivative_operator.hpp"
#include "hypl2/linalg.hpp"
#include "hypl2/symplectic.hpp"

namespace hypl2 {

struct BoundaryComponent {
  int genus = 0;
  int sign = 1;  // induced orientation, +1 or -1
};

class SymplecticSpace {
 public:
  explicit SymplecticSpace(std::vector<BoundaryComponent> comps) : comps_(std::move(comps)) {
    require(!comps_.empty(), ErrorCode::InvalidArgument, "no boundary components");
    for (const auto& c : comps_) {
      require(c.genus >= 1, ErrorCode::InvalidArgument, "component genus must be >= 1");
      require(c.sign == 1 || c.sign == -1, ErrorCode::InvalidArgument, "orientation sign must be +1 or -1");
      n_ += c.genus;
    }
    form_ = Mat::Zero(2 * n_, 2 * n_);
    Eigen::Index off = 0;
    for (const auto& c : comps_) {
      const Mat j = standard_symplectic_form(static_cast<std::size_t>(c.genus)).to_double();
      form_.block(off, off, j.rows(), j.cols()) = c.sign * j;
      off += j.rows();
    }
  }

  const std::vector<BoundaryComponent>& components() const { return comps_; }
  int dim() const { return 2 * n_; }
  int half_dim() const { return n_; }
  const Mat& form() const { return form_; }

 private:
  std::vector<BoundaryComponent> comps_;
  int n_ = 0;
  Mat form_;
};

/// Column span, stored with an orthonormal basis.
class Subspace {
 public:
  Subspace() = default;
  explicit Subspace(const Mat& generators, double rel = 1e-10)
      : ambient_(static_cast<int>(generators.rows())), basis_(orthonormal_range(generators, rel)) {}
  static Subspace zero(int ambient) {
    Subspace s;
    s.ambient_ = ambient;
    s.basis_ = Mat(ambient, 0);
    return s;
  }

  int ambient() const { return ambient_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Mat& basis() const { return basis_; }

  bool contains(const Subspace& o, double tol = 1e-9) const {
    if (o.dim() == 0) return true;
    const Mat r = o.basis() - basis_ * (basis_.transpose() * o.basis());
    return r.norm() <= tol * std::max(1.0, o.basis().norm());
  }

 private:
  int ambient_ = 0;
  Mat basis_;
};

inline bool is_lagrangian(const Subspace& w, const SymplecticSpace& v, double tol = 1e-12) {
  require(w.ambient() == v.dim(), ErrorCode::DimensionMismatch,
          "subspace lives in R^" + std::to_string(w.ambient()) + ", form in R^" + std::to_string(v.dim()));
  if (w.dim() != v.half_dim()) return false;
  const Mat p = w.basis().transpose() * v.form() * w.basis();
  return p.cwiseAbs().maxCoeff() <= tol * std::max(1.0, v.form().norm());
}

inline Subspace intersect(const Subspace& a, const Subspace& b) {
  require(a.ambient() == b.ambient(), ErrorCode::DimensionMismatch, "subspaces in different ambient spaces");
  if (a.dim() == 0 || b.dim() == 0) return Subspace::zero(a.ambient());
  Mat stacked(a.ambient(), a.dim() + b.dim());
  stacked << a.basis(), -b.basis();
  const Mat ker = null_space(stacked, 1e-10);
  if (ker.cols() == 0) return Subspace::zero(a.ambient());
  return Subspace(a.basis() * ker.topRows(a.dim()));
}

inline Subspace sum(const Subspace& a, const Subspace& b) {
  require(a.ambient() == b.ambient(), ErrorCode::DimensionMismatch, "subspaces in different ambient spaces");
  Mat both(a.ambient(), a.dim() + b.dim());
  both << a.basis(), b.basis();
  return both.cols() == 0 ? Subspace::zero(a.ambient()) : Subspace(both);
}

struct ReducedH1 {
  int dim = 0;
  int interior_rank = 0;
  int intersection_dim = 0;
};

/// True when every end was classified ClosedImage.
inline bool closed_image_attested(const std::vector<EndResult>& ends) {
  if (ends.empty()) return false;
  for (const auto& e : ends)
    if (e.verdict != EndVerdict::ClosedImage) return false;
  return true;
}

/// rank(H^1(K, dK) -> H^1(K)) + dim(L1 n L2). Only meaningful when zero is
/// not in the spectrum on 1-forms modulo Ker d, which the caller attests.
inline ReducedH1 reduced_h1_dim(const Mat& interior_map, const Subspace& l1, const Subspace& l2, bool closed_image) {
  require(closed_image, ErrorCode::PreconditionNotAttested,
          "closed image at every end is not attested; the exact sequence does not apply");
  ReducedH1 r;
  r.interior_rank = interior_map.size() == 0 ? 0 : numerical_rank(interior_map, 1e-10);
  r.intersection_dim = intersect(l1, l2).dim();
  r.dim = r.interior_rank + r.intersection_dim;
  return r;
}

inline int geom_finite_reduced_h1(const Mat& map_matrix) {
  return map_matrix.size() == 0 ? 0 : numerical_rank(map_matrix, 1e-10);
}

// ---------------------------------------------------------------------------

/// K = [-1, 1] x S inside the cyclic cover of a mapping torus (or inside the
/// double of its positive half). dK = S + S with opposite orientations, L1 the
/// diagonal, and L2 = E+ (+) E- for the cover or E- (+) E- for the double.
struct ProductCoreConfiguration {
  SymplecticSpace space{{{1, 1}}};
  Subspace l1;
  Subspace l2;
  Mat interior_map;  // H^1(K, dK) -> H^1(K) vanishes for a product
};

inline ProductCoreConfiguration product_core(const SymplecticMatrix& phi, bool doubled) {
  const EigenSplit split = eigen_split(phi);
  require(split.e0_dim == 0, ErrorCode::InvalidArgument, "monodromy has eigenvalues on the unit circle (E0 != 0)");
  const auto g = static_cast<Eigen::Index>(phi.genus());
  Mat ep(2 * g, 0), em(2 * g, 0);
  for (const auto& p : split.pairs) {
    Mat a(2 * g, ep.cols() + p.basis_plus.cols()), b(2 * g, em.cols() + p.basis_minus.cols());
    a << ep, p.basis_plus;
    b << em, p.basis_minus;
    ep = a;
    em = b;
  }
  ProductCoreConfiguration c;
  c.space = SymplecticSpace({{static_cast<int>(g), 1}, {static_cast<int>(g), -1}});
  Mat diag(4 * g, 2 * g);
  diag << Mat::Identity(2 * g, 2 * g), Mat::Identity(2 * g, 2 * g);
  c.l1 = Subspace(diag);
  Mat l2 = Mat::Zero(4 * g, 2 * g);
  l2.topLeftCorner(2 * g, g) = doubled ? em : ep;
  l2.bottomRightCorner(2 * g, g) = em;
  c.l2 = Subspace(l2);
  c.interior_map = Mat::Zero(2 * g, 1);
  return c;
}

}  // namespace hypl2
