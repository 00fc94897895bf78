// Uniform-grid R^3-valued fields on (0,1) with zero Dirichlet boundary.
//
// A field is an n x 3 Eigen matrix: row i holds the value at x_{i+1} = (i+1)h.
// Ghost nodes x_0 = 0 and x_{n+1} = 1 are identically zero and never stored.
// Gradients live on the n+1 edges between consecutive nodes (ghosts
// included), so the pair (gradient, laplacian) satisfies summation by parts
// exactly:  inner_l2(laplacian(f), g) = -edge_inner(gradient(f), gradient(g)).

#ifndef LLB_FIELD_HPP
#define LLB_FIELD_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace llb {

template <typename Scalar>
using Field = Eigen::Matrix<Scalar, Eigen::Dynamic, 3>;
using FieldXd = Field<double>;

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 1, 3>;

template <typename Scalar>
class Grid1D {
 public:
  explicit Grid1D(Eigen::Index n_interior) : n_(n_interior) {
    if (n_interior < 3) {
      throw std::invalid_argument("Grid1D: n_interior must be >= 3, got " +
                                  std::to_string(n_interior));
    }
    spacing_ = Scalar(1) / Scalar(n_interior + 1);
  }

  Eigen::Index n_interior() const { return n_; }
  Eigen::Index n_edges() const { return n_ + 1; }
  Scalar spacing() const { return spacing_; }
  /// Coordinate of interior row i (0-based), i.e. x_{i+1}.
  Scalar node(Eigen::Index i) const { return Scalar(i + 1) * spacing_; }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> nodes() const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x(n_);
    for (Eigen::Index i = 0; i < n_; ++i) x(i) = node(i);
    return x;
  }

  Field<Scalar> zeros() const { return Field<Scalar>::Zero(n_, 3); }

  friend bool operator==(const Grid1D& a, const Grid1D& b) {
    return a.n_ == b.n_;
  }

 private:
  Eigen::Index n_;
  Scalar spacing_;
};

using Grid = Grid1D<double>;

inline Grid make_grid(Eigen::Index n_interior) { return Grid(n_interior); }

namespace detail {

template <typename Scalar, typename Derived>
void require_on_grid(const Grid1D<Scalar>& grid,
                     const Eigen::MatrixBase<Derived>& f, const char* what) {
  if (f.rows() != grid.n_interior() || f.cols() != 3) {
    throw std::invalid_argument(std::string(what) +
                                ": field shape does not match grid");
  }
}

template <typename DerivedA, typename DerivedB>
void require_same_shape(const Eigen::MatrixBase<DerivedA>& f,
                        const Eigen::MatrixBase<DerivedB>& g,
                        const char* what) {
  if (f.rows() != g.rows() || f.cols() != g.cols()) {
    throw std::invalid_argument(std::string(what) + ": grid mismatch");
  }
}

}  // namespace detail

/// 3-point Laplacian (f_{i+1} - 2 f_i + f_{i-1}) / h^2 with zero ghosts.
template <typename Scalar, typename Derived>
Field<Scalar> laplacian(const Grid1D<Scalar>& grid,
                        const Eigen::MatrixBase<Derived>& f) {
  detail::require_on_grid(grid, f, "laplacian");
  const Eigen::Index n = grid.n_interior();
  const Scalar inv_h2 = Scalar(1) / (grid.spacing() * grid.spacing());
  Field<Scalar> out(n, 3);
  out.noalias() = Scalar(-2) * f;
  out.topRows(n - 1) += f.bottomRows(n - 1);
  out.bottomRows(n - 1) += f.topRows(n - 1);
  out *= inv_h2;
  return out;
}

/// Forward differences on the n+1 edges, ghosts included.
template <typename Scalar, typename Derived>
Field<Scalar> gradient(const Grid1D<Scalar>& grid,
                       const Eigen::MatrixBase<Derived>& f) {
  detail::require_on_grid(grid, f, "gradient");
  const Eigen::Index n = grid.n_interior();
  const Scalar inv_h = Scalar(1) / grid.spacing();
  Field<Scalar> out(n + 1, 3);
  out.row(0) = f.row(0) * inv_h;
  out.middleRows(1, n - 1) = (f.bottomRows(n - 1) - f.topRows(n - 1)) * inv_h;
  out.row(n) = -f.row(n - 1) * inv_h;
  return out;
}

/// Pointwise R^3 cross product.
template <typename DerivedA, typename DerivedB>
Field<typename DerivedA::Scalar> cross(const Eigen::MatrixBase<DerivedA>& f,
                                       const Eigen::MatrixBase<DerivedB>& g) {
  detail::require_same_shape(f, g, "cross");
  using Scalar = typename DerivedA::Scalar;
  Field<Scalar> out(f.rows(), 3);
  out.col(0) = f.col(1).cwiseProduct(g.col(2)) - f.col(2).cwiseProduct(g.col(1));
  out.col(1) = f.col(2).cwiseProduct(g.col(0)) - f.col(0).cwiseProduct(g.col(2));
  out.col(2) = f.col(0).cwiseProduct(g.col(1)) - f.col(1).cwiseProduct(g.col(0));
  return out;
}

/// Pointwise Euclidean dot product, one value per node.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, 1> dot(
    const Eigen::MatrixBase<DerivedA>& f,
    const Eigen::MatrixBase<DerivedB>& g) {
  detail::require_same_shape(f, g, "dot");
  return f.cwiseProduct(g).rowwise().sum();
}

/// L^2 inner product by the rectangle rule h * sum_i f_i . g_i
template <typename Scalar, typename DerivedA, typename DerivedB>
Scalar inner_l2(const Grid1D<Scalar>& grid,
                const Eigen::MatrixBase<DerivedA>& f,
                const Eigen::MatrixBase<DerivedB>& g) {
  detail::require_on_grid(grid, f, "inner_l2");
  detail::require_same_shape(f, g, "inner_l2");
  return grid.spacing() * f.cwiseProduct(g).sum();
}

/// Inner product of two edge-valued fields (n+1 rows).
template <typename Scalar, typename DerivedA, typename DerivedB>
Scalar edge_inner(const Grid1D<Scalar>& grid,
                  const Eigen::MatrixBase<DerivedA>& a,
                  const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != grid.n_edges() || a.cols() != 3) {
    throw std::invalid_argument("edge_inner: not an edge field of this grid");
  }
  detail::require_same_shape(a, b, "edge_inner");
  return grid.spacing() * a.cwiseProduct(b).sum();
}

template <typename Scalar>
struct EnergyReport {
  Scalar l2 = 0;
  Scalar h1_semi = 0;
  Scalar h2_semi = 0;
  Scalar linf = 0;
  Scalar time = 0;

  /// Full H^1 norm sqrt(l2^2 + h1_semi^2).
  Scalar h1() const { return std::sqrt(l2 * l2 + h1_semi * h1_semi); }
};

template <typename Scalar, typename Derived>
EnergyReport<Scalar> norms(const Grid1D<Scalar>& grid,
                           const Eigen::MatrixBase<Derived>& f,
                           Scalar time = 0) {
  EnergyReport<Scalar> r;
  const Scalar h = grid.spacing();
  r.l2 = std::sqrt(h * f.squaredNorm());
  r.h1_semi = std::sqrt(h * gradient(grid, f).squaredNorm());
  r.h2_semi = std::sqrt(h * laplacian(grid, f).squaredNorm());
  r.linf = f.rowwise().norm().maxCoeff();
  r.time = time;
  return r;
}

/// Solves (I - c * Laplacian_h) w = rhs for each component by Thomas
/// elimination. The matrix is strictly diagonally dominant for c >= 0.
template <typename Scalar, typename Derived>
Field<Scalar> helmholtz_solve(const Grid1D<Scalar>& grid,
                              const Eigen::MatrixBase<Derived>& rhs,
                              Scalar c) {
  detail::require_on_grid(grid, rhs, "helmholtz_solve");
  if (!(c >= Scalar(0))) {
    throw std::invalid_argument("helmholtz_solve: c must be nonnegative");
  }
  Field<Scalar> w = rhs;
  if (c == Scalar(0)) return w;

  const Eigen::Index n = grid.n_interior();
  const Scalar off = -c / (grid.spacing() * grid.spacing());
  const Scalar diag = Scalar(1) - Scalar(2) * off;

  // Constant coefficients: the modified super-diagonal is shared by all
  // three components.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c_star(n);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_m(n);
  inv_m(0) = Scalar(1) / diag;
  c_star(0) = off * inv_m(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    inv_m(i) = Scalar(1) / (diag - off * c_star(i - 1));
    c_star(i) = off * inv_m(i);
  }
  w.row(0) *= inv_m(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    w.row(i) = (w.row(i) - off * w.row(i - 1)) * inv_m(i);
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    w.row(i) -= c_star(i) * w.row(i + 1);
  }
  return w;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& f) {
  return f.allFinite();
}

}  // namespace llb

#endif  // LLB_FIELD_HPP
