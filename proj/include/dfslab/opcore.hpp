// opcore.hpp — dense complex operator substrate: tensor products, commutators,
// norms, Hermitian eigensystems, numerical kernels and commutants.
//
// Conventions used throughout dfslab:
//   * Operators are dense Eigen::MatrixXcd; a "dim" is the number of rows.
//   * Tensor products are row-major in the subsystem index: the first factor
//     is the slowest-varying one, i.e. |i>⊗|j> sits at index i*dim_b + j.
//   * Tolerances are relative to the largest singular value / norm of the
//     operand, with an absolute floor for the all-zero case.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "dfslab/errors.hpp"

namespace dfslab {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr std::size_t kDefaultDimBudget = 4096;
inline constexpr cplx kI{0.0, 1.0};

struct Tolerances {
  double rank = 1e-10;         // kernel/rank decisions, relative to sigma_max
  double hermiticity = 1e-10;  // ||a - a^dagger|| relative to ||a||
  double abs_floor = 1e-12;    // used when the reference scale is zero
};

// ------------------------------ validation ----------------------------------

inline bool all_finite(const Matrix& a) { return a.allFinite(); }

inline void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) throw DomainError(std::string(what) + ": non-finite entries");
}

inline void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw ShapeError(std::string(what) + ": operator must be square and non-empty, got " +
                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

inline void require_same_dim(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": dimension mismatch (" + std::to_string(a.rows()) +
                     " vs " + std::to_string(b.rows()) + ")");
  }
}

// Frobenius-norm Hermiticity residual ||a - a^dagger||_F.
inline double hermiticity_residual(const Matrix& a) { return (a - a.adjoint()).norm(); }

inline bool is_hermitian(const Matrix& a, const Tolerances& tol = {}) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.norm();
  return hermiticity_residual(a) <= std::max(tol.hermiticity * scale, tol.abs_floor);
}

inline void require_hermitian(const Matrix& a, const char* what, const Tolerances& tol = {}) {
  require_square(a, what);
  require_finite(a, what);
  if (!is_hermitian(a, tol)) throw DomainError(std::string(what) + ": operator is not Hermitian");
}

// ------------------------------ construction --------------------------------

inline Matrix identity(Index n) { return Matrix::Identity(n, n); }

inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0.0, -kI, kI, 0.0;
  return m;
}

inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

inline Matrix tensor(const Matrix& a, const Matrix& b, std::size_t budget = kDefaultDimBudget) {
  const auto rows = static_cast<std::size_t>(a.rows()) * static_cast<std::size_t>(b.rows());
  const auto cols = static_cast<std::size_t>(a.cols()) * static_cast<std::size_t>(b.cols());
  if (std::max(rows, cols) > budget) {
    throw BudgetError("tensor: product dimension " + std::to_string(std::max(rows, cols)) +
                      " exceeds budget " + std::to_string(budget));
  }
  Matrix out = Eigen::kroneckerProduct(a, b).eval();
  return out;
}

inline Matrix tensor_all(std::span<const Matrix> factors, std::size_t budget = kDefaultDimBudget) {
  Matrix out = Matrix::Ones(1, 1);
  for (const auto& f : factors) out = tensor(out, f, budget);
  return out;
}

// I ⊗ ... ⊗ local ⊗ ... ⊗ I with `local` on factor `site`.
inline Matrix embed(std::span<const Index> dims, std::size_t site, const Matrix& local,
                    std::size_t budget = kDefaultDimBudget) {
  if (site >= dims.size()) throw UsageError("embed: site index out of range");
  if (local.rows() != dims[site] || local.cols() != dims[site]) {
    throw ShapeError("embed: local operator does not match factor dimension");
  }
  Index before = 1, after = 1;
  for (std::size_t k = 0; k < site; ++k) before *= dims[k];
  for (std::size_t k = site + 1; k < dims.size(); ++k) after *= dims[k];
  return tensor(tensor(identity(before), local, budget), identity(after), budget);
}

// ------------------------------ algebra -------------------------------------

inline Matrix commutator(const Matrix& a, const Matrix& b) {
  require_square(a, "commutator");
  require_same_dim(a, b, "commutator");
  return a * b - b * a;
}

inline Matrix anticommutator(const Matrix& a, const Matrix& b) {
  require_square(a, "anticommutator");
  require_same_dim(a, b, "anticommutator");
  return a * b + b * a;
}

inline RealVector singular_values(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues();
}

// Largest singular value, i.e. sqrt of the top eigenvalue of a^dagger a.
inline double operator_norm(const Matrix& a) {
  require_finite(a, "operator_norm");
  if (a.size() == 0) return 0.0;
  return singular_values(a)(0);
}

// Hilbert-Schmidt inner product Tr(a^dagger b).
inline cplx hs_inner(const Matrix& a, const Matrix& b) {
  require_same_dim(a, b, "hs_inner");
  return a.conjugate().cwiseProduct(b).sum();
}

// --------------------------- subspace bases ---------------------------------

// Orthonormal basis of a subspace of C^n, stored as the columns of Q.
class SubspaceBasis {
 public:
  SubspaceBasis() = default;

  SubspaceBasis(Index ambient_dim, Matrix columns) : ambient_(ambient_dim), q_(std::move(columns)) {
    if (q_.rows() != ambient_ && q_.cols() != 0) {
      throw ShapeError("SubspaceBasis: column length differs from ambient dimension");
    }
    if (q_.cols() == 0) q_.resize(ambient_, 0);
    if (!q_.allFinite()) throw DomainError("SubspaceBasis: non-finite entries");
    if (q_.cols() > 0 && (q_.adjoint() * q_ - identity(q_.cols())).cwiseAbs().maxCoeff() > 1e-10) {
      throw DomainError("SubspaceBasis: vectors are not orthonormal");
    }
  }

  Index ambient_dim() const { return ambient_; }
  Index size() const { return q_.cols(); }
  bool empty() const { return q_.cols() == 0; }
  const Matrix& columns() const { return q_; }
  Vector vector(Index k) const { return q_.col(k); }

  Matrix projector() const { return q_ * q_.adjoint(); }

  // Distance of v from the subspace, ||v - Q Q^dagger v||.
  double residual(const Vector& v) const {
    if (v.size() != ambient_) throw ShapeError("SubspaceBasis::residual: length mismatch");
    if (empty()) return v.norm();
    return (v - q_ * (q_.adjoint() * v)).norm();
  }

  // Largest residual of the columns of `other` against this subspace.
  double containment_residual(const SubspaceBasis& other) const {
    double worst = 0.0;
    for (Index k = 0; k < other.size(); ++k) worst = std::max(worst, residual(other.vector(k)));
    return worst;
  }

 private:
  Index ambient_ = 0;
  Matrix q_;
};

// Orthonormal (Hilbert-Schmidt) basis of a subspace of Mat_n(C).
class OperatorBasis {
 public:
  OperatorBasis() = default;

  OperatorBasis(Index dim, std::vector<Matrix> elements) : dim_(dim), elements_(std::move(elements)) {
    for (const auto& e : elements_) {
      if (e.rows() != dim_ || e.cols() != dim_) throw ShapeError("OperatorBasis: element dim mismatch");
    }
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      for (std::size_t j = i; j < elements_.size(); ++j) {
        const cplx g = hs_inner(elements_[i], elements_[j]);
        const double target = i == j ? 1.0 : 0.0;
        if (std::abs(g - target) > 1e-10) throw DomainError("OperatorBasis: elements are not orthonormal");
      }
    }
  }

  Index dim() const { return dim_; }
  std::size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }
  const std::vector<Matrix>& elements() const { return elements_; }
  const Matrix& operator[](std::size_t k) const { return elements_[k]; }

  bool all_hermitian(double tol = 1e-10) const {
    return std::all_of(elements_.begin(), elements_.end(),
                       [&](const Matrix& e) { return hermiticity_residual(e) <= tol; });
  }

  Matrix projection(const Matrix& x) const {
    Matrix out = Matrix::Zero(dim_, dim_);
    for (const auto& e : elements_) out += hs_inner(e, x) * e;
    return out;
  }

  double projection_residual(const Matrix& x) const { return (x - projection(x)).norm(); }

 private:
  Index dim_ = 0;
  std::vector<Matrix> elements_;
};

// ------------------------- Hermitian eigensystem ----------------------------

struct HermitianEigen {
  RealVector values;      // ascending
  SubspaceBasis vectors;  // columns match `values`

  Matrix reconstruct() const {
    const Matrix& v = vectors.columns();
    return v * values.cast<cplx>().asDiagonal() * v.adjoint();
  }
};

// Rotate each column so that its first component of largest modulus is real
// and positive. Gives reproducible eigenvector phases.
inline void fix_column_phases(Matrix& v) {
  for (Index c = 0; c < v.cols(); ++c) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index r = 0; r < v.rows(); ++r) {
      const double m = std::abs(v(r, c));
      if (m > best_abs * (1.0 + 1e-12) + 1e-300) {
        best_abs = m;
        best = r;
      }
    }
    if (best_abs > 0.0) {
      v.col(c) *= std::conj(v(best, c)) / best_abs;
      v(best, c) = std::abs(v(best, c));  // drop the rounding residue in the imaginary part
    }
  }
}

inline HermitianEigen eig_hermitian(const Matrix& a, const Tolerances& tol = {}) {
  require_hermitian(a, "eig_hermitian", tol);
  const Matrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw DomainError("eig_hermitian: eigensolver did not converge");
  Matrix v = solver.eigenvectors();
  fix_column_phases(v);
  return HermitianEigen{solver.eigenvalues(), SubspaceBasis(a.rows(), std::move(v))};
}

// f(a) for Hermitian a via its eigendecomposition.
template <typename F>
Matrix hermitian_function(const Matrix& a, F&& f, const Tolerances& tol = {}) {
  const auto eig = eig_hermitian(a, tol);
  const Matrix& v = eig.vectors.columns();
  Vector fv(eig.values.size());
  for (Index k = 0; k < fv.size(); ++k) fv(k) = f(eig.values(k));
  return v * fv.asDiagonal() * v.adjoint();
}

// e^{i theta} for Hermitian theta.
inline Matrix unitary_exp(const Matrix& theta, const Tolerances& tol = {}) {
  return hermitian_function(theta, [](double x) { return std::exp(kI * x); }, tol);
}

// ------------------------------ kernels -------------------------------------

// Orthonormal basis of the right singular vectors of `a` whose singular
// values are <= rel_tol * sigma_max. `a` may be rectangular; when a == 0 the
// whole domain is returned.
inline SubspaceBasis kernel_basis(const Matrix& a, double rel_tol = 1e-10, double abs_floor = 1e-12) {
  require_finite(a, "kernel_basis");
  const Index n = a.cols();
  if (a.rows() == 0) return SubspaceBasis(n, identity(n));
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  const double cut = smax > 0.0 ? rel_tol * smax : abs_floor;
  Index rank = 0;
  for (Index k = 0; k < s.size(); ++k) {
    if (s(k) > cut) ++rank;
  }
  Matrix null = svd.matrixV().rightCols(n - rank);
  fix_column_phases(null);
  return SubspaceBasis(n, std::move(null));
}

namespace detail {

// Column-major vec: vec(O X - X O) = (I ⊗ O - O^T ⊗ I) vec(X).
inline Matrix commutator_superoperator(const Matrix& o) {
  const Index n = o.rows();
  Matrix id = identity(n);
  Matrix left = Eigen::kroneckerProduct(id, o).eval();
  Matrix right = Eigen::kroneckerProduct(o.transpose(), id).eval();
  return left - right;
}

inline Matrix unvec(const Vector& v, Index n) {
  Matrix m(n, n);
  for (Index c = 0; c < n; ++c) m.col(c) = v.segment(c * n, n);
  return m;
}

// Hermitian orthonormal basis of the complex span of `xs`, assumed closed
// under adjoint. Real linear combinations of Hermitian matrices stay
// Hermitian, and their HS inner products are real.
inline std::vector<Matrix> hermitian_basis(const std::vector<Matrix>& xs, Index n) {
  const Index k = static_cast<Index>(xs.size());
  if (k == 0) return {};
  const Index nn = n * n;
  RealMatrix stacked(2 * nn, 2 * k);
  for (Index j = 0; j < k; ++j) {
    const Matrix re = 0.5 * (xs[j] + xs[j].adjoint());
    const Matrix im = (xs[j] - xs[j].adjoint()) / (2.0 * kI);
    for (Index c = 0; c < n; ++c) {
      for (Index r = 0; r < n; ++r) {
        stacked(c * n + r, 2 * j) = re(r, c).real();
        stacked(nn + c * n + r, 2 * j) = re(r, c).imag();
        stacked(c * n + r, 2 * j + 1) = im(r, c).real();
        stacked(nn + c * n + r, 2 * j + 1) = im(r, c).imag();
      }
    }
  }
  Eigen::JacobiSVD<RealMatrix> svd(stacked, Eigen::ComputeThinU);
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(k));
  for (Index j = 0; j < k; ++j) {
    Matrix m(n, n);
    for (Index c = 0; c < n; ++c) {
      for (Index r = 0; r < n; ++r) {
        m(r, c) = cplx(svd.matrixU()(c * n + r, j), svd.matrixU()(nn + c * n + r, j));
      }
    }
    m = 0.5 * (m + m.adjoint());
    m /= m.norm();
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace detail

// Hermitian orthonormal basis of all of Mat_n(C): diagonal units, then
// symmetric and antisymmetric off-diagonal pairs.
inline OperatorBasis full_operator_basis(Index n) {
  std::vector<Matrix> out;
  const double s = 1.0 / std::sqrt(2.0);
  for (Index k = 0; k < n; ++k) {
    Matrix m = Matrix::Zero(n, n);
    m(k, k) = 1.0;
    out.push_back(std::move(m));
  }
  for (Index r = 0; r < n; ++r) {
    for (Index c = r + 1; c < n; ++c) {
      Matrix sym = Matrix::Zero(n, n);
      sym(r, c) = s;
      sym(c, r) = s;
      Matrix asym = Matrix::Zero(n, n);
      asym(r, c) = -kI * s;
      asym(c, r) = kI * s;
      out.push_back(std::move(sym));
      out.push_back(std::move(asym));
    }
  }
  return OperatorBasis(n, std::move(out));
}

// {X : [O, X] = 0 for all O in ops}, as the joint numerical kernel of the
// stacked maps X -> OX - XO. When every O is Hermitian the commutant is a
// *-algebra and the returned basis is made of Hermitian matrices.
inline OperatorBasis commutant_basis(std::span<const Matrix> ops, Index dim, double rel_tol = 1e-10) {
  if (dim <= 0) throw ShapeError("commutant_basis: dimension must be positive");
  if (ops.empty()) return full_operator_basis(dim);
  const Index nn = dim * dim;
  Matrix stacked(static_cast<Index>(ops.size()) * nn, nn);
  bool hermitian = true;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    if (ops[k].rows() != dim || ops[k].cols() != dim) throw ShapeError("commutant_basis: operator dim mismatch");
    hermitian = hermitian && is_hermitian(ops[k]);
    stacked.middleRows(static_cast<Index>(k) * nn, nn) = detail::commutator_superoperator(ops[k]);
  }
  const SubspaceBasis null = kernel_basis(stacked, rel_tol);
  std::vector<Matrix> xs;
  xs.reserve(static_cast<std::size_t>(null.size()));
  for (Index k = 0; k < null.size(); ++k) xs.push_back(detail::unvec(null.vector(k), dim));
  if (hermitian) xs = detail::hermitian_basis(xs, dim);
  return OperatorBasis(dim, std::move(xs));
}

inline OperatorBasis commutant_basis(std::initializer_list<Matrix> ops, Index dim, double rel_tol = 1e-10) {
  std::vector<Matrix> v(ops);
  return commutant_basis(std::span<const Matrix>(v), dim, rel_tol);
}

}  // namespace dfslab
