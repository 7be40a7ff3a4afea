// states.hpp — density matrices, expectation functionals, partial traces and
// fidelities.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "dfslab/opcore.hpp"

namespace dfslab {

inline constexpr double kStateTolerance = 1e-10;

class DensityMatrix {
 public:
  // Validates Hermiticity, unit trace and positivity (eigenvalues >= -1e-10).
  // `dims`, when given, is the tensor factorization used by partial_trace.
  explicit DensityMatrix(const Matrix& rho, std::vector<Index> dims = {}) : dims_(std::move(dims)) {
    require_square(rho, "DensityMatrix");
    require_finite(rho, "DensityMatrix");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kStateTolerance) {
      throw DomainError("DensityMatrix: not Hermitian");
    }
    rho_ = 0.5 * (rho + rho.adjoint());
    if (std::abs(rho_.trace() - cplx(1.0)) > kStateTolerance) {
      throw DomainError("DensityMatrix: trace differs from 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -kStateTolerance) {
      throw DomainError("DensityMatrix: negative eigenvalue");
    }
    if (!dims_.empty()) {
      const Index prod = std::accumulate(dims_.begin(), dims_.end(), Index{1}, std::multiplies<>());
      if (prod != rho_.rows()) throw ShapeError("DensityMatrix: factorization does not match dimension");
    }
  }

  const Matrix& matrix() const { return rho_; }
  Index dim() const { return rho_.rows(); }
  const std::vector<Index>& dims() const { return dims_; }
  bool has_factorization() const { return !dims_.empty(); }

  DensityMatrix with_dims(std::vector<Index> dims) const { return DensityMatrix(rho_, std::move(dims)); }

  double purity() const { return (rho_ * rho_).trace().real(); }

  bool is_pure(double tol = kStateTolerance) const {
    return (rho_ * rho_ - rho_).cwiseAbs().maxCoeff() <= tol;
  }

 private:
  Matrix rho_;
  std::vector<Index> dims_;
};

// Psi[A] = Tr(A rho).
class StateFunctional {
 public:
  explicit StateFunctional(DensityMatrix rho) : rho_(std::move(rho)) {}

  cplx operator()(const Matrix& a) const {
    if (a.rows() != rho_.dim() || a.cols() != rho_.dim()) {
      throw ShapeError("StateFunctional: operator dimension does not match state");
    }
    // Tr(A rho) = sum_ij A_ij rho_ji
    return a.cwiseProduct(rho_.matrix().transpose()).sum();
  }

  const DensityMatrix& density() const { return rho_; }
  Index dim() const { return rho_.dim(); }

 private:
  DensityMatrix rho_;
};

inline cplx expectation(const StateFunctional& psi, const Matrix& a) { return psi(a); }

inline DensityMatrix pure_state(const Vector& v, std::vector<Index> dims = {}) {
  const double n = v.norm();
  if (v.size() == 0 || n == 0.0) throw DomainError("pure_state: zero vector");
  if (std::abs(n - 1.0) > kStateTolerance) throw DomainError("pure_state: vector is not normalized");
  Matrix rho = v * v.adjoint();
  return DensityMatrix(rho, std::move(dims));
}

inline DensityMatrix maximally_mixed(Index n, std::vector<Index> dims = {}) {
  return DensityMatrix(identity(n) / static_cast<double>(n), std::move(dims));
}

inline Vector basis_vector(Index n, Index k) {
  Vector v = Vector::Zero(n);
  v(k) = 1.0;
  return v;
}

// Encodes one 2x2 observable into two operators whose expectation values in
// the maximally mixed qubit state reproduce its two diagonal entries.
struct TwoPointEncoding {
  Matrix a0;
  Matrix a1;
};

inline TwoPointEncoding encode_two_point(const Matrix& atilde) {
  if (atilde.rows() != 2 || atilde.cols() != 2) throw ShapeError("encode_two_point: input must be 2x2");
  const cplx a11 = atilde(0, 0), a12 = atilde(0, 1), a21 = atilde(1, 0), a22 = atilde(1, 1);
  Matrix a0(2, 2), a1(2, 2);
  a0 << a11, std::conj(a21), a21, a11;
  a1 << a22, a12, std::conj(a12), a22;
  return {a0, a1};
}

// Reduced state on the factors listed in `keep` (any order; result keeps the
// original factor order).
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep) {
  if (!rho.has_factorization()) throw UsageError("partial_trace: density matrix has no factorization");
  const auto& dims = rho.dims();
  const std::size_t nf = dims.size();
  std::vector<bool> kept(nf, false);
  for (auto k : keep) {
    if (k >= nf) throw UsageError("partial_trace: factor index out of range");
    kept[k] = true;
  }
  std::vector<Index> keep_dims, trace_dims;
  for (std::size_t f = 0; f < nf; ++f) (kept[f] ? keep_dims : trace_dims).push_back(dims[f]);
  const Index dk = std::accumulate(keep_dims.begin(), keep_dims.end(), Index{1}, std::multiplies<>());
  const Index dt = std::accumulate(trace_dims.begin(), trace_dims.end(), Index{1}, std::multiplies<>());

  // full index of (kept multi-index a, traced multi-index t)
  auto compose = [&](Index a, Index t) {
    std::vector<Index> digits(nf);
    for (std::size_t f = nf; f-- > 0;) {
      if (kept[f]) {
        digits[f] = a % dims[f];
        a /= dims[f];
      } else {
        digits[f] = t % dims[f];
        t /= dims[f];
      }
    }
    Index idx = 0;
    for (std::size_t f = 0; f < nf; ++f) idx = idx * dims[f] + digits[f];
    return idx;
  };

  std::vector<Index> table(static_cast<std::size_t>(dk * dt));
  for (Index a = 0; a < dk; ++a)
    for (Index t = 0; t < dt; ++t) table[static_cast<std::size_t>(a * dt + t)] = compose(a, t);

  const Matrix& m = rho.matrix();
  Matrix out = Matrix::Zero(dk, dk);
  for (Index r = 0; r < dk; ++r)
    for (Index c = 0; c < dk; ++c) {
      cplx s = 0.0;
      for (Index t = 0; t < dt; ++t) s += m(table[static_cast<std::size_t>(r * dt + t)], table[static_cast<std::size_t>(c * dt + t)]);
      out(r, c) = s;
    }
  if (keep_dims.empty()) keep_dims.push_back(1);
  return DensityMatrix(out, keep_dims);
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<std::size_t> keep) {
  std::vector<std::size_t> k(keep);
  return partial_trace(rho, std::span<const std::size_t>(k));
}

namespace detail {

// Principal square root with eigenvalues in [-1e-10, 0) clipped to zero.
inline Matrix psd_sqrt(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (rho + rho.adjoint()));
  RealVector ev = solver.eigenvalues();
  for (Index k = 0; k < ev.size(); ++k) {
    if (ev(k) < -kStateTolerance) throw DomainError("psd_sqrt: operator is not positive semidefinite");
    ev(k) = std::sqrt(std::max(ev(k), 0.0));
  }
  const Matrix& v = solver.eigenvectors();
  return v * ev.cast<cplx>().asDiagonal() * v.adjoint();
}

inline Vector dominant_vector(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(rho);
  return solver.eigenvectors().col(rho.rows() - 1);
}

}  // namespace detail

// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, evaluated as the
// squared trace norm of sqrt(rho) sqrt(sigma). When either argument is pure
// the overlap <psi|other|psi> is returned directly.
inline double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw ShapeError("fidelity: dimension mismatch");
  double f;
  if (sigma.is_pure()) {
    const Vector psi = detail::dominant_vector(sigma.matrix());
    f = (psi.adjoint() * rho.matrix() * psi)(0, 0).real();
  } else if (rho.is_pure()) {
    const Vector psi = detail::dominant_vector(rho.matrix());
    f = (psi.adjoint() * sigma.matrix() * psi)(0, 0).real();
  } else {
    const Matrix prod = detail::psd_sqrt(rho.matrix()) * detail::psd_sqrt(sigma.matrix());
    const double trace_norm = singular_values(prod).sum();
    f = trace_norm * trace_norm;
  }
  return std::clamp(f, 0.0, 1.0);
}

}  // namespace dfslab
