// spectral.hpp — finite spectral triples and the Connes distance
//
//   d(psi, psi') = sup { |Psi[A] - Psi'[A]| : A in span(algebra), ||[D, A]|| <= 1 }
//
// The supremum runs over Hermitian A in the real span of a Hermitian
// algebra basis {B_k}. Writing A = sum_k c_k B_k, the objective is the linear
// form g.c with g_k = Psi[B_k] - Psi'[B_k] and the constraint is the seminorm
// h(c) = ||sum_k c_k [D, B_k]||. Directions with [D, B] = 0 make the problem
// unbounded unless g vanishes on them. On the complement h is a norm and
//
//   d = 1 / min { h(c) : g.c = 1 },
//
// a convex minimisation over an affine hyperplane. It is solved by projected
// ascent on -h: the iterate stays on the hyperplane (reduced coordinates), the
// ascent direction is a quasi-Newton-scaled supergradient of a log-sum-exp
// smoothing of the singular values, steps are chosen by Armijo backtracking
// and the smoothing width is driven to zero by continuation. Every candidate
// is rescaled onto ||[D, A]|| = 1, so the reported value is always attained
// by a feasible maximizer.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dfslab/opcore.hpp"
#include "dfslab/states.hpp"

namespace dfslab {

class SpectralTriple {
 public:
  SpectralTriple(OperatorBasis algebra, Matrix dirac) : algebra_(std::move(algebra)), dirac_(std::move(dirac)) {
    require_square(dirac_, "SpectralTriple");
    require_finite(dirac_, "SpectralTriple");
    if (algebra_.dim() != dirac_.rows()) throw ShapeError("SpectralTriple: algebra and Dirac dims differ");
    if (!algebra_.all_hermitian(1e-10)) throw DomainError("SpectralTriple: algebra basis must be Hermitian");
  }

  Index hilbert_dim() const { return dirac_.rows(); }
  const OperatorBasis& algebra_basis() const { return algebra_; }
  const Matrix& dirac() const { return dirac_; }

 private:
  OperatorBasis algebra_;
  Matrix dirac_;
};

inline OperatorBasis diagonal_algebra(Index n) {
  std::vector<Matrix> basis;
  for (Index k = 0; k < n; ++k) {
    Matrix e = Matrix::Zero(n, n);
    e(k, k) = 1.0;
    basis.push_back(std::move(e));
  }
  return OperatorBasis(n, std::move(basis));
}

// Two-point space: diagonal 2x2 algebra with D = [[0, conj(lambda)], [lambda, 0]].
inline Matrix two_point_dirac(cplx lambda) {
  Matrix d(2, 2);
  d << 0.0, std::conj(lambda), lambda, 0.0;
  return d;
}

inline SpectralTriple make_two_point_triple(cplx lambda) {
  if (lambda == cplx(0.0)) throw DomainError("make_two_point_triple: lambda must be nonzero");
  return SpectralTriple(diagonal_algebra(2), two_point_dirac(lambda));
}

// n-point commutative space with an arbitrary Hermitian Dirac operator.
inline SpectralTriple make_diagonal_triple(Index n, const Matrix& dirac) {
  if (dirac.rows() != n) throw ShapeError("make_diagonal_triple: Dirac operator must be n x n");
  require_hermitian(dirac, "make_diagonal_triple");
  return SpectralTriple(diagonal_algebra(n), dirac);
}

struct DistanceOptions {
  double tol = 1e-6;
  int restarts = 8;
  int max_iterations = 400;             // per smoothing stage
  double commutant_threshold = 1e-10;   // ||[D,B]|| <= threshold * ||D|| marks a commutant direction
  double unbounded_threshold = 1e-9;    // |g.v| above this on a commutant direction => unbounded
};

struct DistanceResult {
  double value = 0.0;
  Matrix maximizer;
  double constraint_norm = 0.0;
  bool unbounded = false;
};

namespace detail {

class ConnesProblem {
 public:
  ConnesProblem(std::vector<Matrix> comms, RealMatrix range) : comms_(std::move(comms)), range_(std::move(range)) {}

  Matrix assemble(const RealVector& c) const {
    Matrix m = Matrix::Zero(comms_.front().rows(), comms_.front().cols());
    for (std::size_t k = 0; k < comms_.size(); ++k) m += c(static_cast<Index>(k)) * comms_[k];
    return m;
  }

  double norm(const RealVector& c) const { return operator_norm(assemble(c)); }

  // Smoothed norm mu * log sum_i 2 cosh(s_i / mu) and its gradient in c.
  double smoothed(const RealVector& c, double mu, RealVector* grad) const {
    const Matrix m = assemble(c);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector& s = svd.singularValues();
    const double top = s(0);
    double total = 0.0;
    RealVector wts(s.size());
    for (Index i = 0; i < s.size(); ++i) {
      const double up = std::exp((s(i) - top) / mu);
      const double down = std::exp((-s(i) - top) / mu);
      total += up + down;
      wts(i) = up - down;
    }
    if (grad) {
      wts /= total;
      grad->setZero(static_cast<Index>(comms_.size()));
      const Matrix& u = svd.matrixU();
      const Matrix& v = svd.matrixV();
      for (Index i = 0; i < s.size(); ++i) {
        if (std::abs(wts(i)) < 1e-18) continue;
        for (std::size_t k = 0; k < comms_.size(); ++k) {
          const cplx d = (u.col(i).adjoint() * comms_[k] * v.col(i))(0, 0);
          (*grad)(static_cast<Index>(k)) += wts(i) * d.real();
        }
      }
    }
    return top + mu * std::log(total);
  }

  const RealMatrix& range() const { return range_; }

 private:
  std::vector<Matrix> comms_;
  RealMatrix range_;
};

// Minimises the smoothed norm over the hyperplane c = base + Z z by BFGS with
// Armijo backtracking. Returns the improved z.
inline RealVector minimise_stage(const ConnesProblem& prob, const RealVector& base, const RealMatrix& z_basis,
                                 RealVector z, double mu, int max_iterations) {
  const Index dim = z.size();
  auto eval = [&](const RealVector& zz, RealVector* gz) {
    RealVector gc;
    const RealVector c = base + z_basis * zz;
    const double f = prob.smoothed(c, mu, gz ? &gc : nullptr);
    if (gz) *gz = z_basis.transpose() * gc;
    return f;
  };
  RealVector grad;
  double f = eval(z, &grad);
  RealMatrix hinv = RealMatrix::Identity(dim, dim) * mu;
  for (int it = 0; it < max_iterations; ++it) {
    RealVector dir = -hinv * grad;
    double slope = grad.dot(dir);
    if (slope >= 0.0) {
      hinv = RealMatrix::Identity(dim, dim) * mu;
      dir = -hinv * grad;
      slope = grad.dot(dir);
    }
    if (slope > -1e-300) break;
    double step = 1.0;
    RealVector z_new, g_new;
    double f_new = f;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      z_new = z + step * dir;
      f_new = eval(z_new, &g_new);
      if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const RealVector s = z_new - z;
    const RealVector y = g_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      const double rho = 1.0 / sy;
      const RealMatrix id = RealMatrix::Identity(dim, dim);
      hinv = (id - rho * s * y.transpose()) * hinv * (id - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    const double change = std::abs(f - f_new);
    z = z_new;
    grad = g_new;
    f = f_new;
    if (change <= 1e-10 * std::abs(f) * 1e-2) break;
  }
  return z;
}

}  // namespace detail

inline DistanceResult connes_distance(const SpectralTriple& t, const StateFunctional& psi,
                                      const StateFunctional& psi_prime, const DistanceOptions& opts = {}) {
  const Index n = t.hilbert_dim();
  if (psi.dim() != n || psi_prime.dim() != n) throw ShapeError("connes_distance: state dimension mismatch");
  const auto& basis = t.algebra_basis();
  const Index m = static_cast<Index>(basis.size());
  DistanceResult result;
  result.maximizer = Matrix::Zero(n, n);
  if (m == 0) return result;

  std::vector<Matrix> comms;
  RealVector g(m);
  for (Index k = 0; k < m; ++k) {
    comms.push_back(commutator(t.dirac(), basis[static_cast<std::size_t>(k)]));
    g(k) = (psi(basis[static_cast<std::size_t>(k)]) - psi_prime(basis[static_cast<std::size_t>(k)])).real();
  }

  // Real-linear map c -> vec([D, A(c)]) and its kernel (commutant directions).
  RealMatrix phi(2 * n * n, m);
  for (Index k = 0; k < m; ++k) {
    const Matrix& c = comms[static_cast<std::size_t>(k)];
    for (Index j = 0; j < n * n; ++j) {
      phi(j, k) = c(j % n, j / n).real();
      phi(n * n + j, k) = c(j % n, j / n).imag();
    }
  }
  Eigen::JacobiSVD<RealMatrix> svd(phi, Eigen::ComputeFullV);
  const RealVector& sv = svd.singularValues();
  const double cut = opts.commutant_threshold * std::max(operator_norm(t.dirac()), 1e-300);
  Index rank = 0;
  for (Index k = 0; k < sv.size(); ++k)
    if (sv(k) > cut) ++rank;
  const RealMatrix range = svd.matrixV().leftCols(rank);
  const RealMatrix null = svd.matrixV().rightCols(m - rank);

  for (Index k = 0; k < null.cols(); ++k) {
    const double overlap = g.dot(null.col(k));
    if (std::abs(overlap) > opts.unbounded_threshold) {
      result.value = std::numeric_limits<double>::infinity();
      result.unbounded = true;
      Matrix dir = Matrix::Zero(n, n);
      for (Index j = 0; j < m; ++j) dir += (overlap > 0 ? 1.0 : -1.0) * null(j, k) * basis[static_cast<std::size_t>(j)];
      result.maximizer = dir;
      result.constraint_norm = operator_norm(commutator(t.dirac(), dir));
      return result;
    }
  }

  const RealVector gr = range.transpose() * g;
  const double gnorm = gr.norm();
  if (rank == 0 || gnorm <= 1e-15) return result;

  const detail::ConnesProblem prob(comms, range);
  const Index q = rank;
  const RealVector y0 = gr / (gnorm * gnorm);

  // Orthonormal basis of the directions in the range orthogonal to gr.
  RealMatrix z_basis(q, q - 1);
  if (q > 1) {
    Eigen::HouseholderQR<RealMatrix> qr(gr);
    const RealMatrix full_q = qr.householderQ() * RealMatrix::Identity(q, q);
    z_basis = full_q.rightCols(q - 1);
  }
  const RealVector base = range * y0;
  const RealMatrix zc = range * z_basis;  // hyperplane directions in c-space

  RealVector best_c = base;
  double best_h = prob.norm(base);

  if (q > 1) {
    const int restarts = std::max(1, opts.restarts);
    for (int r = 0; r < restarts; ++r) {
      RealVector z = RealVector::Zero(q - 1);
      if (r > 0) {
        RealVector e = RealVector::Zero(m);
        e((r - 1) % m) = ((r - 1) / m) % 2 == 0 ? 1.0 : -1.0;
        z = zc.transpose() * e * (2.0 * y0.norm());
      }
      double h0 = prob.norm(base + zc * z);
      for (double mu_rel = 1e-1; mu_rel >= 1e-12; mu_rel *= 0.1) {
        z = detail::minimise_stage(prob, base, zc, z, mu_rel * h0, opts.max_iterations);
      }
      const RealVector c = base + zc * z;
      const double h = prob.norm(c);
      if (h < best_h) {
        best_h = h;
        best_c = c;
      }
    }
  }

  Matrix a = Matrix::Zero(n, n);
  for (Index k = 0; k < m; ++k) a += (best_c(k) / best_h) * basis[static_cast<std::size_t>(k)];
  result.maximizer = a;
  result.constraint_norm = operator_norm(commutator(t.dirac(), a));
  result.value = (psi(a) - psi_prime(a)).real();
  return result;
}

}  // namespace dfslab
