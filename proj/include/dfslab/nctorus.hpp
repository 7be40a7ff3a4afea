// nctorus.hpp — flux matrices, clock-shift representations of the
// noncommutative torus phase algebra, magnetic translations and the Landau
// Hamiltonian

#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "dfslab/duality.hpp"
#include "dfslab/fock.hpp"
#include "dfslab/opcore.hpp"

namespace dfslab {

struct RationalFlux {
  IntMatrix q;     // antisymmetric numerators
  long long n = 1; // common denominator
};

class FluxMatrix {
 public:
  explicit FluxMatrix(RealMatrix omega, std::optional<RationalFlux> rational = std::nullopt)
      : omega_(std::move(omega)), rational_(std::move(rational)) {
    if (omega_.rows() != omega_.cols()) throw ShapeError("FluxMatrix: matrix must be square");
    if (!omega_.allFinite()) throw DomainError("FluxMatrix: non-finite entries");
    if ((omega_ + omega_.transpose()).cwiseAbs().maxCoeff() != 0.0) {
      throw DomainError("FluxMatrix: matrix is not antisymmetric");
    }
    if (rational_) {
      const auto& r = *rational_;
      if (r.n < 1) throw DomainError("FluxMatrix: denominator must be positive");
      if (r.q.rows() != omega_.rows() || r.q.cols() != omega_.cols()) throw ShapeError("FluxMatrix: numerator shape");
      const RealMatrix implied = (2.0 * std::numbers::pi / static_cast<double>(r.n)) * r.q.cast<double>();
      if ((implied - omega_).cwiseAbs().maxCoeff() > 1e-12) {
        throw DomainError("FluxMatrix: rational form inconsistent with omega");
      }
    }
  }

  static FluxMatrix from_rational(const IntMatrix& q, long long n) {
    if (q.rows() != q.cols() || q + q.transpose() != IntMatrix::Zero(q.rows(), q.cols())) {
      throw DomainError("FluxMatrix: numerators must be square antisymmetric");
    }
    if (n < 1) throw DomainError("FluxMatrix: denominator must be positive");
    RealMatrix omega = (2.0 * std::numbers::pi / static_cast<double>(n)) * q.cast<double>();
    // exact antisymmetry after rounding
    for (Index r = 0; r < omega.rows(); ++r) {
      omega(r, r) = 0.0;
      for (Index c = r + 1; c < omega.cols(); ++c) omega(c, r) = -omega(r, c);
    }
    return FluxMatrix(omega, RationalFlux{q, n});
  }

  Index n() const { return omega_.rows(); }
  const RealMatrix& omega() const { return omega_; }
  const std::optional<RationalFlux>& rational() const { return rational_; }

 private:
  RealMatrix omega_;
  std::optional<RationalFlux> rational_;
};

// Ω^{ij} = sgn(j - i) η^{ij} + ξ^{ij}, zero diagonal.
inline FluxMatrix antisymmetrize_coupling(const Background& b) {
  const Index n = b.n();
  RealMatrix omega = RealMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      omega(i, j) = b.eta()(i, j) + b.xi()(i, j);
      omega(j, i) = -omega(i, j);
    }
  return FluxMatrix(omega);
}

struct MagneticRep {
  Index dim = 1;
  std::vector<Matrix> unitaries;
};

inline Matrix shift_matrix(long long n) {
  Matrix s = Matrix::Zero(n, n);
  for (long long k = 0; k < n; ++k) s((k - 1 + n) % n, k) = 1.0;  // S|k> = |k-1>
  return s;
}

// diag(ω^k), ω = exp(2πi q / n); exponents reduced mod n before evaluation.
inline Matrix clock_matrix(long long n, long long q) {
  Matrix c = Matrix::Zero(n, n);
  for (long long k = 0; k < n; ++k) {
    const long long e = ((q * k) % n + n) % n;
    c(k, k) = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(e) / static_cast<double>(n));
  }
  return c;
}

// One n-dimensional clock-shift pair per 2x2 block (2k, 2k+1) of the flux, on
// disjoint tensor factors.
inline MagneticRep clock_shift_rep(const FluxMatrix& flux) {
  if (!flux.rational()) throw UnsupportedError("clock_shift_rep: flux has no rational form");
  const Index dim_n = flux.n();
  if (dim_n % 2 != 0 || dim_n == 0) throw UnsupportedError("clock_shift_rep: flux dimension must be even");
  const auto& r = *flux.rational();
  for (Index i = 0; i < dim_n; ++i)
    for (Index j = 0; j < dim_n; ++j) {
      const bool in_block = (i / 2 == j / 2);
      if (!in_block && r.q(i, j) != 0) throw UnsupportedError("clock_shift_rep: flux is not block-decomposable");
    }
  const Index blocks = dim_n / 2;
  std::vector<Index> dims(static_cast<std::size_t>(blocks), static_cast<Index>(r.n));
  MagneticRep rep;
  for (Index k = 0; k < blocks; ++k) rep.dim *= static_cast<Index>(r.n);
  if (rep.dim > static_cast<Index>(kDefaultDimBudget)) throw BudgetError("clock_shift_rep: dimension exceeds budget");
  for (Index k = 0; k < blocks; ++k) {
    const long long q = r.q(2 * k, 2 * k + 1);
    rep.unitaries.push_back(embed(std::span<const Index>(dims), static_cast<std::size_t>(k), shift_matrix(r.n)));
    rep.unitaries.push_back(embed(std::span<const Index>(dims), static_cast<std::size_t>(k), clock_matrix(r.n, q)));
  }
  return rep;
}

// max over pairs of |U^i U^j - e^{iΩ^{ij}} U^j U^i|.
inline double phase_relation_residual(const MagneticRep& rep, const FluxMatrix& flux) {
  double worst = 0.0;
  const auto& u = rep.unitaries;
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < u.size(); ++j) {
      const cplx phase = std::polar(1.0, flux.omega()(static_cast<Index>(i), static_cast<Index>(j)));
      worst = std::max(worst, (u[i] * u[j] - phase * u[j] * u[i]).cwiseAbs().maxCoeff());
    }
  return worst;
}

namespace detail {

inline std::vector<CanonicalPair> plane_pairs(const FockSpace& space) {
  return {position_momentum(space, "x0"), position_momentum(space, "x1")};
}

inline std::vector<Matrix> mechanical_momenta(const FluxMatrix& flux, const FockSpace& space) {
  const auto cp = plane_pairs(space);
  std::vector<Matrix> out;
  for (Index i = 0; i < 2; ++i) {
    Matrix pi = cp[static_cast<std::size_t>(i)].p;
    for (Index j = 0; j < 2; ++j) pi -= 0.5 * flux.omega()(i, j) * cp[static_cast<std::size_t>(j)].x;
    out.push_back(std::move(pi));
  }
  return out;
}

}  // namespace detail

// H_L = ½ Σ_i (p^i - ½ Σ_j Ω^{ij} x_j)² on two truncated modes.
inline Matrix landau_hamiltonian(const FluxMatrix& flux, Index n_max) {
  if (flux.n() != 2) throw UnsupportedError("landau_hamiltonian: only N = 2 is supported");
  const FockSpace space(n_max, {"x0", "x1"});
  const auto pi = detail::mechanical_momenta(flux, space);
  Matrix h = 0.5 * (pi[0] * pi[0] + pi[1] * pi[1]);
  return 0.5 * (h + h.adjoint());
}

// exp(i(p^j - ½ Σ_k Ω^{jk} x_k)) on the truncated space. Truncation breaks the
// phase relation away from low occupations; the residual on the block with
// all occupations <= `probe` is returned alongside.
struct MagneticTranslations {
  std::vector<Matrix> unitaries;
  double low_block_residual = 0.0;
};

inline MagneticTranslations magnetic_translations(const FluxMatrix& flux, Index n_max, Index probe = 2) {
  if (flux.n() != 2) throw UnsupportedError("magnetic_translations: only N = 2 is supported");
  const FockSpace space(n_max, {"x0", "x1"});
  const auto pi = detail::mechanical_momenta(flux, space);
  MagneticTranslations out;
  for (const auto& m : pi) out.unitaries.push_back(unitary_exp(0.5 * (m + m.adjoint())));
  const cplx phase = std::polar(1.0, flux.omega()(0, 1));
  const Matrix diff = out.unitaries[0] * out.unitaries[1] - phase * out.unitaries[1] * out.unitaries[0];
  const Index d = n_max + 1;
  for (Index r = 0; r < space.dim(); ++r)
    for (Index c = 0; c < space.dim(); ++c) {
      if (r / d > probe || r % d > probe || c / d > probe || c % d > probe) continue;
      out.low_block_residual = std::max(out.low_block_residual, std::abs(diff(r, c)));
    }
  return out;
}

}  // namespace dfslab
