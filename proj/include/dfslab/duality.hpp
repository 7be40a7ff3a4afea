// duality.hpp — (η, ξ) backgrounds, the dual metric, O(N,N;Z) generators and
// their action on backgrounds and charge lattices, normal-mode frequencies
//
// Index conventions
//   stored eta   : upper-index metric η^{ij}, symmetric positive definite
//   stored xi    : upper-index flux ξ^{ij}, exactly antisymmetric
//   eta_lower()  : η_ij = (η^{ij})^{-1}
//   K_±          : η ± ξ
//   E            : η + ξ, the matrix acted on by fractional-linear maps

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "dfslab/opcore.hpp"

namespace dfslab {

using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

inline constexpr double kSymmetryTol = 1e-12;

inline void require_spd(const RealMatrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) throw ShapeError(std::string(what) + ": matrix must be square");
  if (!a.allFinite()) throw DomainError(std::string(what) + ": non-finite entries");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw DomainError(std::string(what) + ": matrix is not symmetric");
  }
  Eigen::LLT<RealMatrix> llt(0.5 * (a + a.transpose()));
  if (llt.info() != Eigen::Success) throw DomainError(std::string(what) + ": matrix is not positive definite");
}

class Background {
 public:
  Background(RealMatrix eta, RealMatrix xi) {
    require_spd(eta, "Background");
    if (xi.rows() != eta.rows() || xi.cols() != eta.cols()) throw ShapeError("Background: eta and xi shapes differ");
    if (!xi.allFinite()) throw DomainError("Background: non-finite xi");
    if ((xi + xi.transpose()).cwiseAbs().maxCoeff() != 0.0) throw DomainError("Background: xi is not antisymmetric");
    eta_ = 0.5 * (eta + eta.transpose());
    xi_ = std::move(xi);
  }

  explicit Background(RealMatrix eta) : Background(eta, RealMatrix::Zero(eta.rows(), eta.cols())) {}

  Index n() const { return eta_.rows(); }
  const RealMatrix& eta() const { return eta_; }
  const RealMatrix& xi() const { return xi_; }
  RealMatrix eta_lower() const {
    RealMatrix inv = eta_.llt().solve(RealMatrix::Identity(n(), n()));
    return 0.5 * (inv + inv.transpose());
  }
  RealMatrix k_plus() const { return eta_ + xi_; }
  RealMatrix k_minus() const { return eta_ - xi_; }
  RealMatrix e_matrix() const { return eta_ + xi_; }

 private:
  RealMatrix eta_;
  RealMatrix xi_;
};

// Splits a general matrix into symmetric and antisymmetric parts; the
// antisymmetric part is exactly antisymmetric by construction.
inline Background background_from_e(const RealMatrix& e) {
  RealMatrix sym = 0.5 * (e + e.transpose());
  RealMatrix anti = 0.5 * (e - e.transpose());
  return Background(sym, anti);
}

// η̃ = K_+ η_lower K_-, symmetrised (the two halves agree up to rounding).
inline RealMatrix dual_metric(const Background& b) {
  const RealMatrix d = b.k_plus() * b.eta_lower() * b.k_minus();
  return 0.5 * (d + d.transpose());
}

// Background carrying the dual metric and the original flux.
inline Background dual_background(const Background& b) { return Background(dual_metric(b), b.xi()); }

// ---------------------------------------------------------------------------
// O(N,N;Z)

inline IntMatrix onn_form(Index n) {
  IntMatrix j = IntMatrix::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = IntMatrix::Identity(n, n);
  j.bottomLeftCorner(n, n) = IntMatrix::Identity(n, n);
  return j;
}

inline IntMatrix charge_sign(Index n) {
  IntMatrix s = IntMatrix::Identity(2 * n, 2 * n);
  s.bottomRightCorner(n, n) *= -1;
  return s;
}

// An element of O(N,N;Z) ⋊ Z2. `swap` is the ± label exchange E ↦ Eᵀ, which
// acts before g.
struct ONNElement {
  IntMatrix g;
  bool swap = false;
  std::string label;

  Index n() const { return g.rows() / 2; }

  bool preserves_form() const {
    const IntMatrix j = onn_form(n());
    return g.transpose() * j * g == j;
  }

  static ONNElement identity(Index n) { return {IntMatrix::Identity(2 * n, 2 * n), false, "identity"}; }

  ONNElement operator*(const ONNElement& rhs) const {
    if (rhs.n() != n()) throw ShapeError("ONNElement: rank mismatch");
    const IntMatrix s = charge_sign(n());
    const IntMatrix inner = swap ? IntMatrix(s * rhs.g * s) : rhs.g;
    return {g * inner, swap != rhs.swap, label + "*" + rhs.label};
  }

  ONNElement inverse() const {
    const IntMatrix j = onn_form(n());
    IntMatrix ginv = j * g.transpose() * j;
    if (swap) {
      const IntMatrix s = charge_sign(n());
      ginv = s * ginv * s;
    }
    return {ginv, swap, label + "^-1"};
  }
};

inline ONNElement onn_inversion(Index n, const std::vector<Index>& directions) {
  IntMatrix p = IntMatrix::Zero(n, n);
  for (auto i : directions) {
    if (i < 0 || i >= n) throw UsageError("onn_inversion: direction out of range");
    p(i, i) = 1;
  }
  const IntMatrix q = IntMatrix::Identity(n, n) - p;
  IntMatrix g(2 * n, 2 * n);
  g << q, p, p, q;
  std::string label = "inversion";
  for (auto i : directions) label += "_" + std::to_string(i);
  return {g, false, label};
}

inline ONNElement onn_full_inversion(Index n) {
  return {onn_form(n), false, "inversion"};
}

// ξ ↦ ξ + c for integer antisymmetric c.
inline ONNElement onn_shift(const IntMatrix& c) {
  const Index n = c.rows();
  if (c.cols() != n || c + c.transpose() != IntMatrix::Zero(n, n)) {
    throw DomainError("onn_shift: shift matrix must be square antisymmetric");
  }
  IntMatrix g = IntMatrix::Identity(2 * n, 2 * n);
  g.topRightCorner(n, n) = c;
  return {g, false, "shift"};
}

// E ↦ Aᵀ E A for A in GL(N,Z).
inline ONNElement onn_basis_change(const IntMatrix& a) {
  const Index n = a.rows();
  if (a.cols() != n) throw ShapeError("onn_basis_change: matrix must be square");
  const RealMatrix ar = a.cast<double>();
  const double det = ar.determinant();
  if (std::abs(std::abs(det) - 1.0) > 1e-9) throw DomainError("onn_basis_change: matrix is not unimodular");
  const RealMatrix inv = ar.inverse();
  const IntMatrix ainv = inv.array().round().cast<long long>().matrix();
  if (a * ainv != IntMatrix::Identity(n, n)) throw DomainError("onn_basis_change: inverse is not integral");
  IntMatrix g = IntMatrix::Zero(2 * n, 2 * n);
  g.topLeftCorner(n, n) = a.transpose();
  g.bottomRightCorner(n, n) = ainv;
  return {g, false, "basis_change"};
}

inline ONNElement onn_label_swap(Index n) { return {IntMatrix::Identity(2 * n, 2 * n), true, "label_swap"}; }

inline std::vector<ONNElement> onn_generators(Index n) {
  if (n < 1) throw UsageError("onn_generators: N must be positive");
  std::vector<ONNElement> out;
  if (n == 1) {
    out.push_back(onn_full_inversion(1));  // the single-direction inversion
  } else {
    for (Index i = 0; i < n; ++i) out.push_back(onn_inversion(n, {i}));
    out.push_back(onn_full_inversion(n));
  }
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      IntMatrix c = IntMatrix::Zero(n, n);
      c(i, j) = 1;
      c(j, i) = -1;
      auto el = onn_shift(c);
      el.label = "shift_" + std::to_string(i) + std::to_string(j);
      out.push_back(el);
    }
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      IntMatrix a = IntMatrix::Identity(n, n);
      a(i, j) = 1;
      auto el = onn_basis_change(a);
      el.label = "elementary_" + std::to_string(i) + std::to_string(j);
      out.push_back(el);
    }
  for (Index i = 0; i < n; ++i) {
    IntMatrix a = IntMatrix::Identity(n, n);
    a(i, i) = -1;
    auto el = onn_basis_change(a);
    el.label = "reflection_" + std::to_string(i);
    out.push_back(el);
  }
  out.push_back(onn_label_swap(n));
  return out;
}

struct ChargeVector {
  IntVector m;
  IntVector w;

  bool operator==(const ChargeVector& o) const { return m == o.m && w == o.w; }
};

inline ChargeVector apply_charges(const ONNElement& el, const ChargeVector& q) {
  const Index n = el.n();
  if (q.m.size() != n || q.w.size() != n) throw ShapeError("onn_apply: charge vector size mismatch");
  IntVector z(2 * n);
  z << q.m, q.w;
  const IntMatrix s = charge_sign(n);
  if (el.swap) z = s * z;
  z = s * el.g * s * z;
  return {z.head(n), z.tail(n)};
}

inline Background apply_background(const ONNElement& el, const Background& b) {
  const Index n = el.n();
  if (b.n() != n) throw ShapeError("onn_apply: background rank mismatch");
  RealMatrix e = b.e_matrix();
  if (el.swap) e.transposeInPlace();
  const RealMatrix g = el.g.cast<double>();
  const RealMatrix num = g.topLeftCorner(n, n) * e + g.topRightCorner(n, n);
  const RealMatrix den = g.bottomLeftCorner(n, n) * e + g.bottomRightCorner(n, n);
  Eigen::FullPivLU<RealMatrix> lu(den);
  if (!lu.isInvertible() || lu.rcond() < 1e-14) throw DomainError("onn_apply: cE + d is singular");
  return background_from_e(num * lu.inverse());
}

inline std::pair<Background, ChargeVector> onn_apply(const ONNElement& el, const Background& b, const ChargeVector& q) {
  return {apply_background(el, b), apply_charges(el, q)};
}

// H(m, w) = ½ (m + ξw)ᵀ η^{-1} (m + ξw) + ½ wᵀ η w with the stored matrices.
inline double narain_energy(const Background& b, const ChargeVector& q) {
  const RealVector m = q.m.cast<double>();
  const RealVector w = q.w.cast<double>();
  const RealVector shifted = m + b.xi() * w;
  const RealVector solved = b.eta().llt().solve(shifted);
  return 0.5 * shifted.dot(solved) + 0.5 * w.dot(b.eta() * w);
}

struct NarainLevel {
  double energy;
  ChargeVector charges;
};

inline std::vector<ChargeVector> charge_box(Index n, int box) {
  if (box < 0) throw UsageError("charge_box: box must be nonnegative");
  std::vector<ChargeVector> out;
  const Index width = 2 * box + 1;
  Index total = 1;
  for (Index k = 0; k < 2 * n; ++k) total *= width;
  out.reserve(static_cast<std::size_t>(total));
  for (Index idx = 0; idx < total; ++idx) {
    IntVector z(2 * n);
    Index rem = idx;
    for (Index k = 2 * n; k-- > 0;) {
      z(k) = static_cast<long long>(rem % width) - box;
      rem /= width;
    }
    out.push_back({z.head(n), z.tail(n)});
  }
  return out;
}

// Sorted by energy; ties broken by the charge enumeration order.
inline std::vector<NarainLevel> narain_spectrum(const Background& b, int box) {
  std::vector<NarainLevel> out;
  for (auto& q : charge_box(b.n(), box)) out.push_back({narain_energy(b, q), q});
  std::stable_sort(out.begin(), out.end(), [](const NarainLevel& x, const NarainLevel& y) { return x.energy < y.energy; });
  return out;
}

// Largest |H_b(q) - H_{g.b}(g.q)| over the box, together with the largest
// deviation between the two sorted energy lists.
struct SpectrumComparison {
  double relabel_residual = 0.0;
  double multiset_residual = 0.0;
};

inline SpectrumComparison narain_invariance(const ONNElement& el, const Background& b, int box) {
  const Background bt = apply_background(el, b);
  SpectrumComparison out;
  std::vector<double> before, after;
  for (auto& q : charge_box(b.n(), box)) {
    const double e0 = narain_energy(b, q);
    const double e1 = narain_energy(bt, apply_charges(el, q));
    out.relabel_residual = std::max(out.relabel_residual, std::abs(e0 - e1));
    before.push_back(e0);
    after.push_back(e1);
  }
  std::sort(before.begin(), before.end());
  std::sort(after.begin(), after.end());
  for (std::size_t k = 0; k < before.size(); ++k)
    out.multiset_residual = std::max(out.multiset_residual, std::abs(before[k] - after[k]));
  return out;
}

// Frequencies of H = ½ pᵀ a p + ½ xᵀ bmat x: square roots of eig(a bmat),
// computed from the symmetric matrix Lᵀ bmat L with a = L Lᵀ.
inline RealVector normal_modes(const RealMatrix& a, const RealMatrix& bmat) {
  require_spd(a, "normal_modes");
  require_spd(bmat, "normal_modes");
  if (a.rows() != bmat.rows()) throw ShapeError("normal_modes: dimension mismatch");
  const RealMatrix l = Eigen::LLT<RealMatrix>(0.5 * (a + a.transpose())).matrixL();
  RealMatrix m = l.transpose() * bmat * l;
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
}

}  // namespace dfslab
