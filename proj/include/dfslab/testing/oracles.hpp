// oracles.hpp — slow, independent reference computations used by the unit
// tests and the acceptance suite. Nothing here calls the solver or model code
// it is meant to check.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "dfslab/duality.hpp"
#include "dfslab/random.hpp"

namespace dfslab::testing {

// sigma_max by power iteration on A^dagger A.
inline double power_iteration_norm(const Matrix& a, int iterations = 2000) {
  Vector v = Vector::Ones(a.cols()) / std::sqrt(static_cast<double>(a.cols()));
  double lambda = 0.0;
  for (int k = 0; k < iterations; ++k) {
    Vector w = a.adjoint() * (a * v);
    const double nrm = w.norm();
    if (nrm == 0.0) return 0.0;
    lambda = nrm;
    v = w / nrm;
  }
  return std::sqrt(lambda);
}

// ||[D, diag(a)]||: the commutator is anti-Hermitian, so its norm is the
// largest |eigenvalue| of i[D, diag(a)].
inline double diagonal_commutator_norm(const Matrix& d, const RealVector& a) {
  const Index n = d.rows();
  Matrix c(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k) c(j, k) = kI * d(j, k) * (a(k) - a(j));
  Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Distance between two states of the commutative n-point algebra, given by
// their diagonal weights p and q: random search over diagonal a rescaled onto
// ||[D, a]|| = 1, then pattern search along coordinate and pairwise directions.
inline double connes_search_oracle(const Matrix& d, const RealVector& p, const RealVector& q, int samples,
                                   CounterRng& rng) {
  const Index n = d.rows();
  const RealVector g = p - q;
  auto score = [&](const RealVector& a) {
    const double h = diagonal_commutator_norm(d, a);
    if (h <= 1e-300) return -1.0;
    return g.dot(a) / h;
  };
  RealVector best = RealVector::Zero(n);
  double best_val = -1.0;
  for (int s = 0; s < samples; ++s) {
    RealVector a(n);
    for (Index k = 0; k < n; ++k) a(k) = rng.normal();
    const double v = score(a);
    if (v > best_val) {
      best_val = v;
      best = a;
    }
  }
  best /= diagonal_commutator_norm(d, best);
  std::vector<RealVector> dirs;
  for (Index i = 0; i < n; ++i) {
    dirs.push_back(RealVector::Unit(n, i));
    for (Index j = i + 1; j < n; ++j) {
      dirs.push_back(RealVector::Unit(n, i) + RealVector::Unit(n, j));
      dirs.push_back(RealVector::Unit(n, i) - RealVector::Unit(n, j));
    }
  }
  for (double step = 0.1; step > 1e-12; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (const auto& dir : dirs)
        for (double sgn : {1.0, -1.0}) {
          const RealVector cand = best + sgn * step * dir;
          const double v = score(cand);
          if (v > best_val + 1e-15) {
            best_val = v;
            best = cand / diagonal_commutator_norm(d, cand);
            improved = true;
          }
        }
    }
  }
  return best_val;
}

// K_+ η_lower K_- by explicit index sums.
inline RealMatrix dual_metric_loops(const RealMatrix& eta, const RealMatrix& xi) {
  const Index n = eta.rows();
  const RealMatrix eta_lo = eta.inverse();
  RealMatrix out = RealMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index k = 0; k < n; ++k)
        for (Index l = 0; l < n; ++l) out(i, j) += (eta(i, k) + xi(i, k)) * eta_lo(k, l) * (eta(l, j) - xi(l, j));
  return out;
}

inline RealMatrix sgn_flux_loops(const RealMatrix& eta, const RealMatrix& xi) {
  const Index n = eta.rows();
  RealMatrix out = RealMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double sgn = j > i ? 1.0 : -1.0;
      out(i, j) = sgn * eta(i, j) + xi(i, j);
    }
  return out;
}

// Narain mass matrix: H(m, w) = ½ Zᵀ M Z with Z = (m, w).
inline RealMatrix narain_mass_matrix(const RealMatrix& eta, const RealMatrix& xi) {
  const Index n = eta.rows();
  const RealMatrix g = eta.inverse();
  RealMatrix m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = g;
  m.topRightCorner(n, n) = g * xi;
  m.bottomLeftCorner(n, n) = xi.transpose() * g;
  m.bottomRightCorner(n, n) = eta + xi.transpose() * g * xi;
  return m;
}

// Sorted energies over the box |m_i|, |w_i| <= box.
inline std::vector<double> narain_energies(const RealMatrix& eta, const RealMatrix& xi, int box) {
  const Index n = eta.rows();
  const RealMatrix m = narain_mass_matrix(eta, xi);
  std::vector<double> out;
  const Index width = 2 * box + 1;
  Index total = 1;
  for (Index k = 0; k < 2 * n; ++k) total *= width;
  for (Index idx = 0; idx < total; ++idx) {
    RealVector z(2 * n);
    Index rem = idx;
    for (Index k = 0; k < 2 * n; ++k) {
      z(k) = static_cast<double>(rem % width - box);
      rem /= width;
    }
    out.push_back(0.5 * z.dot(m * z));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Charge map of an O(N,N) element with optional label swap, as a real matrix:
// Q = σ g σ σ^swap with σ = diag(I, -I).
inline RealMatrix charge_map(const IntMatrix& g, bool swap) {
  const Index n = g.rows() / 2;
  RealMatrix sigma = RealMatrix::Identity(2 * n, 2 * n);
  sigma.bottomRightCorner(n, n) *= -1.0;
  RealMatrix q = sigma * g.cast<double>() * sigma;
  if (swap) q = q * sigma;
  return q;
}

// Coefficient arrays of the substituted D and of the target D̄ by index sums.
struct SubstitutionArrays {
  RealMatrix p[2], x[2], e[2];
};

inline SubstitutionArrays substituted_arrays_loops(const RealMatrix& eta, const RealMatrix& xi) {
  const Index n = eta.rows();
  const RealMatrix eta_lo = eta.inverse();
  SubstitutionArrays out;
  const double r = 1.0 / std::sqrt(2.0);
  for (int s = 0; s < 2; ++s) {
    const double sign = s == 0 ? 1.0 : -1.0;
    const RealMatrix k = eta + sign * xi;
    const RealMatrix kinv = k.inverse();
    out.p[s] = RealMatrix::Zero(n, n);
    out.x[s] = RealMatrix::Zero(n, n);
    out.e[s] = RealMatrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        // a^{(s)i} -> s η^{ik} (K^{-1})_{kj} a^{(s)j}, a^{(s)j} = r (p^j + s K^{jl} x_l)
        for (Index kk = 0; kk < n; ++kk) {
          const double t = sign * eta(i, kk) * kinv(kk, j);
          out.p[s](i, j) += t * r;
          for (Index l = 0; l < n; ++l) out.x[s](i, l) += t * r * sign * k(j, l);
        }
        // e^{(s)i} -> s η_{jk} K^{ij} e^{(s)k}
        for (Index kk = 0; kk < n; ++kk) out.e[s](i, kk) += sign * eta_lo(j, kk) * k(i, j);
      }
  }
  return out;
}

inline SubstitutionArrays dual_target_arrays_loops(const RealMatrix& eta, const RealMatrix& xi) {
  const Index n = eta.rows();
  const RealMatrix dual = dual_metric_loops(eta, xi);
  SubstitutionArrays out;
  const double r = 1.0 / std::sqrt(2.0);
  for (int s = 0; s < 2; ++s) {
    const double sign = s == 0 ? 1.0 : -1.0;
    // D̄ = D_+ - D_-: the minus sector contributes -Γ^-[(p - K̃_- x) r + (e + e†)]
    out.p[s] = sign * r * RealMatrix::Identity(n, n);
    out.x[s] = r * (dual + sign * xi);
    out.e[s] = sign * RealMatrix::Identity(n, n);
  }
  return out;
}

// Expanded polynomial form of the Landau Hamiltonian for given x, p.
inline Matrix landau_expanded(const RealMatrix& omega, const std::vector<Matrix>& x, const std::vector<Matrix>& p) {
  const Index n = omega.rows();
  Matrix h = Matrix::Zero(x[0].rows(), x[0].cols());
  for (Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    h += 0.5 * p[ui] * p[ui];
    for (Index j = 0; j < n; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      h -= 0.25 * omega(i, j) * (p[ui] * x[uj] + x[uj] * p[ui]);
      for (Index k = 0; k < n; ++k) h += 0.125 * omega(i, j) * omega(i, k) * x[uj] * x[static_cast<std::size_t>(k)];
    }
  }
  return h;
}

}  // namespace dfslab::testing
