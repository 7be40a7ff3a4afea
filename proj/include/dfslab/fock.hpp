// fock.hpp — truncated Fock spaces, ladder and Heisenberg-Weyl operators, the
// oscillator decoherence model, Clifford pairs and the string-oscillator model
// with its two Dirac operators
//
// Truncation is hard: a†|n_max> = 0, so canonical relations hold only on
// matrix elements whose occupations are all below n_max.

#pragma once

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "dfslab/duality.hpp"
#include "dfslab/opcore.hpp"
#include "dfslab/symmetry.hpp"

namespace dfslab {

inline Matrix ladder_matrix(Index n_max) {
  if (n_max < 0) throw UsageError("ladder_matrix: n_max must be nonnegative");
  Matrix a = Matrix::Zero(n_max + 1, n_max + 1);
  for (Index k = 1; k <= n_max; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

// A register of identical truncated bosonic modes, optionally preceded by one
// non-bosonic factor (a spinor space) of dimension `leading_dim`.
class FockSpace {
 public:
  FockSpace(Index n_max, std::vector<std::string> modes, Index leading_dim = 1,
            std::size_t budget = kDefaultDimBudget)
      : n_max_(n_max), modes_(std::move(modes)), leading_(leading_dim) {
    if (n_max < 0) throw UsageError("FockSpace: n_max must be nonnegative");
    if (leading_dim < 1) throw UsageError("FockSpace: leading dimension must be positive");
    dims_.push_back(leading_dim);
    double total = static_cast<double>(leading_dim);
    for (std::size_t k = 0; k < modes_.size(); ++k) {
      dims_.push_back(n_max + 1);
      total *= static_cast<double>(n_max + 1);
    }
    if (total > static_cast<double>(budget)) {
      throw BudgetError("FockSpace: dimension " + std::to_string(static_cast<long long>(total)) + " (" +
                        std::to_string(modes_.size()) + " modes at n_max " + std::to_string(n_max) +
                        ", leading factor " + std::to_string(leading_dim) + ") exceeds budget " +
                        std::to_string(budget));
    }
    dim_ = static_cast<Index>(total);
  }

  Index n_max() const { return n_max_; }
  Index dim() const { return dim_; }
  Index leading_dim() const { return leading_; }
  const std::vector<std::string>& modes() const { return modes_; }
  const std::vector<Index>& dims() const { return dims_; }

  std::size_t mode_index(const std::string& label) const {
    for (std::size_t k = 0; k < modes_.size(); ++k)
      if (modes_[k] == label) return k;
    throw UsageError("FockSpace: unknown mode '" + label + "'");
  }

  // Operator acting on one mode, identity elsewhere.
  Matrix on_mode(std::size_t mode, const Matrix& local) const {
    return embed(std::span<const Index>(dims_), mode + 1, local, static_cast<std::size_t>(dim_));
  }

  // Operator on the leading factor.
  Matrix on_leading(const Matrix& local) const {
    return embed(std::span<const Index>(dims_), 0, local, static_cast<std::size_t>(dim_));
  }

  // Projector onto basis states whose listed modes all have occupation < n_max.
  Matrix interior_mask(const std::vector<std::size_t>& modes) const {
    Vector diag = Vector::Ones(dim_);
    for (Index idx = 0; idx < dim_; ++idx) {
      Index rem = idx;
      for (std::size_t f = dims_.size(); f-- > 1;) {
        const Index occ = rem % dims_[f];
        rem /= dims_[f];
        for (auto m : modes)
          if (m + 1 == f && occ >= n_max_) diag(idx) = 0.0;
      }
    }
    return diag.asDiagonal();
  }

 private:
  Index n_max_;
  std::vector<std::string> modes_;
  Index leading_;
  std::vector<Index> dims_;
  Index dim_ = 1;
};

struct LadderPair {
  Matrix a;
  Matrix a_dag;
};

inline LadderPair ladder(const FockSpace& space, const std::string& mode) {
  const Matrix a = space.on_mode(space.mode_index(mode), ladder_matrix(space.n_max()));
  return {a, a.adjoint()};
}

struct CanonicalPair {
  Matrix x;
  Matrix p;
};

inline CanonicalPair position_momentum(const FockSpace& space, const std::string& mode) {
  const auto [a, ad] = ladder(space, mode);
  const double r = std::sqrt(2.0);
  return {(a + ad) / r, (a - ad) / (kI * r)};
}

// e^i = sum_a L_ia b_a with L L^T = level * eta over the given lowering
// operators b_a (one per direction, on disjoint modes).
inline std::vector<Matrix> hw_mode(const std::vector<Matrix>& lowering, int level, const RealMatrix& eta) {
  if (level < 1) throw UsageError("hw_mode: level must be positive");
  require_spd(eta, "hw_mode");
  const Index n = eta.rows();
  if (static_cast<Index>(lowering.size()) != n) throw ShapeError("hw_mode: need one ladder per direction");
  const RealMatrix l = Eigen::LLT<RealMatrix>(static_cast<double>(level) * 0.5 * (eta + eta.transpose())).matrixL();
  std::vector<Matrix> out;
  for (Index i = 0; i < n; ++i) {
    Matrix e = Matrix::Zero(lowering.front().rows(), lowering.front().cols());
    for (Index a = 0; a <= i; ++a) e += l(i, a) * lowering[static_cast<std::size_t>(a)];
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<Matrix> hw_mode(const FockSpace& space, const std::vector<std::string>& modes, int level,
                                   const RealMatrix& eta) {
  std::vector<Matrix> lowering;
  for (const auto& m : modes) lowering.push_back(ladder(space, m).a);
  return hw_mode(lowering, level, eta);
}

// ---------------------------------------------------------------------------
// System-environment oscillator model

struct DecoherenceModel {
  Matrix K;
  Matrix Lambda;
  Matrix w;
  Index n_max = 0;
  FockSpace space;  // system modes a0.., then environment modes e0..
  Index system_dim = 1;
  Index env_dim = 1;
  Matrix H_S;  // on the system factor
  Matrix H_E;  // on the environment factor
  Matrix H_I;  // on the full space
  Matrix H;
  std::vector<Matrix> a;  // system lowering operators, full space
  std::vector<Matrix> e;  // environment lowering operators, full space

  Index n_sys() const { return K.rows(); }
  Index n_env() const { return Lambda.rows(); }
};

inline std::vector<std::string> numbered_labels(const std::string& prefix, Index count) {
  std::vector<std::string> out;
  for (Index k = 0; k < count; ++k) out.push_back(prefix + std::to_string(k));
  return out;
}

inline DecoherenceModel build_decoherence_model(const Matrix& K, const Matrix& Lambda, const Matrix& w, Index n_max,
                                                std::size_t budget = kDefaultDimBudget) {
  require_hermitian(K, "build_decoherence_model (K)");
  require_hermitian(Lambda, "build_decoherence_model (Lambda)");
  require_finite(w, "build_decoherence_model (w)");
  if (w.rows() != K.rows() || w.cols() != Lambda.rows()) {
    throw ShapeError("build_decoherence_model: w must be N_sys x N_env");
  }
  const Index ns = K.rows(), ne = Lambda.rows();
  auto labels = numbered_labels("a", ns);
  auto env_labels = numbered_labels("e", ne);
  labels.insert(labels.end(), env_labels.begin(), env_labels.end());

  const FockSpace sys_space(n_max, numbered_labels("a", ns), 1, budget);
  const FockSpace env_space(n_max, numbered_labels("e", ne), 1, budget);
  FockSpace full(n_max, labels, 1, budget);

  auto quadratic = [](const FockSpace& sp, const Matrix& coeff, const std::string& prefix) {
    Matrix h = Matrix::Zero(sp.dim(), sp.dim());
    std::vector<Matrix> lo;
    for (Index k = 0; k < coeff.rows(); ++k) lo.push_back(ladder(sp, prefix + std::to_string(k)).a);
    for (Index i = 0; i < coeff.rows(); ++i)
      for (Index j = 0; j < coeff.cols(); ++j)
        if (coeff(i, j) != cplx(0.0)) h += coeff(i, j) * lo[static_cast<std::size_t>(i)].adjoint() * lo[static_cast<std::size_t>(j)];
    return Matrix(0.5 * (h + h.adjoint()));
  };

  DecoherenceModel m{K, Lambda, w, n_max, full, sys_space.dim(), env_space.dim(), {}, {}, {}, {}, {}, {}};
  m.H_S = quadratic(sys_space, K, "a");
  m.H_E = quadratic(env_space, Lambda, "e");
  for (Index i = 0; i < ns; ++i) m.a.push_back(ladder(full, "a" + std::to_string(i)).a);
  for (Index al = 0; al < ne; ++al) m.e.push_back(ladder(full, "e" + std::to_string(al)).a);
  m.H_I = Matrix::Zero(full.dim(), full.dim());
  for (Index i = 0; i < ns; ++i)
    for (Index al = 0; al < ne; ++al) {
      const cplx c = w(i, al);
      if (c == cplx(0.0)) continue;
      const Matrix& ai = m.a[static_cast<std::size_t>(i)];
      const Matrix& ea = m.e[static_cast<std::size_t>(al)];
      m.H_I += c * ai * ea.adjoint() + std::conj(c) * ai.adjoint() * ea;
    }
  m.H = tensor(m.H_S, identity(m.env_dim), budget) + tensor(identity(m.system_dim), m.H_E, budget) + m.H_I;
  return m;
}

// Θ_α = π e_α† e_α on the full space.
inline std::vector<Matrix> parity_generators(const DecoherenceModel& m) {
  std::vector<Matrix> out;
  for (const auto& e : m.e) out.push_back(std::numbers::pi * (e.adjoint() * e));
  return out;
}

// exp(iΘ_α) written down exactly as diag((-1)^n_α).
inline std::vector<Matrix> parity_unitaries(const DecoherenceModel& m) {
  std::vector<Matrix> out;
  Matrix local = Matrix::Zero(m.n_max + 1, m.n_max + 1);
  for (Index k = 0; k <= m.n_max; ++k) local(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  for (Index al = 0; al < m.n_env(); ++al) out.push_back(m.space.on_mode(static_cast<std::size_t>(m.n_sys() + al), local));
  return out;
}

// ---------------------------------------------------------------------------
// Clifford pairs

// Jordan-Wigner gammas γ_0..γ_{2N-1} on (C^2)^{⊗N}: mutually anticommuting,
// Hermitian, squaring to I.
inline std::vector<Matrix> euclidean_gammas(Index n) {
  std::vector<Matrix> out;
  for (Index k = 0; k < n; ++k) {
    for (const Matrix& local : {pauli_x(), pauli_y()}) {
      Matrix g = Matrix::Ones(1, 1);
      for (Index j = 0; j < n; ++j) g = tensor(g, j < k ? pauli_z() : (j == k ? local : identity(2)));
      out.push_back(std::move(g));
    }
  }
  return out;
}

struct CliffordPair {
  Index n = 0;
  RealMatrix eta;  // lower-index metric, L L^T = eta
  std::vector<Matrix> gamma_plus;   // Hermitian
  std::vector<Matrix> gamma_minus;  // anti-Hermitian
  Index rep_dim() const { return gamma_plus.empty() ? 1 : gamma_plus.front().rows(); }
};

inline CliffordPair clifford_pair(const RealMatrix& eta_lower) {
  require_spd(eta_lower, "clifford_pair");
  const Index n = eta_lower.rows();
  const RealMatrix l = Eigen::LLT<RealMatrix>(0.5 * (eta_lower + eta_lower.transpose())).matrixL();
  const auto gam = euclidean_gammas(n);
  CliffordPair out{n, eta_lower, {}, {}};
  const Index d = gam.front().rows();
  for (Index i = 0; i < n; ++i) {
    Matrix gp = Matrix::Zero(d, d), gm = Matrix::Zero(d, d);
    for (Index a = 0; a < n; ++a) {
      gp += l(i, a) * gam[static_cast<std::size_t>(2 * a)];
      gm += kI * l(i, a) * gam[static_cast<std::size_t>(2 * a + 1)];
    }
    out.gamma_plus.push_back(std::move(gp));
    out.gamma_minus.push_back(std::move(gm));
  }
  return out;
}

// ---------------------------------------------------------------------------
// String-oscillator model

struct StringModel {
  Background background;
  Index n_max = 0;
  int cutoff = 0;  // highest Heisenberg-Weyl level M
  FockSpace space;
  CliffordPair clifford;
  std::vector<Matrix> x, p;                // per direction, full space
  std::vector<Matrix> a_plus, a_minus;     // per direction
  // e[s][level-1][i], s = 0 for +, 1 for -
  std::vector<std::vector<std::vector<Matrix>>> e_modes;
  std::vector<Matrix> gamma_plus, gamma_minus;  // embedded on the full space
  Matrix H_S, H_E, D_plus, D_minus, D, D_bar;

  Index dim() const { return space.dim(); }
  Index n() const { return background.n(); }
};

namespace detail {

inline std::vector<std::string> string_mode_labels(Index n, int cutoff) {
  std::vector<std::string> labels;
  for (Index i = 0; i < n; ++i) labels.push_back("x" + std::to_string(i));
  for (const char* s : {"p", "m"})
    for (int lv = 1; lv <= cutoff; ++lv)
      for (Index a = 0; a < n; ++a) labels.push_back(std::string("b") + s + std::to_string(lv) + "_" + std::to_string(a));
  return labels;
}

// sum_i Γ_i [ sum_j P_ij p^j + X_ij x_j + sum_levels sum_k E_ik (e^k + e^k†) ]
inline Matrix assemble_sector(const StringModel& m, const std::vector<Matrix>& gammas, int sector,
                              const RealMatrix& pc, const RealMatrix& xc, const RealMatrix& ec) {
  const Index n = m.n();
  Matrix out = Matrix::Zero(m.dim(), m.dim());
  for (Index i = 0; i < n; ++i) {
    Matrix field = Matrix::Zero(m.dim(), m.dim());
    for (Index j = 0; j < n; ++j) {
      if (pc(i, j) != 0.0) field += pc(i, j) * m.p[static_cast<std::size_t>(j)];
      if (xc(i, j) != 0.0) field += xc(i, j) * m.x[static_cast<std::size_t>(j)];
      for (const auto& level : m.e_modes[static_cast<std::size_t>(sector)]) {
        if (ec(i, j) == 0.0) continue;
        const Matrix& e = level[static_cast<std::size_t>(j)];
        field += ec(i, j) * (e + e.adjoint());
      }
    }
    out += gammas[static_cast<std::size_t>(i)] * field;
  }
  return out;
}

}  // namespace detail

inline StringModel build_string_model(const Background& b, Index n_max, int cutoff,
                                      std::size_t budget = kDefaultDimBudget) {
  if (cutoff < 0) throw UsageError("build_string_model: mode cutoff must be nonnegative");
  const Index n = b.n();
  const Index spinor = Index{1} << n;
  FockSpace space(n_max, detail::string_mode_labels(n, cutoff), spinor, budget);
  StringModel m{b, n_max, cutoff, space, clifford_pair(b.eta_lower()), {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}};

  for (Index i = 0; i < n; ++i) {
    auto cp = position_momentum(space, "x" + std::to_string(i));
    m.x.push_back(std::move(cp.x));
    m.p.push_back(std::move(cp.p));
  }
  for (const auto& g : m.clifford.gamma_plus) m.gamma_plus.push_back(space.on_leading(g));
  for (const auto& g : m.clifford.gamma_minus) m.gamma_minus.push_back(space.on_leading(g));

  const RealMatrix kp = b.k_plus(), km = b.k_minus(), eta_lo = b.eta_lower();
  const double r2 = std::sqrt(2.0);
  for (Index i = 0; i < n; ++i) {
    Matrix sp = m.p[static_cast<std::size_t>(i)], sm = m.p[static_cast<std::size_t>(i)];
    for (Index j = 0; j < n; ++j) {
      sp += kp(i, j) * m.x[static_cast<std::size_t>(j)];
      sm -= km(i, j) * m.x[static_cast<std::size_t>(j)];
    }
    m.a_plus.push_back(sp / r2);
    m.a_minus.push_back(sm / r2);
  }

  m.e_modes.resize(2);
  const char* tags[2] = {"p", "m"};
  for (int s = 0; s < 2; ++s)
    for (int lv = 1; lv <= cutoff; ++lv) {
      std::vector<std::string> labels;
      for (Index a = 0; a < n; ++a)
        labels.push_back(std::string("b") + tags[s] + std::to_string(lv) + "_" + std::to_string(a));
      m.e_modes[static_cast<std::size_t>(s)].push_back(hw_mode(space, labels, lv, b.eta()));
    }

  m.H_S = Matrix::Zero(m.dim(), m.dim());
  m.H_E = Matrix::Zero(m.dim(), m.dim());
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
      m.H_S += 0.5 * eta_lo(i, j) * (m.a_plus[ui] * m.a_plus[uj] + m.a_minus[ui] * m.a_minus[uj]);
      for (int s = 0; s < 2; ++s)
        for (const auto& level : m.e_modes[static_cast<std::size_t>(s)])
          m.H_E += eta_lo(i, j) * level[ui].adjoint() * level[uj];
    }

  const RealMatrix id = RealMatrix::Identity(n, n);
  m.D_plus = detail::assemble_sector(m, m.gamma_plus, 0, id / r2, kp / r2, id);
  m.D_minus = detail::assemble_sector(m, m.gamma_minus, 1, id / r2, -km / r2, id);
  m.D = m.D_plus + m.D_minus;
  m.D_bar = m.D_plus - m.D_minus;
  return m;
}

// ---------------------------------------------------------------------------
// Dirac kernels and the duality substitution

struct DiracKernel {
  SubspaceBasis basis;
  Matrix projector;
};

inline DiracKernel dfs_from_dirac(const Matrix& d, double tol = 1e-10) {
  require_square(d, "dfs_from_dirac");
  SubspaceBasis basis = kernel_basis(d, tol);
  Matrix proj = basis.projector();
  return {std::move(basis), std::move(proj)};
}

// Coefficients of one Dirac sector, sum_i Γ_i [P_ij p^j + X_ij x_j + E_ik (e^k + e^k†)].
struct SectorCoefficients {
  RealMatrix p;
  RealMatrix x;
  RealMatrix e;
};

struct SubstitutionReport {
  SectorCoefficients substituted[2];  // [0] = +, [1] = -
  SectorCoefficients target[2];       // D̄ of the dual background, same layout
  RealMatrix dual_coupling[2];        // s X'^{-1} P'
  double coupling_inversion_residual = 0.0;  // max |dual_coupling - K_s^{-1}|
  double coefficient_residual = 0.0;  // gamma-resolved arrays, max abs
  double operator_residual = 0.0;     // realized operators, max abs entry
  bool flux_free = false;
  bool matches = false;  // flux_free and both residuals <= 1e-12
};

inline constexpr double kSubstitutionTol = 1e-12;

// Applies a^{(s)i} ↦ s η^{ik}(K_s^{-1})_{kj} a^{(s)j} and
// e^{(s)i} ↦ s η_{jk} K_s^{ij} e^{(s)k} to the coefficient arrays of D and
// compares with D̄ built on Background(dual_metric, ξ).
inline SubstitutionReport duality_substitution(const StringModel& model) {
  const Background& b = model.background;
  const Index n = b.n();
  const RealMatrix eta = b.eta(), eta_lo = b.eta_lower();
  const RealMatrix id = RealMatrix::Identity(n, n);
  const double r2 = std::sqrt(2.0);
  const RealMatrix k[2] = {b.k_plus(), b.k_minus()};

  SubstitutionReport rep;
  const Background dual = dual_background(b);
  const RealMatrix kd[2] = {dual.k_plus(), dual.k_minus()};
  for (int s = 0; s < 2; ++s) {
    const double sign = s == 0 ? 1.0 : -1.0;
    Eigen::FullPivLU<RealMatrix> lu(k[s]);
    if (!lu.isInvertible()) throw DomainError("duality_substitution: K is singular");
    const RealMatrix kinv = lu.inverse();
    const RealMatrix t = eta * kinv;
    auto& sub = rep.substituted[s];
    sub.p = sign * t / r2;
    sub.x = t * k[s] / r2;
    sub.e = sign * k[s] * eta_lo;
    // D̄ = D_+ - D_-: the minus sector enters with an overall sign
    auto& tgt = rep.target[s];
    tgt.p = sign * id / r2;
    tgt.x = kd[s] / r2;
    tgt.e = sign * id;
    rep.dual_coupling[s] = sign * sub.x.partialPivLu().solve(sub.p);
    rep.coupling_inversion_residual =
        std::max(rep.coupling_inversion_residual, (rep.dual_coupling[s] - kinv).cwiseAbs().maxCoeff());
  }

  // Compare as coefficients of the Euclidean gammas: Γ_i = c Σ_a L_ia γ_a.
  const RealMatrix l = Eigen::LLT<RealMatrix>(eta_lo).matrixL();
  const RealMatrix ld = Eigen::LLT<RealMatrix>(dual.eta_lower()).matrixL();
  for (int s = 0; s < 2; ++s) {
    const auto& a = rep.substituted[s];
    const auto& c = rep.target[s];
    rep.coefficient_residual = std::max({rep.coefficient_residual,
                                         (l.transpose() * a.p - ld.transpose() * c.p).cwiseAbs().maxCoeff(),
                                         (l.transpose() * a.x - ld.transpose() * c.x).cwiseAbs().maxCoeff(),
                                         (l.transpose() * a.e - ld.transpose() * c.e).cwiseAbs().maxCoeff()});
  }

  const auto& sp = rep.substituted[0];
  const auto& sm = rep.substituted[1];
  const Matrix d_sub = detail::assemble_sector(model, model.gamma_plus, 0, sp.p, sp.x, sp.e) +
                       detail::assemble_sector(model, model.gamma_minus, 1, sm.p, sm.x, sm.e);
  const StringModel dual_model = build_string_model(dual, model.n_max, model.cutoff,
                                                    static_cast<std::size_t>(std::max<Index>(model.dim(), 1)));
  rep.operator_residual = (d_sub - dual_model.D_bar).cwiseAbs().maxCoeff();
  rep.flux_free = b.xi().cwiseAbs().maxCoeff() == 0.0;
  rep.matches = rep.flux_free && rep.coefficient_residual <= kSubstitutionTol && rep.operator_residual <= kSubstitutionTol;
  return rep;
}

// Per kernel vector diagnostics for the 2^N sector classification.
struct SectorResidual {
  RealVector p_norm;       // ||p^i psi||
  RealVector x_norm;       // ||x_i psi||
  RealVector gamma_sum;    // ||(Γ_i^+ + Γ_i^-) psi||
  RealVector gamma_diff;   // ||(Γ_i^+ - Γ_i^-) psi||
  RealVector k_gamma_sum;  // ||(Σ_j K_+^{ji} Γ_j^+ + Σ_j K_-^{ji} Γ_j^-) psi||
  RealVector k_gamma_diff; // ||(Σ_j K_+^{ji} Γ_j^+ - Σ_j K_-^{ji} Γ_j^-) psi||
};

inline SectorResidual sector_residual(const StringModel& model, const Vector& psi) {
  if (psi.size() != model.dim()) throw ShapeError("sector_residual: vector lives on a different space");
  if (!psi.allFinite() || psi.norm() == 0.0) throw DomainError("sector_residual: zero or non-finite vector");
  const Index n = model.n();
  const RealMatrix kp = model.background.k_plus(), km = model.background.k_minus();
  SectorResidual r{RealVector(n), RealVector(n), RealVector(n), RealVector(n), RealVector(n), RealVector(n)};
  for (Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    r.p_norm(i) = (model.p[ui] * psi).norm();
    r.x_norm(i) = (model.x[ui] * psi).norm();
    const Vector gp = model.gamma_plus[ui] * psi, gm = model.gamma_minus[ui] * psi;
    r.gamma_sum(i) = (gp + gm).norm();
    r.gamma_diff(i) = (gp - gm).norm();
    Vector kgp = Vector::Zero(model.dim()), kgm = Vector::Zero(model.dim());
    for (Index j = 0; j < n; ++j) {
      kgp += kp(j, i) * (model.gamma_plus[static_cast<std::size_t>(j)] * psi);
      kgm += km(j, i) * (model.gamma_minus[static_cast<std::size_t>(j)] * psi);
    }
    r.k_gamma_sum(i) = (kgp + kgm).norm();
    r.k_gamma_diff(i) = (kgp - kgm).norm();
  }
  return r;
}

inline std::vector<SectorResidual> sector_residuals(const StringModel& model, const SubspaceBasis& kernel) {
  if (kernel.ambient_dim() != model.dim()) throw ShapeError("sector_residuals: kernel lives on a different space");
  std::vector<SectorResidual> out;
  for (Index v = 0; v < kernel.size(); ++v) out.push_back(sector_residual(model, kernel.vector(v)));
  return out;
}

}  // namespace dfslab
