// symmetry.hpp — finite group representations, invariant projectors, joint
// kernels and symmetrized operators

#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "dfslab/opcore.hpp"

namespace dfslab {

inline constexpr std::size_t kDefaultMaxOrder = 10000;
inline constexpr double kGroupMatchTol = 1e-8;

class GroupRep {
 public:
  GroupRep(Index dim, std::vector<Matrix> generators, std::vector<Matrix> elements)
      : dim_(dim), generators_(std::move(generators)), elements_(std::move(elements)) {}

  Index dim() const { return dim_; }
  const std::vector<Matrix>& generators() const { return generators_; }
  const std::vector<Matrix>& elements() const { return elements_; }
  std::size_t order() const { return elements_.size(); }

 private:
  Index dim_;
  std::vector<Matrix> generators_;
  std::vector<Matrix> elements_;
};

namespace detail {

inline std::vector<long long> rounded_key(const Matrix& u) {
  std::vector<long long> key;
  key.reserve(static_cast<std::size_t>(2 * u.size()));
  for (Index c = 0; c < u.cols(); ++c)
    for (Index r = 0; r < u.rows(); ++r) {
      key.push_back(std::llround(u(r, c).real() / kGroupMatchTol));
      key.push_back(std::llround(u(r, c).imag() / kGroupMatchTol));
    }
  return key;
}

inline void check_generators(const std::vector<Matrix>& gens, const char* what) {
  if (gens.empty()) return;
  const Index n = gens.front().rows();
  for (const auto& g : gens) {
    require_square(g, what);
    if (g.rows() != n) throw ShapeError(std::string(what) + ": generators have different dimensions");
    require_hermitian(g, what);
  }
}

}  // namespace detail

// Breadth-first closure of {exp(i Theta)} under multiplication. Elements are
// deduplicated by hashing entries rounded to 1e-8; hash hits are confirmed
// entrywise.
inline GroupRep close_group(const std::vector<Matrix>& generators, Index dim = 0,
                            std::size_t max_order = kDefaultMaxOrder) {
  detail::check_generators(generators, "close_group");
  if (!generators.empty()) dim = generators.front().rows();
  if (dim <= 0) throw ShapeError("close_group: dimension required for an empty generator list");

  std::vector<Matrix> gens_u;
  for (const auto& g : generators) gens_u.push_back(unitary_exp(g));

  std::vector<Matrix> elements{identity(dim)};
  std::map<std::vector<long long>, std::vector<std::size_t>> seen;
  seen[detail::rounded_key(elements[0])].push_back(0);
  std::deque<std::size_t> queue{0};

  auto find = [&](const Matrix& u) {
    auto it = seen.find(detail::rounded_key(u));
    if (it != seen.end())
      for (auto idx : it->second)
        if ((elements[idx] - u).cwiseAbs().maxCoeff() <= kGroupMatchTol) return true;
    return false;
  };

  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    for (const auto& g : gens_u) {
      Matrix prod = elements[cur] * g;
      if (find(prod)) continue;
      if (elements.size() >= max_order) {
        throw NonClosureError("close_group: closure exceeds max_order " + std::to_string(max_order));
      }
      seen[detail::rounded_key(prod)].push_back(elements.size());
      elements.push_back(std::move(prod));
      queue.push_back(elements.size() - 1);
    }
  }
  return GroupRep(dim, generators, std::move(elements));
}

class InvariantProjector {
 public:
  explicit InvariantProjector(Matrix op) : op_(std::move(op)) {}
  const Matrix& op() const { return op_; }
  Index dim() const { return op_.rows(); }
  Index rank() const { return static_cast<Index>(std::llround(op_.trace().real())); }

 private:
  Matrix op_;
};

// Pi = (1/|G|) sum_g U_g, then symmetrised to remove rounding asymmetry.
inline InvariantProjector invariant_projector(const GroupRep& rep) {
  Matrix sum = Matrix::Zero(rep.dim(), rep.dim());
  for (const auto& u : rep.elements()) sum += u;
  sum /= static_cast<double>(rep.order());
  return InvariantProjector(0.5 * (sum + sum.adjoint()));
}

// Common kernel of the generators: the kernel of the stacked matrix [Θ_1; Θ_2; ...].
inline SubspaceBasis joint_kernel(const std::vector<Matrix>& generators, Index dim = 0) {
  detail::check_generators(generators, "joint_kernel");
  if (generators.empty()) {
    if (dim <= 0) throw ShapeError("joint_kernel: dimension required for an empty generator list");
    return SubspaceBasis(dim, identity(dim));
  }
  const Index n = generators.front().rows();
  Matrix stacked(n * static_cast<Index>(generators.size()), n);
  for (std::size_t k = 0; k < generators.size(); ++k) stacked.middleRows(static_cast<Index>(k) * n, n) = generators[k];
  return kernel_basis(stacked);
}

inline Matrix symmetrize_operator(const GroupRep& rep, const Matrix& h) {
  require_square(h, "symmetrize_operator");
  if (h.rows() != rep.dim()) throw ShapeError("symmetrize_operator: dimension mismatch");
  Matrix sum = Matrix::Zero(h.rows(), h.cols());
  for (const auto& u : rep.elements()) sum += u.adjoint() * h * u;
  return sum / static_cast<double>(rep.order());
}

// Commutant of the generator set {Θ_g}.
inline OperatorBasis invariant_subalgebra(const GroupRep& rep) {
  return commutant_basis(std::span<const Matrix>(rep.generators()), rep.dim());
}

// Commutant of the group unitaries themselves; contains invariant_subalgebra
// and is larger whenever a generator has degenerate exponentials (e.g. the
// eigenvalues 0 and 2π of π·n).
inline OperatorBasis unitary_commutant(const GroupRep& rep) {
  std::vector<Matrix> ops;
  for (const auto& g : rep.generators()) ops.push_back(unitary_exp(g));
  if (ops.empty()) return full_operator_basis(rep.dim());
  // Hermitian combinations so the basis matches the Hermitian convention
  std::vector<Matrix> herm;
  for (const auto& u : ops) {
    herm.push_back(0.5 * (u + u.adjoint()));
    herm.push_back((u - u.adjoint()) / (2.0 * kI));
  }
  return commutant_basis(std::span<const Matrix>(herm), rep.dim());
}

// Fast path for groups generated by commuting involutions (e.g. (Z2)^N
// parities): the group average factorizes into successive two-term averages,
// so 2^N conjugations become N.
inline Matrix symmetrize_by_involutions(const std::vector<Matrix>& involutions, const Matrix& h) {
  require_square(h, "symmetrize_by_involutions");
  Matrix out = h;
  for (const auto& u : involutions) {
    require_same_dim(u, h, "symmetrize_by_involutions");
    out = 0.5 * (out + u.adjoint() * out * u);
  }
  return out;
}

inline Matrix projector_by_involutions(const std::vector<Matrix>& involutions, Index dim) {
  Matrix p = identity(dim);
  for (const auto& u : involutions) {
    if (u.rows() != dim) throw ShapeError("projector_by_involutions: dimension mismatch");
    p = p * (0.5 * (identity(dim) + u));
  }
  return 0.5 * (p + p.adjoint());
}

}  // namespace dfslab
