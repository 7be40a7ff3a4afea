// Unit tests: opcore, states, spectral, symmetry, report.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dfslab/dfslab.hpp"
#include "dfslab/testing/oracles.hpp"

using namespace dfslab;
namespace oracle = dfslab::testing;

namespace {

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

Matrix diag(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index k = 0;
  for (double x : xs) v(k++) = x;
  return v.asDiagonal();
}

Matrix number_op(Index levels) {
  Matrix n = Matrix::Zero(levels, levels);
  for (Index k = 0; k < levels; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

}  // namespace

// ---------------------------------------------------------------- opcore

TEST(Opcore, TensorIdentity) { EXPECT_EQ(tensor(identity(2), identity(3)), identity(6)); }

TEST(Opcore, TensorMixedProduct) {
  CounterRng rng(1, "tensor");
  const Matrix a = random_complex(2, 2, rng), b = random_complex(2, 2, rng);
  const Matrix c = random_complex(2, 2, rng), d = random_complex(2, 2, rng);
  EXPECT_LT(max_abs(tensor(a, b) * tensor(c, d) - tensor(a * c, b * d)), 1e-14);
}

TEST(Opcore, TensorEntrywise) {
  const Matrix x = pauli_x(), d = diag({1, 2});
  const Matrix t = tensor(x, d);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j)
      for (Index k = 0; k < 2; ++k)
        for (Index l = 0; l < 2; ++l) EXPECT_EQ(t(2 * i + k, 2 * j + l), x(i, j) * d(k, l));
}

TEST(Opcore, TensorAssociative) {
  CounterRng rng(2, "assoc");
  // small integer entries: every product is exact, so the two groupings agree bitwise
  Matrix a(2, 2), b(3, 3), c(2, 2);
  for (Index k = 0; k < 4; ++k) a(k / 2, k % 2) = cplx(static_cast<double>(rng.next_u64() % 7) - 3.0, 1.0);
  for (Index k = 0; k < 9; ++k) b(k / 3, k % 3) = static_cast<double>(rng.next_u64() % 5);
  for (Index k = 0; k < 4; ++k) c(k / 2, k % 2) = cplx(0.0, static_cast<double>(rng.next_u64() % 3));
  EXPECT_EQ(tensor(tensor(a, b), c), tensor(a, tensor(b, c)));
  const Matrix x = random_complex(2, 2, rng), y = random_complex(3, 3, rng), z = random_complex(2, 2, rng);
  EXPECT_LT(max_abs(tensor(tensor(x, y), z) - tensor(x, tensor(y, z))), 1e-14);
}

TEST(Opcore, TensorBudget) { EXPECT_THROW(tensor(identity(64), identity(65)), BudgetError); }

TEST(Opcore, PauliCommutator) {
  EXPECT_LT(max_abs(commutator(pauli_x(), pauli_y()) - 2.0 * kI * pauli_z()), 1e-15);
  CounterRng rng(3, "comm");
  const Matrix a = random_complex(4, 4, rng);
  EXPECT_EQ(max_abs(commutator(a, a)), 0.0);
}

TEST(Opcore, TwoPointDiracCommutator) {
  const cplx lambda(0.3, -1.2);
  const Matrix d = two_point_dirac(lambda);
  const Matrix c = diag({2.5, -0.5});
  Matrix expected(2, 2);
  expected << 0.0, -std::conj(lambda), lambda, 0.0;
  EXPECT_LT(max_abs(commutator(d, c) - (2.5 - (-0.5)) * expected), 1e-14);
}

TEST(Opcore, OperatorNorm) {
  EXPECT_NEAR(operator_norm(pauli_x()), 1.0, 1e-15);
  EXPECT_NEAR(operator_norm(diag({3, -4})), 4.0, 1e-15);
  CounterRng rng(4, "norm");
  const Matrix a = random_complex(5, 5, rng);
  EXPECT_NEAR(operator_norm(a), oracle::power_iteration_norm(a), 1e-10);
  const Matrix u = random_unitary(5, rng), v = random_unitary(5, rng);
  EXPECT_NEAR(operator_norm(u * a * v), operator_norm(a), 1e-10 * operator_norm(a));
}

TEST(Opcore, EigHermitian) {
  const auto e = eig_hermitian(diag({2, 1, 3}));
  EXPECT_NEAR(e.values(0), 1.0, 1e-15);
  EXPECT_NEAR(e.values(1), 2.0, 1e-15);
  EXPECT_NEAR(e.values(2), 3.0, 1e-15);
  const auto ex = eig_hermitian(pauli_x());
  EXPECT_NEAR(ex.values(0), -1.0, 1e-15);
  EXPECT_NEAR(ex.values(1), 1.0, 1e-15);
  CounterRng rng(5, "eig");
  const Matrix h = random_hermitian(6, rng);
  EXPECT_LT(max_abs(eig_hermitian(h).reconstruct() - h), 1e-10);
}

TEST(Opcore, EigPhaseConvention) {
  CounterRng rng(6, "phase");
  const Matrix v = eig_hermitian(random_hermitian(5, rng)).vectors.columns();
  for (Index c = 0; c < v.cols(); ++c) {
    Index arg = 0;
    for (Index r = 1; r < v.rows(); ++r)
      if (std::abs(v(r, c)) > std::abs(v(arg, c)) + 1e-12) arg = r;
    EXPECT_EQ(v(arg, c).imag(), 0.0);
    EXPECT_GT(v(arg, c).real(), 0.0);
  }
}

TEST(Opcore, NonHermitianRejected) { EXPECT_THROW(eig_hermitian(Matrix{{0.0, 1.0}, {0.0, 0.0}}), DomainError); }

TEST(Opcore, KernelBasis) {
  const auto k = kernel_basis(diag({1, 0, -1}));
  ASSERT_EQ(k.size(), 1);
  EXPECT_NEAR(std::abs(k.columns()(1, 0)), 1.0, 1e-14);
  CounterRng rng(7, "kernel");
  EXPECT_TRUE(kernel_basis(random_unitary(4, rng)).empty());
  const Matrix a = random_complex(5, 3, rng) * random_complex(3, 5, rng);
  const auto k2 = kernel_basis(a);
  EXPECT_EQ(k2.size(), 2);
  const double smax = operator_norm(a);
  for (Index c = 0; c < k2.size(); ++c) EXPECT_LE((a * k2.vector(c)).norm(), 1e-10 * smax * std::sqrt(5.0));
}

TEST(Opcore, CommutantBasis) {
  EXPECT_EQ(commutant_basis({identity(3)}, 3).size(), 9u);
  EXPECT_EQ(commutant_basis({pauli_x(), pauli_z()}, 2).size(), 1u);
  const auto c = commutant_basis({two_point_dirac(kI)}, 2);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_LT(c.projection_residual(identity(2)), 1e-12);
  EXPECT_LT(c.projection_residual(two_point_dirac(kI)), 1e-12);
}

TEST(Opcore, CommutantClosedUnderAdjoint) {
  CounterRng rng(8, "adj");
  const Matrix u = random_unitary(4, rng);
  const Matrix h = u * diag({1, 1, 2, 3}) * u.adjoint();
  const auto c = commutant_basis({h}, 4);
  EXPECT_EQ(c.size(), 6u);
  for (const auto& x : c.elements()) EXPECT_LT(c.projection_residual(x.adjoint()), 1e-10);
}

TEST(Opcore, SchurIrreducible) {
  CounterRng rng(9, "schur");
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix u = random_unitary(2, rng);
    EXPECT_EQ(commutant_basis({Matrix(u * pauli_x() * u.adjoint()), Matrix(u * pauli_z() * u.adjoint())}, 2).size(), 1u);
  }
}

TEST(Opcore, UnitaryExp) {
  EXPECT_LT(max_abs(unitary_exp(Matrix::Zero(3, 3)) - identity(3)), 1e-15);
  const Matrix u = unitary_exp(std::numbers::pi * number_op(5));
  EXPECT_LT(max_abs(u - diag({1, -1, 1, -1, 1})), 1e-14);
  CounterRng rng(10, "uexp");
  const Matrix v = unitary_exp(random_hermitian(6, rng));
  EXPECT_LT(max_abs(v.adjoint() * v - identity(6)), 1e-12);
}

TEST(Opcore, ShapeErrors) {
  EXPECT_THROW(commutator(identity(2), identity(3)), ShapeError);
  EXPECT_THROW(SubspaceBasis(3, Matrix::Ones(3, 1)), DomainError);
}

// ---------------------------------------------------------------- states

TEST(States, BasisStates) {
  EXPECT_EQ(pure_state(basis_vector(2, 0)).matrix(), diag({1, 0}));
  EXPECT_EQ(pure_state(basis_vector(2, 1)).matrix(), diag({0, 1}));
  CounterRng rng(11, "pure");
  const auto rho = pure_state(random_unit_vector(4, rng));
  EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-14);
  EXPECT_TRUE(rho.is_pure());
  EXPECT_FALSE(maximally_mixed(3).is_pure());
}

TEST(States, Validation) {
  EXPECT_THROW(DensityMatrix(diag({0.5, 0.6})), DomainError);
  EXPECT_THROW(DensityMatrix(diag({1.5, -0.5})), DomainError);
  EXPECT_THROW(DensityMatrix(Matrix{{0.5, 1.0}, {0.0, 0.5}}), DomainError);
  EXPECT_THROW(pure_state(Vector::Zero(3)), DomainError);
}

TEST(States, Expectation) {
  CounterRng rng(12, "expect");
  const Matrix a = random_complex(2, 2, rng);
  const StateFunctional psi0(pure_state(basis_vector(2, 0))), psi1(pure_state(basis_vector(2, 1)));
  EXPECT_LT(std::abs(psi0(a) - a(0, 0)), 1e-15);
  EXPECT_LT(std::abs(psi1(a) - a(1, 1)), 1e-15);
  EXPECT_LT(std::abs(psi0(identity(2)) - 1.0), 1e-15);
  const StateFunctional mixed(DensityMatrix(random_density_matrix(3, rng)));
  const Matrix b = random_complex(3, 3, rng), c = random_complex(3, 3, rng);
  EXPECT_LT(std::abs(mixed(b.adjoint()) - std::conj(mixed(b))), 1e-14);
  EXPECT_LT(std::abs(mixed(2.0 * b + c) - (2.0 * mixed(b) + mixed(c))), 1e-13);
}

TEST(States, EncodeTwoPoint) {
  Matrix at(2, 2);
  at << 3.0, 0.0, kI, 1.0;
  const auto enc = encode_two_point(at);
  Matrix a0(2, 2);
  a0 << 3.0, -kI, kI, 3.0;
  EXPECT_LT(max_abs(enc.a0 - a0), 1e-15);
  const auto id = encode_two_point(identity(2));
  EXPECT_EQ(id.a0, identity(2));
  EXPECT_EQ(id.a1, identity(2));
  const StateFunctional tilde(maximally_mixed(2));
  EXPECT_LT(std::abs(tilde(enc.a0) - 3.0), 1e-15);
}

TEST(States, PartialTrace) {
  CounterRng rng(13, "ptrace");
  const Matrix rs = random_density_matrix(2, rng), re = random_density_matrix(3, rng);
  const DensityMatrix prod(tensor(rs, re), {2, 3});
  EXPECT_LT(max_abs(partial_trace(prod, {0}).matrix() - rs), 1e-14);
  EXPECT_LT(max_abs(partial_trace(prod, {1}).matrix() - re), 1e-14);
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  EXPECT_LT(max_abs(partial_trace(pure_state(bell, {2, 2}), {0}).matrix() - identity(2) / 2.0), 1e-15);
  const DensityMatrix any(random_density_matrix(6, rng), {2, 3});
  const auto red = partial_trace(any, {1});
  EXPECT_NEAR(red.matrix().trace().real(), 1.0, 1e-12);
  const auto red2 = partial_trace(red.with_dims({3}), {0});
  EXPECT_LT(max_abs(red2.matrix() - red.matrix()), 1e-15);
}

TEST(States, Fidelity) {
  CounterRng rng(14, "fid");
  const DensityMatrix rho(random_density_matrix(3, rng)), sigma(random_density_matrix(3, rng));
  EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-10);
  EXPECT_NEAR(fidelity(pure_state(basis_vector(3, 0)), pure_state(basis_vector(3, 2))), 0.0, 1e-12);
  const Vector psi = random_unit_vector(3, rng);
  EXPECT_NEAR(fidelity(pure_state(psi), rho), (psi.adjoint() * rho.matrix() * psi)(0, 0).real(), 1e-12);
  EXPECT_NEAR(fidelity(rho, sigma), fidelity(sigma, rho), 1e-10);
  const Matrix u = random_unitary(3, rng);
  EXPECT_NEAR(fidelity(DensityMatrix(u * rho.matrix() * u.adjoint()), DensityMatrix(u * sigma.matrix() * u.adjoint())),
              fidelity(rho, sigma), 1e-10);
}

// ---------------------------------------------------------------- spectral

TEST(Spectral, TwoPointTriple) {
  EXPECT_EQ(make_two_point_triple(1.0).dirac(), pauli_x());
  const auto t = make_two_point_triple(kI);
  EXPECT_LT(max_abs(t.dirac() - pauli_y()), 1e-15);
  EXPECT_THROW(make_two_point_triple(0.0), DomainError);
}

TEST(Spectral, DiagonalTriple) {
  const Matrix d2 = two_point_dirac({0.4, 0.3});
  EXPECT_EQ(make_diagonal_triple(2, d2).dirac(), make_two_point_triple({0.4, 0.3}).dirac());
  Matrix path = Matrix::Zero(3, 3);
  path(0, 1) = path(1, 0) = 1.0;
  path(1, 2) = path(2, 1) = 2.0;
  EXPECT_NO_THROW(make_diagonal_triple(3, path));
  EXPECT_THROW(make_diagonal_triple(3, Matrix{{0.0, 1.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}), DomainError);
}

TEST(Spectral, TwoPointDistance) {
  const StateFunctional a(pure_state(basis_vector(2, 0))), b(pure_state(basis_vector(2, 1)));
  for (cplx lambda : {cplx(1.0), cplx(0.0, 2.0), cplx(0.5, 0.5)}) {
    const auto r = connes_distance(make_two_point_triple(lambda), a, b);
    EXPECT_FALSE(r.unbounded);
    EXPECT_NEAR(r.value, 1.0 / std::abs(lambda), 1e-6);
    EXPECT_NEAR(r.constraint_norm, 1.0, 1e-8);
  }
}

TEST(Spectral, DiagonalDiracUnbounded) {
  const StateFunctional a(pure_state(basis_vector(3, 0))), b(pure_state(basis_vector(3, 2)));
  const auto r = connes_distance(make_diagonal_triple(3, diag({1, 2, 3})), a, b);
  EXPECT_TRUE(r.unbounded);
  EXPECT_TRUE(std::isinf(r.value));
}

TEST(Spectral, SelfDistanceZero) {
  const StateFunctional a(pure_state(basis_vector(2, 0)));
  EXPECT_EQ(connes_distance(make_two_point_triple(1.0), a, a).value, 0.0);
}

TEST(Spectral, ThreePointProperties) {
  CounterRng rng(15, "three");
  for (int trial = 0; trial < 3; ++trial) {
    Matrix d = random_hermitian(3, rng);
    for (Index k = 0; k < 3; ++k) d(k, k) = 0.0;
    const auto t = make_diagonal_triple(3, d);
    const StateFunctional s0(pure_state(basis_vector(3, 0))), s1(pure_state(basis_vector(3, 1))),
        s2(pure_state(basis_vector(3, 2)));
    const double d01 = connes_distance(t, s0, s1).value, d10 = connes_distance(t, s1, s0).value;
    const double d12 = connes_distance(t, s1, s2).value, d02 = connes_distance(t, s0, s2).value;
    EXPECT_LE(std::abs(d01 - d10), 2e-6);
    EXPECT_LE(d02, d01 + d12 + 3e-6);
    const double scaled = connes_distance(make_diagonal_triple(3, 2.5 * d), s0, s1).value;
    EXPECT_NEAR(scaled, d01 / 2.5, 1e-6);
    RealVector p = RealVector::Unit(3, 0), q = RealVector::Unit(3, 1);
    EXPECT_NEAR(d01, oracle::connes_search_oracle(d, p, q, 2000, rng), 1e-3);
  }
}

// ---------------------------------------------------------------- symmetry

TEST(Symmetry, GroupOrders) {
  EXPECT_EQ(close_group({std::numbers::pi * diag({0, 1})}).order(), 2u);
  const Matrix half = std::numbers::pi * pauli_z() / 2.0;
  EXPECT_EQ(close_group({half}).order(), 4u);
  const Matrix n = number_op(3);
  EXPECT_EQ(close_group({Matrix(std::numbers::pi * tensor(n, identity(3))), Matrix(std::numbers::pi * tensor(identity(3), n))}).order(), 4u);
}

TEST(Symmetry, NonClosure) {
  const Matrix irrational = diag({0.0, std::sqrt(2.0)});
  EXPECT_THROW(close_group({irrational}, 0, 100), NonClosureError);
}

TEST(Symmetry, Projectors) {
  EXPECT_LT(max_abs(invariant_projector(close_group({Matrix::Zero(3, 3)})).op() - identity(3)), 1e-15);
  const auto rep = close_group({Matrix(std::numbers::pi * number_op(5))});
  const auto pr = invariant_projector(rep);
  EXPECT_EQ(pr.rank(), 3);
  EXPECT_LT(max_abs(pr.op() - diag({1, 0, 1, 0, 1})), 1e-14);
  for (const auto& u : rep.elements()) EXPECT_LT(max_abs(u * pr.op() - pr.op()), 1e-12);

  const Matrix n = number_op(3);
  const std::vector<Matrix> gens{std::numbers::pi * tensor(n, identity(3)), std::numbers::pi * tensor(identity(3), n)};
  const Matrix factor = 0.5 * (identity(3) + unitary_exp(std::numbers::pi * n));
  const Matrix direct = invariant_projector(close_group(gens)).op();
  EXPECT_LT(max_abs(direct - tensor(factor, factor)), 1e-13);
  std::vector<Matrix> units;
  for (const auto& g : gens) units.push_back(unitary_exp(g));
  EXPECT_LT(max_abs(projector_by_involutions(units, 9) - direct), 1e-13);
}

TEST(Symmetry, JointKernel) {
  const auto k = joint_kernel({Matrix(std::numbers::pi * number_op(5))});
  ASSERT_EQ(k.size(), 1);
  EXPECT_NEAR(std::abs(k.columns()(0, 0)), 1.0, 1e-14);
  EXPECT_EQ(joint_kernel({Matrix::Zero(4, 4)}).size(), 4);
  const Matrix n = number_op(3);
  const auto k2 = joint_kernel({Matrix(std::numbers::pi * tensor(n, identity(3))), Matrix(std::numbers::pi * tensor(identity(3), n))});
  ASSERT_EQ(k2.size(), 1);
  EXPECT_NEAR(std::abs(k2.columns()(0, 0)), 1.0, 1e-14);
  const auto rep = close_group({Matrix(std::numbers::pi * number_op(5))});
  const SubspaceBasis image = kernel_basis(invariant_projector(rep).op() - identity(5));
  EXPECT_LT(image.containment_residual(k), 1e-10);
}

TEST(Symmetry, SymmetrizeOperator) {
  CounterRng rng(16, "symop");
  const auto rep = close_group({Matrix(std::numbers::pi * number_op(4))});
  const Matrix inv = diag({1, 2, 3, 4});
  EXPECT_LT(max_abs(symmetrize_operator(rep, inv) - inv), 1e-13);
  const Matrix h = random_hermitian(4, rng);
  const Matrix u = unitary_exp(std::numbers::pi * number_op(4));
  const Matrix s = symmetrize_operator(rep, h);
  EXPECT_LT(max_abs(s - 0.5 * (h + u.adjoint() * h * u)), 1e-13);
  EXPECT_LT(max_abs(symmetrize_operator(rep, s) - s), 1e-12);
  EXPECT_LT(max_abs(s - s.adjoint()), 1e-12);
  EXPECT_NEAR(s.trace().real(), h.trace().real(), 1e-12);
}

TEST(Symmetry, InvariantSubalgebra) {
  EXPECT_EQ(invariant_subalgebra(close_group({Matrix::Zero(2, 2)})).size(), 4u);
  // the commutant of π·n on 3 levels: diagonal operators
  const auto rep = close_group({Matrix(std::numbers::pi * number_op(3))});
  const auto diag_alg = invariant_subalgebra(rep);
  EXPECT_EQ(diag_alg.size(), 3u);
  // the unitaries only see parity: even block 2x2 plus odd block 1x1
  EXPECT_EQ(unitary_commutant(rep).size(), 5u);
  for (const auto& x : diag_alg.elements())
    EXPECT_LT(max_abs(commutator(x, std::numbers::pi * number_op(3))), 1e-10);

  const auto qubit = close_group({Matrix(std::numbers::pi * (identity(2) - two_point_dirac(kI)) / 2.0)});
  EXPECT_EQ(qubit.order(), 2u);
  const auto alg = invariant_subalgebra(qubit);
  ASSERT_EQ(alg.size(), 2u);
  EXPECT_LT(max_abs(commutator(alg[0], alg[1])), 1e-12);
}

// ---------------------------------------------------------------- report

TEST(Report, CanonicalJson) {
  const json j = {{"b", 1.5}, {"a", {{"z", 2}, {"y", std::nan("")}}}, {"c", -0.0}};
  const std::string s = canonical_json(j);
  EXPECT_EQ(s,
            "{\n  \"a\": {\n    \"y\": \"nan\",\n    \"z\": 2\n  },\n  \"b\": 1.500000000000e+00,\n  \"c\": "
            "0.000000000000e+00\n}\n");
  EXPECT_EQ(s.find('\r'), std::string::npos);
}

TEST(Report, ChecksAndFormats) {
  Report r;
  r.kind = "demo";
  r.checks.push_back(make_check("a", 1e-13, "<=", 1e-12));
  r.checks.push_back(make_check("b", std::nan(""), "<=", 1.0));
  r.checks.push_back(make_timing_check("t", 12.0, 1000.0));
  EXPECT_FALSE(r.pass());
  EXPECT_FALSE(r.checks[1].pass);
  EXPECT_EQ(report_to_json(r)["checks"][2]["value"], nullptr);
  EXPECT_EQ(emit_json(r), emit_json(r));
  const std::string csv = emit_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_NE(csv.find("\r\n"), std::string::npos);
  const std::string md = emit_markdown(r);
  EXPECT_NE(md.find("| a |"), std::string::npos);
  EXPECT_NE(md.find("| t |"), std::string::npos);
}

TEST(Random, CounterRngStreams) {
  CounterRng a(5, "x"), b(5, "x"), c(5, "y");
  const auto va = a.next_u64();
  EXPECT_EQ(va, b.next_u64());
  EXPECT_NE(va, c.next_u64());
  CounterRng d(6, "spd");
  const RealMatrix s = random_spd(3, d);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<RealMatrix>(s).eigenvalues().minCoeff(), 0.0);
  const RealMatrix x = random_antisymmetric(3, d);
  EXPECT_EQ((x + x.transpose()).cwiseAbs().maxCoeff(), 0.0);
}
