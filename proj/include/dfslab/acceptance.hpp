// acceptance.hpp — the numbered acceptance criteria, shared by the test
// binary and `dfs-lab selftest`
//
// Every criterion draws its random inputs from its own named stream, so the
// criteria can run in any order (or alone) and still see the same data.

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dfslab/dynamics.hpp"
#include "dfslab/fock.hpp"
#include "dfslab/nctorus.hpp"
#include "dfslab/random.hpp"
#include "dfslab/report.hpp"
#include "dfslab/spectral.hpp"
#include "dfslab/states.hpp"
#include "dfslab/symmetry.hpp"
#include "dfslab/testing/oracles.hpp"

namespace dfslab::acceptance {

inline constexpr std::uint64_t kDefaultSeed = 20240601;

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<Check> checks;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
};

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string cname(int id, const std::string& what) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "c%02d.", id);
  return buf + what;
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Entrywise max over elements whose listed modes are all below n_max.
inline double interior_max(const Matrix& m, const Matrix& mask) {
  return max_abs(mask * m * mask);
}

}  // namespace detail

inline CriterionResult criterion_01(std::uint64_t) {
  CriterionResult r{1, "two-point Connes distance equals 1/|lambda|", {}};
  const StateFunctional a(pure_state(basis_vector(2, 0))), b(pure_state(basis_vector(2, 1)));
  const std::pair<const char*, cplx> cases[] = {{"lambda_1", {1.0, 0.0}}, {"lambda_2i", {0.0, 2.0}},
                                                {"lambda_half_half", {0.5, 0.5}}};
  for (const auto& [label, lambda] : cases) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = connes_distance(make_two_point_triple(lambda), a, b);
    const double ms = detail::elapsed_ms(t0);
    r.checks.push_back(make_check(detail::cname(1, std::string(label) + ".error"),
                                  std::abs(res.value - 1.0 / std::abs(lambda)), "<=", 1e-6));
    r.checks.push_back(make_timing_check(detail::cname(1, std::string(label) + ".solve_ms"), ms, 1000.0));
  }
  return r;
}

inline CriterionResult criterion_02(std::uint64_t seed) {
  CriterionResult r{2, "3-point distances match the random-search oracle", {}};
  CounterRng rng(seed, "c02");
  double worst = 0.0, worst_constraint = 0.0;
  for (int k = 0; k < 25; ++k) {
    // path-graph Dirac with random complex couplings plus a random diagonal
    Matrix d = Matrix::Zero(3, 3);
    for (Index i = 0; i < 3; ++i) d(i, i) = rng.normal();
    for (Index i = 0; i < 2; ++i) {
      d(i, i + 1) = cplx(rng.normal(), rng.normal());
      d(i + 1, i) = std::conj(d(i, i + 1));
    }
    if (k % 2 == 1) {
      d(0, 2) = cplx(rng.normal(), rng.normal());
      d(2, 0) = std::conj(d(0, 2));
    }
    RealVector p(3), q(3);
    for (Index i = 0; i < 3; ++i) {
      p(i) = rng.uniform(0.05, 1.0);
      q(i) = rng.uniform(0.05, 1.0);
    }
    p /= p.sum();
    q /= q.sum();
    const StateFunctional sp(DensityMatrix(p.cast<cplx>().asDiagonal().toDenseMatrix()));
    const StateFunctional sq(DensityMatrix(q.cast<cplx>().asDiagonal().toDenseMatrix()));
    const auto res = connes_distance(make_diagonal_triple(3, d), sp, sq);
    CounterRng orng(seed, "c02.oracle." + std::to_string(k));
    const double oracle = testing::connes_search_oracle(d, p, q, 100000, orng);
    worst = std::max(worst, std::abs(res.value - oracle));
    worst_constraint = std::max(worst_constraint, res.constraint_norm);
  }
  r.checks.push_back(make_check(detail::cname(2, "max_abs_error_vs_oracle"), worst, "<=", 1e-3));
  r.checks.push_back(make_check(detail::cname(2, "max_constraint_norm"), worst_constraint, "<=", 1.0 + 1e-8));
  return r;
}

inline CriterionResult criterion_03(std::uint64_t) {
  CriterionResult r{3, "commutant of D_i is the abelian span of C0, C1", {}};
  const Matrix d = two_point_dirac(cplx(0.0, 1.0));
  const OperatorBasis comm = commutant_basis({d}, 2);
  Matrix c1(2, 2);
  c1 << 0.0, -kI, kI, 0.0;
  r.checks.push_back(make_check(detail::cname(3, "dimension"), static_cast<double>(comm.size()), "==", 2.0));
  r.checks.push_back(make_check(detail::cname(3, "c0_residual"), comm.projection_residual(identity(2)), "<", 1e-12));
  r.checks.push_back(make_check(detail::cname(3, "c1_residual"), comm.projection_residual(c1), "<", 1e-12));
  double abel = 0.0;
  for (std::size_t i = 0; i < comm.size(); ++i)
    for (std::size_t j = 0; j < comm.size(); ++j) abel = std::max(abel, operator_norm(commutator(comm[i], comm[j])));
  r.checks.push_back(make_check(detail::cname(3, "abelian_residual"), abel, "<", 1e-12));
  return r;
}

inline CriterionResult criterion_04(std::uint64_t seed) {
  CriterionResult r{4, "two-point encoding reproduces a11 and a22", {}};
  CounterRng rng(seed, "c04");
  const StateFunctional psi(maximally_mixed(2));
  double e0 = 0.0, e1 = 0.0;
  for (int k = 0; k < 100; ++k) {
    Matrix at = random_complex(2, 2, rng);
    at(0, 0) = rng.normal();
    at(1, 1) = rng.normal();
    const auto enc = encode_two_point(at);
    e0 = std::max(e0, std::abs(psi(enc.a0) - at(0, 0)));
    e1 = std::max(e1, std::abs(psi(enc.a1) - at(1, 1)));
  }
  r.checks.push_back(make_check(detail::cname(4, "a0_error"), e0, "<=", 1e-14));
  r.checks.push_back(make_check(detail::cname(4, "a1_error"), e1, "<=", 1e-14));
  return r;
}

inline CriterionResult criterion_05(std::uint64_t seed) {
  CriterionResult r{5, "parity symmetrization of the oscillator model", {}};
  CounterRng rng(seed, "c05");
  for (Index n_max : {3, 4}) {
    const std::string tag = "nmax" + std::to_string(n_max) + ".";
    Matrix k(1, 1), lam(1, 1), w(1, 1);
    k(0, 0) = rng.uniform(0.5, 2.0);
    lam(0, 0) = rng.uniform(0.5, 2.0);
    w(0, 0) = cplx(rng.normal(), rng.normal());
    const auto model = build_decoherence_model(k, lam, w, n_max);
    const auto gens = parity_generators(model);
    const GroupRep rep = close_group(gens);
    r.checks.push_back(make_check(detail::cname(5, tag + "pi_h_interaction"), operator_norm(symmetrize_operator(rep, model.H_I)), "<", 1e-12));
    const Matrix p = invariant_projector(rep).op();
    r.checks.push_back(make_check(detail::cname(5, tag + "projector_idempotent"), detail::max_abs(p * p - p), "<=", 1e-12));
    r.checks.push_back(make_check(detail::cname(5, tag + "projector_hermitian"), detail::max_abs(p - p.adjoint()), "<=", 1e-12));
    const SubspaceBasis ker = joint_kernel(gens);
    Matrix vac = Matrix::Zero(model.env_dim, 1);
    vac(0, 0) = 1.0;
    const SubspaceBasis expected(model.space.dim(), tensor(identity(model.system_dim), vac));
    r.checks.push_back(make_check(detail::cname(5, tag + "kernel_dimension"), static_cast<double>(ker.size()), "==",
                                  static_cast<double>(n_max + 1)));
    r.checks.push_back(make_check(detail::cname(5, tag + "kernel_in_sys_vacuum"), expected.containment_residual(ker), "<=", 1e-10));
    r.checks.push_back(make_check(detail::cname(5, tag + "sys_vacuum_in_kernel"), ker.containment_residual(expected), "<=", 1e-10));
  }
  return r;
}

inline std::vector<double> coherence_times() {
  std::vector<double> t;
  for (int k = 0; k <= 40; ++k) t.push_back(0.5 * k);
  return t;
}

inline CriterionResult criterion_06(std::uint64_t) {
  CriterionResult r{6, "symmetrized evolution keeps the code; full evolution leaks", {}};
  Matrix k(1, 1), lam(1, 1), w(1, 1);
  k << 1.0;
  lam << 1.0;
  w << 0.3;
  const auto model = build_decoherence_model(k, lam, w, 3);
  const SubspaceBasis code(model.system_dim, identity(model.system_dim));
  Vector psi = Vector::Zero(model.space.dim());
  psi(1 * model.env_dim + 0) = 1.0;  // |1>_S ⊗ |0>_E
  const auto res = coherence_experiment(model, code, pure_state(psi), coherence_times());
  r.checks.push_back(make_check(detail::cname(6, "symmetrized_max_leakage"), res.symmetrized.max_leakage(), "<=", 1e-10));
  r.checks.push_back(make_check(detail::cname(6, "full_max_leakage"), res.full.max_leakage(), ">", 1e-4));
  return r;
}

inline CriterionResult criterion_07(std::uint64_t seed) {
  CriterionResult r{7, "Clifford anticommutators", {}};
  CounterRng rng(seed, "c07");
  double pp = 0.0, mm = 0.0, pm = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Index n = 1 + k % 3;
    const RealMatrix eta = random_spd(n, rng);
    const CliffordPair c = clifford_pair(eta);
    const Index d = c.rep_dim();
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
        const Matrix gp = c.gamma_plus[ui] * c.gamma_plus[uj] + c.gamma_plus[uj] * c.gamma_plus[ui];
        const Matrix gm = c.gamma_minus[ui] * c.gamma_minus[uj] + c.gamma_minus[uj] * c.gamma_minus[ui];
        const Matrix gx = c.gamma_plus[ui] * c.gamma_minus[uj] + c.gamma_minus[uj] * c.gamma_plus[ui];
        pp = std::max(pp, detail::max_abs(gp - 2.0 * eta(i, j) * identity(d)));
        mm = std::max(mm, detail::max_abs(gm + 2.0 * eta(i, j) * identity(d)));
        pm = std::max(pm, detail::max_abs(gx));
      }
  }
  r.checks.push_back(make_check(detail::cname(7, "plus_plus"), pp, "<=", 1e-12));
  r.checks.push_back(make_check(detail::cname(7, "minus_minus"), mm, "<=", 1e-12));
  r.checks.push_back(make_check(detail::cname(7, "plus_minus"), pm, "<=", 1e-12));
  return r;
}

inline CriterionResult criterion_08(std::uint64_t seed) {
  CriterionResult r{8, "Heisenberg-Weyl commutators on interior elements", {}};
  CounterRng rng(seed, "c08");
  const Index n = 2, n_max = 3;
  const RealMatrix eta = random_spd(n, rng);
  std::vector<std::string> labels;
  for (int lv = 1; lv <= 2; ++lv)
    for (Index a = 0; a < n; ++a) labels.push_back("b" + std::to_string(lv) + "_" + std::to_string(a));
  const FockSpace space(n_max, labels);
  std::vector<std::vector<Matrix>> e;
  for (int lv = 1; lv <= 2; ++lv)
    e.push_back(hw_mode(space, {"b" + std::to_string(lv) + "_0", "b" + std::to_string(lv) + "_1"}, lv, eta));
  std::vector<std::size_t> all_modes(labels.size());
  for (std::size_t k = 0; k < all_modes.size(); ++k) all_modes[k] = k;
  const Matrix mask = space.interior_mask(all_modes);
  double worst = 0.0;
  for (int nl = 1; nl <= 2; ++nl)
    for (int ml = 1; ml <= 2; ++ml)
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
          const Matrix& ei = e[static_cast<std::size_t>(nl - 1)][static_cast<std::size_t>(i)];
          const Matrix& ej = e[static_cast<std::size_t>(ml - 1)][static_cast<std::size_t>(j)];
          const double expect = nl == ml ? nl * eta(i, j) : 0.0;
          const Matrix c = commutator(ei, ej.adjoint()) - expect * identity(space.dim());
          worst = std::max(worst, detail::interior_max(c, mask));
        }
  r.checks.push_back(make_check(detail::cname(8, "interior_residual"), worst, "<=", 1e-12));
  return r;
}

inline CriterionResult criterion_09(std::uint64_t seed) {
  CriterionResult r{9, "normal modes of (eta_lower, eta_upper)", {}};
  CounterRng rng(seed, "c09");
  double unit = 0.0, swap = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Index n = 1 + k % 4;
    const Background b(random_spd(n, rng));
    const RealVector f = normal_modes(b.eta_lower(), b.eta());
    const RealVector g = normal_modes(b.eta(), b.eta_lower());
    unit = std::max(unit, (f - RealVector::Ones(n)).cwiseAbs().maxCoeff());
    swap = std::max(swap, (f - g).cwiseAbs().maxCoeff());
    // generic pair: swap invariance holds beyond the dual structure too
    const RealMatrix a = random_spd(n, rng), c = random_spd(n, rng);
    swap = std::max(swap, (normal_modes(a, c) - normal_modes(c, a)).cwiseAbs().maxCoeff());
  }
  r.checks.push_back(make_check(detail::cname(9, "frequencies_unit"), unit, "<=", 1e-10));
  r.checks.push_back(make_check(detail::cname(9, "swap_invariance"), swap, "<=", 1e-10));
  return r;
}

inline CriterionResult criterion_10(std::uint64_t seed) {
  CriterionResult r{10, "dual metric", {}};
  CounterRng rng(seed, "c10");
  double inv = 0.0, sym = 0.0, oracle = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Index n = 1 + k % 3;
    const RealMatrix eta = random_spd(n, rng);
    const Background flat(eta);
    const RealMatrix dm = dual_metric(flat);
    inv = std::max(inv, detail::max_abs(dm - flat.eta_lower().inverse()));
    const Background b(eta, random_antisymmetric(n, rng));
    const RealMatrix dx = dual_metric(b);
    const RealMatrix raw = b.k_plus() * b.eta_lower() * b.k_minus();
    sym = std::max(sym, detail::max_abs(raw - raw.transpose()));
    oracle = std::max(oracle, detail::max_abs(dx - testing::dual_metric_loops(b.eta(), b.xi())));
  }
  r.checks.push_back(make_check(detail::cname(10, "zero_flux_inverse"), inv, "<=", 1e-12));
  r.checks.push_back(make_check(detail::cname(10, "symmetric"), sym, "<=", 1e-12));
  r.checks.push_back(make_check(detail::cname(10, "triple_product_oracle"), oracle, "<=", 1e-12));
  return r;
}

inline CriterionResult criterion_11(std::uint64_t seed) {
  CriterionResult r{11, "O(N,N;Z) generators, words and Narain invariance", {}};
  CounterRng rng(seed, "c11");
  long long form_failures = 0;
  for (Index n : {1, 2, 3}) {
    const auto gens = onn_generators(n);
    for (const auto& g : gens)
      if (!g.preserves_form()) ++form_failures;
    for (int w = 0; w < 100; ++w) {
      const auto len = rng.integer(1, 4);
      ONNElement word = ONNElement::identity(n);
      for (long long s = 0; s < len; ++s) word = word * gens[static_cast<std::size_t>(rng.integer(0, static_cast<long long>(gens.size()) - 1))];
      if (!word.preserves_form()) ++form_failures;
    }
  }
  r.checks.push_back(make_check(detail::cname(11, "form_failures"), static_cast<double>(form_failures), "==", 0.0));
  double relabel = 0.0, multiset = 0.0, mass = 0.0;
  for (Index n : {1, 2}) {
    const Background b(random_spd(n, rng), random_antisymmetric(n, rng, 0.7));
    for (const auto& g : onn_generators(n)) {
      const auto cmp = narain_invariance(g, b, 3);
      relabel = std::max(relabel, cmp.relabel_residual);
      const Background gb = apply_background(g, b);
      const auto e0 = testing::narain_energies(b.eta(), b.xi(), 3);
      // oracle: transformed energies over the image of the box
      const RealMatrix q = testing::charge_map(g.g, g.swap);
      const RealMatrix m1 = testing::narain_mass_matrix(gb.eta(), gb.xi());
      const RealMatrix m0 = testing::narain_mass_matrix(b.eta(), b.xi());
      mass = std::max(mass, detail::max_abs(q.transpose() * m1 * q - m0));
      std::vector<double> e1;
      for (const auto& c : charge_box(n, 3)) {
        RealVector z(2 * n);
        z << c.m.cast<double>(), c.w.cast<double>();
        const RealVector zt = q * z;
        e1.push_back(0.5 * zt.dot(m1 * zt));
      }
      std::sort(e1.begin(), e1.end());
      for (std::size_t k = 0; k < e0.size(); ++k) multiset = std::max(multiset, std::abs(e0[k] - e1[k]));
    }
  }
  r.checks.push_back(make_check(detail::cname(11, "narain_relabel_residual"), relabel, "<=", 1e-10));
  r.checks.push_back(make_check(detail::cname(11, "narain_multiset_oracle"), multiset, "<=", 1e-10));
  r.checks.push_back(make_check(detail::cname(11, "mass_matrix_oracle"), mass, "<=", 1e-10));
  return r;
}

inline CriterionResult criterion_12(std::uint64_t seed) {
  CriterionResult r{12, "clock-shift phases and flux antisymmetrization", {}};
  double phase = 0.0;
  for (long long n : {2, 3, 4, 5, 8}) {
    for (long long q = 1; q < std::max<long long>(n, 2); ++q) {
      IntMatrix qm(2, 2);
      qm << 0, q, -q, 0;
      const FluxMatrix f = FluxMatrix::from_rational(qm, n);
      phase = std::max(phase, phase_relation_residual(clock_shift_rep(f), f));
    }
  }
  r.checks.push_back(make_check(detail::cname(12, "phase_residual"), phase, "<=", 1e-13));
  CounterRng rng(seed, "c12");
  double sgn = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Index n = 2 + k % 3;
    const Background b(random_spd(n, rng), random_antisymmetric(n, rng));
    sgn = std::max(sgn, detail::max_abs(antisymmetrize_coupling(b).omega() - testing::sgn_flux_loops(b.eta(), b.xi())));
  }
  r.checks.push_back(make_check(detail::cname(12, "sgn_formula_mismatch"), sgn, "==", 0.0));
  return r;
}

inline CriterionResult criterion_13(std::uint64_t seed) {
  CriterionResult r{13, "duality substitution maps D to the dual-background D-bar", {}};
  CounterRng rng(seed, "c13");
  double coef = 0.0, op = 0.0, oracle = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Background b(random_spd(1, rng));
    const StringModel model = build_string_model(b, 2, 1);
    const auto rep = duality_substitution(model);
    coef = std::max(coef, rep.coefficient_residual);
    op = std::max(op, rep.operator_residual);
    const auto sub = testing::substituted_arrays_loops(b.eta(), b.xi());
    const auto tgt = testing::dual_target_arrays_loops(b.eta(), b.xi());
    for (int s = 0; s < 2; ++s) {
      oracle = std::max({oracle, detail::max_abs(sub.p[s] - tgt.p[s]), detail::max_abs(sub.x[s] - tgt.x[s]),
                         detail::max_abs(sub.e[s] - tgt.e[s]), detail::max_abs(rep.substituted[s].p - sub.p[s]),
                         detail::max_abs(rep.substituted[s].x - sub.x[s]), detail::max_abs(rep.substituted[s].e - sub.e[s])});
    }
  }
  r.checks.push_back(make_check(detail::cname(13, "coefficient_residual"), coef, "<=", 1e-12));
  r.checks.push_back(make_check(detail::cname(13, "operator_residual"), op, "<=", 1e-12));
  r.checks.push_back(make_check(detail::cname(13, "index_sum_oracle"), oracle, "<=", 1e-12));
  return r;
}

using CriterionFn = std::function<CriterionResult(std::uint64_t)>;

inline std::vector<CriterionFn> criteria() {
  return {criterion_01, criterion_02, criterion_03, criterion_04, criterion_05, criterion_06, criterion_07,
          criterion_08, criterion_09, criterion_10, criterion_11, criterion_12, criterion_13};
}

// Criteria 1-13 in order. Criterion 14 (determinism and total time) needs two
// runs and is assembled by the caller.
inline std::vector<CriterionResult> run_numeric(std::uint64_t seed = kDefaultSeed) {
  std::vector<CriterionResult> out;
  for (const auto& fn : criteria()) out.push_back(fn(seed));
  return out;
}

inline json results_to_json(const std::vector<CriterionResult>& results) {
  json arr = json::array();
  for (const auto& c : results) {
    json j;
    j["id"] = c.id;
    j["title"] = c.title;
    j["pass"] = c.pass();
    json checks = json::array();
    for (const auto& ch : c.checks) checks.push_back(check_to_json(ch));
    j["checks"] = checks;
    arr.push_back(j);
  }
  return arr;
}

inline std::string summary_line(const CriterionResult& c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "criterion %2d: ", c.id);
  return std::string(buf) + (c.pass() ? "PASS" : "FAIL") + "  " + c.title;
}

}  // namespace dfslab::acceptance
