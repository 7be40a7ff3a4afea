// dynamics.hpp — unitary evolution from a cached eigendecomposition and the
// coherence experiment comparing full and symmetrized Hamiltonians

#pragma once

#include <algorithm>
#include <vector>

#include "dfslab/fock.hpp"
#include "dfslab/opcore.hpp"
#include "dfslab/states.hpp"
#include "dfslab/symmetry.hpp"

namespace dfslab {

// e^{-iht} for one Hermitian h and many t.
class Propagator {
 public:
  explicit Propagator(const Matrix& h) : eig_(eig_hermitian(h)) {}

  Matrix unitary(double t) const {
    const Matrix& v = eig_.vectors.columns();
    Vector phases(eig_.values.size());
    for (Index k = 0; k < phases.size(); ++k) phases(k) = std::exp(-kI * eig_.values(k) * t);
    return v * phases.asDiagonal() * v.adjoint();
  }

  Matrix evolve(const Matrix& rho, double t) const {
    const Matrix u = unitary(t);
    const Matrix out = u * rho * u.adjoint();
    return 0.5 * (out + out.adjoint());
  }

  Index dim() const { return eig_.values.size(); }

 private:
  HermitianEigen eig_;
};

inline DensityMatrix evolve(const Matrix& h, const DensityMatrix& rho0, double t) {
  require_same_dim(h, rho0.matrix(), "evolve");
  return DensityMatrix(Propagator(h).evolve(rho0.matrix(), t), rho0.dims());
}

struct Trajectory {
  std::vector<double> times;
  std::vector<double> fidelities;
  std::vector<double> leakages;

  double max_leakage() const { return leakages.empty() ? 0.0 : *std::max_element(leakages.begin(), leakages.end()); }
  double min_fidelity() const {
    return fidelities.empty() ? 1.0 : *std::min_element(fidelities.begin(), fidelities.end());
  }
};

struct CoherenceResult {
  Trajectory full;
  Trajectory symmetrized;
  Matrix h_symmetrized;
};

// Evolves rho0 (on system ⊗ environment, supported in code ⊗ vacuum) under H
// and under its parity average. Fidelity compares the reduced system state
// with the ideal system-only evolution e^{-iH_S t} rho_S e^{iH_S t}; leakage is
// the weight outside code ⊗ vacuum.
inline CoherenceResult coherence_experiment(const DecoherenceModel& model, const SubspaceBasis& code,
                                            const DensityMatrix& rho0, const std::vector<double>& times) {
  if (code.ambient_dim() != model.system_dim) throw ShapeError("coherence_experiment: code lives on a different space");
  if (rho0.dim() != model.space.dim()) throw ShapeError("coherence_experiment: state dimension mismatch");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw UsageError("coherence_experiment: times must be strictly ascending");

  const std::vector<Index> dims{model.system_dim, model.env_dim};
  Matrix vac = Matrix::Zero(model.env_dim, model.env_dim);
  vac(0, 0) = 1.0;
  const Matrix p_code = tensor(code.projector(), vac);
  const Matrix& r0 = rho0.matrix();
  if ((p_code * r0 * p_code - r0).cwiseAbs().maxCoeff() > kStateTolerance) {
    throw UsageError("coherence_experiment: initial state is not supported in code ⊗ environment vacuum");
  }
  const DensityMatrix start(r0, dims);
  const Matrix rho_sys0 = partial_trace(start, {0}).matrix();

  CoherenceResult out;
  out.h_symmetrized = symmetrize_by_involutions(parity_unitaries(model), model.H);
  const Propagator full(model.H), sym(out.h_symmetrized), ideal(model.H_S);

  for (const double t : times) {
    const DensityMatrix reference(ideal.evolve(rho_sys0, t));
    for (auto [prop, traj] : {std::pair{&full, &out.full}, std::pair{&sym, &out.symmetrized}}) {
      const Matrix rho_t = prop->evolve(r0, t);
      const DensityMatrix state(rho_t, dims);
      traj->times.push_back(t);
      traj->fidelities.push_back(fidelity(partial_trace(state, {0}), reference));
      const double kept = (p_code * rho_t * p_code).trace().real();
      traj->leakages.push_back(std::clamp(1.0 - kept, 0.0, 1.0));
    }
  }
  return out;
}

}  // namespace dfslab
